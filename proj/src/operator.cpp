#include "npfb/operator.hpp"

namespace npfb {

LocalJet<double> slice_jet(const double* u, const SpaceTimeGrid& grid, const NodeIndex& node) {
  const int n = grid.dim();
  for (int a = 0; a < n; ++a)
    if (node[a] < 1 || node[a] > grid.cells(a) - 1)
      throw OperatorError("stencil touches outside the grid");
  const std::size_t c = grid.flat(node);
  const double h = grid.h();
  const double inv2h = 0.5 / h;
  const double invh2 = 1.0 / (h * h);
  LocalJet<double> jet;
  jet.grad.resize(n);
  jet.hess.resize(n, n);
  for (int a = 0; a < n; ++a) {
    const std::size_t sa = grid.stride(a);
    jet.grad[a] = (u[c + sa] - u[c - sa]) * inv2h;
    jet.hess(a, a) = (u[c + sa] - 2.0 * u[c] + u[c - sa]) * invh2;
    for (int b = a + 1; b < n; ++b) {
      const std::size_t sb = grid.stride(b);
      const double mixed =
          (u[c + sa + sb] - u[c + sa - sb] - u[c - sa + sb] + u[c - sa - sb]) * (0.25 * invh2);
      jet.hess(a, b) = mixed;
      jet.hess(b, a) = mixed;
    }
  }
  return jet;
}

LocalJet<double> local_jet(const Field& field, const GridIndex& idx) {
  const SpaceTimeGrid& grid = field.grid();
  if (!grid.contains(idx)) throw GridError("grid index out of range");
  LocalJet<double> jet = slice_jet(field.slice(idx.k).data(), grid, idx.node);
  if (idx.k > 0) {
    const std::size_t f = grid.flat(idx.node);
    jet.ut = (field.slice(idx.k)[static_cast<Eigen::Index>(f)] -
              field.slice(idx.k - 1)[static_cast<Eigen::Index>(f)]) /
             grid.dt();
  }
  return jet;
}

double apply_operator(const Field& field, const GridIndex& idx, const OperatorParams<double>& params) {
  const SpaceTimeGrid& grid = field.grid();
  if (!grid.contains(idx)) throw GridError("grid index out of range");
  const LocalJet<double> jet = slice_jet(field.slice(idx.k).data(), grid, idx.node);
  return regularized_operator(jet, params);
}

}  // namespace npfb
