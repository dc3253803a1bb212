#include "npfb/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace npfb {

std::string to_string(BarrierKind kind) {
  switch (kind) {
    case BarrierKind::psi: return "psi";
    case BarrierKind::h_plus: return "h_plus";
    case BarrierKind::h_minus: return "h_minus";
    case BarrierKind::omega: return "omega";
  }
  return "unknown";
}

namespace {

void check_p(double p, int n) {
  if (!(p > 1.0)) throw OperatorError("p must exceed 1");
  if (n < 1 || n > kMaxDim) throw OperatorError("dimension must be in 1..3");
}

}  // namespace

Barrier psi_barrier(const Point& z, double s, double c0, double p, int n) {
  check_p(p, n);
  if (z.size() != n) throw OperatorError("psi center has wrong dimension");
  Barrier b;
  b.kind = BarrierKind::psi;
  b.n = n;
  b.p = p;
  b.center = z;
  b.t_ref = s;
  b.quad = p * c0 / (4.0 * (n + p - 2.0));
  b.time_coef = -c0 / 2.0;
  b.residual = c0;
  b.params = {{"c0", c0}, {"p", p}, {"n", n}, {"s", s}};
  return b;
}

std::pair<Barrier, Barrier> h_barriers(double u0, double L, double M0, double p, int n, double t0) {
  check_p(p, n);
  if (!(L > 1.0)) throw OperatorError("h barriers need L > 1");
  if (!(M0 >= 0.0)) throw OperatorError("h barriers need M0 >= 0");
  const double Lambda = OperatorParams<double>{p, 0.0, n}.Lambda();
  const double cp = n * p * Lambda / (n + p - 2.0);
  const double quad = 2.0 * L / Lambda * cp;
  const double rate = 4.0 * n * L + M0;
  Barrier plus;
  plus.kind = BarrierKind::h_plus;
  plus.n = n;
  plus.p = p;
  plus.center = Point::Zero(n);
  plus.t_ref = t0;
  plus.params = {{"u0", u0}, {"L", L}, {"M0", M0}, {"p", p}, {"n", n}, {"t0", t0}, {"c(p)", cp}};
  Barrier minus = plus;
  minus.kind = BarrierKind::h_minus;
  plus.offset = u0 + L;
  plus.quad = quad;
  plus.time_coef = rate;
  plus.residual = -M0;
  minus.offset = u0 - L;
  minus.quad = -quad;
  minus.time_coef = -rate;
  minus.residual = M0;
  return {plus, minus};
}

Barrier omega_barrier(double A1, double p, int n, bool mutate) {
  check_p(p, n);
  if (!(A1 > 0.0)) throw OperatorError("omega needs A1 > 0");
  Barrier b;
  b.kind = BarrierKind::omega;
  b.n = n;
  b.p = p;
  b.center = Point::Zero(n);
  b.quad = A1;
  b.time_coef = 2.0 * (n + p - 2.0) * A1 / p * (mutate ? 1.5 : 1.0);
  b.residual = 0.0;
  b.params = {{"A1", A1}, {"A2", b.time_coef}, {"p", p}, {"n", n}};
  return b;
}

Field sample(const Barrier& b, const SpaceTimeGrid& grid) {
  if (b.center.size() != grid.dim()) throw GridError("barrier and grid dimensions differ");
  return tabulate(grid, [&](const Point& x, double t) { return b(x, t); });
}

double discrete_residual(const Field& sampled, const GridIndex& idx,
                         const OperatorParams<double>& params) {
  const LocalJet<double> jet = local_jet(sampled, idx);
  return regularized_operator(jet, params) - jet.ut;
}

ResidualCheck check_residual(const Barrier& b, const SpaceTimeGrid& grid,
                             const OperatorParams<double>& params, double tol, double exclusion) {
  const Field field = sample(b, grid);
  ResidualCheck out;
  for (int k = 1; k <= grid.last_level(); ++k) {
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
      const NodeIndex node = grid.unflat(f);
      if (grid.on_spatial_boundary(node)) continue;
      if ((grid.position(node) - b.center).norm() < exclusion) continue;
      const GridIndex idx{node, k};
      const LocalJet<double> jet = local_jet(field, idx);
      const double err = std::abs(regularized_operator(jet, params) - jet.ut - b.residual);
      ++out.checked;
      if (err > out.max_error) {
        out.max_error = err;
        out.witness = idx;
      }
    }
  }
  out.passed = out.checked > 0 && out.max_error <= tol;
  return out;
}

bool on_region_boundary(const SubGrid& region, const GridIndex& idx, int n) {
  if (idx.k == region.k_lo) return true;
  for (int a = 0; a < n; ++a)
    if (idx.node[a] == region.lo[a] || idx.node[a] == region.hi[a]) return true;
  return false;
}

namespace {

template <class Visit>
void for_each_in_region(const SpaceTimeGrid& grid, const SubGrid& region, Visit&& visit) {
  const int n = grid.dim();
  for (int k = region.k_lo; k <= region.k_hi; ++k) {
    NodeIndex node = region.lo;
    while (true) {
      visit(GridIndex{node, k});
      int a = n - 1;
      while (a >= 0 && node[a] == region.hi[a]) {
        node[a] = region.lo[a];
        --a;
      }
      if (a < 0) break;
      ++node[a];
    }
  }
}

}  // namespace

ComparisonReport comparison_check(const Field& sub, const Field& super, const SubGrid& region) {
  const SpaceTimeGrid& grid = sub.grid();
  if (!(grid == super.grid())) throw GridError("comparison fields live on different grids");
  const int n = grid.dim();
  if (region.k_lo < 0 || region.k_hi > grid.last_level() || region.k_lo >= region.k_hi)
    throw GridError("comparison region has an invalid time range");
  for (int a = 0; a < n; ++a)
    if (region.lo[a] < 0 || region.hi[a] > grid.cells(a) || region.hi[a] - region.lo[a] < 2)
      throw GridError("comparison region leaves the grid or has no interior");

  double scale = 1.0;
  for_each_in_region(grid, region, [&](const GridIndex& idx) {
    scale = std::max({scale, std::abs(sub(idx)), std::abs(super(idx))});
  });
  ComparisonReport rep;
  rep.tol = 10.0 * grid.h() * grid.h() * scale;
  const double boundary_tol = 1e-12 * scale;

  rep.boundary_margin = std::numeric_limits<double>::infinity();
  rep.worst_margin = std::numeric_limits<double>::infinity();
  GridIndex boundary_witness;
  for_each_in_region(grid, region, [&](const GridIndex& idx) {
    const double margin = super(idx) - sub(idx);
    if (on_region_boundary(region, idx, n)) {
      if (margin < rep.boundary_margin) {
        rep.boundary_margin = margin;
        boundary_witness = idx;
      }
      return;
    }
    ++rep.checked;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.witness = idx;
    }
    if (margin < -rep.tol) ++rep.violations;
  });
  if (rep.boundary_margin < -boundary_tol) {
    rep.precondition_ok = false;
    rep.passed = false;
    rep.witness = boundary_witness;
    rep.detail = "precondition violated: sub exceeds super on the parabolic boundary";
    // No interior claim without the boundary ordering.
    rep.violations = 0;
    rep.checked = 0;
    rep.worst_margin = 0.0;
    return rep;
  }
  rep.passed = rep.violations == 0;
  return rep;
}

std::vector<ComparisonTrial> random_comparison_trials(const Field& u, double rhs_sup, int count,
                                                      std::uint64_t seed) {
  const SpaceTimeGrid& grid = u.grid();
  const int n = grid.dim();
  const double p = u.metadata().p;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  std::vector<ComparisonTrial> out;
  for (int i = 0; i < count; ++i) {
    SubGrid region;
    for (int a = 0; a < n; ++a) {
      const int width = pick(4, std::max(4, grid.cells(a) / 2));
      region.lo[a] = pick(0, grid.cells(a) - width);
      region.hi[a] = region.lo[a] + width;
    }
    const int span = pick(2, std::max(2, grid.last_level() / 2));
    region.k_lo = pick(0, grid.last_level() - span);
    region.k_hi = region.k_lo + span;

    Point mid(n);
    for (int a = 0; a < n; ++a)
      mid[a] = grid.origin()[a] + grid.h() * 0.5 * (region.lo[a] + region.hi[a]);
    NodeIndex mid_node = grid.nearest_node(mid);
    const double t0 = grid.time(region.k_lo);
    const double u0 = u(GridIndex{mid_node, region.k_lo});
    const bool upper = i % 2 == 0;
    const double L = 1.0 + 4.0 * unit(rng) + 1e-3;
    const double M0 = upper ? 2.0 * unit(rng) : rhs_sup * (1.0 + unit(rng));
    auto [hp, hm] = h_barriers(u0, L, M0, p, n, t0);
    Barrier b = upper ? hp : hm;
    b.center = mid;

    Field bf = sample(b, grid);
    // Shift so the boundary ordering holds exactly.
    double shift = upper ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
    for_each_in_region(grid, region, [&](const GridIndex& idx) {
      if (!on_region_boundary(region, idx, n)) return;
      const double gap = u(idx) - bf(idx);
      shift = upper ? std::max(shift, gap) : std::min(shift, gap);
    });
    b.offset += shift;
    bf.values() += shift;

    ComparisonTrial trial{b.kind, region, b, {}};
    trial.report = upper ? comparison_check(u, bf, region) : comparison_check(bf, u, region);
    out.push_back(std::move(trial));
  }
  return out;
}

}  // namespace npfb
