#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "npfb/field.hpp"
#include "npfb/grid.hpp"
#include "npfb/operator.hpp"

namespace npfb {

enum class BarrierKind { psi, h_plus, h_minus, omega };

std::string to_string(BarrierKind kind);

/// b(x,t) = offset + quad |x - center|^2 + time_coef (t - t_ref).
///
/// `residual` is the analytic value of L b - b_t, the sign convention of
/// L u - u_t = zeta_eps(u) + f.
struct Barrier {
  BarrierKind kind = BarrierKind::psi;
  int n = 2;
  double p = 2.0;
  Point center;
  double t_ref = 0.0;
  double offset = 0.0;
  double quad = 0.0;
  double time_coef = 0.0;
  double residual = 0.0;
  std::vector<std::pair<std::string, double>> params;  ///< echoed into reports

  double operator()(const Point& x, double t) const {
    return offset + quad * (x - center).squaredNorm() + time_coef * (t - t_ref);
  }
};

/// (p c0 / (4(n+p-2))) |x - z|^2 - (c0/2)(t - s); residual c0.
Barrier psi_barrier(const Point& z, double s, double c0, double p, int n);

/// h+ and h- around x = 0 with c(p) = n p Lambda / (n+p-2):
/// u0 +- L +- (2L/Lambda) c(p) |x|^2 +- (4nL + M0)(t - t0).
/// Residuals are -M0 for h+ and +M0 for h-.
std::pair<Barrier, Barrier> h_barriers(double u0, double L, double M0, double p, int n, double t0);

/// A1 |x|^2 + A2 t with A2 = 2(n+p-2) A1 / p; residual 0.
/// `mutate` scales A2 by 1.5 while keeping the claimed residual, as a planted fault.
Barrier omega_barrier(double A1, double p, int n, bool mutate = false);

Field sample(const Barrier& b, const SpaceTimeGrid& grid);

/// apply_operator minus the backward time difference at an interior node.
double discrete_residual(const Field& sampled, const GridIndex& idx,
                         const OperatorParams<double>& params);

struct ResidualCheck {
  double max_error = 0.0;   ///< max |discrete - analytic| over checked nodes
  GridIndex witness;
  std::size_t checked = 0;
  bool passed = true;
};

/// Compares discrete residuals with b.residual on every interior node with
/// k >= 1 and |x - center| >= exclusion.
ResidualCheck check_residual(const Barrier& b, const SpaceTimeGrid& grid,
                             const OperatorParams<double>& params, double tol, double exclusion);

struct ComparisonReport {
  bool precondition_ok = true;
  bool passed = true;
  double tol = 0.0;
  double boundary_margin = 0.0;  ///< min(super - sub) on the parabolic boundary of the region
  double worst_margin = 0.0;     ///< min(super - sub) inside the region
  GridIndex witness;
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::string detail;
};

/// Parabolic boundary of a box region: its first level plus its spatial faces.
bool on_region_boundary(const SubGrid& region, const GridIndex& idx, int n);

/// Verifies sub <= super on the region's parabolic boundary, then checks
/// sub <= super + tol inside with tol = 10 h^2 scale.
ComparisonReport comparison_check(const Field& sub, const Field& super, const SubGrid& region);

struct ComparisonTrial {
  BarrierKind kind;
  SubGrid region;
  Barrier barrier;  ///< after the shift that orders the parabolic boundary
  ComparisonReport report;
};

/// Random boxes inside the grid; each trial pairs u with h+ (as supersolution,
/// lifted to dominate on the box boundary) or h- (as subsolution with
/// M0 >= sup(zeta+f), lowered to sit below u on the box boundary).
std::vector<ComparisonTrial> random_comparison_trials(const Field& u, double rhs_sup, int count,
                                                      std::uint64_t seed);

}  // namespace npfb
