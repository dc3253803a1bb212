#include "npfb/perturbation.hpp"

#include <algorithm>
#include <limits>

namespace npfb {

std::string to_string(ZetaProfile profile) {
  return profile == ZetaProfile::smooth_bump ? "smooth-bump" : "triangular-mollified";
}

ZetaProfile parse_zeta_profile(const std::string& name) {
  if (name == "smooth-bump") return ZetaProfile::smooth_bump;
  if (name == "triangular-mollified") return ZetaProfile::triangular_mollified;
  throw ConfigError("unknown zeta profile '" + name + "'");
}

double zeta_derivative_bound(ZetaProfile profile) {
  if (profile == ZetaProfile::triangular_mollified) return 4.0;  // 3 * (slope 1) / 0.75
  // Dense scan of |zeta'| = 4|y| zeta / (1-y^2)^2, y = 2r-1; the 2% pad covers
  // the sampling gap around the maximum.
  double best = 0.0;
  constexpr int samples = 20000;
  for (int i = 1; i < samples; ++i) {
    const double r = static_cast<double>(i) / samples;
    const double y = 2.0 * r - 1.0;
    const double q = 1.0 - y * y;
    best = std::max(best, 4.0 * std::abs(y) * zeta_base(r, profile) / (q * q));
  }
  return 1.02 * best;
}

double zeta_mass(ZetaProfile profile) {
  // Composite Simpson; the integrand is smooth and vanishes at both ends.
  constexpr int m = 4096;
  const double step = 1.0 / m;
  double sum = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * zeta_base(i * step, profile);
  }
  return sum * step / 3.0;
}

bool HypothesisReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const HypothesisCheck& HypothesisReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no hypothesis check named " + name);
}

namespace {

// Records the worst violation amount; `excess` > tol marks a failure.
struct Tracker {
  explicit Tracker(std::string name) { check.name = std::move(name); }

  HypothesisCheck check;
  double worst_excess = -std::numeric_limits<double>::infinity();

  void observe(double excess, double value, const GridIndex& idx, double tol) {
    if (excess > worst_excess) {
      worst_excess = excess;
      check.worst = value;
      check.witness = idx;
    }
    if (excess > tol) check.passed = false;
  }
};

}  // namespace

HypothesisReport validate_hypotheses(const ForcingSpec& f, const BoundaryDataSpec& phi,
                                     const SpaceTimeGrid& grid) {
  const Field fv = sample_field(f, grid);
  const Field pv = sample_field(phi, grid);
  const double scale_f = std::max(1.0, fv.max_abs());
  const double scale_p = std::max(1.0, pv.max_abs());
  const double tol_f = 1e-12 * scale_f;
  const double tol_p = 1e-12 * scale_p;

  Tracker lower("E1 lower bound f >= c0 > 0"), upper("E1 upper bound f <= c1");
  Tracker grad("E2 gradient bound |grad f| <= C"), f_mono("f non-increasing in t");
  Tracker p_nonneg("phi >= 0"), p_zero("phi(x,0)=0"), p_mono("phi non-decreasing in t");
  if (!(f.c0 > 0.0)) {
    lower.check.passed = false;
    lower.check.detail = "c0 must be positive";
  }
  if (f.c1 < f.c0) {
    upper.check.passed = false;
    upper.check.detail = "c1 below c0";
  }

  const int n = grid.dim();
  for (int k = 0; k <= grid.last_level(); ++k) {
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      const GridIndex idx{grid.unflat(node), k};
      const double fval = fv(idx);
      lower.observe(f.c0 - fval, fval, idx, tol_f);
      upper.observe(fval - f.c1, fval, idx, tol_f);
      if (k > 0) {
        const GridIndex prev{idx.node, k - 1};
        f_mono.observe(fval - fv(prev), fval - fv(prev), idx, tol_f);
      }
      // One-sided differences at the box faces, central inside.
      double g2 = 0.0;
      for (int a = 0; a < n; ++a) {
        GridIndex lo = idx, hi = idx;
        if (lo.node[a] > 0) --lo.node[a];
        if (hi.node[a] < grid.cells(a)) ++hi.node[a];
        const double d = (fv(hi) - fv(lo)) / (grid.h() * (hi.node[a] - lo.node[a]));
        g2 += d * d;
      }
      const double gnorm = std::sqrt(g2);
      grad.observe(gnorm - f.grad_bound, gnorm, idx, tol_f + 1e-9 * f.grad_bound);

      const Region region = classify_point(grid, idx);
      const double pval = pv(idx);
      if (k == 0) p_zero.observe(std::abs(pval), pval, idx, tol_p);
      if (region == Region::lateral || region == Region::initial)
        p_nonneg.observe(-pval, pval, idx, tol_p);
      if (k > 0 && grid.on_spatial_boundary(idx.node)) {
        const double prev = pv(GridIndex{idx.node, k - 1});
        p_mono.observe(prev - pval, pval - prev, idx, tol_p);
      }
    }
  }

  HypothesisReport report;
  for (Tracker* t : {&lower, &upper, &grad, &f_mono, &p_nonneg, &p_zero, &p_mono})
    report.checks.push_back(std::move(t->check));
  return report;
}

Field sample_field(const ForcingSpec& f, const SpaceTimeGrid& grid) {
  return tabulate(grid, [&](const Point& x, double t) { return f.form(x, t); });
}

Field sample_field(const BoundaryDataSpec& phi, const SpaceTimeGrid& grid) {
  return tabulate(grid, [&](const Point& x, double t) { return phi(x, t); });
}

}  // namespace npfb
