// Acceptance runner: `npfb_acceptance [N]` runs criterion N (1..10), or all of
// them, printing one PASS/FAIL line each. Exit status is 1 if any FAILs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "../oracles.hpp"
#include "npfb/barriers.hpp"
#include "npfb/config.hpp"
#include "npfb/fb_analysis.hpp"
#include "npfb/operator.hpp"
#include "npfb/solver.hpp"

using namespace npfb;

namespace {

// Tolerances and thresholds.
constexpr double kBarrierDelta = 1e-10;
constexpr double kBarrierTol = 1e-6 + 10.0 * kBarrierDelta;
constexpr double kMmsDelta = 1e-8;
constexpr double kMmsOrder = 1.5;
constexpr double kMmsSteadyTol = 1e-11;
constexpr double kOracleTol = 1e-10;
constexpr double kEllipticSlack = 1e-12;
constexpr double kUpsilonSpread = 0.10;
constexpr double kNondegSlack = 0.5;
constexpr double kSlopeLo = 1.7, kSlopeHi = 2.3;
constexpr double kDrift = 0.25;
constexpr double kPorosityMin = 0.05;
constexpr double kLipFactor = 2.0;
constexpr double kMonotoneTol = 1e-8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

double drift(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// The default instance at a given resolution. Every run of the continuation
// starts from phi(., 0), so the last run equals a direct solve at the final
// (eps, delta).
ProblemConfig default_config(int cells, double p = 2.0) {
  ProblemConfig cfg;
  cfg.h = 1.0 / cells;
  cfg.cells = {cells, cells, cells};
  cfg.p = p;
  cfg.validate();
  return cfg;
}

SolveResult solve_default(int cells, double p, double eps) {
  const ProblemConfig cfg = default_config(cells, p);
  return solve(cfg.problem(eps, cfg.delta.back()));
}

int analysis_level(const Field& u) { return ProblemConfig{}.analysis_level(u.grid()); }

double theta(const Field& u) { return fb_threshold(u.grid().h(), ProblemConfig{}.kappa); }

std::vector<double> radii(const Field& u) { return dyadic_radii(u.grid().h(), 0.5); }

SubGrid compact_k(const Field& u) {
  return SubGrid::interior_box(u.grid(), ProblemConfig{}.k_margin, 0, u.grid().last_level() - 1);
}

SpaceTimeGrid barrier_grid(int n) {
  const int cells = std::array<int, 3>{64, 24, 10}[static_cast<std::size_t>(n - 1)];
  std::array<int, kMaxDim> c{cells, cells, cells};
  return SpaceTimeGrid(n, 2.0 / cells, 1e-3, c, Point::Constant(n, -1.0), 4e-3);
}

Outcome barrier_residuals() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> P(1.1, 10.0), U(0.0, 1.0);
  int failures = 0;
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const int n = 1 + draw % 3;
    const double p = P(rng);
    const SpaceTimeGrid g = barrier_grid(n);
    const OperatorParams<double> prm{p, kBarrierDelta, n};
    Point z(n);
    for (int a = 0; a < n; ++a) z[a] = 0.6 * (U(rng) - 0.5);
    const double c0 = 0.5 + 1.5 * U(rng);
    const auto [hp, hm] = h_barriers(U(rng), 1.0 + 4.0 * U(rng), 2.0 * U(rng), p, n, 0.0);
    for (const Barrier& b : {psi_barrier(z, g.final_time(), c0, p, n), hp, hm, omega_barrier(0.1 + U(rng), p, n)}) {
      const ResidualCheck r = check_residual(b, g, prm, kBarrierTol, 2.0 * g.h());
      failures += !r.passed;
      worst = std::max(worst, r.max_error);
    }
  }
  return {failures == 0, "400 residual checks over 100 draws, failures " + std::to_string(failures) +
                             ", max |discrete - analytic| " + fmt(worst) + " (tol " + fmt(kBarrierTol) + ")"};
}

// Steady manufactured solution u* = (p c0 / (2(n+p-2))) |x|^2 with f = c0 on
// [0.5, 1.5]^2, where u* >= eps keeps zeta_eps(u*) = 0 and grad u* != 0.
Outcome manufactured_solution() {
  const double p = 3.0, c0 = 1.0;
  const int n = 2;
  const double a = p * c0 / (2.0 * (n + p - 2.0));
  std::vector<double> errs;
  std::string detail = "p=3 L-inf errors:";
  for (int cells : {32, 64, 128}) {
    const double h = 1.0 / cells;
    const SpaceTimeGrid g(n, h, 1.0, {cells, cells, 0}, Point::Constant(n, 0.5), 2.0);
    std::ostringstream form;
    form.precision(17);
    form << a << "*(x1^2 + x2^2)";
    const Expression us = Expression::parse(form.str(), n);
    const Problem pr{g, OperatorParams<double>{p, kMmsDelta, n}, ZetaFamily{0.05},
                     ForcingSpec{c0, c0, Expression::constant(c0), 0.0}, BoundaryDataSpec{us, Expression::constant(1.0)}};
    auto exact = [&](std::size_t f) { return a * g.position(g.unflat(f)).squaredNorm(); };
    Eigen::ArrayXd init = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(g.node_count()));
    for (std::size_t f = 0; f < g.node_count(); ++f)
      if (g.on_spatial_boundary(g.unflat(f))) init[static_cast<Eigen::Index>(f)] = exact(f);
    const SteadyResult s = solve_steady(pr, init, kMmsSteadyTol, 50000000);
    if (!s.converged) return {false, "steady iteration did not converge at h=1/" + std::to_string(cells)};
    double err = 0.0;
    for (std::size_t f = 0; f < g.node_count(); ++f)
      err = std::max(err, std::abs(s.state[static_cast<Eigen::Index>(f)] - exact(f)));
    errs.push_back(err);
    detail += " h=1/" + std::to_string(cells) + ": " + fmt(err);
  }
  const double o1 = std::log2(errs[0] / errs[1]), o2 = std::log2(errs[1] / errs[2]);
  detail += "; observed orders " + fmt(o1) + ", " + fmt(o2) + " (need >= " + fmt(kMmsOrder) + ")";
  return {o1 >= kMmsOrder && o2 >= kMmsOrder, detail};
}

Outcome heat_oracle() {
  const int cells = 128;
  const double eps = 0.05;
  const ProblemConfig cfg = default_config(cells, 2.0);
  const Problem pr = cfg.problem(eps, cfg.delta.back());
  const SolveResult res = solve(pr);
  const double dt = solver_timestep(pr);
  const int substeps = static_cast<int>(std::lround(pr.grid.dt() / dt));
  auto phi = [](double x, double y, double t) {
    return 4.8 * (y * y) * ((1.0 - y) * (1.0 - y)) * std::max(0.0, 1.0 - 4.0 * x) * std::min(t / 0.1, 1.0);
  };
  const oracle::HeatRun run = oracle::heat2d(cells, pr.grid.h(), 0.0, dt, substeps, pr.grid.last_level(), eps,
                                             [](double, double) { return 1.0; }, phi);
  double diff = 0.0;
  for (int k = 0; k <= pr.grid.last_level(); ++k) {
    const auto s = res.field.slice(k);
    for (std::size_t f = 0; f < pr.grid.node_count(); ++f)
      diff = std::max(diff, std::abs(s[static_cast<Eigen::Index>(f)] - run.slices[static_cast<std::size_t>(k)][f]));
  }
  return {diff <= kOracleTol, "h=1/128, eps=0.05, T=0.5, " + std::to_string(substeps) +
                                  " substeps per level: sup |u - u_heat| = " + fmt(diff)};
}

Outcome ellipticity() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> P(1.01, 20.0), N(-1.0, 1.0), E(-8.0, 2.0);
  std::uniform_int_distribution<int> D(1, 3);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const int n = D(rng);
    const OperatorParams<double> prm{P(rng), i % 4 == 0 ? 0.0 : std::pow(10.0, E(rng)), n};
    JetVector<double> eta(n), xi(n);
    const double scale = std::pow(10.0, E(rng));
    for (int a = 0; a < n; ++a) {
      eta[a] = scale * N(rng);
      xi[a] = N(rng);
    }
    if (i % 5 == 0) xi = eta;  // extreme eigen-direction
    if (prm.delta == 0.0 && eta.squaredNorm() == 0.0) continue;
    const double q = xi.dot(regularized_coefficients(eta, prm) * xi);
    const double x2 = xi.squaredNorm();
    if (q < prm.lambda() * x2 * (1.0 - kEllipticSlack) || q > prm.Lambda() * x2 * (1.0 + kEllipticSlack)) ++violations;
  }
  return {violations == 0, "10000 draws, violations " + std::to_string(violations)};
}

Outcome uniform_bound() {
  const ProblemConfig cfg = default_config(128);
  const SpaceTimeGrid g = cfg.grid();
  const double phi_sup = sample_field(cfg.boundary(), g).values().abs().maxCoeff();
  bool bounded = true;
  std::vector<double> ups;
  std::string detail;
  for (double eps : cfg.eps) {
    const SolveResult r = solve(cfg.problem(eps, cfg.delta.back()));
    const double lo = r.field.values().minCoeff(), hi = r.field.values().maxCoeff();
    bounded = bounded && lo >= 0.0 && hi <= phi_sup + 1.0;
    ups.push_back(r.report.upsilon_observed);
    detail += "eps=" + fmt(eps) + ": [" + fmt(lo) + ", " + fmt(hi) + "] ";
  }
  const double spread = (*std::max_element(ups.begin(), ups.end()) - *std::min_element(ups.begin(), ups.end())) /
                        *std::max_element(ups.begin(), ups.end());
  detail += "|phi|=" + fmt(phi_sup) + ", Upsilon spread " + fmt(spread);
  return {bounded && spread < kUpsilonSpread, detail};
}

Outcome nondegeneracy() {
  bool pass = true;
  std::string detail;
  for (double p : {1.5, 2.0, 3.0}) {
    const Field u = solve_default(128, p, 0.05).field;
    const PositivitySet fb = extract_positivity(u, analysis_level(u), theta(u));
    const NondegeneracyReport r = nondegeneracy_check(u, fb, 1.0, p, 2, radii(u), kNondegSlack);
    pass = pass && !r.entries.empty() && r.pass_fraction == 1.0;
    detail += "p=" + fmt(p) + ": " + std::to_string(r.entries.size()) + " (center, r) pairs, pass fraction " +
              fmt(r.pass_fraction) + ", min ratio " + fmt(r.min_ratio) + "; ";
  }
  return {pass, detail};
}

Outcome quadratic_growth() {
  bool pass = true;
  std::vector<double> c0;
  std::string detail;
  for (int cells : {128, 256}) {
    const Field u = solve_default(cells, 2.0, 0.05).field;
    const GrowthStats st = growth_upper_check(u, extract_positivity(u, analysis_level(u), theta(u)), radii(u));
    const GrowthConstantReport gc = u_vs_d2_check(u, theta(u), compact_k(u));
    pass = pass && !st.empty && st.slope >= kSlopeLo && st.slope <= kSlopeHi;
    c0.push_back(gc.C0_hat);
    detail += "h=1/" + std::to_string(cells) + ": slope " + fmt(st.slope) + " over " +
              std::to_string(st.centers.size()) + " centers, C0_hat " + fmt(gc.C0_hat) + "; ";
  }
  const double d = drift(c0[0], c0[1]);
  detail += "C0_hat drift " + fmt(d);
  return {pass && d < kDrift, detail};
}

Outcome porosity() {
  bool pass = true;
  std::vector<double> proxy;
  std::string detail;
  for (int cells : {64, 128, 256}) {
    const Field u = solve_default(cells, 2.0, 0.05).field;
    const PorosityReport r =
        porosity_estimate(extract_positivity(u, analysis_level(u), theta(u)), u.grid(), radii(u));
    const bool resolved = r.evaluated > 0;
    if (resolved) pass = pass && r.delta_hat > kPorosityMin;
    proxy.push_back(r.measure_proxy);
    detail += "h=1/" + std::to_string(cells) + (resolved ? ": delta_hat " + fmt(r.delta_hat) : ": unresolved") +
              ", proxy " + fmt(r.measure_proxy) + "; ";
  }
  pass = pass && proxy[2] <= proxy[1];
  return {pass, detail};
}

Outcome regularity() {
  std::vector<double> lips;
  std::string detail = "Lip on K:";
  std::optional<Field> smallest;
  for (double eps : ProblemConfig{}.eps) {
    Field u = solve_default(128, 2.0, eps).field;
    const LipEstimate e = lip_seminorm(u, compact_k(u), ProblemConfig{}.sample_budget, 0);
    lips.push_back(e.value);
    detail += " eps=" + fmt(eps) + ": " + fmt(e.value);
    smallest = std::move(u);
  }
  const double lip_ratio = *std::max_element(lips.begin(), lips.end()) / *std::min_element(lips.begin(), lips.end());
  const TimeHolderReport coarse = time_holder_check(*smallest, compact_k(*smallest), kMonotoneTol);
  const Field fine = solve_default(256, 2.0, 0.05).field;
  const TimeHolderReport refined = time_holder_check(fine, compact_k(fine), kMonotoneTol);
  const double d = drift(coarse.C_hat, refined.C_hat);
  detail += "; ratio " + fmt(lip_ratio) + "; time-Holder C_hat " + fmt(coarse.C_hat) + " -> " + fmt(refined.C_hat) +
            " (drift " + fmt(d) + "); min increment " + fmt(coarse.min_increment);
  return {lip_ratio < kLipFactor && d < kDrift && coarse.min_increment >= -kMonotoneTol, detail};
}

Outcome comparison() {
  const double eps = 0.05;
  const Field u = solve_default(128, 2.0, eps).field;
  const auto trials = random_comparison_trials(u, 1.0 / eps + ProblemConfig{}.c1, 50, 0);
  std::size_t bad_boundary = 0, violations = 0, checked = 0;
  for (const auto& t : trials) {
    bad_boundary += !t.report.precondition_ok;
    violations += t.report.violations;
    checked += t.report.checked;
  }
  return {trials.size() == 50 && bad_boundary == 0 && violations == 0,
          std::to_string(trials.size()) + " trials, " + std::to_string(checked) + " interior nodes, boundary ordering failures " +
              std::to_string(bad_boundary) + ", interior violations " + std::to_string(violations)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list = {
      {"barrier residuals", barrier_residuals},
      {"manufactured-solution order", manufactured_solution},
      {"p=2 heat oracle", heat_oracle},
      {"coefficient ellipticity", ellipticity},
      {"uniform bound", uniform_bound},
      {"non-degeneracy", nondegeneracy},
      {"quadratic growth", quadratic_growth},
      {"porosity", porosity},
      {"regularity uniformity", regularity},
      {"comparison principle", comparison},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int first = 1, last = static_cast<int>(criteria().size());
  if (argc > 1) {
    first = last = std::atoi(argv[1]);
    if (first < 1 || first > static_cast<int>(criteria().size())) {
      std::fprintf(stderr, "usage: npfb_acceptance [1..%zu]\n", criteria().size());
      return 2;
    }
  }
  bool all = true;
  for (int i = first; i <= last; ++i) {
    const auto& [name, fn] = criteria()[static_cast<std::size_t>(i - 1)];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d (%s): %s  %s [%.1fs]\n", i, name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
