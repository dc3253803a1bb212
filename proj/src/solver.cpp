#include "npfb/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "npfb/fb_analysis.hpp"

namespace npfb {

double cfl_timestep(const SpaceTimeGrid& grid, const OperatorParams<double>& params,
                    double safety) {
  return safety * grid.h() * grid.h() / (2.0 * grid.dim() * params.Lambda());
}

double stable_timestep(const Problem& problem) {
  const double eps = problem.zeta.eps;
  const double reaction = eps * eps / (4.0 * zeta_derivative_bound(problem.zeta.profile));
  return std::min({cfl_timestep(problem.grid, problem.op, problem.cfl_safety), eps / 4.0, reaction});
}

double solver_timestep(const Problem& problem) {
  const double level = problem.grid.dt();
  const double m = std::ceil(level / stable_timestep(problem) - 1e-12);
  return level / std::max(1.0, m);
}

ExplicitStepper::ExplicitStepper(const Problem& problem) : problem_(&problem) {
  const SpaceTimeGrid& grid = problem.grid;
  for (std::size_t f = 0; f < grid.node_count(); ++f) {
    const NodeIndex node = grid.unflat(f);
    if (grid.on_spatial_boundary(node)) {
      boundary_.push_back(f);
      boundary_pos_.push_back(grid.position(node));
    } else {
      interior_.push_back(f);
      interior_pos_.push_back(grid.position(node));
    }
  }
  if (!problem.forcing.form.depends_on_time()) {
    static_forcing_.resize(static_cast<Eigen::Index>(interior_.size()));
    for (std::size_t i = 0; i < interior_.size(); ++i)
      static_forcing_[static_cast<Eigen::Index>(i)] = problem.forcing.form(interior_pos_[i], 0.0);
  }
}

template <int N>
void ExplicitStepper::interior_update(const double* u, double* out, double t, double dt) const {
  const Problem& pr = *problem_;
  const SpaceTimeGrid& grid = pr.grid;
  const double p = pr.op.p;
  const double aniso = (p - 2.0) / p;
  const double delta = pr.op.delta;
  const double inv2h = 0.5 / grid.h();
  const double invh2 = 1.0 / (grid.h() * grid.h());
  std::array<std::size_t, N> s;
  for (int a = 0; a < N; ++a) s[a] = grid.stride(a);
  const bool tabulated = static_forcing_.size() > 0;

  Eigen::Matrix<double, N, 1> g;
  Eigen::Matrix<double, N, N> H;
  for (std::size_t i = 0; i < interior_.size(); ++i) {
    const std::size_t c = interior_[i];
    const double uc = u[c];
    for (int a = 0; a < N; ++a) {
      const double up = u[c + s[a]], dn = u[c - s[a]];
      g[a] = (up - dn) * inv2h;
      H(a, a) = (up - 2.0 * uc + dn) * invh2;
      for (int b = a + 1; b < N; ++b) {
        const double m = (u[c + s[a] + s[b]] - u[c + s[a] - s[b]] - u[c - s[a] + s[b]] +
                          u[c - s[a] - s[b]]) * (0.25 * invh2);
        H(a, b) = m;
        H(b, a) = m;
      }
    }
    double lu = H.trace() / p;
    if (aniso != 0.0) lu += aniso * g.dot(H * g) / (g.squaredNorm() + delta);
    const double f = tabulated ? static_forcing_[static_cast<Eigen::Index>(i)]
                               : pr.forcing.form(interior_pos_[i], t);
    out[c] = uc + dt * (lu - zeta_eps(uc, pr.zeta) - f);
  }
}

void ExplicitStepper::advance(const Eigen::ArrayXd& u, Eigen::ArrayXd& out, double t,
                              double dt) const {
  const SpaceTimeGrid& grid = problem_->grid;
  out.resize(u.size());
  switch (grid.dim()) {
    case 1: interior_update<1>(u.data(), out.data(), t, dt); break;
    case 2: interior_update<2>(u.data(), out.data(), t, dt); break;
    case 3: interior_update<3>(u.data(), out.data(), t, dt); break;
    default: throw OperatorError("dimension must be in 1..3");
  }
  for (std::size_t i = 0; i < boundary_.size(); ++i)
    out[static_cast<Eigen::Index>(boundary_[i])] = problem_->boundary(boundary_pos_[i], t + dt);
  if (!out.allFinite()) {
    Eigen::Index bad = 0;
    while (std::isfinite(out[bad])) ++bad;
    const NodeIndex node = grid.unflat(static_cast<std::size_t>(bad));
    std::ostringstream os;
    os << "non-finite value at node (";
    for (int a = 0; a < grid.dim(); ++a) os << (a ? "," : "") << node[a];
    os << ") stepping from t=" << t << " with dt=" << dt;
    throw InstabilityError(os.str());
  }
}

namespace {

void check_problem(const Problem& problem) {
  problem.op.validate();
  problem.zeta.validate();
  if (problem.op.n != problem.grid.dim()) throw ConfigError("operator and grid dimensions differ");
  if (!(problem.op.delta > 0.0)) throw ConfigError("delta must be positive while stepping");
}

}  // namespace

Eigen::ArrayXd step_explicit(const Problem& problem, const Eigen::ArrayXd& state, double t,
                             double dt) {
  check_problem(problem);
  if (state.size() != static_cast<Eigen::Index>(problem.grid.node_count()))
    throw ConfigError("state size does not match the grid");
  if (!(dt > 0.0) || dt > cfl_timestep(problem.grid, problem.op) * (1.0 + 1e-12))
    throw ConfigError("dt exceeds the CFL step");
  ExplicitStepper stepper(problem);
  Eigen::ArrayXd out;
  stepper.advance(state, out, t, dt);
  return out;
}

SolveResult solve(const Problem& problem) {
  check_problem(problem);
  const HypothesisReport hyp = validate_hypotheses(problem.forcing, problem.boundary, problem.grid);
  if (!hyp.all_passed()) {
    std::string failed;
    for (const auto& c : hyp.checks)
      if (!c.passed) failed += (failed.empty() ? "" : "; ") + c.name;
    throw ConfigError("hypotheses violated: " + failed);
  }

  const auto start = std::chrono::steady_clock::now();
  const SpaceTimeGrid& grid = problem.grid;
  const ExplicitStepper stepper(problem);
  SolveReport rep;
  rep.dt = solver_timestep(problem);
  rep.substeps_per_level = static_cast<int>(std::lround(grid.dt() / rep.dt));
  rep.cfl_ratio = rep.dt / cfl_timestep(grid, problem.op, 1.0);
  rep.min_unclamped = std::numeric_limits<double>::infinity();

  Field field(grid, FieldMetadata{problem.op.p, problem.zeta.eps, problem.op.delta});
  Eigen::ArrayXd u(static_cast<Eigen::Index>(grid.node_count()));
  for (std::size_t f = 0; f < grid.node_count(); ++f)
    u[static_cast<Eigen::Index>(f)] = problem.boundary(grid.position(grid.unflat(f)), 0.0);
  field.slice(0) = u;
  rep.phi_sup = u.maxCoeff();

  Eigen::ArrayXd next;
  rep.max_update.reserve(static_cast<std::size_t>(grid.last_level()) * rep.substeps_per_level);
  for (int k = 0; k < grid.last_level(); ++k) {
    for (int j = 0; j < rep.substeps_per_level; ++j) {
      const double t = grid.time(k) + j * rep.dt;
      stepper.advance(u, next, t, rep.dt);
      for (std::size_t c : stepper.interior())
        rep.min_unclamped = std::min(rep.min_unclamped, next[static_cast<Eigen::Index>(c)]);
      next = next.max(0.0);
      rep.max_update.push_back((next - u).abs().maxCoeff());
      u.swap(next);
      ++rep.steps;
    }
    field.slice(k + 1) = u;
    for (std::size_t c : stepper.boundary())
      rep.phi_sup = std::max(rep.phi_sup, u[static_cast<Eigen::Index>(c)]);
  }
  if (rep.steps == 0) rep.min_unclamped = 0.0;

  rep.final_sup = field.slice(grid.last_level()).maxCoeff();
  rep.upsilon_observed = field.values().maxCoeff();
  rep.c_abp = std::max(0.0, rep.upsilon_observed - rep.phi_sup);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return SolveResult{std::move(field), std::move(rep)};
}

SteadyResult solve_steady(const Problem& problem, Eigen::ArrayXd initial, double tol,
                          long max_steps) {
  check_problem(problem);
  if (problem.forcing.form.depends_on_time() || problem.boundary.form.depends_on_time() ||
      problem.boundary.ramp.depends_on_time())
    throw ConfigError("steady solve needs time-independent data");
  const ExplicitStepper stepper(problem);
  const double dt = stable_timestep(problem);
  SteadyResult res;
  res.state = std::move(initial);
  Eigen::ArrayXd next;
  while (res.steps < max_steps) {
    stepper.advance(res.state, next, 0.0, dt);
    res.final_rate = (next - res.state).abs().maxCoeff() / dt;
    res.state.swap(next);
    ++res.steps;
    if (res.final_rate <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

void check_schedule(const char* name, std::span<const double> seq) {
  if (seq.empty()) throw ConfigError(std::string(name) + " schedule is empty");
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!(seq[i] > 0.0)) throw ConfigError(std::string(name) + " schedule must be positive");
    if (i > 0 && !(seq[i] < seq[i - 1]))
      throw ConfigError(std::string(name) + " schedule must be strictly decreasing");
  }
}

ContinuationResult continuation_run(const Problem& base, std::span<const double> delta_seq,
                                    std::span<const double> eps_seq, const SubGrid& K,
                                    std::size_t sample_budget, std::uint64_t seed) {
  check_schedule("delta", delta_seq);
  check_schedule("eps", eps_seq);
  ContinuationResult out;
  for (double eps : eps_seq) {
    for (std::size_t d = 0; d < delta_seq.size(); ++d) {
      Problem pr = base;
      pr.zeta.eps = eps;
      pr.op.delta = delta_seq[d];
      SolveResult run = [&] {
        try {
          return solve(pr);
        } catch (const InstabilityError& e) {
          std::ostringstream os;
          os << e.what() << " (delta=" << pr.op.delta << ", eps=" << eps << ")";
          throw InstabilityError(os.str());
        }
      }();
      ContinuationEntry entry{eps, delta_seq[d], std::move(run.field), std::move(run.report)};
      if (!out.runs.empty()) {
        entry.compared_with = static_cast<int>(out.runs.size()) - 1;
        entry.sup_distance =
            (entry.field.values() - out.runs.back().field.values()).abs().maxCoeff();
      }
      entry.lip = lip_seminorm(entry.field, K, sample_budget, seed).value;
      out.runs.push_back(std::move(entry));
    }
  }
  return out;
}

}  // namespace npfb
