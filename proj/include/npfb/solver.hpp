#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "npfb/field.hpp"
#include "npfb/grid.hpp"
#include "npfb/operator.hpp"
#include "npfb/perturbation.hpp"

namespace npfb {

class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One instance of the regularized problem on a fixed grid.
struct Problem {
  SpaceTimeGrid grid;
  OperatorParams<double> op;
  ZetaFamily zeta;
  ForcingSpec forcing;
  BoundaryDataSpec boundary;
  double cfl_safety = 0.9;
};

struct SolveReport {
  long steps = 0;
  int substeps_per_level = 1;
  double dt = 0.0;
  double cfl_ratio = 0.0;            ///< dt / (h^2 / (2 n Lambda))
  std::vector<double> max_update;    ///< max |u_new - u| per step, after clamping
  double wall_seconds = 0.0;
  double final_sup = 0.0;            ///< sup of the last slice
  double min_unclamped = 0.0;        ///< smallest raw interior value seen
  double upsilon_observed = 0.0;     ///< sup over the whole run
  double phi_sup = 0.0;              ///< sup of phi over the parabolic boundary
  double c_abp = 0.0;                ///< max(0, upsilon_observed - phi_sup)
};

struct SolveResult {
  Field field;
  SolveReport report;
};

/// sigma h^2 / (2 n Lambda).
double cfl_timestep(const SpaceTimeGrid& grid, const OperatorParams<double>& params,
                    double safety = 0.9);

/// Largest step the explicit scheme accepts: the CFL step, eps/4, and
/// eps^2 / (4 sup|zeta'|) for the reaction term.
double stable_timestep(const Problem& problem);

/// stable_timestep shrunk so that an integer number of steps spans grid.dt().
double solver_timestep(const Problem& problem);

/// Explicit Euler update for the regularized problem with precomputed
/// node lists. The forcing is tabulated once when it does not depend on t.
class ExplicitStepper {
 public:
  explicit ExplicitStepper(const Problem& problem);

  /// Raw update from time t to t + dt. Interior nodes get
  /// u + dt (L_delta u - zeta_eps(u) - f(., t)); boundary nodes get phi(., t + dt).
  /// No clamping. Throws InstabilityError on the first non-finite value.
  void advance(const Eigen::ArrayXd& u, Eigen::ArrayXd& out, double t, double dt) const;

  const std::vector<std::size_t>& interior() const { return interior_; }
  const std::vector<std::size_t>& boundary() const { return boundary_; }

 private:
  template <int N>
  void interior_update(const double* u, double* out, double t, double dt) const;

  const Problem* problem_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
  std::vector<Point> interior_pos_;
  std::vector<Point> boundary_pos_;
  Eigen::ArrayXd static_forcing_;  ///< per interior node; empty if f depends on t
};

/// Single raw step; dt must not exceed cfl_timestep.
Eigen::ArrayXd step_explicit(const Problem& problem, const Eigen::ArrayXd& state, double t,
                             double dt);

/// Full march from u = phi(., 0) to T with clamping u <- max(u, 0) after
/// every step. Hypotheses are validated first.
SolveResult solve(const Problem& problem);

struct SteadyResult {
  Eigen::ArrayXd state;
  long steps = 0;
  double final_rate = 0.0;  ///< max |du/dt| at the last step
  bool converged = false;
};

/// Marches a time-independent problem until max |du/dt| <= tol. No clamping.
SteadyResult solve_steady(const Problem& problem, Eigen::ArrayXd initial, double tol,
                          long max_steps);

/// Positive and strictly decreasing, else ConfigError naming the schedule.
void check_schedule(const char* name, std::span<const double> seq);

struct ContinuationEntry {
  double eps = 0.0;
  double delta = 0.0;
  Field field;
  SolveReport report;
  int compared_with = -1;        ///< index of the run used for sup_distance
  double sup_distance = 0.0;
  double lip = 0.0;              ///< Lip(1,1/2) seminorm on K
};

struct ContinuationResult {
  std::vector<ContinuationEntry> runs;
};

/// Inner loop over delta at fixed eps, outer loop shrinking eps. Each run is
/// compared with the previous delta at the same eps, or with the last run of
/// the previous eps when it opens a new eps.
ContinuationResult continuation_run(const Problem& base, std::span<const double> delta_seq,
                                    std::span<const double> eps_seq, const SubGrid& K,
                                    std::size_t sample_budget, std::uint64_t seed);

}  // namespace npfb
