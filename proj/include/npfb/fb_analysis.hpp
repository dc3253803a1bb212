#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "npfb/field.hpp"
#include "npfb/grid.hpp"

namespace npfb {

/// Positivity threshold kappa h^2.
inline double fb_threshold(double h, double kappa) { return kappa * h * h; }

/// {4h, 8h, ...} up to and including cap.
std::vector<double> dyadic_radii(double h, double cap);

/// mu0 = min(p c0 / (4(n+p-2)), c0/2).
double mu0(double c0, double p, int n);

/// The set {u > theta} on one slice and its free-boundary nodes.
struct PositivitySet {
  int k = 0;
  double threshold = 0.0;
  std::vector<char> mask;         ///< per spatial node
  std::vector<std::size_t> fb;    ///< flat spatial nodes, ascending

  bool empty() const { return fb.empty(); }
};

/// FB nodes are masked nodes with at least one unmasked face neighbour in the grid.
PositivitySet extract_positivity(const Field& field, int k, double theta);

/// sup of u over the lower cylinder Q-_r(z,s). Throws GridError when the
/// ball leaves the box or s - r^2 < 0.
double sup_cylinder(const Field& field, const Point& z, double s, double r);

struct DoublingReport {
  double M = 0.0;
  double base_radius = 0.0;           ///< R; radius 2^-j means R 2^-j on the grid
  std::vector<double> S;              ///< normalized S(2^-j), j = 0..j_max+1
  std::vector<int> H;                 ///< j with S(2^-j) <= M S(2^-j-1)
  double C1 = 0.0;                    ///< smallest C1 with S(2^-j-1) <= C1 2^-2j
  int chain_length = -1;              ///< largest J with {0..J} in H
  bool chain_holds = true;            ///< S(2^-j) <= 4 C1 2^-2j for j <= J
  bool truncated = false;
  std::string warning;
};

/// Dyadic doubling set at (z,s) for the field normalized to the class Theta:
/// v(y,tau) = u(z + R y, s + R^2 tau) / S_u(R).
DoublingReport doubling_set(const Field& field, const Point& z, double s, double mu0_value,
                            double base_radius, int j_max);

struct NondegeneracyEntry {
  GridIndex center;
  double r = 0.0;
  double sup_boundary = 0.0;
  double u_center = 0.0;
  double margin = 0.0;    ///< sup_boundary - u_center - mu0 r^2
  bool passed = false;    ///< sup_boundary - u_center >= slack mu0 r^2
};

struct NondegeneracyReport {
  double mu0 = 0.0;
  double slack = 0.5;
  std::vector<NondegeneracyEntry> entries;
  double min_margin = 0.0;
  double min_ratio = 0.0;     ///< min (sup_boundary - u_center) / (mu0 r^2)
  double pass_fraction = 1.0;
  std::size_t skipped_centers = 0;  ///< FB nodes with no admissible radius
};

/// Radii per center are those of `radii` not exceeding half its parabolic distance.
NondegeneracyReport nondegeneracy_check(const Field& field, const PositivitySet& fbset, double c0,
                                        double p, int n, std::span<const double> radii,
                                        double slack = 0.5);

struct GrowthCenter {
  NodeIndex node{};
  std::vector<double> r;
  std::vector<double> sup;
  double slope = 0.0;
};

struct GrowthStats {
  int k = 0;
  std::vector<GrowthCenter> centers;
  double slope = 0.0;      ///< pooled slope with one intercept per center
  double min_slope = 0.0;  ///< per-center extremes
  double max_slope = 0.0;
  double d0_hat = 0.0;     ///< min sup/r^2
  double D0_hat = 0.0;     ///< max sup/r^2
  bool empty = true;
};

/// sup of u(., t_k) over B_r(x) for FB nodes x and radii r in [4h, dist/2].
GrowthStats growth_upper_check(const Field& field, const PositivitySet& fbset,
                               std::span<const double> radii);

/// Least-squares slope of log y on log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// sup { r : Q_r(x,t) in {u > theta} } by bisection to h/2; 0 off the mask.
double caloric_distance(const Field& field, double theta, const GridIndex& idx);

/// Same quantity for every node at once, from per-slice distance transforms
/// of the complement: d = min_k' max(D_k'(x), sqrt|t_k' - t|).
class CaloricDistanceMap {
 public:
  CaloricDistanceMap(const Field& field, double theta);
  double operator()(const GridIndex& idx) const;

 private:
  const SpaceTimeGrid* grid_;
  std::vector<double> dist_;  ///< distance to the nearest unmasked node, per space-time node
};

/// Euclidean distance from every node to the nearest node with seed != 0;
/// infinity when there is none. Separable squared-distance transform.
std::vector<double> distance_transform(const SpaceTimeGrid& grid, const std::vector<char>& seeds);

struct GrowthConstantReport {
  double C0_hat = 0.0;
  GridIndex witness;
  std::size_t evaluated = 0;
};

/// C0_hat = max over K with u > theta of u / (d^2 + h^2).
GrowthConstantReport u_vs_d2_check(const Field& field, double theta, const SubGrid& K);

struct PorosityReport {
  int k = 0;
  double t0 = 0.0;
  std::vector<double> radii;
  std::vector<NodeIndex> points;
  std::vector<std::vector<double>> ratio;  ///< per point, per admissible radius (NaN if skipped)
  double delta_hat = 0.0;
  NodeIndex witness{};
  double witness_radius = 0.0;
  std::size_t fb_count = 0;
  double measure_proxy = 0.0;  ///< fb_count * h^n
  std::size_t evaluated = 0;
};

/// Largest empty-ball ratio max_y min(dist(y,FB), r - |y-x|)/r over grid y in
/// B_r(x), minimized over FB points x and radii r <= dist(x, lateral boundary).
PorosityReport porosity_estimate(const PositivitySet& fbset, const SpaceTimeGrid& grid,
                                 std::span<const double> radii);

struct LipEstimate {
  double value = 0.0;
  GridIndex a, b;
  std::size_t pairs = 0;
  bool exact = true;
};

/// sup |u(x,t) - u(y,s)| / (|x-y| + |t-s|^(1/2)) over K.
LipEstimate lip_seminorm(const Field& field, const SubGrid& K, std::size_t sample_budget,
                         std::uint64_t seed);

struct TimeHolderReport {
  double C_hat = 0.0;
  GridIndex a, b;
  double min_increment = 0.0;  ///< min u(x,t_{k+1}) - u(x,t_k) over K
  GridIndex min_witness;
  bool monotone = true;
};

TimeHolderReport time_holder_check(const Field& field, const SubGrid& K, double monotone_tol = 1e-8);

struct GradientBands {
  std::vector<double> edges;    ///< band b is [edges[b], edges[b+1])
  std::vector<double> maxima;   ///< max central-difference |grad u| in the band
  std::vector<GridIndex> witnesses;
};

/// Interior nodes with 1 <= k < last level, binned by parabolic distance.
GradientBands gradient_bands(const Field& field, std::span<const double> edges);

/// L_bar = max_b maxima_b / (1 + 1/edges_b^2).
double fit_gradient_envelope(const GradientBands& bands);

struct GradientEnvelopeCheck {
  bool passed = true;
  double worst_ratio = 0.0;  ///< max_b maxima_b / (L_bar (1 + 1/edges_b^2))
  int worst_band = -1;
};

GradientEnvelopeCheck gradient_bound_check(const GradientBands& bands, double L_bar,
                                           double factor = 2.0);

}  // namespace npfb
