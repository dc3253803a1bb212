#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace npfb {

inline constexpr int kMaxDim = 3;

/// Spatial point with at most kMaxDim coordinates; never heap-allocates.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

using NodeIndex = std::array<int, kMaxDim>;

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A node of the space-time grid: spatial multi-index plus time level.
struct GridIndex {
  NodeIndex node{};
  int k = 0;

  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

enum class Region { interior, lateral, initial, final_slice };

std::string to_string(Region r);

/// Uniform discretization of the box Omega x (0,T].
///
/// Axis a carries cells(a) cells and cells(a)+1 nodes; time levels are
/// t_k = k*dt for k = 0..last_level(), with last_level()*dt == T.
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(int n, double h, double dt, std::array<int, kMaxDim> cells,
                Point origin, double final_time);

  /// Unit-cube grid with the same number of cells on every axis.
  static SpaceTimeGrid cube(int n, int cells, double dt, double final_time,
                            double length = 1.0);

  int dim() const { return n_; }
  double h() const { return h_; }
  double dt() const { return dt_; }
  double final_time() const { return T_; }
  int cells(int axis) const { return cells_[axis]; }
  int nodes(int axis) const { return cells_[axis] + 1; }
  const Point& origin() const { return origin_; }

  std::size_t node_count() const { return node_count_; }
  int time_levels() const { return levels_ + 1; }
  int last_level() const { return levels_; }
  std::size_t size() const { return node_count_ * static_cast<std::size_t>(levels_ + 1); }
  std::size_t stride(int axis) const { return strides_[axis]; }

  std::size_t flat(const NodeIndex& node) const;
  NodeIndex unflat(std::size_t flat_node) const;
  std::size_t flat(const GridIndex& idx) const {
    return static_cast<std::size_t>(idx.k) * node_count_ + flat(idx.node);
  }
  GridIndex unflat_spacetime(std::size_t flat_idx) const;

  bool contains(const NodeIndex& node) const;
  bool contains(const GridIndex& idx) const;
  bool on_spatial_boundary(const NodeIndex& node) const;

  Point position(const NodeIndex& node) const;
  double time(int k) const { return k * dt_; }

  /// Nearest node to a spatial point (clamped into the box).
  NodeIndex nearest_node(const Point& x) const;
  /// Distance from a node to the lateral boundary of the box.
  double distance_to_lateral(const NodeIndex& node) const;
  /// Parabolic distance to the parabolic boundary: min(dist(x, dOmega), sqrt(t)).
  double parabolic_distance(const GridIndex& idx) const;

  friend bool operator==(const SpaceTimeGrid& a, const SpaceTimeGrid& b);

 private:
  int n_;
  double h_;
  double dt_;
  std::array<int, kMaxDim> cells_{};
  Point origin_;
  double T_;
  int levels_ = 0;
  std::size_t node_count_ = 0;
  std::array<std::size_t, kMaxDim> strides_{};
};

/// Sorted, duplicate-free set of flat space-time indices.
using PointSet = std::vector<std::size_t>;

Region classify_point(const SpaceTimeGrid& grid, const GridIndex& idx);

struct ParabolicCylinder {
  enum class Kind { full, lower };

  Point center;
  double t0 = 0.0;
  double radius = 0.0;
  Kind kind = Kind::lower;
};

/// Grid points with |x - X0| < tau and t in the cylinder's time window.
PointSet cylinder_points(const SpaceTimeGrid& grid, const ParabolicCylinder& cyl);

/// Union of cylinders of radius tau around every point of K.
PointSet neighborhood(const SpaceTimeGrid& grid, std::span<const GridIndex> K,
                      double tau, ParabolicCylinder::Kind kind);

/// Axis-aligned index box of the space-time grid (a compact set K).
struct SubGrid {
  NodeIndex lo{};
  NodeIndex hi{};  ///< inclusive
  int k_lo = 0;
  int k_hi = 0;    ///< inclusive

  bool contains(const GridIndex& idx) const;
  std::size_t spatial_count(int n) const;
  /// Box of nodes at parabolic distance >= margin from the parabolic boundary,
  /// over the time levels [k_lo, k_hi].
  static SubGrid interior_box(const SpaceTimeGrid& grid, double margin, int k_lo, int k_hi);
};

/// Round-off guard used by every strict inequality on grid coordinates.
inline constexpr double kGeomTol = 1e-10;

/// |x - c|^2 < r^2 with a relative guard so nodes exactly on the sphere stay out.
inline bool inside_ball(double dist2, double radius) {
  return dist2 < radius * radius * (1.0 - kGeomTol);
}

/// Calls visit(node) for every grid node inside the open ball B_radius(center).
template <class Visit>
void for_each_ball_node(const SpaceTimeGrid& grid, const Point& center, double radius,
                        Visit&& visit) {
  const int n = grid.dim();
  NodeIndex lo{}, hi{};
  for (int a = 0; a < n; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor((center[a] - radius - grid.origin()[a]) / grid.h())));
    hi[a] = std::min(grid.cells(a),
                     static_cast<int>(std::ceil((center[a] + radius - grid.origin()[a]) / grid.h())));
    if (lo[a] > hi[a]) return;
  }
  NodeIndex node = lo;
  while (true) {
    double d2 = 0.0;
    for (int a = 0; a < n; ++a) {
      const double d = grid.origin()[a] + grid.h() * node[a] - center[a];
      d2 += d * d;
    }
    if (inside_ball(d2, radius)) visit(node);
    int a = n - 1;
    while (a >= 0 && node[a] == hi[a]) {
      node[a] = lo[a];
      --a;
    }
    if (a < 0) break;
    ++node[a];
  }
}

}  // namespace npfb
