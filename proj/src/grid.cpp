#include "npfb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace npfb {

std::string to_string(Region r) {
  switch (r) {
    case Region::interior: return "interior";
    case Region::lateral: return "lateral";
    case Region::initial: return "initial";
    case Region::final_slice: return "final";
  }
  return "unknown";
}

SpaceTimeGrid::SpaceTimeGrid(int n, double h, double dt, std::array<int, kMaxDim> cells,
                             Point origin, double final_time)
    : n_(n), h_(h), dt_(dt), origin_(std::move(origin)), T_(final_time) {
  if (n < 1 || n > kMaxDim) throw GridError("grid dimension must be in 1..3");
  if (!(h > 0.0) || !(dt > 0.0) || !(final_time > 0.0))
    throw GridError("grid requires h > 0, dt > 0 and T > 0");
  if (origin_.size() != n) throw GridError("grid origin has wrong dimension");
  const double levels = final_time / dt;
  levels_ = static_cast<int>(std::lround(levels));
  if (std::abs(levels - levels_) > 1e-8 * std::max(1.0, levels))
    throw GridError("T must be an integer multiple of dt");
  if (levels_ < 2) throw GridError("grid needs at least 3 time levels");
  node_count_ = 1;
  for (int a = n_ - 1; a >= 0; --a) {
    if (cells[a] < 3) throw GridError("every extent must have at least 3 cells");
    cells_[a] = cells[a];
    strides_[a] = node_count_;
    node_count_ *= static_cast<std::size_t>(cells[a] + 1);
  }
}

SpaceTimeGrid SpaceTimeGrid::cube(int n, int cells, double dt, double final_time,
                                  double length) {
  std::array<int, kMaxDim> c{};
  for (int a = 0; a < n; ++a) c[a] = cells;
  return SpaceTimeGrid(n, length / cells, dt, c, Point::Zero(n), final_time);
}

std::size_t SpaceTimeGrid::flat(const NodeIndex& node) const {
  std::size_t f = 0;
  for (int a = 0; a < n_; ++a) f += strides_[a] * static_cast<std::size_t>(node[a]);
  return f;
}

NodeIndex SpaceTimeGrid::unflat(std::size_t flat_node) const {
  NodeIndex node{};
  for (int a = 0; a < n_; ++a) {
    node[a] = static_cast<int>(flat_node / strides_[a]);
    flat_node %= strides_[a];
  }
  return node;
}

GridIndex SpaceTimeGrid::unflat_spacetime(std::size_t flat_idx) const {
  GridIndex idx;
  idx.k = static_cast<int>(flat_idx / node_count_);
  idx.node = unflat(flat_idx % node_count_);
  return idx;
}

bool SpaceTimeGrid::contains(const NodeIndex& node) const {
  for (int a = 0; a < n_; ++a)
    if (node[a] < 0 || node[a] > cells_[a]) return false;
  for (int a = n_; a < kMaxDim; ++a)
    if (node[a] != 0) return false;
  return true;
}

bool SpaceTimeGrid::contains(const GridIndex& idx) const {
  return idx.k >= 0 && idx.k <= levels_ && contains(idx.node);
}

bool SpaceTimeGrid::on_spatial_boundary(const NodeIndex& node) const {
  for (int a = 0; a < n_; ++a)
    if (node[a] == 0 || node[a] == cells_[a]) return true;
  return false;
}

Point SpaceTimeGrid::position(const NodeIndex& node) const {
  Point x(n_);
  for (int a = 0; a < n_; ++a) x[a] = origin_[a] + h_ * node[a];
  return x;
}

NodeIndex SpaceTimeGrid::nearest_node(const Point& x) const {
  NodeIndex node{};
  for (int a = 0; a < n_; ++a) {
    const long i = std::lround((x[a] - origin_[a]) / h_);
    node[a] = static_cast<int>(std::clamp<long>(i, 0, cells_[a]));
  }
  return node;
}

double SpaceTimeGrid::distance_to_lateral(const NodeIndex& node) const {
  int cells_away = cells_[0];
  for (int a = 0; a < n_; ++a)
    cells_away = std::min({cells_away, node[a], cells_[a] - node[a]});
  return cells_away * h_;
}

double SpaceTimeGrid::parabolic_distance(const GridIndex& idx) const {
  return std::min(distance_to_lateral(idx.node), std::sqrt(time(idx.k)));
}

bool operator==(const SpaceTimeGrid& a, const SpaceTimeGrid& b) {
  if (a.n_ != b.n_ || a.h_ != b.h_ || a.dt_ != b.dt_ || a.T_ != b.T_) return false;
  for (int i = 0; i < a.n_; ++i)
    if (a.cells_[i] != b.cells_[i] || a.origin_[i] != b.origin_[i]) return false;
  return true;
}

bool SubGrid::contains(const GridIndex& idx) const {
  if (idx.k < k_lo || idx.k > k_hi) return false;
  for (int a = 0; a < kMaxDim; ++a)
    if (idx.node[a] < lo[a] || idx.node[a] > hi[a]) return false;
  return true;
}

std::size_t SubGrid::spatial_count(int n) const {
  std::size_t c = 1;
  for (int a = 0; a < n; ++a) c *= static_cast<std::size_t>(std::max(0, hi[a] - lo[a] + 1));
  return c;
}

SubGrid SubGrid::interior_box(const SpaceTimeGrid& grid, double margin, int k_lo, int k_hi) {
  SubGrid K;
  const int m = static_cast<int>(std::ceil(margin / grid.h() - 1e-9));
  for (int a = 0; a < grid.dim(); ++a) {
    K.lo[a] = m;
    K.hi[a] = grid.cells(a) - m;
    if (K.lo[a] > K.hi[a]) throw GridError("interior box is empty");
  }
  const int k_min = static_cast<int>(std::ceil(margin * margin / grid.dt() - 1e-9));
  K.k_lo = std::max(k_lo, k_min);
  K.k_hi = std::min(k_hi, grid.last_level());
  if (K.k_lo > K.k_hi) throw GridError("interior box has no time levels");
  return K;
}

Region classify_point(const SpaceTimeGrid& grid, const GridIndex& idx) {
  if (!grid.contains(idx)) {
    std::ostringstream os;
    os << "grid index out of range (k=" << idx.k << ")";
    throw GridError(os.str());
  }
  if (idx.k == 0) return Region::initial;
  // Boundary nodes at t = T still carry Dirichlet data, so they stay lateral.
  if (grid.on_spatial_boundary(idx.node)) return Region::lateral;
  if (idx.k == grid.last_level()) return Region::final_slice;
  return Region::interior;
}

namespace {

// Time levels inside the cylinder's window, clipped to the grid.
std::pair<int, int> level_window(const SpaceTimeGrid& grid, const ParabolicCylinder& cyl) {
  const double r2 = cyl.radius * cyl.radius;
  const double tol = 1e-9 * grid.dt();
  const double lo = cyl.t0 - r2;
  const int k_lo = std::max(0, static_cast<int>(std::floor((lo + tol) / grid.dt())) + 1);
  int k_hi;
  if (cyl.kind == ParabolicCylinder::Kind::lower) {
    k_hi = static_cast<int>(std::floor((cyl.t0 + tol) / grid.dt()));
  } else {
    k_hi = static_cast<int>(std::ceil((cyl.t0 + r2 - tol) / grid.dt())) - 1;
  }
  k_hi = std::min(k_hi, grid.last_level());
  return {k_lo, k_hi};
}

}  // namespace

PointSet cylinder_points(const SpaceTimeGrid& grid, const ParabolicCylinder& cyl) {
  if (!(cyl.radius > 0.0)) throw GridError("cylinder radius must be positive");
  if (cyl.center.size() != grid.dim()) throw GridError("cylinder center has wrong dimension");
  const auto [k_lo, k_hi] = level_window(grid, cyl);
  PointSet out;
  if (k_lo > k_hi) return out;
  std::vector<std::size_t> nodes;
  for_each_ball_node(grid, cyl.center, cyl.radius,
                     [&](const NodeIndex& node) { nodes.push_back(grid.flat(node)); });
  std::sort(nodes.begin(), nodes.end());
  out.reserve(nodes.size() * static_cast<std::size_t>(k_hi - k_lo + 1));
  for (int k = k_lo; k <= k_hi; ++k)
    for (std::size_t f : nodes) out.push_back(static_cast<std::size_t>(k) * grid.node_count() + f);
  return out;
}

PointSet neighborhood(const SpaceTimeGrid& grid, std::span<const GridIndex> K, double tau,
                      ParabolicCylinder::Kind kind) {
  if (K.empty()) throw GridError("neighborhood of an empty set");
  std::vector<char> hit(grid.size(), 0);
  for (const GridIndex& idx : K) {
    const ParabolicCylinder cyl{grid.position(idx.node), grid.time(idx.k), tau, kind};
    for (std::size_t f : cylinder_points(grid, cyl)) hit[f] = 1;
  }
  PointSet out;
  for (std::size_t f = 0; f < hit.size(); ++f)
    if (hit[f]) out.push_back(f);
  return out;
}

}  // namespace npfb
