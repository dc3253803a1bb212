#pragma once

#include <Eigen/Core>

#include "npfb/grid.hpp"

namespace npfb {

/// Parameters a field was computed with; zero when not applicable.
struct FieldMetadata {
  double p = 0.0;
  double eps = 0.0;
  double delta = 0.0;
};

/// Scalar values on every node of a space-time grid, one contiguous slice
/// per time level.
class Field {
 public:
  using Slice = Eigen::Map<Eigen::ArrayXd>;
  using ConstSlice = Eigen::Map<const Eigen::ArrayXd>;

  explicit Field(SpaceTimeGrid grid, FieldMetadata meta = {});

  const SpaceTimeGrid& grid() const { return grid_; }
  const FieldMetadata& metadata() const { return meta_; }
  FieldMetadata& metadata() { return meta_; }

  Slice slice(int k);
  ConstSlice slice(int k) const;

  double& operator()(const GridIndex& idx) { return values_[static_cast<Eigen::Index>(grid_.flat(idx))]; }
  double operator()(const GridIndex& idx) const { return values_[static_cast<Eigen::Index>(grid_.flat(idx))]; }
  double& at(std::size_t flat) { return values_[static_cast<Eigen::Index>(flat)]; }
  double at(std::size_t flat) const { return values_[static_cast<Eigen::Index>(flat)]; }

  Eigen::ArrayXd& values() { return values_; }
  const Eigen::ArrayXd& values() const { return values_; }

  double max_abs() const { return values_.abs().maxCoeff(); }
  bool all_finite() const { return values_.allFinite(); }

 private:
  SpaceTimeGrid grid_;
  FieldMetadata meta_;
  Eigen::ArrayXd values_;
};

/// Field filled with f(x, t) at every node.
template <class Fn>
Field tabulate(const SpaceTimeGrid& grid, Fn&& fn, FieldMetadata meta = {}) {
  Field out(grid, meta);
  for (int k = 0; k <= grid.last_level(); ++k) {
    auto s = out.slice(k);
    const double t = grid.time(k);
    for (std::size_t f = 0; f < grid.node_count(); ++f)
      s[static_cast<Eigen::Index>(f)] = fn(grid.position(grid.unflat(f)), t);
  }
  return out;
}

}  // namespace npfb
