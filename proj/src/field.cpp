#include "npfb/field.hpp"

namespace npfb {

Field::Field(SpaceTimeGrid grid, FieldMetadata meta)
    : grid_(std::move(grid)), meta_(meta),
      values_(Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(grid_.size()))) {}

Field::Slice Field::slice(int k) {
  if (k < 0 || k > grid_.last_level()) throw GridError("time level out of range");
  const auto nc = static_cast<Eigen::Index>(grid_.node_count());
  return Slice(values_.data() + k * nc, nc);
}

Field::ConstSlice Field::slice(int k) const {
  if (k < 0 || k > grid_.last_level()) throw GridError("time level out of range");
  const auto nc = static_cast<Eigen::Index>(grid_.node_count());
  return ConstSlice(values_.data() + k * nc, nc);
}

}  // namespace npfb
