#pragma once

#include "firescan/grid.hpp"

#include <string>
#include <vector>

namespace firescan {

/// Ordered, labelled masks of identical dimensions.
class MaskSet {
 public:
  MaskSet() = default;
  /// Throws std::invalid_argument on empty input, mismatched dimensions,
  /// label count mismatch or duplicate labels.
  MaskSet(std::vector<FireMask> masks, std::vector<std::string> labels);

  std::size_t size() const { return masks_.size(); }
  Eigen::Index width() const { return masks_.front().cols(); }
  Eigen::Index height() const { return masks_.front().rows(); }
  const std::vector<FireMask>& masks() const { return masks_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const FireMask& operator[](std::size_t i) const { return masks_[i]; }
  /// Throws std::invalid_argument for an unknown label.
  const FireMask& mask(const std::string& label) const;

 private:
  std::vector<FireMask> masks_;
  std::vector<std::string> labels_;
};

/// Per-pixel number of masks marking fire.
Grid<std::uint8_t> vote_counts(const MaskSet& set);

/// Fire where every mask marks fire.
FireMask intersect(const MaskSet& set);
/// Fire where at least threshold_k masks mark fire; 1 <= threshold_k <= size.
FireMask vote(const MaskSet& set, int threshold_k = 2);
/// Fire where any mask marks fire.
FireMask unite(const MaskSet& set);

}  // namespace firescan
