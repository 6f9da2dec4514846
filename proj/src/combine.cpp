#include "firescan/combine.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace firescan {

MaskSet::MaskSet(std::vector<FireMask> masks, std::vector<std::string> labels)
    : masks_(std::move(masks)), labels_(std::move(labels)) {
  if (masks_.empty()) throw std::invalid_argument("mask set needs at least one mask");
  if (masks_.size() > 255) throw std::invalid_argument("mask set holds at most 255 masks");
  if (labels_.size() != masks_.size()) throw std::invalid_argument("one label per mask is required");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < masks_.size(); ++i) {
    require_same_shape(masks_.front(), masks_[i], "mask '" + labels_[i] + "'");
    if (!seen.insert(labels_[i]).second) throw std::invalid_argument("duplicate mask label '" + labels_[i] + "'");
  }
}

const FireMask& MaskSet::mask(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw std::invalid_argument("no mask labelled '" + label + "'");
  return masks_[static_cast<std::size_t>(it - labels_.begin())];
}

Grid<std::uint8_t> vote_counts(const MaskSet& set) {
  Grid<std::uint8_t> counts = Grid<std::uint8_t>::Zero(set.height(), set.width());
  for (const auto& m : set.masks()) counts += m.cast<std::uint8_t>();
  return counts;
}

FireMask intersect(const MaskSet& set) { return vote(set, static_cast<int>(set.size())); }

FireMask vote(const MaskSet& set, int threshold_k) {
  if (set.size() == 0) throw std::invalid_argument("empty mask set");
  if (threshold_k < 1 || threshold_k > static_cast<int>(set.size())) {
    throw std::invalid_argument("vote threshold " + std::to_string(threshold_k) + " outside [1, " +
                                std::to_string(set.size()) + "]");
  }
  return vote_counts(set) >= static_cast<std::uint8_t>(threshold_k);
}

FireMask unite(const MaskSet& set) { return vote(set, 1); }

}  // namespace firescan
