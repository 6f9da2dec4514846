#pragma once

#include "firescan/grid.hpp"
#include "firescan/raster.hpp"
#include "firescan/reflectance.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace firescan {

enum class Detector { schroeder, murphy, kumarroy };

inline constexpr std::array<Detector, 3> kAllDetectors{Detector::schroeder, Detector::murphy,
                                                       Detector::kumarroy};

std::string_view detector_name(Detector d);
/// Throws std::invalid_argument for unknown names.
Detector parse_detector(std::string_view name);

/// Per-stage pixel totals. Which stages apply depends on the detector:
///   schroeder: unambiguous, candidates (relaxed clauses), confirmed, water
///   murphy:    unambiguous, candidates (potential), neighbor (promoted)
///   kumarroy:  unambiguous, neighbor (8-vicinity), candidates (potential),
///              confirmed, water
struct DetectorReport {
  std::int64_t unambiguous = 0;
  std::int64_t neighbor = 0;
  std::int64_t candidates = 0;
  std::int64_t confirmed = 0;
  std::int64_t water = 0;
  std::int64_t fire = 0;

  DetectorReport& operator+=(const DetectorReport& o);
  bool operator==(const DetectorReport&) const = default;
};

struct Detection {
  FireMask fire;
  DetectorReport report;
};

/// Contextual window half-width for the fixed 61 x 61 neighbourhood.
inline constexpr Eigen::Index kSchroederHalfWidth = 30;
inline constexpr int kAdaptiveMinSide = 5;
inline constexpr int kAdaptiveMaxSide = 61;
inline constexpr double kAdaptiveMinValidFraction = 0.25;

/// rho_i / rho_j, empty when rho_j <= 0.
std::optional<double> ratio(const ReflectanceStack& stack, int i, int j, Pixel p);

/// Water test used by the fixed-window detector. Needs an uncorrected stack.
BoolGrid schroeder_water(const ReflectanceStack& stack);
/// Non-strict descending chain rho2 >= rho3 >= rho4 >= rho5. Needs a
/// corrected stack.
BoolGrid kumarroy_water(const ReflectanceStack& stack);

/// The `core` overloads confirm contextual candidates and count stages only
/// inside `core`; rows outside it carry per-pixel stages only. Used for
/// strip processing where the remaining rows are halo.
Detection schroeder_detect(const ReflectanceStack& stack);
Detection schroeder_detect(const ReflectanceStack& stack, RowRange core);

Detection murphy_detect(const ReflectanceStack& stack, const BoolGrid& sat6, const BoolGrid& sat7);
Detection murphy_detect(const ReflectanceStack& stack, const BoolGrid& sat6, const BoolGrid& sat7,
                        RowRange core);

Detection kumarroy_detect(const ReflectanceStack& stack);
Detection kumarroy_detect(const ReflectanceStack& stack, RowRange core);

/// Halo rows needed above and below a strip for exact strip processing:
/// 30 rows of window reach plus one row of 8-neighbour dependence, plus slack.
inline constexpr Eigen::Index kStripHalo = 32;

struct SceneDetectOptions {
  int threads = 1;
  Eigen::Index strip_rows = 512;
};

/// Runs the selected detectors over a whole scene in fixed row strips with
/// halos. The strip layout does not depend on the thread count, and the
/// result equals running the detectors on the full-scene stacks.
std::map<Detector, Detection> detect_scene(const Scene& scene, std::span<const Detector> detectors,
                                           const SceneDetectOptions& options = {});

/// `key = value` lines, one per stage relevant to the detector.
std::string format_report(Detector d, const DetectorReport& report);

}  // namespace firescan
