#include "firescan/detectors.hpp"

#include "firescan/context.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace firescan {
namespace {

void require_correction(const ReflectanceStack& stack, bool corrected, const char* who) {
  if (stack.solar_corrected != corrected) {
    throw std::invalid_argument(std::string(who) + " expects a stack " +
                                (corrected ? "with" : "without") + " solar-zenith correction");
  }
}

void require_channels(const ReflectanceStack& stack, std::initializer_list<int> channels, const char* who) {
  for (int ch : channels) {
    if (!stack.has_channel(ch)) {
      throw std::invalid_argument(std::string(who) + " needs reflectance channel " + std::to_string(ch));
    }
  }
}

RowRange checked_core(const ReflectanceStack& stack, RowRange core) {
  if (core.begin < 0 || core.count < 0 || core.end() > stack.height()) {
    throw std::out_of_range("core row range outside stack");
  }
  return core;
}

bool contextual_test(double r75, double rho7, const WindowStats<double>& r75_stats,
                     const WindowStats<double>& rho7_stats) {
  return r75 > r75_stats.mean + std::max(3.0 * r75_stats.std, 0.8) &&
         rho7 > rho7_stats.mean + std::max(3.0 * rho7_stats.std, 0.08);
}

bool any_in_rows(const BoolGrid& mask, RowRange rows) {
  return rows.count > 0 && mask.middleRows(rows.begin, rows.count).any();
}

}  // namespace

DetectorReport& DetectorReport::operator+=(const DetectorReport& o) {
  unambiguous += o.unambiguous;
  neighbor += o.neighbor;
  candidates += o.candidates;
  confirmed += o.confirmed;
  water += o.water;
  fire += o.fire;
  return *this;
}

std::string_view detector_name(Detector d) {
  switch (d) {
    case Detector::schroeder: return "schroeder";
    case Detector::murphy: return "murphy";
    case Detector::kumarroy: return "kumarroy";
  }
  return "unknown";
}

Detector parse_detector(std::string_view name) {
  for (Detector d : kAllDetectors) {
    if (detector_name(d) == name) return d;
  }
  throw std::invalid_argument("unknown detector '" + std::string(name) +
                              "' (expected schroeder, murphy or kumarroy)");
}

std::optional<double> ratio(const ReflectanceStack& stack, int i, int j, Pixel p) {
  const double den = stack.band(j)(p.row, p.col);
  if (!(den > 0.0)) return std::nullopt;
  return stack.band(i)(p.row, p.col) / den;
}

BoolGrid schroeder_water(const ReflectanceStack& stack) {
  require_correction(stack, false, "schroeder_water");
  require_channels(stack, {1, 2, 3, 4, 5, 6, 7}, "schroeder_water");
  const auto& r1 = stack.band(1);
  const auto& r2 = stack.band(2);
  const auto& r3 = stack.band(3);
  const auto& r4 = stack.band(4);
  const auto& r5 = stack.band(5);
  const auto& r6 = stack.band(6);
  const auto& r7 = stack.band(7);
  return stack.valid && (r4 > r5) && (r5 > r6) && (r6 > r7) && (r1 - r7 < 0.2) &&
         ((r3 > r2) || ((r1 > r2) && (r2 > r3) && (r3 > r4)));
}

BoolGrid kumarroy_water(const ReflectanceStack& stack) {
  require_correction(stack, true, "kumarroy_water");
  require_channels(stack, {2, 3, 4, 5}, "kumarroy_water");
  const auto& r2 = stack.band(2);
  const auto& r3 = stack.band(3);
  const auto& r4 = stack.band(4);
  const auto& r5 = stack.band(5);
  return stack.valid && (r2 >= r3) && (r3 >= r4) && (r4 >= r5);
}

Detection schroeder_detect(const ReflectanceStack& stack) {
  return schroeder_detect(stack, {0, stack.height()});
}

Detection schroeder_detect(const ReflectanceStack& stack, RowRange core) {
  require_correction(stack, false, "schroeder_detect");
  require_channels(stack, {1, 2, 3, 4, 5, 6, 7}, "schroeder_detect");
  core = checked_core(stack, core);
  const auto& r1 = stack.band(1);
  const auto& r5 = stack.band(5);
  const auto& r6 = stack.band(6);
  const auto& r7 = stack.band(7);
  const BoolGrid& valid = stack.valid;

  const BoolGrid water = schroeder_water(stack);
  // Ratios are only consumed where their denominator is positive.
  const ReflGrid r75 = r7 / r5;
  const BoolGrid r5_pos = r5 > 0.0;
  const BoolGrid r6_pos = r6 > 0.0;

  const BoolGrid unambiguous =
      valid && ((r5_pos && (r75 > 2.5) && (r7 - r5 > 0.3) && (r7 > 0.5)) ||
                ((r6 > 0.8) && (r1 < 0.2) && ((r5 > 0.4) || (r7 < 0.1))));
  const BoolGrid candidates = valid && !unambiguous && r5_pos && (r75 > 1.8) && (r7 - r5 > 0.17) &&
                              r6_pos && (r7 / r6 > 1.6);

  FireMask fire = unambiguous;
  DetectorReport report;
  if (any_in_rows(candidates, core)) {
    const BoolGrid include = valid && !water && !unambiguous && !candidates && r5_pos;
    const ExclusionSAT r75_sat(r75, include);
    const ExclusionSAT rho7_sat(r7, include);
    for (Eigen::Index r = core.begin; r < core.end(); ++r) {
      for (Eigen::Index c = 0; c < stack.width(); ++c) {
        if (!candidates(r, c)) continue;
        const auto r75_stats = window_stats(r75_sat, {r, c}, kSchroederHalfWidth);
        if (!r75_stats) continue;
        const auto rho7_stats = window_stats(rho7_sat, {r, c}, kSchroederHalfWidth);
        if (contextual_test(r75(r, c), r7(r, c), *r75_stats, *rho7_stats)) {
          fire(r, c) = true;
          ++report.confirmed;
        }
      }
    }
  }

  report.unambiguous = popcount(unambiguous, core);
  report.candidates = popcount(candidates, core);
  report.water = popcount(water, core);
  report.fire = popcount(fire, core);
  return {std::move(fire), report};
}

Detection murphy_detect(const ReflectanceStack& stack, const BoolGrid& sat6, const BoolGrid& sat7) {
  return murphy_detect(stack, sat6, sat7, {0, stack.height()});
}

Detection murphy_detect(const ReflectanceStack& stack, const BoolGrid& sat6, const BoolGrid& sat7,
                        RowRange core) {
  require_correction(stack, true, "murphy_detect");
  require_channels(stack, {5, 6, 7}, "murphy_detect");
  require_same_shape(stack.valid, sat6, "murphy_detect saturation (channel 6)");
  require_same_shape(stack.valid, sat7, "murphy_detect saturation (channel 7)");
  core = checked_core(stack, core);
  const auto& r5 = stack.band(5);
  const auto& r6 = stack.band(6);
  const auto& r7 = stack.band(7);
  const BoolGrid& valid = stack.valid;
  const BoolGrid r5_pos = r5 > 0.0;

  const BoolGrid unambiguous =
      valid && (r6 > 0.0) && (r7 / r6 >= 1.4) && r5_pos && (r7 / r5 >= 1.4) && (r7 >= 0.15);
  const BoolGrid potential = valid && ((r5_pos && (r6 / r5 >= 2.0) && (r6 >= 0.5)) || sat7 || sat6);
  const BoolGrid promoted = potential && !unambiguous && dilate3x3(unambiguous);

  FireMask fire = unambiguous || promoted;
  DetectorReport report;
  report.unambiguous = popcount(unambiguous, core);
  report.candidates = popcount(BoolGrid(potential && !unambiguous), core);
  report.neighbor = popcount(promoted, core);
  report.fire = popcount(fire, core);
  return {std::move(fire), report};
}

Detection kumarroy_detect(const ReflectanceStack& stack) {
  return kumarroy_detect(stack, {0, stack.height()});
}

Detection kumarroy_detect(const ReflectanceStack& stack, RowRange core) {
  require_correction(stack, true, "kumarroy_detect");
  require_channels(stack, {2, 3, 4, 5, 6, 7}, "kumarroy_detect");
  core = checked_core(stack, core);
  const auto& r4 = stack.band(4);
  const auto& r5 = stack.band(5);
  const auto& r6 = stack.band(6);
  const auto& r7 = stack.band(7);
  const BoolGrid& valid = stack.valid;

  const BoolGrid unambiguous = valid && (r4 <= 0.53 * r7 - 0.214);
  // Single pass: only neighbours of first-stage pixels are promoted.
  const BoolGrid neighbor = valid && !unambiguous && dilate3x3(unambiguous) && (r4 <= 0.35 * r6 - 0.044);
  const BoolGrid fixed_fire = unambiguous || neighbor;
  const BoolGrid potential =
      valid && !fixed_fire && ((r4 <= 0.53 * r7 - 0.125) || (r6 <= 1.08 * r7 - 0.048));
  const BoolGrid water = kumarroy_water(stack);

  FireMask fire = fixed_fire;
  DetectorReport report;
  if (any_in_rows(potential, core)) {
    const BoolGrid r5_pos = r5 > 0.0;
    const ReflGrid r75 = r7 / r5;
    const BoolGrid include = valid && !water && !fixed_fire && !potential && r5_pos;
    const ExclusionSAT r75_sat(r75, include);
    const ExclusionSAT rho7_sat(r7, include);
    for (Eigen::Index r = core.begin; r < core.end(); ++r) {
      for (Eigen::Index c = 0; c < stack.width(); ++c) {
        if (!potential(r, c) || !r5_pos(r, c)) continue;
        const auto r75_stats = adaptive_window_stats(r75_sat, {r, c}, kAdaptiveMinSide, kAdaptiveMaxSide,
                                                     kAdaptiveMinValidFraction);
        // No qualifying neighbourhood: treated as non-fire.
        if (!r75_stats) continue;
        const auto rho7_stats = window_stats(rho7_sat, {r, c}, r75_stats->window_side / 2);
        if (contextual_test(r75(r, c), r7(r, c), *r75_stats, *rho7_stats)) {
          fire(r, c) = true;
          ++report.confirmed;
        }
      }
    }
  }

  report.unambiguous = popcount(unambiguous, core);
  report.neighbor = popcount(neighbor, core);
  report.candidates = popcount(potential, core);
  report.water = popcount(water, core);
  report.fire = popcount(fire, core);
  return {std::move(fire), report};
}

std::string format_report(Detector d, const DetectorReport& report) {
  std::ostringstream os;
  os << "detector = " << detector_name(d) << "\n";
  os << "unambiguous = " << report.unambiguous << "\n";
  switch (d) {
    case Detector::schroeder:
      os << "candidates = " << report.candidates << "\n"
         << "confirmed = " << report.confirmed << "\n"
         << "water = " << report.water << "\n";
      break;
    case Detector::murphy:
      os << "potential = " << report.candidates << "\n"
         << "promoted = " << report.neighbor << "\n";
      break;
    case Detector::kumarroy:
      os << "neighbor = " << report.neighbor << "\n"
         << "potential = " << report.candidates << "\n"
         << "confirmed = " << report.confirmed << "\n"
         << "water = " << report.water << "\n";
      break;
  }
  os << "fire = " << report.fire << "\n";
  return os.str();
}

}  // namespace firescan
