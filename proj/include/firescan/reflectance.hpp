#pragma once

#include "firescan/grid.hpp"
#include "firescan/raster.hpp"

#include <map>
#include <span>

namespace firescan {

using ReflGrid = Grid<double>;

/// Top-of-atmosphere reflectance per reflective channel. Values at invalid
/// pixels are unspecified. Values are never clamped.
struct ReflectanceStack {
  std::map<int, ReflGrid> channels;
  BoolGrid valid;
  bool solar_corrected = false;

  Eigen::Index width() const { return valid.cols(); }
  Eigen::Index height() const { return valid.rows(); }
  bool has_channel(int channel) const { return channels.contains(channel); }
  const ReflGrid& band(int channel) const;
};

/// sin(sun elevation); the divisor applied by solar-zenith correction.
double solar_divisor(double sun_elevation_deg);

/// rho' = M * Q + A per channel, divided by sin(sun elevation) when
/// correct_solar is set. Converts every reflective channel present.
ReflectanceStack to_reflectance(const Scene& scene, bool correct_solar);

/// Same, restricted to a row band and to the listed channels.
ReflectanceStack to_reflectance(const Scene& scene, bool correct_solar, RowRange rows,
                                std::span<const int> channels);

/// Applies the solar divisor to an uncorrected stack. Bit-identical to
/// converting with correct_solar = true.
ReflectanceStack with_solar_correction(const ReflectanceStack& uncorrected, double sun_elevation_deg);

}  // namespace firescan
