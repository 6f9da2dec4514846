#include "firescan/reflectance.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace firescan {

const ReflGrid& ReflectanceStack::band(int channel) const {
  auto it = channels.find(channel);
  if (it == channels.end()) {
    throw std::invalid_argument("reflectance stack has no channel " + std::to_string(channel));
  }
  return it->second;
}

double solar_divisor(double sun_elevation_deg) {
  if (!(sun_elevation_deg > 0.0)) {
    throw std::invalid_argument("solar correction needs a positive sun elevation, got " +
                                std::to_string(sun_elevation_deg));
  }
  return std::sin(sun_elevation_deg * std::numbers::pi / 180.0);
}

ReflectanceStack to_reflectance(const Scene& scene, bool correct_solar) {
  std::vector<int> present;
  for (int ch : kReflectiveChannels) {
    if (scene.has_band(ch)) present.push_back(ch);
  }
  return to_reflectance(scene, correct_solar, {0, scene.height()}, present);
}

ReflectanceStack to_reflectance(const Scene& scene, bool correct_solar, RowRange rows,
                                std::span<const int> channels) {
  const double divisor = correct_solar ? solar_divisor(scene.sun_elevation_deg) : 1.0;
  if (rows.begin < 0 || rows.count < 0 || rows.end() > scene.height()) {
    throw std::out_of_range("row range outside scene");
  }

  ReflectanceStack out;
  out.solar_corrected = correct_solar;
  out.valid = !nodata_mask(scene, rows);
  for (int ch : channels) {
    const double mult = scene.refl_mult.at(ch);
    const double add = scene.refl_add.at(ch);
    ReflGrid rho = scene.band(ch).middleRows(rows.begin, rows.count).cast<double>() * mult + add;
    if (correct_solar) rho /= divisor;
    out.channels.emplace(ch, std::move(rho));
  }
  return out;
}

ReflectanceStack with_solar_correction(const ReflectanceStack& uncorrected, double sun_elevation_deg) {
  if (uncorrected.solar_corrected) throw std::invalid_argument("stack is already solar corrected");
  const double divisor = solar_divisor(sun_elevation_deg);
  ReflectanceStack out;
  out.valid = uncorrected.valid;
  out.solar_corrected = true;
  for (const auto& [ch, rho] : uncorrected.channels) out.channels.emplace(ch, rho / divisor);
  return out;
}

}  // namespace firescan
