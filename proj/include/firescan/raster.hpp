#pragma once

#include "firescan/grid.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace firescan {

/// Channels that carry reflectance rescaling coefficients.
inline constexpr std::array<int, 8> kReflectiveChannels{1, 2, 3, 4, 5, 6, 7, 9};
/// Channels a scene must always carry.
inline constexpr std::array<int, 7> kRequiredChannels{1, 2, 3, 4, 5, 6, 7};
/// Band order of generated patches. The panchromatic channel 8 is never used.
inline constexpr std::array<int, 10> kPatchBandOrder{1, 2, 3, 4, 5, 6, 7, 9, 10, 11};

/// 16-bit sensor ceiling, used as the radiometric saturation sentinel.
inline constexpr std::uint16_t kSaturatedDn = 65535;

struct Scene {
  std::string scene_id;
  int wrs_path = 0;
  int wrs_row = 0;
  std::string acquisition_date;  // YYYY-MM-DD
  double sun_elevation_deg = 0.0;
  std::map<int, DnGrid> bands;
  std::map<int, double> refl_mult;
  std::map<int, double> refl_add;

  Eigen::Index width() const;
  Eigen::Index height() const;
  bool has_band(int channel) const { return bands.contains(channel); }
  const DnGrid& band(int channel) const;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/// Flat `KEY = VALUE` metadata. GROUP/END_GROUP/END markers are skipped and
/// surrounding double quotes are stripped from values.
std::map<std::string, std::string> parse_metadata(std::istream& in);

/// Loads `*_B<n>.TIF` band files and the `*_MTL.txt` metadata file from a
/// directory. Channel 8 files are ignored.
Scene load_scene(const std::filesystem::path& scene_directory);

/// Writes a scene in the layout load_scene reads back.
void write_scene(const Scene& scene, const std::filesystem::path& scene_directory);

/// True where DN is 0 in every reflective channel present (fill pixels).
BoolGrid nodata_mask(const Scene& scene);
BoolGrid nodata_mask(const Scene& scene, RowRange rows);

/// True where the channel's DN equals kSaturatedDn.
BoolGrid saturation_mask(const Scene& scene, int channel);
BoolGrid saturation_mask(const Scene& scene, int channel, RowRange rows);

}  // namespace firescan
