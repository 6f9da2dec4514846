#pragma once

#include "firescan/combine.hpp"
#include "firescan/grid.hpp"
#include "firescan/raster.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace firescan {

inline constexpr Eigen::Index kPatchSize = 256;

struct PatchRecord {
  std::string patch_id;
  std::string scene_id;
  int tile_row = 0;
  int tile_col = 0;
  Eigen::Index pixel_x = 0;  // column offset of the top-left pixel
  Eigen::Index pixel_y = 0;  // row offset of the top-left pixel
  std::map<std::string, std::int64_t> fire_counts;
  double valid_fraction = 0.0;
};

struct Manifest {
  std::vector<PatchRecord> records;
  Eigen::Index patch_size = kPatchSize;
  std::vector<int> band_order{kPatchBandOrder.begin(), kPatchBandOrder.end()};
  /// Mask labels in column order.
  std::vector<std::string> labels;
};

struct TileOptions {
  bool skip_empty = true;
  bool overwrite = false;
  int threads = 1;
};

/// Subdirectories of the dataset root.
inline constexpr const char* kImageDir = "images";
inline constexpr const char* kMaskDir = "masks";

/// Tile layout of a width x height scene: tiles_down x tiles_across patches.
struct TileGrid {
  int tiles_down = 0;
  int tiles_across = 0;
  std::size_t count() const { return static_cast<std::size_t>(tiles_down) * static_cast<std::size_t>(tiles_across); }
};

TileGrid tile_grid(Eigen::Index width, Eigen::Index height, Eigen::Index patch = kPatchSize);

std::string patch_id(const std::string& scene_id, int tile_row, int tile_col);
std::filesystem::path patch_image_path(const std::filesystem::path& root, const std::string& patch_id);
std::filesystem::path patch_mask_path(const std::filesystem::path& root, const std::string& patch_id,
                                      const std::string& label);

/// Cuts the scene and its masks into non-overlapping kPatchSize tiles.
/// Edge tiles are zero padded; padding counts as nodata. Writes
/// `images/<patch_id>.tif` (10 samples, 16-bit, kPatchBandOrder) and
/// `masks/<patch_id>_<label>.tif` (8-bit 0/1) under out_dir.
Manifest tile_scene(const Scene& scene, const MaskSet& masks, const std::filesystem::path& out_dir,
                    const TileOptions& options = {});

/// Concatenates manifests that share labels; patch ids must stay unique.
Manifest merge_manifests(const std::vector<Manifest>& parts);

void write_manifest_csv(const Manifest& manifest, std::ostream& out);
void write_manifest_csv(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest_csv(std::istream& in);
Manifest read_manifest_csv(const std::filesystem::path& path);

/// Patch counts per fire-pixel-count bucket. Buckets are: exactly zero,
/// (0, edges[0]), [edges[i], edges[i+1]) and [edges.back(), inf).
struct FireHistogram {
  std::vector<std::int64_t> edges;
  std::int64_t zero = 0;
  std::int64_t below_first = 0;
  std::vector<std::int64_t> bins;
  std::int64_t overflow = 0;

  std::int64_t total() const;
};

inline const std::vector<std::int64_t> kDefaultHistogramEdges{1, 10, 100, 1000, 10000};

FireHistogram fire_histogram(const Manifest& manifest, const std::string& label,
                             const std::vector<std::int64_t>& bucket_edges = kDefaultHistogramEdges);
void write_histogram(const FireHistogram& hist, std::ostream& out);

struct SplitFractions {
  double train = 0.4;
  double val = 0.1;
  double test = 0.5;
};

struct ManifestSplit {
  Manifest train;
  Manifest val;
  Manifest test;
};

/// Seeded Fisher-Yates shuffle, then contiguous train/val/test split with
/// floor-rounded sizes; the remainder goes to test.
ManifestSplit split_manifest(const Manifest& manifest, const SplitFractions& fractions, std::uint64_t seed);

}  // namespace firescan
