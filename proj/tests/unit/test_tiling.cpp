#include "doctest.h"

#include "firescan/tiling.hpp"
#include "reassemble.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

#include <set>
#include <sstream>

using namespace firescan;
namespace fs = std::filesystem;

namespace {

MaskSet random_masks(Eigen::Index w, Eigen::Index h, std::uint64_t seed) {
  return MaskSet({testing::make_random_mask(w, h, 0.01, seed), testing::make_random_mask(w, h, 0.05, seed + 1)},
                 {"murphy", "voting"});
}

Manifest counts_manifest(std::initializer_list<std::int64_t> counts) {
  Manifest m;
  m.labels = {"kumarroy"};
  int i = 0;
  for (auto n : counts) {
    PatchRecord r;
    r.scene_id = "S";
    r.tile_col = i;
    r.patch_id = patch_id("S", 0, i++);
    r.fire_counts["kumarroy"] = n;
    m.records.push_back(r);
  }
  return m;
}

}  // namespace

TEST_CASE("tile layout") {
  CHECK(tile_grid(7600, 7600).count() == 900);
  CHECK(tile_grid(7600, 7600).tiles_down == 30);
  CHECK(tile_grid(256, 256).count() == 1);
  CHECK(tile_grid(257, 256).tiles_across == 2);
  CHECK(tile_grid(300, 520).tiles_down == 3);
  CHECK_THROWS_AS(tile_grid(0, 5), std::invalid_argument);
}

TEST_CASE("patch naming") {
  CHECK(patch_id("LC08_X", 3, 12) == "LC08_X_r003_c012");
  CHECK(patch_image_path("/d", "p") == fs::path("/d/images/p.tif"));
  CHECK(patch_mask_path("/d", "p", "murphy") == fs::path("/d/masks/p_murphy.tif"));
}

TEST_CASE("single tile scene") {
  testing::TempDir dir("tile1");
  const Scene s = testing::make_scene(256, 256, 4);
  const auto m = tile_scene(s, random_masks(256, 256, 1), dir.path());
  REQUIRE(m.records.size() == 1);
  CHECK(m.records[0].pixel_x == 0);
  CHECK(m.records[0].pixel_y == 0);
  CHECK(m.records[0].tile_row == 0);
  CHECK(m.labels == std::vector<std::string>{"murphy", "voting"});
  CHECK(m.records[0].valid_fraction == doctest::Approx(1.0 - static_cast<double>(nodata_mask(s).count()) / 65536.0));
}

TEST_CASE("partial tiles round-trip and are zero padded") {
  testing::TempDir dir("tile2");
  const Scene s = testing::make_scene(300, 520, 9);
  const MaskSet masks = random_masks(300, 520, 7);
  const auto m = tile_scene(s, masks, dir.path(), {.skip_empty = false, .overwrite = false, .threads = 3});
  REQUIRE(m.records.size() == 6);

  const auto back = testing::reassemble(m, dir.path(), 300, 520);
  CHECK(back.nonzero_padding == 0);
  for (int ch : kPatchBandOrder) CHECK((back.bands.at(ch) == s.band(ch)).all());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const auto& label = masks.labels()[i];
    CHECK((back.masks.at(label) == masks[i]).all());
    std::int64_t sum = 0;
    for (const auto& r : m.records) sum += r.fire_counts.at(label);
    CHECK(sum == masks[i].count());
  }
  // Bottom-right patch holds 44 x 8 scene pixels.
  const auto& last = m.records.back();
  CHECK(last.pixel_x == 256);
  CHECK(last.pixel_y == 512);
  CHECK(last.valid_fraction <= 44.0 * 8.0 / 65536.0);
}

TEST_CASE("empty tiles are skipped unless kept") {
  testing::TempDir dir("tile3");
  Scene s = testing::make_scene(512, 256, 3, {.fire_blobs = 0, .water = false, .nodata_corners = false});
  for (auto& [ch, band] : s.bands) band.rightCols(256).setZero();
  const MaskSet masks({FireMask::Zero(256, 512)}, {"schroeder"});
  const auto skipped = tile_scene(s, masks, dir / "a");
  REQUIRE(skipped.records.size() == 1);
  CHECK(skipped.records[0].tile_col == 0);
  CHECK_FALSE(fs::exists(patch_image_path(dir / "a", patch_id(s.scene_id, 0, 1))));
  const auto kept = tile_scene(s, masks, dir / "b", {.skip_empty = false});
  CHECK(kept.records.size() == 2);
  CHECK(kept.records[1].valid_fraction == 0.0);
}

TEST_CASE("tiling preconditions") {
  testing::TempDir dir("tile4");
  const Scene s = testing::make_scene(64, 64, 2);
  const MaskSet masks = random_masks(64, 64, 3);
  tile_scene(s, masks, dir.path());
  CHECK_THROWS_AS(tile_scene(s, masks, dir.path()), std::runtime_error);
  CHECK_NOTHROW(tile_scene(s, masks, dir.path(), {.skip_empty = true, .overwrite = true}));

  CHECK_THROWS_AS(tile_scene(s, random_masks(64, 63, 3), dir / "x"), std::invalid_argument);
  Scene no_thermal = s;
  no_thermal.bands.erase(11);
  CHECK_THROWS_AS(tile_scene(no_thermal, masks, dir / "y"), std::invalid_argument);
}

TEST_CASE("manifest CSV round-trip") {
  testing::TempDir dir("tile5");
  const Scene s = testing::make_scene(600, 300, 12);
  const auto m = tile_scene(s, random_masks(600, 300, 5), dir.path());
  std::ostringstream os;
  write_manifest_csv(m, os);
  CHECK(os.str().starts_with("patch_id,scene_id,tile_row,tile_col,pixel_x,pixel_y,valid_fraction,fire_murphy,fire_voting\n"));
  std::istringstream is(os.str());
  const auto r = read_manifest_csv(is);
  CHECK(r.labels == m.labels);
  REQUIRE(r.records.size() == m.records.size());
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    CHECK(r.records[i].patch_id == m.records[i].patch_id);
    CHECK(r.records[i].pixel_x == m.records[i].pixel_x);
    CHECK(r.records[i].valid_fraction == m.records[i].valid_fraction);
    CHECK(r.records[i].fire_counts == m.records[i].fire_counts);
  }
  std::istringstream bad("patch_id,scene\n");
  CHECK_THROWS_AS(read_manifest_csv(bad), std::runtime_error);
  CHECK_THROWS_AS(read_manifest_csv(dir / "missing.csv"), std::runtime_error);
}

TEST_CASE("merging manifests") {
  const auto a = counts_manifest({1, 2});
  auto b = counts_manifest({3});
  b.records[0].patch_id = "T_r000_c000";
  CHECK(merge_manifests({a, b}).records.size() == 3);
  CHECK_THROWS_AS(merge_manifests({a, a}), std::invalid_argument);
  auto c = b;
  c.labels = {"other"};
  CHECK_THROWS_AS(merge_manifests({a, c}), std::invalid_argument);
}

TEST_CASE("fire-count histogram") {
  const auto h = fire_histogram(counts_manifest({0, 2, 300}), "kumarroy", {1, 10, 100, 1000});
  CHECK(h.zero == 1);
  CHECK(h.below_first == 0);
  CHECK(h.bins == std::vector<std::int64_t>{1, 0, 1});
  CHECK(h.overflow == 0);
  CHECK(h.total() == 3);

  const auto e = fire_histogram(counts_manifest({}), "kumarroy");
  CHECK(e.total() == 0);
  CHECK(e.bins.size() == kDefaultHistogramEdges.size() - 1);

  std::ostringstream os;
  write_histogram(fire_histogram(counts_manifest({0, 3, 5, 20000}), "kumarroy", {4, 10}), os);
  CHECK(os.str() == "bucket,patches\n0,1\n(0,4),1\n[4,10),1\n>=10,1\n");

  CHECK_THROWS_AS(fire_histogram(counts_manifest({1}), "murphy"), std::invalid_argument);
  CHECK_THROWS_AS(fire_histogram(counts_manifest({1}), "kumarroy", {10, 5}), std::invalid_argument);
}

TEST_CASE("seeded split") {
  const auto m = counts_manifest({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto s = split_manifest(m, {}, 42);
  CHECK(s.train.records.size() == 4);
  CHECK(s.val.records.size() == 1);
  CHECK(s.test.records.size() == 5);

  std::set<std::string> ids;
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    CHECK(part->labels == m.labels);
    for (const auto& r : part->records) CHECK(ids.insert(r.patch_id).second);
  }
  CHECK(ids.size() == 10);

  const auto again = split_manifest(m, {}, 42);
  for (std::size_t i = 0; i < 4; ++i) CHECK(again.train.records[i].patch_id == s.train.records[i].patch_id);

  const auto odd = split_manifest(counts_manifest({0, 1, 2, 3, 4, 5, 6}), {0.4, 0.1, 0.5}, 1);
  CHECK(odd.train.records.size() == 2);
  CHECK(odd.val.records.size() == 0);
  CHECK(odd.test.records.size() == 5);

  CHECK_THROWS_AS(split_manifest(m, {0.5, 0.5, 0.5}, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_manifest(m, {1.2, -0.2, 0.0}, 1), std::invalid_argument);
}
