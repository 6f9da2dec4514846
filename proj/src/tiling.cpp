#include "firescan/tiling.hpp"

#include "firescan/parallel.hpp"
#include "firescan/tiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace firescan {
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kFixedColumns{"patch_id", "scene_id", "tile_row", "tile_col",
                                             "pixel_x",  "pixel_y",  "valid_fraction"};

void require_csv_safe(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_of(",\"\r\n") != std::string::npos) {
    throw std::invalid_argument(std::string(what) + " '" + s + "' is empty or contains CSV delimiters");
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw std::runtime_error("manifest: bad integer '" + s + "' in column " + what);
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw std::runtime_error("manifest: bad number '" + s + "' in column " + what);
  }
}

void refuse_clobber(const fs::path& p, bool overwrite) {
  if (!overwrite && fs::exists(p)) {
    throw std::runtime_error(p.string() + " already exists (use --overwrite to replace it)");
  }
}

Manifest with_records(const Manifest& like, std::vector<PatchRecord> records) {
  Manifest m;
  m.patch_size = like.patch_size;
  m.band_order = like.band_order;
  m.labels = like.labels;
  m.records = std::move(records);
  return m;
}

}  // namespace

std::string patch_id(const std::string& scene_id, int tile_row, int tile_col) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_r%03d_c%03d", tile_row, tile_col);
  return scene_id + buf;
}

fs::path patch_image_path(const fs::path& root, const std::string& id) {
  return root / kImageDir / (id + ".tif");
}

fs::path patch_mask_path(const fs::path& root, const std::string& id, const std::string& label) {
  return root / kMaskDir / (id + "_" + label + ".tif");
}

TileGrid tile_grid(Eigen::Index width, Eigen::Index height, Eigen::Index patch) {
  if (width <= 0 || height <= 0 || patch <= 0) throw std::invalid_argument("tile_grid needs positive sizes");
  return {static_cast<int>((height + patch - 1) / patch), static_cast<int>((width + patch - 1) / patch)};
}

Manifest tile_scene(const Scene& scene, const MaskSet& masks, const fs::path& out_dir,
                    const TileOptions& options) {
  scene.validate();
  require_csv_safe(scene.scene_id, "scene id");
  for (int ch : kPatchBandOrder) {
    if (!scene.has_band(ch)) {
      throw std::invalid_argument("tiling needs channel " + std::to_string(ch) + ", absent from scene " +
                                  scene.scene_id);
    }
  }
  for (std::size_t i = 0; i < masks.size(); ++i) {
    require_csv_safe(masks.labels()[i], "mask label");
    if (masks[i].rows() != scene.height() || masks[i].cols() != scene.width()) {
      throw std::invalid_argument("mask '" + masks.labels()[i] + "' is not aligned to scene " + scene.scene_id);
    }
  }

  std::error_code ec;
  fs::create_directories(out_dir / kImageDir, ec);
  fs::create_directories(out_dir / kMaskDir, ec);
  if (!fs::is_directory(out_dir / kImageDir) || !fs::is_directory(out_dir / kMaskDir)) {
    throw std::runtime_error("cannot create output directories under " + out_dir.string());
  }

  const BoolGrid nodata = nodata_mask(scene);
  const TileGrid layout = tile_grid(scene.width(), scene.height());
  const int tiles_across = layout.tiles_across;
  const std::size_t n_tiles = layout.count();

  std::vector<std::optional<PatchRecord>> slots(n_tiles);
  parallel_for(n_tiles, options.threads, [&](std::size_t t) {
    const int tr = static_cast<int>(t) / tiles_across;
    const int tc = static_cast<int>(t) % tiles_across;
    const Eigen::Index y0 = tr * kPatchSize;
    const Eigen::Index x0 = tc * kPatchSize;
    const Eigen::Index h = std::min(kPatchSize, scene.height() - y0);
    const Eigen::Index w = std::min(kPatchSize, scene.width() - x0);

    PatchRecord rec;
    rec.scene_id = scene.scene_id;
    rec.tile_row = tr;
    rec.tile_col = tc;
    rec.pixel_x = x0;
    rec.pixel_y = y0;
    rec.patch_id = patch_id(scene.scene_id, tr, tc);
    const std::int64_t valid = h * w - nodata.block(y0, x0, h, w).count();
    rec.valid_fraction = static_cast<double>(valid) / static_cast<double>(kPatchSize * kPatchSize);
    if (options.skip_empty && valid == 0) return;

    std::vector<DnGrid> planes;
    planes.reserve(kPatchBandOrder.size());
    for (int ch : kPatchBandOrder) {
      DnGrid p = DnGrid::Zero(kPatchSize, kPatchSize);
      p.topLeftCorner(h, w) = scene.band(ch).block(y0, x0, h, w);
      planes.push_back(std::move(p));
    }
    const fs::path image = patch_image_path(out_dir, rec.patch_id);
    refuse_clobber(image, options.overwrite);
    tiff::write_u16(image, planes);

    for (std::size_t i = 0; i < masks.size(); ++i) {
      const std::string& label = masks.labels()[i];
      FireMask m = FireMask::Zero(kPatchSize, kPatchSize);
      m.topLeftCorner(h, w) = masks[i].block(y0, x0, h, w);
      rec.fire_counts[label] = m.count();
      const fs::path mask_path = patch_mask_path(out_dir, rec.patch_id, label);
      refuse_clobber(mask_path, options.overwrite);
      tiff::write_mask(mask_path, m);
    }
    slots[t] = std::move(rec);
  });

  Manifest manifest;
  manifest.labels = masks.labels();
  for (auto& s : slots) {
    if (s) manifest.records.push_back(std::move(*s));
  }
  return manifest;
}

Manifest merge_manifests(const std::vector<Manifest>& parts) {
  Manifest out;
  if (parts.empty()) return out;
  out.labels = parts.front().labels;
  std::set<std::string> ids;
  for (const auto& part : parts) {
    if (part.labels != out.labels) throw std::invalid_argument("cannot merge manifests with different labels");
    for (const auto& rec : part.records) {
      if (!ids.insert(rec.patch_id).second) throw std::invalid_argument("duplicate patch id " + rec.patch_id);
      out.records.push_back(rec);
    }
  }
  return out;
}

void write_manifest_csv(const Manifest& manifest, std::ostream& out) {
  for (std::size_t i = 0; i < kFixedColumns.size(); ++i) out << (i ? "," : "") << kFixedColumns[i];
  for (const auto& label : manifest.labels) out << ",fire_" << label;
  out << "\n";
  char frac[40];
  for (const auto& r : manifest.records) {
    std::snprintf(frac, sizeof frac, "%.17g", r.valid_fraction);
    out << r.patch_id << "," << r.scene_id << "," << r.tile_row << "," << r.tile_col << "," << r.pixel_x << ","
        << r.pixel_y << "," << frac;
    for (const auto& label : manifest.labels) {
      auto it = r.fire_counts.find(label);
      out << "," << (it == r.fire_counts.end() ? 0 : it->second);
    }
    out << "\n";
  }
}

void write_manifest_csv(const Manifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_manifest_csv(manifest, out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Manifest read_manifest_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("manifest is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  if (header.size() < kFixedColumns.size() ||
      !std::equal(kFixedColumns.begin(), kFixedColumns.end(), header.begin())) {
    throw std::runtime_error("manifest header does not start with " + [] {
      std::string s;
      for (const auto& c : kFixedColumns) s += (s.empty() ? "" : ",") + c;
      return s;
    }());
  }
  Manifest m;
  for (std::size_t i = kFixedColumns.size(); i < header.size(); ++i) {
    if (!header[i].starts_with("fire_") || header[i].size() == 5) {
      throw std::runtime_error("unexpected manifest column '" + header[i] + "'");
    }
    m.labels.push_back(header[i].substr(5));
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                               " fields, expected " + std::to_string(header.size()));
    }
    PatchRecord r;
    r.patch_id = f[0];
    r.scene_id = f[1];
    r.tile_row = static_cast<int>(parse_int(f[2], "tile_row"));
    r.tile_col = static_cast<int>(parse_int(f[3], "tile_col"));
    r.pixel_x = parse_int(f[4], "pixel_x");
    r.pixel_y = parse_int(f[5], "pixel_y");
    r.valid_fraction = parse_double(f[6], "valid_fraction");
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
      r.fire_counts[m.labels[i]] = parse_int(f[kFixedColumns.size() + i], header[kFixedColumns.size() + i]);
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

Manifest read_manifest_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  return read_manifest_csv(in);
}

std::int64_t FireHistogram::total() const {
  return zero + below_first + overflow + std::accumulate(bins.begin(), bins.end(), std::int64_t{0});
}

FireHistogram fire_histogram(const Manifest& manifest, const std::string& label,
                             const std::vector<std::int64_t>& edges) {
  if (std::find(manifest.labels.begin(), manifest.labels.end(), label) == manifest.labels.end()) {
    throw std::invalid_argument("manifest has no mask label '" + label + "'");
  }
  if (edges.empty() || edges.front() < 1 || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw std::invalid_argument("histogram edges must be strictly increasing and >= 1");
  }
  FireHistogram h;
  h.edges = edges;
  h.bins.assign(edges.size() - 1, 0);
  for (const auto& r : manifest.records) {
    auto it = r.fire_counts.find(label);
    const std::int64_t n = it == r.fire_counts.end() ? 0 : it->second;
    if (n == 0) {
      ++h.zero;
    } else if (n < edges.front()) {
      ++h.below_first;
    } else if (n >= edges.back()) {
      ++h.overflow;
    } else {
      const auto pos = std::upper_bound(edges.begin(), edges.end(), n) - edges.begin();
      ++h.bins[static_cast<std::size_t>(pos - 1)];
    }
  }
  return h;
}

void write_histogram(const FireHistogram& h, std::ostream& out) {
  out << "bucket,patches\n";
  out << "0," << h.zero << "\n";
  if (h.edges.front() > 1) out << "(0," << h.edges.front() << ")," << h.below_first << "\n";
  for (std::size_t i = 0; i < h.bins.size(); ++i) {
    out << "[" << h.edges[i] << "," << h.edges[i + 1] << ")," << h.bins[i] << "\n";
  }
  out << ">=" << h.edges.back() << "," << h.overflow << "\n";
}

ManifestSplit split_manifest(const Manifest& manifest, const SplitFractions& f, std::uint64_t seed) {
  const double total = f.train + f.val + f.test;
  if (f.train < 0 || f.val < 0 || f.test < 0 || std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must be non-negative and sum to 1");
  }
  std::vector<PatchRecord> recs = manifest.records;
  std::mt19937_64 rng(seed);
  for (std::size_t i = recs.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(recs[i - 1], recs[j]);
  }
  const std::size_t n = recs.size();
  // Small epsilon so that e.g. 10 * 0.4 is not floored to 3 by rounding noise.
  const auto floor_count = [n](double frac) {
    return std::min(n, static_cast<std::size_t>(std::floor(static_cast<double>(n) * frac + 1e-9)));
  };
  const std::size_t n_train = floor_count(f.train);
  const std::size_t n_val = std::min(n - n_train, floor_count(f.val));

  ManifestSplit out;
  out.train = with_records(manifest, {recs.begin(), recs.begin() + static_cast<std::ptrdiff_t>(n_train)});
  out.val = with_records(manifest, {recs.begin() + static_cast<std::ptrdiff_t>(n_train),
                                    recs.begin() + static_cast<std::ptrdiff_t>(n_train + n_val)});
  out.test = with_records(manifest, {recs.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), recs.end()});
  return out;
}

}  // namespace firescan
