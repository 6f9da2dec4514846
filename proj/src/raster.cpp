#include "firescan/raster.hpp"

#include "firescan/tiff.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <regex>
#include <stdexcept>

namespace firescan {
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

const std::string& require_key(const std::map<std::string, std::string>& md, const std::string& key) {
  auto it = md.find(key);
  if (it == md.end()) throw std::runtime_error("missing metadata key " + key);
  return it->second;
}

double numeric_key(const std::map<std::string, std::string>& md, const std::string& key) {
  const std::string& v = require_key(md, key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::logic_error&) {
    throw std::runtime_error("metadata key " + key + " has non-numeric value '" + v + "'");
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

BoolGrid all_zero_rows(const Scene& scene, RowRange rows) {
  BoolGrid fill = BoolGrid::Constant(rows.count, scene.width(), true);
  for (int ch : kReflectiveChannels) {
    if (!scene.has_band(ch)) continue;
    fill = fill && (scene.band(ch).middleRows(rows.begin, rows.count) == 0);
  }
  return fill;
}

}  // namespace

Eigen::Index Scene::width() const { return bands.empty() ? 0 : bands.begin()->second.cols(); }

Eigen::Index Scene::height() const { return bands.empty() ? 0 : bands.begin()->second.rows(); }

const DnGrid& Scene::band(int channel) const {
  auto it = bands.find(channel);
  if (it == bands.end()) throw std::invalid_argument("scene has no channel " + std::to_string(channel));
  return it->second;
}

void Scene::validate() const {
  for (int ch : kRequiredChannels) {
    if (!has_band(ch)) throw std::invalid_argument("scene is missing channel " + std::to_string(ch));
  }
  if (has_band(8)) throw std::invalid_argument("channel 8 must not be present");
  const DnGrid& ref = bands.begin()->second;
  for (const auto& [ch, grid] : bands) {
    if (ch < 1 || ch > 11) throw std::invalid_argument("invalid channel index " + std::to_string(ch));
    if (!same_shape(grid, ref)) {
      throw std::invalid_argument("channel " + std::to_string(ch) + " is " + std::to_string(grid.cols()) +
                                  "x" + std::to_string(grid.rows()) + " but channel " +
                                  std::to_string(bands.begin()->first) + " is " +
                                  std::to_string(ref.cols()) + "x" + std::to_string(ref.rows()));
    }
  }
  for (int ch : kReflectiveChannels) {
    if (!refl_mult.contains(ch) || !refl_add.contains(ch)) {
      throw std::invalid_argument("missing reflectance rescaling for channel " + std::to_string(ch));
    }
  }
  if (!(sun_elevation_deg <= 90.0 && sun_elevation_deg >= -90.0)) {
    throw std::invalid_argument("sun elevation out of range: " + format_double(sun_elevation_deg));
  }
}

std::map<std::string, std::string> parse_metadata(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;  // END and blank lines
    const std::string key = trim(line.substr(0, eq));
    if (key == "GROUP" || key == "END_GROUP" || key.empty()) continue;
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    out[key] = value;
  }
  return out;
}

Scene load_scene(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("scene directory not found: " + dir.string());

  static const std::regex band_re(R"((?:^|.*_)B([0-9]{1,2})\.TIFF?$)");
  std::map<int, fs::path> band_files;
  std::optional<fs::path> mtl;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = upper(entry.path().filename().string());
    std::smatch m;
    if (std::regex_match(name, m, band_re)) {
      const int ch = std::stoi(m[1].str());
      if (ch == 8 || ch < 1 || ch > 11) continue;
      if (band_files.contains(ch)) {
        throw std::runtime_error("duplicate band files for channel " + std::to_string(ch));
      }
      band_files[ch] = entry.path();
    } else if (name.ends_with("MTL.TXT")) {
      if (mtl) throw std::runtime_error("more than one metadata file in " + dir.string());
      mtl = entry.path();
    }
  }

  for (int ch : kRequiredChannels) {
    if (!band_files.contains(ch)) throw std::runtime_error("missing band file for channel " + std::to_string(ch));
  }
  if (!mtl) throw std::runtime_error("missing metadata (*_MTL.txt) file in " + dir.string());

  std::ifstream in(*mtl);
  if (!in) throw std::runtime_error("cannot open " + mtl->string());
  const auto md = parse_metadata(in);

  Scene scene;
  scene.scene_id = require_key(md, "LANDSAT_SCENE_ID");
  scene.wrs_path = static_cast<int>(numeric_key(md, "WRS_PATH"));
  scene.wrs_row = static_cast<int>(numeric_key(md, "WRS_ROW"));
  scene.acquisition_date = require_key(md, "DATE_ACQUIRED");
  static const std::regex date_re(R"([0-9]{4}-[0-9]{2}-[0-9]{2})");
  if (!std::regex_match(scene.acquisition_date, date_re)) {
    throw std::runtime_error("metadata key DATE_ACQUIRED is not an ISO-8601 date: " + scene.acquisition_date);
  }
  scene.sun_elevation_deg = numeric_key(md, "SUN_ELEVATION");
  for (int ch : kReflectiveChannels) {
    const std::string n = std::to_string(ch);
    scene.refl_mult[ch] = numeric_key(md, "REFLECTANCE_MULT_BAND_" + n);
    scene.refl_add[ch] = numeric_key(md, "REFLECTANCE_ADD_BAND_" + n);
  }

  for (const auto& [ch, path] : band_files) {
    try {
      scene.bands.emplace(ch, tiff::read_u16_band(path));
    } catch (const std::exception& e) {
      throw std::runtime_error("channel " + std::to_string(ch) + ": " + e.what());
    }
  }
  const DnGrid& first = scene.bands.begin()->second;
  for (const auto& [ch, grid] : scene.bands) {
    if (!same_shape(grid, first)) {
      throw std::runtime_error("dimension mismatch: channel " + std::to_string(ch) + " is " +
                               std::to_string(grid.cols()) + "x" + std::to_string(grid.rows()) +
                               ", channel " + std::to_string(scene.bands.begin()->first) + " is " +
                               std::to_string(first.cols()) + "x" + std::to_string(first.rows()));
    }
  }
  scene.validate();
  return scene;
}

void write_scene(const Scene& scene, const fs::path& dir) {
  scene.validate();
  fs::create_directories(dir);
  for (const auto& [ch, grid] : scene.bands) {
    tiff::write_u16(dir / (scene.scene_id + "_B" + std::to_string(ch) + ".TIF"), grid);
  }
  std::ofstream out(dir / (scene.scene_id + "_MTL.txt"));
  if (!out) throw std::runtime_error("cannot write metadata into " + dir.string());
  out << "GROUP = LANDSAT_METADATA_FILE\n"
      << "  GROUP = PRODUCT_METADATA\n"
      << "    LANDSAT_SCENE_ID = \"" << scene.scene_id << "\"\n"
      << "    WRS_PATH = " << scene.wrs_path << "\n"
      << "    WRS_ROW = " << scene.wrs_row << "\n"
      << "    DATE_ACQUIRED = " << scene.acquisition_date << "\n"
      << "    SUN_ELEVATION = " << format_double(scene.sun_elevation_deg) << "\n"
      << "  END_GROUP = PRODUCT_METADATA\n"
      << "  GROUP = RADIOMETRIC_RESCALING\n";
  for (int ch : kReflectiveChannels) {
    out << "    REFLECTANCE_MULT_BAND_" << ch << " = " << format_double(scene.refl_mult.at(ch)) << "\n";
  }
  for (int ch : kReflectiveChannels) {
    out << "    REFLECTANCE_ADD_BAND_" << ch << " = " << format_double(scene.refl_add.at(ch)) << "\n";
  }
  out << "  END_GROUP = RADIOMETRIC_RESCALING\n"
      << "END_GROUP = LANDSAT_METADATA_FILE\n"
      << "END\n";
  if (!out) throw std::runtime_error("failed writing metadata into " + dir.string());
}

BoolGrid nodata_mask(const Scene& scene) { return nodata_mask(scene, {0, scene.height()}); }

BoolGrid nodata_mask(const Scene& scene, RowRange rows) { return all_zero_rows(scene, rows); }

BoolGrid saturation_mask(const Scene& scene, int channel) {
  return saturation_mask(scene, channel, {0, scene.height()});
}

BoolGrid saturation_mask(const Scene& scene, int channel, RowRange rows) {
  return scene.band(channel).middleRows(rows.begin, rows.count) == kSaturatedDn;
}

}  // namespace firescan
