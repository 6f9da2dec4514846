#include "firescan/detectors.hpp"
#include "firescan/parallel.hpp"

#include <array>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace firescan {

int resolve_thread_count(std::optional<int> requested) {
  if (requested) {
    if (*requested < 1) throw std::invalid_argument("thread count must be at least 1");
    return *requested;
  }
  if (const char* env = std::getenv("FIRESCAN_THREADS"); env && *env) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(std::string("FIRESCAN_THREADS must be a positive integer, got '") + env + "'");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::map<Detector, Detection> detect_scene(const Scene& scene, std::span<const Detector> detectors,
                                           const SceneDetectOptions& options) {
  if (detectors.empty()) throw std::invalid_argument("no detector selected");
  if (options.strip_rows < 1) throw std::invalid_argument("strip_rows must be positive");
  scene.validate();

  bool need_corrected = false;
  bool need_saturation = false;
  for (Detector d : detectors) {
    need_corrected |= d != Detector::schroeder;
    need_saturation |= d == Detector::murphy;
  }
  // Fail before any work when the sun elevation cannot be corrected for.
  if (need_corrected) solar_divisor(scene.sun_elevation_deg);

  const Eigen::Index height = scene.height();
  const Eigen::Index width = scene.width();
  const Eigen::Index strips = (height + options.strip_rows - 1) / options.strip_rows;

  std::map<Detector, Detection> result;
  for (Detector d : detectors) result[d] = {FireMask::Zero(height, width), {}};
  // Reports are kept per strip and reduced in strip order.
  std::vector<std::map<Detector, DetectorReport>> strip_reports(static_cast<std::size_t>(strips));

  static constexpr std::array<int, 7> kDetectorChannels{1, 2, 3, 4, 5, 6, 7};

  parallel_for(static_cast<std::size_t>(strips), options.threads, [&](std::size_t s) {
    const Eigen::Index core_begin = static_cast<Eigen::Index>(s) * options.strip_rows;
    const Eigen::Index core_end = std::min(height, core_begin + options.strip_rows);
    const Eigen::Index ext_begin = std::max<Eigen::Index>(0, core_begin - kStripHalo);
    const Eigen::Index ext_end = std::min(height, core_end + kStripHalo);
    const RowRange ext{ext_begin, ext_end - ext_begin};
    const RowRange core{core_begin - ext_begin, core_end - core_begin};

    const ReflectanceStack uncorrected = to_reflectance(scene, false, ext, kDetectorChannels);
    ReflectanceStack corrected;
    if (need_corrected) corrected = with_solar_correction(uncorrected, scene.sun_elevation_deg);
    BoolGrid sat6;
    BoolGrid sat7;
    if (need_saturation) {
      sat6 = saturation_mask(scene, 6, ext);
      sat7 = saturation_mask(scene, 7, ext);
    }

    for (Detector d : detectors) {
      Detection det;
      switch (d) {
        case Detector::schroeder: det = schroeder_detect(uncorrected, core); break;
        case Detector::murphy: det = murphy_detect(corrected, sat6, sat7, core); break;
        case Detector::kumarroy: det = kumarroy_detect(corrected, core); break;
      }
      result.at(d).fire.middleRows(core_begin, core.count) = det.fire.middleRows(core.begin, core.count);
      strip_reports[s][d] = det.report;
    }
  });

  for (const auto& reports : strip_reports) {
    for (const auto& [d, rep] : reports) result.at(d).report += rep;
  }
  return result;
}

}  // namespace firescan
