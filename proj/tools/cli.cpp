#include "cli.hpp"

#include "firescan/combine.hpp"
#include "firescan/detectors.hpp"
#include "firescan/metrics.hpp"
#include "firescan/parallel.hpp"
#include "firescan/raster.hpp"
#include "firescan/tiff.hpp"
#include "firescan/tiling.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace firescan::cli {
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

fs::path require_out(const RunConfig& cfg) {
  if (!cfg.out) throw UsageError(cfg.command + " requires --out");
  return *cfg.out;
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

void refuse_clobber(const fs::path& p, bool overwrite) {
  if (!overwrite && fs::exists(p)) {
    throw std::runtime_error(p.string() + " already exists (use --overwrite to replace it)");
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
  if (!os) throw std::runtime_error("failed writing " + p.string());
}

std::vector<Detector> parse_algos(const std::vector<std::string>& names) {
  if (names.empty()) throw UsageError("--algos must name at least one detector");
  std::vector<Detector> out;
  for (const auto& n : names) {
    Detector d;
    try {
      d = parse_detector(n);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
  }
  return out;
}

// Label carried by a mask file name: the text after the last underscore.
std::string label_of(const fs::path& p) {
  const std::string stem = p.stem().string();
  const auto us = stem.rfind('_');
  return us == std::string::npos ? stem : stem.substr(us + 1);
}

std::vector<fs::path> tif_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".tif" || ext == ".tiff") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int label_rank(const std::string& label) {
  for (std::size_t i = 0; i < kAllDetectors.size(); ++i) {
    if (detector_name(kAllDetectors[i]) == label) return static_cast<int>(i);
  }
  return static_cast<int>(kAllDetectors.size());
}

SplitFractions parse_fractions(const std::string& s) {
  const auto parts = split_list(s);
  if (parts.size() != 3) throw UsageError("--split expects three comma-separated fractions");
  try {
    return {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
  } catch (const std::logic_error&) {
    throw UsageError("--split fractions must be numbers");
  }
}

}  // namespace

int cmd_detect(const RunConfig& cfg, std::ostream& out) {
  if (cfg.scenes.size() != 1) throw UsageError("detect takes exactly one --scene");
  const auto detectors = parse_algos(cfg.algos);
  const fs::path out_dir = require_out(cfg);
  const int threads = resolve_thread_count(cfg.threads);

  const Scene scene = load_scene(cfg.scenes.front());
  prepare_out_dir(out_dir);
  const fs::path report_path = out_dir / (scene.scene_id + "_report.txt");
  std::vector<fs::path> mask_paths;
  for (Detector d : detectors) {
    mask_paths.push_back(out_dir / (scene.scene_id + "_" + std::string(detector_name(d)) + ".tif"));
    refuse_clobber(mask_paths.back(), cfg.overwrite);
  }
  refuse_clobber(report_path, cfg.overwrite);

  const auto results = detect_scene(scene, detectors, {.threads = threads});
  std::string report_text = "scene_id = " + scene.scene_id + "\n";
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    const auto& det = results.at(detectors[i]);
    tiff::write_mask(mask_paths[i], det.fire);
    report_text += "\n" + format_report(detectors[i], det.report);
    out << mask_paths[i].string() << "\n";
  }
  write_text(report_path, report_text);
  out << report_path.string() << "\n";
  return kExitOk;
}

int cmd_combine(const RunConfig& cfg, std::ostream& out) {
  if (cfg.mask_files.empty()) throw UsageError("combine needs at least one --masks file");
  if (cfg.combine_mode == CombineMode::none) throw UsageError("combine needs --mode intersection|vote");
  const int n = static_cast<int>(cfg.mask_files.size());
  if (cfg.combine_mode == CombineMode::vote && (cfg.vote_k < 1 || cfg.vote_k > n)) {
    throw UsageError("--k " + std::to_string(cfg.vote_k) + " outside [1, " + std::to_string(n) + "]");
  }
  const fs::path out_dir = require_out(cfg);

  std::vector<FireMask> masks;
  std::vector<std::string> labels;
  for (const auto& p : cfg.mask_files) {
    masks.push_back(tiff::read_mask(p));
    labels.push_back(p.string());
  }
  const MaskSet set(std::move(masks), std::move(labels));
  const FireMask combined = cfg.combine_mode == CombineMode::vote ? vote(set, cfg.vote_k) : intersect(set);

  std::string name = cfg.label;
  if (name.empty()) {
    // Keep the shared `<scene>_` prefix of the inputs so the result sits
    // beside them as another mask label.
    const std::string mode = cfg.combine_mode == CombineMode::vote ? "voting" : "intersection";
    std::optional<std::string> prefix;
    for (const auto& p : cfg.mask_files) {
      const std::string stem = p.stem().string();
      const auto us = stem.rfind('_');
      const std::string pre = us == std::string::npos ? "" : stem.substr(0, us + 1);
      if (!prefix) {
        prefix = pre;
      } else if (*prefix != pre) {
        prefix = "";
      }
    }
    name = prefix.value_or("") + mode;
  }
  prepare_out_dir(out_dir);
  const fs::path dst = out_dir / (name + ".tif");
  refuse_clobber(dst, cfg.overwrite);
  tiff::write_mask(dst, combined);
  out << dst.string() << "\n";
  return kExitOk;
}

int cmd_tile(const RunConfig& cfg, std::ostream& out) {
  if (cfg.scenes.empty()) throw UsageError("tile needs at least one --scene");
  if (cfg.mask_dir.empty()) throw UsageError("tile needs --masks <directory>");
  const fs::path out_dir = require_out(cfg);
  std::optional<SplitFractions> fractions;
  if (cfg.split) fractions = parse_fractions(*cfg.split);
  const int threads = resolve_thread_count(cfg.threads);
  if (!fs::is_directory(cfg.mask_dir)) throw std::runtime_error("mask directory not found: " + cfg.mask_dir.string());

  prepare_out_dir(out_dir);
  const fs::path manifest_path = out_dir / "manifest.csv";
  refuse_clobber(manifest_path, cfg.overwrite);

  const auto mask_files = tif_files(cfg.mask_dir);
  std::vector<Manifest> parts;
  for (const auto& scene_dir : cfg.scenes) {
    const Scene scene = load_scene(scene_dir);
    const std::string prefix = scene.scene_id + "_";
    std::vector<std::pair<std::string, fs::path>> found;
    for (const auto& p : mask_files) {
      const std::string stem = p.stem().string();
      if (stem.size() > prefix.size() && stem.starts_with(prefix)) found.emplace_back(stem.substr(prefix.size()), p);
    }
    if (found.empty()) {
      throw std::runtime_error("no masks named " + prefix + "<label>.tif in " + cfg.mask_dir.string());
    }
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
      const int ra = label_rank(a.first);
      const int rb = label_rank(b.first);
      return ra != rb ? ra < rb : a.first < b.first;
    });
    std::vector<FireMask> masks;
    std::vector<std::string> labels;
    for (const auto& [label, path] : found) {
      masks.push_back(tiff::read_mask(path));
      labels.push_back(label);
    }
    const MaskSet set(std::move(masks), std::move(labels));
    parts.push_back(tile_scene(scene, set, out_dir,
                               {.skip_empty = !cfg.keep_empty, .overwrite = cfg.overwrite, .threads = threads}));
  }
  const Manifest manifest = merge_manifests(parts);
  write_manifest_csv(manifest, manifest_path);
  out << manifest_path.string() << " (" << manifest.records.size() << " patches)\n";

  if (fractions) {
    const auto split = split_manifest(manifest, *fractions, cfg.seed);
    const std::pair<const char*, const Manifest*> outputs[] = {
        {"manifest_train.csv", &split.train}, {"manifest_val.csv", &split.val}, {"manifest_test.csv", &split.test}};
    for (const auto& [name, m] : outputs) {
      const fs::path p = out_dir / name;
      refuse_clobber(p, cfg.overwrite);
      write_manifest_csv(*m, p);
      out << p.string() << " (" << m->records.size() << " patches)\n";
    }
  }
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.pred.empty() || cfg.truth.empty()) throw UsageError("evaluate needs --pred and --truth");
  const int threads = resolve_thread_count(cfg.threads);

  std::vector<std::pair<fs::path, fs::path>> pairs;
  if (fs::is_directory(cfg.truth)) {
    if (!fs::is_directory(cfg.pred)) throw UsageError("--pred must be a directory when --truth is one");
    for (const auto& t : tif_files(cfg.truth)) {
      const fs::path p = cfg.pred / t.filename();
      if (!fs::exists(p)) throw std::runtime_error("no prediction for " + t.filename().string() + " in " + cfg.pred.string());
      pairs.emplace_back(p, t);
    }
    if (pairs.empty()) throw std::runtime_error("no mask files in " + cfg.truth.string());
  } else {
    if (!fs::exists(cfg.truth)) throw std::runtime_error("reference mask not found: " + cfg.truth.string());
    pairs.emplace_back(cfg.pred, cfg.truth);
  }

  std::vector<EvalAccumulator> per_pair(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    per_pair[i] = accumulate(tiff::read_mask(pairs[i].first), tiff::read_mask(pairs[i].second));
  });
  std::map<std::string, EvalAccumulator> by_label;
  for (std::size_t i = 0; i < pairs.size(); ++i) by_label[label_of(pairs[i].second)] += per_pair[i];

  std::vector<LabelledReport> rows;
  for (const auto& [label, acc] : by_label) rows.push_back({label, finalize(acc)});
  std::ostringstream csv;
  write_metrics_csv(rows, csv);
  out << csv.str();
  if (cfg.out) {
    prepare_out_dir(*cfg.out);
    const fs::path p = *cfg.out / "metrics.csv";
    refuse_clobber(p, cfg.overwrite);
    write_text(p, csv.str());
  }
  return kExitOk;
}

int cmd_histogram(const RunConfig& cfg, std::ostream& out) {
  if (cfg.manifest.empty() || cfg.label.empty()) throw UsageError("histogram needs --manifest and --label");
  std::vector<std::int64_t> edges = kDefaultHistogramEdges;
  if (!cfg.edges.empty()) {
    edges.clear();
    try {
      for (const auto& e : split_list(cfg.edges)) edges.push_back(std::stoll(e));
    } catch (const std::logic_error&) {
      throw UsageError("--edges must be comma-separated integers");
    }
  }
  const Manifest manifest = read_manifest_csv(cfg.manifest);
  FireHistogram hist;
  try {
    hist = fire_histogram(manifest, cfg.label, edges);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::ostringstream table;
  write_histogram(hist, table);
  out << table.str();
  if (cfg.out) {
    prepare_out_dir(*cfg.out);
    const fs::path p = *cfg.out / ("histogram_" + cfg.label + ".csv");
    refuse_clobber(p, cfg.overwrite);
    write_text(p, table.str());
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"firescan: active-fire detection, mask fusion, patch tiling and evaluation"};
  app.name("firescan");
  app.require_subcommand(1);

  RunConfig cfg;
  std::string algos = "schroeder,murphy,kumarroy";
  std::string mode;
  std::optional<std::string> out_opt;

  auto add_shared = [&](CLI::App* sub, bool needs_out) {
    auto* o = sub->add_option("--out", out_opt, needs_out ? "Output directory" : "Optional output directory");
    if (needs_out) o->required();
    sub->add_option("--threads", cfg.threads, "Worker threads (default: $FIRESCAN_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--overwrite", cfg.overwrite, "Replace existing outputs");
  };

  auto* detect = app.add_subcommand("detect", "Run detectors over a scene directory");
  detect->add_option("--scene", cfg.scenes, "Scene directory")->required()->expected(1);
  detect->add_option("--algos", algos, "Comma-separated detectors: schroeder,murphy,kumarroy");
  add_shared(detect, true);

  auto* combine = app.add_subcommand("combine", "Fuse mask files by intersection or k-of-n vote");
  combine->add_option("--masks", cfg.mask_files, "Mask TIFFs")->required()->delimiter(',');
  combine->add_option("--mode", mode, "intersection or vote")
      ->required()
      ->check(CLI::IsMember({"intersection", "vote"}));
  combine->add_option("--k", cfg.vote_k, "Votes needed when --mode vote");
  combine->add_option("--label", cfg.label, "Output file stem");
  add_shared(combine, true);

  auto* tile = app.add_subcommand("tile", "Cut scenes and masks into 256x256 patches");
  tile->add_option("--scene", cfg.scenes, "Scene directories")->required()->delimiter(',');
  tile->add_option("--masks", cfg.mask_dir, "Directory of <scene_id>_<label>.tif masks")->required();
  tile->add_flag("--keep-empty", cfg.keep_empty, "Keep tiles without any valid pixel");
  tile->add_option("--split", cfg.split, "train,val,test fractions, e.g. 0.4,0.1,0.5");
  tile->add_option("--seed", cfg.seed, "Shuffle seed for --split");
  add_shared(tile, true);

  auto* evaluate = app.add_subcommand("evaluate", "Global per-pixel metrics of predicted masks");
  evaluate->add_option("--pred", cfg.pred, "Predicted mask file or directory")->required();
  evaluate->add_option("--truth", cfg.truth, "Reference mask file or directory")->required();
  add_shared(evaluate, false);

  auto* histogram = app.add_subcommand("histogram", "Patch counts per fire-pixel-count bucket");
  histogram->add_option("--manifest", cfg.manifest, "manifest.csv")->required();
  histogram->add_option("--label", cfg.label, "Mask label")->required();
  histogram->add_option("--edges", cfg.edges, "Comma-separated bucket edges");
  add_shared(histogram, false);

  std::vector<const char*> argv{"firescan"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  cfg.out = out_opt ? std::optional<fs::path>(*out_opt) : std::nullopt;
  cfg.algos = split_list(algos);
  cfg.combine_mode = mode == "vote" ? CombineMode::vote : mode == "intersection" ? CombineMode::intersection
                                                                                 : CombineMode::none;

  try {
    if (*detect) {
      cfg.command = "detect";
      return cmd_detect(cfg, out);
    }
    if (*combine) {
      cfg.command = "combine";
      return cmd_combine(cfg, out);
    }
    if (*tile) {
      cfg.command = "tile";
      return cmd_tile(cfg, out);
    }
    if (*evaluate) {
      cfg.command = "evaluate";
      return cmd_evaluate(cfg, out);
    }
    cfg.command = "histogram";
    return cmd_histogram(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace firescan::cli
