#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace firescan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

enum class CombineMode { none, intersection, vote };

/// Everything a subcommand may consume after argument parsing.
struct RunConfig {
  std::string command;
  std::vector<std::filesystem::path> scenes;
  std::vector<std::string> algos{"schroeder", "murphy", "kumarroy"};
  std::vector<std::filesystem::path> mask_files;
  std::filesystem::path mask_dir;
  CombineMode combine_mode = CombineMode::none;
  int vote_k = 2;
  std::string label;
  bool keep_empty = false;
  std::optional<std::string> split;
  std::uint64_t seed = 0;
  std::filesystem::path pred;
  std::filesystem::path truth;
  std::filesystem::path manifest;
  std::string edges;
  std::optional<int> threads;
  std::optional<std::filesystem::path> out;
  bool overwrite = false;
};

int cmd_detect(const RunConfig& cfg, std::ostream& out);
int cmd_combine(const RunConfig& cfg, std::ostream& out);
int cmd_tile(const RunConfig& cfg, std::ostream& out);
int cmd_evaluate(const RunConfig& cfg, std::ostream& out);
int cmd_histogram(const RunConfig& cfg, std::ostream& out);

/// Parses arguments (argv[0] excluded) and dispatches. Returns the exit code;
/// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace firescan::cli
