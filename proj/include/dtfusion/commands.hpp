#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dtfusion/frame.hpp"
#include "dtfusion/fusion.hpp"

// Subcommand bodies behind the dtfusion CLI. Each returns the process exit
// code: 0 success, 1 usage/config error, 2 data/I/O error. Diagnostics go to
// `err`.
namespace dtfusion::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

struct GenOptions {
  std::filesystem::path config;
  std::filesystem::path out;
};

struct RunOptions {
  std::filesystem::path frames;
  VehicleId target = 0;
  std::string mode = "fused";
  double th = 0.1;
  int n = 25;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  // Replaces the detections stored in the frames (JSONL, keyed by frame index).
  std::optional<std::filesystem::path> detections;
  std::set<int> classes;
};

struct EvalOptions {
  std::vector<std::filesystem::path> results;
  std::string taus = "0.5:0.9:0.1";
  std::filesystem::path out;
};

struct SafetyOptions {
  std::filesystem::path scenario;
  double lead_time = 2.0;
  std::filesystem::path out;
  std::optional<std::filesystem::path> logs;
};

int cmd_gen(const GenOptions& opts, std::ostream& err);
int cmd_run(const RunOptions& opts, std::ostream& err);
int cmd_eval(const EvalOptions& opts, std::ostream& err);
int cmd_safety(const SafetyOptions& opts, std::ostream& err);

/// Parses "start:stop:step" into an inclusive tau grid. Throws ConfigError.
std::vector<double> parse_tau_spec(const std::string& spec);

}  // namespace dtfusion::cli
