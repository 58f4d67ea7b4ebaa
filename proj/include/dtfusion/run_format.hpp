#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dtfusion/frame.hpp"
#include "dtfusion/fusion.hpp"
#include "dtfusion/metrics.hpp"
#include "dtfusion/scene.hpp"

namespace dtfusion::run {

// ---- depth raster: "DPT1", u32 width, u32 height, float32 ranges (all LE) --

/// Ranges are narrowed to float32; values representable in float32
/// round-trip bit-exactly and +inf is stored as 0x7F800000.
void write_depth_raster(const DepthImage& img, std::ostream& out);
void save_depth_raster(const DepthImage& img, const std::filesystem::path& path);
DepthImage read_depth_raster(std::istream& in, const std::string& name = "<stream>");
DepthImage load_depth_raster(const std::filesystem::path& path);

// ---- JSON documents -------------------------------------------------------

std::string scenario_config_to_json(const sim::ScenarioConfig& cfg);
/// Missing keys keep their defaults; the result is validated. Throws
/// ConfigError naming the offending field.
sim::ScenarioConfig scenario_config_from_json(const std::string& text);
sim::ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// Frame metadata (everything except the depth raster).
std::string frame_to_json(const Frame& frame);
Frame frame_from_json(const std::string& text, const std::string& name = "<frame>");

// ---- run directory --------------------------------------------------------

std::filesystem::path frame_json_path(const std::filesystem::path& dir, std::int64_t index);
std::filesystem::path frame_depth_path(const std::filesystem::path& dir, std::int64_t index);

/// Generates the scenario and writes scenario.json plus frames/NNNNNN.{json,dpt}.
/// Returns the frame count.
std::size_t write_run_directory(const sim::ScenarioConfig& cfg, const std::filesystem::path& dir);

/// Number of dense frame files frames/000000.json, 000001.json, ...
std::size_t count_frames(const std::filesystem::path& dir);

/// Loads frame metadata; loads the raster only when `with_depth` is set.
Frame load_frame(const std::filesystem::path& dir, std::int64_t index, bool with_depth);

// ---- results CSV: frame,mode,matched,box_index,delta_d,iou_with_truth,reason

struct ResultRow {
  std::int64_t frame = 0;
  fusion::Mode mode = fusion::Mode::baseline;
  fusion::MatchOutcome outcome;
  // Empty when the target has no ground-truth box in this frame; such rows
  // are excluded from accuracy.
  std::optional<double> iou_with_truth;
};

inline constexpr const char* kResultsHeader = "frame,mode,matched,box_index,delta_d,iou_with_truth,reason";

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out);
std::vector<ResultRow> read_results_csv(std::istream& in, const std::string& name = "<results>");

/// Rows that carry a ground-truth IoU, as evaluation records.
std::vector<metrics::EvalRecord> to_eval_records(const std::vector<ResultRow>& rows);

// ---- trajectory log CSV: t,ego_speed,gap_to_lead,lead_speed ---------------

inline constexpr const char* kTrajectoryHeader = "t,ego_speed,gap_to_lead,lead_speed";

void write_trajectory_csv(const metrics::TrajectoryLog& log, std::ostream& out);
metrics::TrajectoryLog read_trajectory_csv(std::istream& in, const std::string& name = "<trajectory>");

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace dtfusion::run
