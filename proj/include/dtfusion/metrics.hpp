#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dtfusion/frame.hpp"
#include "dtfusion/fusion.hpp"

namespace dtfusion::metrics {

class EmptyInput : public Error {
 public:
  EmptyInput() : Error("metric needs at least one input") {}
};

struct EvalRecord {
  std::int64_t frame = 0;
  fusion::Mode mode = fusion::Mode::baseline;
  fusion::MatchOutcome outcome;
  double iou_with_truth = 0.0;  // 0 when unmatched
};

double iou(const BoundingBox& a, const BoundingBox& b);

/// Share of records whose IoU reaches tau. Unmatched records count as
/// failures. Throws EmptyInput.
double accuracy_at(std::span<const EvalRecord> records, double tau);

struct CurvePoint {
  double tau = 0.0;
  double accuracy = 0.0;
};

std::vector<CurvePoint> accuracy_curve(std::span<const EvalRecord> records, std::span<const double> taus);

/// Inclusive arithmetic progression start, start + step, ... <= stop, with
/// values snapped to the step grid so 0.5:0.9:0.1 yields exactly 5 points.
std::vector<double> tau_grid(double start, double stop, double step);

struct TrajectoryRow {
  double t = 0.0;
  double ego_speed = 0.0;
  double gap_to_lead = 0.0;
  double lead_speed = 0.0;
};

struct TrajectoryLog {
  std::vector<TrajectoryRow> rows;

  /// Throws DataError unless t is strictly increasing and gaps are >= 0.
  void validate() const;
};

/// Population variance of ego speed. Throws EmptyInput.
double speed_variance(const TrajectoryLog& log);

struct TtcSample {
  double t = 0.0;
  std::optional<double> ttc;  // empty when the ego is not closing in
};

/// gap / (ego_speed - lead_speed) per row, undefined unless closing.
std::vector<TtcSample> ttc_series(const TrajectoryLog& log);

inline constexpr double kDefaultTtcCap = 20.0;

/// Mean TTC over rows where it is defined and <= cap; nullopt when no row
/// qualifies.
std::optional<double> average_ttc(const TrajectoryLog& log, double cap = kDefaultTtcCap);
std::optional<double> min_ttc(const TrajectoryLog& log);

}  // namespace dtfusion::metrics
