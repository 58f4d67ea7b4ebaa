#include "dtfusion/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dtfusion::metrics {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double accuracy_at(std::span<const EvalRecord> records, double tau) {
  if (records.empty()) throw EmptyInput();
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau", "must lie in (0, 1]");
  const auto hits = std::count_if(records.begin(), records.end(), [&](const EvalRecord& r) {
    return std::holds_alternative<fusion::Matched>(r.outcome) && r.iou_with_truth >= tau;
  });
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

std::vector<CurvePoint> accuracy_curve(std::span<const EvalRecord> records, std::span<const double> taus) {
  if (records.empty() || taus.empty()) throw EmptyInput();
  if (!std::is_sorted(taus.begin(), taus.end())) throw ConfigError("taus", "must be ascending");
  std::vector<CurvePoint> out;
  out.reserve(taus.size());
  for (double tau : taus) out.push_back({tau, accuracy_at(records, tau)});
  return out;
}

std::vector<double> tau_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw ConfigError("taus", "step must be > 0");
  if (!(start <= stop)) throw ConfigError("taus", "start must not exceed stop");
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    // Snap to 12 decimals so 0.5 + 2 * 0.1 prints and compares as 0.7.
    out.push_back(std::round((start + i * step) * 1e12) / 1e12);
  }
  return out;
}

void TrajectoryLog::validate() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].gap_to_lead < 0.0) throw DataError("trajectory row " + std::to_string(i) + ": negative gap");
    if (i > 0 && !(rows[i].t > rows[i - 1].t)) {
      throw DataError("trajectory row " + std::to_string(i) + ": time not strictly increasing");
    }
  }
}

double speed_variance(const TrajectoryLog& log) {
  if (log.rows.empty()) throw EmptyInput();
  double mean = 0.0;
  for (const auto& r : log.rows) mean += r.ego_speed;
  mean /= static_cast<double>(log.rows.size());
  double acc = 0.0;
  for (const auto& r : log.rows) acc += (r.ego_speed - mean) * (r.ego_speed - mean);
  return acc / static_cast<double>(log.rows.size());
}

std::vector<TtcSample> ttc_series(const TrajectoryLog& log) {
  if (log.rows.empty()) throw EmptyInput();
  std::vector<TtcSample> out;
  out.reserve(log.rows.size());
  for (const auto& r : log.rows) {
    const double closing = r.ego_speed - r.lead_speed;
    TtcSample s{r.t, std::nullopt};
    if (closing > 0.0) s.ttc = r.gap_to_lead / closing;
    out.push_back(s);
  }
  return out;
}

std::optional<double> average_ttc(const TrajectoryLog& log, double cap) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : ttc_series(log)) {
    if (s.ttc && *s.ttc <= cap) {
      sum += *s.ttc;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::optional<double> min_ttc(const TrajectoryLog& log) {
  std::optional<double> best;
  for (const auto& s : ttc_series(log)) {
    if (s.ttc && (!best || *s.ttc < *best)) best = s.ttc;
  }
  return best;
}

}  // namespace dtfusion::metrics
