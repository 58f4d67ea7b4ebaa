#include "dtfusion/safety.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dtfusion::metrics {

namespace {

struct EgoProfile {
  double v0;
  double v_floor;  // speed held after braking
  double decel;
  double brake_start;

  bool brakes() const { return v0 > v_floor; }
  double brake_end() const { return brake_start + (v0 - v_floor) / decel; }

  double speed(double t) const {
    if (!brakes() || t < brake_start) return v0;
    if (t >= brake_end()) return v_floor;
    return v0 - decel * (t - brake_start);
  }

  double distance(double t) const {
    if (!brakes() || t < brake_start) return v0 * t;
    const double tau = std::min(t, brake_end()) - brake_start;
    const double braked = v0 * brake_start + v0 * tau - 0.5 * decel * tau * tau;
    return braked + (t > brake_end() ? v_floor * (t - brake_end()) : 0.0);
  }
};

TrajectoryLog replay(const sim::Scenario& sc, const sim::VehicleTrack& lead, const EgoProfile& ego) {
  const sim::VehicleTrack& ego_track = sc.track(sc.ego_id());
  const double half_lengths = 0.5 * (lead.dims.length + ego_track.dims.length);
  TrajectoryLog log;
  log.rows.reserve(sc.timestamps.size());
  for (double t : sc.timestamps) {
    const double lead_x = lead.x0 + lead.speed * t;
    const double ego_x = ego_track.x0 + ego.distance(t);
    log.rows.push_back({t, ego.speed(t), std::max(0.0, lead_x - ego_x - half_lengths), lead.speed});
  }
  return log;
}

}  // namespace

CutInEvent find_cut_in(const sim::Scenario& scenario) {
  const auto& cfg = scenario.config;
  const int ego_lane = cfg.resolved_ego_lane();
  const double ego_y = cfg.lane_center(ego_lane);
  const sim::VehicleTrack& ego = scenario.track(scenario.ego_id());

  std::optional<CutInEvent> best;
  for (const auto& lc : cfg.lane_changes) {
    if (lc.vehicle == scenario.ego_id() || lc.to_lane != ego_lane) continue;
    const sim::VehicleTrack& v = scenario.track(lc.vehicle);
    if (v.x0 + v.speed * lc.start <= ego.x0 + ego.speed * lc.start) continue;

    const double shift = std::abs(v.lane_change_to_y - v.y0);
    const double needed = std::abs(v.y0 - ego_y) - 0.5 * cfg.lane_width - 0.5 * v.dims.width;
    double t_imminent = lc.start;
    if (needed > 0.0) {
      if (shift <= 0.0 || needed >= shift) continue;
      // Invert the (1 - cos(pi tau)) / 2 lateral ramp.
      const double tau = std::acos(1.0 - 2.0 * needed / shift) / std::numbers::pi;
      t_imminent = lc.start + tau * lc.duration;
    }
    if (!best || t_imminent < best->imminent_time) best = CutInEvent{lc.vehicle, t_imminent};
  }
  if (!best) throw NoEvent();
  return *best;
}

ReactionRun scripted_reaction_experiment(const sim::ScenarioConfig& config, double advisory_lead_time) {
  if (!(advisory_lead_time >= 0.0)) throw ConfigError("lead_time", "must be >= 0");
  const sim::Scenario sc = sim::generate_scenario(config);

  ReactionRun run;
  run.event = find_cut_in(sc);
  const sim::VehicleTrack& lead = sc.track(run.event.vehicle);

  const double react = run.event.imminent_time + config.policy.reaction_delay;
  run.brake_start_no_advisory = std::max(0.0, react);
  run.brake_start_advisory = std::max(0.0, react - advisory_lead_time);

  const EgoProfile late{config.ego_speed, lead.speed, config.policy.brake_decel, run.brake_start_no_advisory};
  const EgoProfile early{config.ego_speed, lead.speed, config.policy.brake_decel, run.brake_start_advisory};
  run.no_advisory = replay(sc, lead, late);
  run.advisory = replay(sc, lead, early);
  return run;
}

SafetySummary summarize(const TrajectoryLog& log, double ttc_cap) {
  return {speed_variance(log), average_ttc(log, ttc_cap), min_ttc(log)};
}

}  // namespace dtfusion::metrics
