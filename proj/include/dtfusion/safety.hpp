#pragma once

#include "dtfusion/metrics.hpp"
#include "dtfusion/scene.hpp"

namespace dtfusion::metrics {

class NoEvent : public Error {
 public:
  NoEvent() : Error("scenario has no cut-in into the ego lane") {}
};

struct CutInEvent {
  VehicleId vehicle = 0;
  double imminent_time = 0.0;  // the cutting vehicle first intrudes the ego lane
};

/// The first lane change into the ego lane by a vehicle ahead of the ego.
/// Throws NoEvent.
CutInEvent find_cut_in(const sim::Scenario& scenario);

struct ReactionRun {
  CutInEvent event;
  double brake_start_no_advisory = 0.0;
  double brake_start_advisory = 0.0;
  TrajectoryLog no_advisory;
  TrajectoryLog advisory;
};

/// Scripted driver replayed twice on the same scenario: without advisory the
/// ego brakes `policy.reaction_delay` after the cut-in turns imminent; with
/// the advisory it brakes `advisory_lead_time` earlier. Braking is constant
/// deceleration down to the cutting vehicle's speed, then speed matching.
ReactionRun scripted_reaction_experiment(const sim::ScenarioConfig& config, double advisory_lead_time);

struct SafetySummary {
  double speed_variance = 0.0;
  std::optional<double> avg_ttc;
  std::optional<double> min_ttc;
};

SafetySummary summarize(const TrajectoryLog& log, double ttc_cap = kDefaultTtcCap);

}  // namespace dtfusion::metrics
