#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dtfusion/frame.hpp"
#include "dtfusion/geometry.hpp"

namespace dtfusion::sim {

/// Camera placement relative to the ego centroid, in the ego body frame
/// (forward, left, up), plus a downward pitch in radians.
struct CameraMount {
  double forward = 1.0;
  double left = 0.0;
  double up = 0.6;
  double pitch = 0.0;
};

/// Fixes a vehicle's lane, longitudinal start position and speed instead of
/// drawing them.
struct VehiclePlacement {
  VehicleId id = 0;
  int lane = 0;
  double x = 0.0;
  double speed = 0.0;
  std::optional<Dimensions> dims;
  std::optional<DriverType> driver_type;
};

/// Lateral sinusoidal ramp from the vehicle's current lateral position to
/// the center of `to_lane` over [start, start + duration].
struct LaneChange {
  VehicleId vehicle = 0;
  double start = 0.0;
  double duration = 3.0;
  int to_lane = 0;
};

/// Scripted ego driver used by the cut-in reaction experiment.
struct ReactionPolicy {
  double reaction_delay = 1.5;  // seconds after the cut-in becomes imminent
  double brake_decel = 4.0;     // m/s^2
};

struct ScenarioConfig {
  int lanes = 3;
  double lane_width = 3.5;
  int n_vehicles = 6;
  int ego_index = 0;
  int ego_lane = -1;  // < 0 selects the middle lane
  double ego_speed = 25.0;
  CameraMount camera_mount;
  geometry::CameraIntrinsics intrinsics{0.004, 5e-6, 5e-6, 320.0, 180.0, 640, 360};
  double duration = 10.0;
  double frame_rate = 10.0;
  double gnss_sigma = 0.0;
  double box_jitter_sigma = 0.0;
  double drop_prob = 0.0;
  double merge_prob = 0.0;
  int overlap_injection = 0;
  double twin_latency = 0.0;
  std::uint64_t seed = 0;

  // Random traffic: longitudinal spawn window ahead of the ego and speed
  // spread around ego_speed.
  double spawn_min = 15.0;
  double spawn_max = 90.0;
  double speed_spread = 1.0;
  // Injected overlap pairs: range window of the far member and the
  // near/far range ratio window.
  double overlap_far_min = 30.0;
  double overlap_far_max = 50.0;
  double overlap_ratio_min = 0.72;
  double overlap_ratio_max = 0.85;
  // Fraction of the far member's rear face left uncovered by the near one.
  double overlap_visible_min = 0.3;
  double overlap_visible_max = 0.7;

  std::vector<VehiclePlacement> placements;
  std::vector<LaneChange> lane_changes;
  ReactionPolicy policy;

  /// Throws ConfigError naming the first violated field.
  void validate() const;
  int num_frames() const;
  int resolved_ego_lane() const { return ego_lane < 0 ? lanes / 2 : ego_lane; }
  double lane_center(int lane) const { return lane * lane_width; }
};

/// Analytic motion of one vehicle: constant longitudinal speed plus an
/// optional lateral lane-change ramp.
struct VehicleTrack {
  VehicleId id = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double speed = 0.0;
  Dimensions dims;
  DriverType driver_type = DriverType::normal;
  std::optional<LaneChange> lane_change;
  double lane_change_to_y = 0.0;

  double lateral_at(double t) const;
  double lateral_rate_at(double t) const;
  VehicleState state_at(double t) const;
};

/// Injected near-collinear pair (far member is the natural target).
struct OverlapPair {
  VehicleId far = 0;
  VehicleId near = 0;
};

struct Scenario {
  ScenarioConfig config;
  std::vector<VehicleTrack> tracks;  // ordered by id
  std::vector<OverlapPair> overlap_pairs;
  std::vector<double> timestamps;
  std::vector<std::vector<VehicleState>> steps;  // truth per time step, ordered by id

  const VehicleTrack& track(VehicleId id) const;
  VehicleId ego_id() const { return config.ego_index; }
};

/// Builds the vehicle tracks and samples them at every frame time. Throws
/// ConfigError if the config is invalid or vehicles cannot be placed.
Scenario generate_scenario(const ScenarioConfig& config);

/// Camera pose of the ego-mounted camera for a given ego state.
geometry::CameraPose camera_pose_for(const VehicleState& ego, const CameraMount& mount);

/// The 8 corners of the vehicle cuboid, world frame.
std::vector<geometry::WorldPoint> cuboid_corners(const VehicleState& v);

/// Axis-aligned hull of the projected cuboid (near-plane clipped), clamped to
/// the image. nullopt when nothing of the cuboid is in front of the camera or
/// the clamped box is empty.
std::optional<BoundingBox> project_cuboid(const VehicleState& v, const geometry::CameraPose& pose,
                                          const geometry::CameraIntrinsics& intr);

/// Constant-fill range raster: each vehicle paints every pixel its projected
/// box touches with the camera-to-centroid range, far to near.
DepthImage render_depth(std::span<const VehicleState> vehicles, const geometry::CameraPose& pose,
                        const geometry::CameraIntrinsics& intr);

struct DetectionNoise {
  double box_jitter_sigma = 0.0;
  double drop_prob = 0.0;
  double merge_prob = 0.0;
};

/// Synthetic detector: drop, jitter, then merge overlapping pairs into
/// their union. Input order is preserved for surviving boxes.
std::vector<BoundingBox> perturb_detections(std::span<const BoundingBox> gt, const DetectionNoise& noise,
                                            int image_w, int image_h, std::uint64_t seed);

/// Twin records for every non-ego vehicle: truth position at
/// max(0, t - latency) plus per-axis Gaussian noise.
std::vector<TwinRecord> twin_snapshot(const Scenario& scenario, double t, double twin_latency,
                                      double gnss_sigma, std::uint64_t seed);

/// Assembles frame `index` of the scenario (ground truth, depth, detections,
/// twin).
Frame build_frame(const Scenario& scenario, std::size_t index);

}  // namespace dtfusion::sim
