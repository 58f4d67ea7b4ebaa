#include "dtfusion/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "dtfusion/seed.hpp"

namespace dtfusion::sim {

using geometry::CameraIntrinsics;
using geometry::CameraPose;
using geometry::WorldPoint;

namespace {

constexpr double kNearPlane = 0.05;
constexpr int kCarClassId = 2;
constexpr int kPlacementAttempts = 2000;
constexpr double kPairSpeedJitter = 0.1;
constexpr double kMinLongitudinalGap = 2.0;

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ConfigError(field, what);
}

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

struct Footprint {
  double x_min, x_max, y_min, y_max;
};

Footprint footprint(const VehicleTrack& t) {
  return {t.x0 - 0.5 * t.dims.length, t.x0 + 0.5 * t.dims.length, t.y0 - 0.5 * t.dims.width,
          t.y0 + 0.5 * t.dims.width};
}

bool conflicts(const VehicleTrack& a, const VehicleTrack& b) {
  const Footprint fa = footprint(a);
  const Footprint fb = footprint(b);
  const bool lateral = fa.y_min < fb.y_max + 0.2 && fb.y_min < fa.y_max + 0.2;
  const bool longitudinal =
      fa.x_min < fb.x_max + kMinLongitudinalGap && fb.x_min < fa.x_max + kMinLongitudinalGap;
  return lateral && longitudinal;
}

Dimensions random_car(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> len(4.2, 4.9), wid(1.75, 1.9), hgt(1.4, 1.6);
  return {len(rng), wid(rng), hgt(rng)};
}

DriverType random_driver(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 2);
  return static_cast<DriverType>(pick(rng));
}

}  // namespace

void ScenarioConfig::validate() const {
  require(lanes >= 1, "lanes", "must be >= 1");
  require(lane_width > 0.0, "lane_width", "must be > 0");
  require(n_vehicles >= 1, "n_vehicles", "must be >= 1");
  require(ego_index >= 0 && ego_index < n_vehicles, "ego_index", "must index a vehicle");
  require(ego_lane < lanes, "ego_lane", "must be < lanes");
  require(ego_speed >= 0.0, "ego_speed", "must be >= 0");
  try {
    intrinsics.validate();
  } catch (const geometry::InvalidCamera& e) {
    throw ConfigError("intrinsics", e.what());
  }
  require(duration > 0.0, "duration", "must be > 0");
  require(frame_rate > 0.0, "frame_rate", "must be > 0");
  require(gnss_sigma >= 0.0, "gnss_sigma", "must be >= 0");
  require(box_jitter_sigma >= 0.0, "box_jitter_sigma", "must be >= 0");
  require(probability(drop_prob), "drop_prob", "must lie in [0, 1]");
  require(probability(merge_prob), "merge_prob", "must lie in [0, 1]");
  require(overlap_injection >= 0, "overlap_injection", "must be >= 0");
  require(2 * overlap_injection <= n_vehicles - 1, "overlap_injection",
          "needs two non-ego vehicles per injected pair");
  require(twin_latency >= 0.0, "twin_latency", "must be >= 0");
  require(spawn_min > 0.0 && spawn_min < spawn_max, "spawn_min", "need 0 < spawn_min < spawn_max");
  require(overlap_far_min > 0.0 && overlap_far_min <= overlap_far_max, "overlap_far_min",
          "need 0 < overlap_far_min <= overlap_far_max");
  require(overlap_ratio_min > 0.0 && overlap_ratio_min <= overlap_ratio_max && overlap_ratio_max < 1.0,
          "overlap_ratio_min", "need 0 < overlap_ratio_min <= overlap_ratio_max < 1");
  require(overlap_visible_min >= 0.0 && overlap_visible_min <= overlap_visible_max && overlap_visible_max <= 1.0,
          "overlap_visible_min", "need 0 <= overlap_visible_min <= overlap_visible_max <= 1");
  require(speed_spread >= 0.0, "speed_spread", "must be >= 0");
  require(policy.reaction_delay >= 0.0, "policy.reaction_delay", "must be >= 0");
  require(policy.brake_decel > 0.0, "policy.brake_decel", "must be > 0");

  std::set<VehicleId> placed;
  for (const auto& p : placements) {
    require(p.id >= 0 && p.id < n_vehicles && p.id != ego_index, "placements.id",
            "must name a non-ego vehicle");
    require(placed.insert(p.id).second, "placements.id", "duplicate vehicle");
    require(p.lane >= 0 && p.lane < lanes, "placements.lane", "must be a valid lane");
    require(p.speed >= 0.0, "placements.speed", "must be >= 0");
  }
  std::set<VehicleId> changing;
  for (const auto& lc : lane_changes) {
    require(lc.vehicle >= 0 && lc.vehicle < n_vehicles, "lane_changes.vehicle", "must name a vehicle");
    require(changing.insert(lc.vehicle).second, "lane_changes.vehicle", "one lane change per vehicle");
    require(lc.start >= 0.0, "lane_changes.start", "must be >= 0");
    require(lc.duration > 0.0, "lane_changes.duration", "must be > 0");
    require(lc.to_lane >= 0 && lc.to_lane < lanes, "lane_changes.to_lane", "must be a valid lane");
  }
}

int ScenarioConfig::num_frames() const {
  return std::max(1, static_cast<int>(std::lround(duration * frame_rate)));
}

double VehicleTrack::lateral_at(double t) const {
  if (!lane_change || t <= lane_change->start) return y0;
  const double tau = (t - lane_change->start) / lane_change->duration;
  if (tau >= 1.0) return lane_change_to_y;
  return y0 + (lane_change_to_y - y0) * 0.5 * (1.0 - std::cos(std::numbers::pi * tau));
}

double VehicleTrack::lateral_rate_at(double t) const {
  if (!lane_change || t <= lane_change->start) return 0.0;
  const double tau = (t - lane_change->start) / lane_change->duration;
  if (tau >= 1.0) return 0.0;
  return (lane_change_to_y - y0) * std::numbers::pi / (2.0 * lane_change->duration) *
         std::sin(std::numbers::pi * tau);
}

VehicleState VehicleTrack::state_at(double t) const {
  const double rate = lateral_rate_at(t);
  VehicleState s;
  s.id = id;
  s.position = {x0 + speed * t, lateral_at(t), 0.5 * dims.height};
  s.heading = std::atan2(rate, speed);
  s.speed = std::hypot(speed, rate);
  s.dims = dims;
  s.driver_type = driver_type;
  return s;
}

const VehicleTrack& Scenario::track(VehicleId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tracks.size()) {
    throw DataError("no vehicle with id " + std::to_string(id));
  }
  return tracks[static_cast<std::size_t>(id)];
}

Scenario generate_scenario(const ScenarioConfig& config) {
  config.validate();
  std::mt19937_64 rng(derive_seed(config.seed, {0x5CE7E}));

  const int n = config.n_vehicles;
  const VehicleId ego = config.ego_index;
  std::vector<std::optional<VehicleTrack>> slots(static_cast<std::size_t>(n));

  VehicleTrack ego_track;
  ego_track.id = ego;
  ego_track.y0 = config.lane_center(config.resolved_ego_lane());
  ego_track.speed = config.ego_speed;
  slots[static_cast<std::size_t>(ego)] = ego_track;

  auto fits = [&](const VehicleTrack& cand) {
    return std::none_of(slots.begin(), slots.end(),
                        [&](const auto& other) { return other && conflicts(cand, *other); });
  };

  for (const auto& p : config.placements) {
    VehicleTrack t;
    t.id = p.id;
    t.x0 = p.x;
    t.y0 = config.lane_center(p.lane);
    t.speed = p.speed;
    t.dims = p.dims.value_or(Dimensions{});
    t.driver_type = p.driver_type.value_or(DriverType::normal);
    slots[static_cast<std::size_t>(p.id)] = t;
  }

  std::vector<VehicleId> free_ids;
  for (VehicleId id = 0; id < n; ++id) {
    if (!slots[static_cast<std::size_t>(id)]) free_ids.push_back(id);
  }
  if (static_cast<int>(free_ids.size()) < 2 * config.overlap_injection) {
    throw ConfigError("overlap_injection", "not enough unplaced vehicles for the injected pairs");
  }

  const double cam_x = config.camera_mount.forward;
  const double cam_y = ego_track.y0 + config.camera_mount.left;
  const double road_lo = config.lane_center(0) - 0.5 * config.lane_width;
  const double road_hi = config.lane_center(config.lanes - 1) + 0.5 * config.lane_width;

  std::vector<OverlapPair> pairs;
  std::size_t next_free = 0;
  for (int k = 0; k < config.overlap_injection; ++k) {
    const VehicleId far_id = free_ids[next_free++];
    const VehicleId near_id = free_ids[next_free++];
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      std::uniform_int_distribution<int> lane_pick(0, config.lanes - 1);
      std::uniform_real_distribution<double> range(config.overlap_far_min, config.overlap_far_max);
      std::uniform_real_distribution<double> ratio(config.overlap_ratio_min, config.overlap_ratio_max);
      std::uniform_real_distribution<double> visible(config.overlap_visible_min, config.overlap_visible_max);
      std::uniform_real_distribution<double> speed_jitter(-kPairSpeedJitter, kPairSpeedJitter);

      VehicleTrack far;
      far.id = far_id;
      far.dims = random_car(rng);
      far.driver_type = random_driver(rng);
      const double far_range = range(rng);
      far.x0 = cam_x + far_range;
      far.y0 = config.lane_center(lane_pick(rng));

      VehicleTrack near;
      near.id = near_id;
      near.dims = random_car(rng);
      near.driver_type = random_driver(rng);
      const double near_range = ratio(rng) * far_range;
      // Bearings as lateral/forward slopes, exact for the rear faces. The near
      // member's inner edge leaves `visible` of the far rear face uncovered.
      const double sign = (rng() & 1u) ? 1.0 : -1.0;
      const double far_half = 0.5 * far.dims.width / far_range;
      const double edge = (far.y0 - cam_y) / far_range + sign * far_half * (2.0 * visible(rng) - 1.0);
      const double bearing = edge + sign * 0.5 * near.dims.width / near_range;
      near.x0 = cam_x + near_range;
      near.y0 = cam_y + near_range * bearing;

      far.speed = near.speed = config.ego_speed + speed_jitter(rng);

      if (near.y0 - 0.5 * near.dims.width < road_lo || near.y0 + 0.5 * near.dims.width > road_hi) continue;
      if (!fits(far)) continue;
      slots[static_cast<std::size_t>(far_id)] = far;
      if (!fits(near)) {
        slots[static_cast<std::size_t>(far_id)].reset();
        continue;
      }
      slots[static_cast<std::size_t>(near_id)] = near;
      placed = true;
    }
    if (!placed) throw ConfigError("overlap_injection", "could not place an injected overlap pair");
    pairs.push_back({far_id, near_id});
  }

  for (; next_free < free_ids.size(); ++next_free) {
    const VehicleId id = free_ids[next_free];
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      std::uniform_int_distribution<int> lane_pick(0, config.lanes - 1);
      std::uniform_real_distribution<double> ahead(config.spawn_min, config.spawn_max);
      std::uniform_real_distribution<double> spread(-config.speed_spread, config.speed_spread);
      VehicleTrack t;
      t.id = id;
      t.dims = random_car(rng);
      t.driver_type = random_driver(rng);
      t.x0 = cam_x + ahead(rng);
      t.y0 = config.lane_center(lane_pick(rng));
      t.speed = std::max(0.0, config.ego_speed + spread(rng));
      if (fits(t)) {
        slots[static_cast<std::size_t>(id)] = t;
        placed = true;
      }
    }
    if (!placed) throw ConfigError("n_vehicles", "could not place every vehicle without overlap");
  }

  Scenario sc;
  sc.config = config;
  sc.overlap_pairs = std::move(pairs);
  for (auto& slot : slots) sc.tracks.push_back(*slot);
  for (const auto& lc : config.lane_changes) {
    auto& t = sc.tracks[static_cast<std::size_t>(lc.vehicle)];
    t.lane_change = lc;
    t.lane_change_to_y = config.lane_center(lc.to_lane);
  }

  const int frames = config.num_frames();
  sc.timestamps.reserve(frames);
  sc.steps.reserve(frames);
  for (int i = 0; i < frames; ++i) {
    const double t = i / config.frame_rate;
    sc.timestamps.push_back(t);
    std::vector<VehicleState> states;
    states.reserve(sc.tracks.size());
    for (const auto& tr : sc.tracks) states.push_back(tr.state_at(t));
    sc.steps.push_back(std::move(states));
  }
  return sc;
}

CameraPose camera_pose_for(const VehicleState& ego, const CameraMount& mount) {
  const Eigen::Vector3d fwd(std::cos(ego.heading), std::sin(ego.heading), 0.0);
  const Eigen::Vector3d left(-std::sin(ego.heading), std::cos(ego.heading), 0.0);
  const Eigen::Vector3d up(0.0, 0.0, 1.0);

  const Eigen::Vector3d z_axis = std::cos(mount.pitch) * fwd - std::sin(mount.pitch) * up;
  const Eigen::Vector3d y_axis = -std::sin(mount.pitch) * fwd - std::cos(mount.pitch) * up;
  const Eigen::Vector3d x_axis = y_axis.cross(z_axis);

  CameraPose pose;
  pose.rotation.col(0) = x_axis;
  pose.rotation.col(1) = y_axis;
  pose.rotation.col(2) = z_axis;
  pose.translation = ego.position.vec() + mount.forward * fwd + mount.left * left + mount.up * up;
  return pose;
}

std::vector<WorldPoint> cuboid_corners(const VehicleState& v) {
  const double c = std::cos(v.heading);
  const double s = std::sin(v.heading);
  std::vector<WorldPoint> corners;
  corners.reserve(8);
  // Corner k has bit 0 -> length sign, bit 1 -> width sign, bit 2 -> height sign.
  for (int k = 0; k < 8; ++k) {
    const double lx = ((k & 1) ? 0.5 : -0.5) * v.dims.length;
    const double ly = ((k & 2) ? 0.5 : -0.5) * v.dims.width;
    const double lz = ((k & 4) ? 0.5 : -0.5) * v.dims.height;
    corners.push_back({v.position.x + c * lx - s * ly, v.position.y + s * lx + c * ly, v.position.z + lz});
  }
  return corners;
}

std::optional<BoundingBox> project_cuboid(const VehicleState& v, const CameraPose& pose,
                                          const CameraIntrinsics& intr) {
  std::array<Eigen::Vector3d, 8> cam;
  const auto corners = cuboid_corners(v);
  for (int k = 0; k < 8; ++k) cam[k] = geometry::world_to_camera(corners[k], pose).vec();

  std::vector<Eigen::Vector3d> visible;
  for (int k = 0; k < 8; ++k) {
    if (cam[k].z() >= kNearPlane) visible.push_back(cam[k]);
  }
  // Edges join corners that differ in exactly one bit; clip those crossing
  // the near plane.
  for (int a = 0; a < 8; ++a) {
    for (int bit : {1, 2, 4}) {
      const int b = a | bit;
      if (b == a) continue;
      const double za = cam[a].z() - kNearPlane;
      const double zb = cam[b].z() - kNearPlane;
      if ((za < 0.0) != (zb < 0.0)) {
        const double s = za / (za - zb);
        visible.push_back(cam[a] + s * (cam[b] - cam[a]));
      }
    }
  }
  if (visible.empty()) return std::nullopt;

  BoundingBox box;
  box.x_min = box.y_min = std::numeric_limits<double>::infinity();
  box.x_max = box.y_max = -std::numeric_limits<double>::infinity();
  for (const auto& p : visible) {
    const auto px = geometry::camera_to_pixel(geometry::CameraPoint::from(p), intr);
    box.x_min = std::min(box.x_min, px.u);
    box.x_max = std::max(box.x_max, px.u);
    box.y_min = std::min(box.y_min, px.v);
    box.y_max = std::max(box.y_max, px.v);
  }
  box.x_min = std::clamp(box.x_min, 0.0, static_cast<double>(intr.width));
  box.x_max = std::clamp(box.x_max, 0.0, static_cast<double>(intr.width));
  box.y_min = std::clamp(box.y_min, 0.0, static_cast<double>(intr.height));
  box.y_max = std::clamp(box.y_max, 0.0, static_cast<double>(intr.height));
  if (!box.is_valid()) return std::nullopt;
  box.class_id = kCarClassId;
  box.source = BoxSource::ground_truth;
  return box;
}

DepthImage render_depth(std::span<const VehicleState> vehicles, const CameraPose& pose,
                        const CameraIntrinsics& intr) {
  DepthImage img(intr.width, intr.height);
  const WorldPoint origin = pose.origin();

  struct Item {
    double range;
    const VehicleState* v;
  };
  std::vector<Item> order;
  order.reserve(vehicles.size());
  for (const auto& v : vehicles) order.push_back({geometry::gnss_range(origin, v.position), &v});
  std::stable_sort(order.begin(), order.end(), [](const Item& a, const Item& b) { return a.range > b.range; });

  for (const auto& item : order) {
    const auto box = project_cuboid(*item.v, pose, intr);
    if (!box) continue;
    // Every pixel the box touches, including partially covered ones.
    const int c0 = std::max(0, static_cast<int>(std::floor(box->x_min)));
    const int c1 = std::min(intr.width, static_cast<int>(std::ceil(box->x_max)));
    const int r0 = std::max(0, static_cast<int>(std::floor(box->y_min)));
    const int r1 = std::min(intr.height, static_cast<int>(std::ceil(box->y_max)));
    for (int row = r0; row < r1; ++row) {
      for (int col = c0; col < c1; ++col) img.at(col, row) = item.range;
    }
  }
  return img;
}

std::vector<BoundingBox> perturb_detections(std::span<const BoundingBox> gt, const DetectionNoise& noise,
                                            int image_w, int image_h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution drop(noise.drop_prob);
  std::vector<BoundingBox> out;
  out.reserve(gt.size());

  for (const auto& g : gt) {
    if (drop(rng)) continue;
    BoundingBox b = g;
    b.source = BoxSource::detector;
    if (noise.box_jitter_sigma > 0.0) {
      std::normal_distribution<double> jitter(0.0, noise.box_jitter_sigma);
      b.x_min += jitter(rng);
      b.y_min += jitter(rng);
      b.x_max += jitter(rng);
      b.y_max += jitter(rng);
      if (b.x_min > b.x_max) std::swap(b.x_min, b.x_max);
      if (b.y_min > b.y_max) std::swap(b.y_min, b.y_max);
      b.x_min = std::clamp(b.x_min, 0.0, static_cast<double>(image_w));
      b.x_max = std::clamp(b.x_max, 0.0, static_cast<double>(image_w));
      b.y_min = std::clamp(b.y_min, 0.0, static_cast<double>(image_h));
      b.y_max = std::clamp(b.y_max, 0.0, static_cast<double>(image_h));
      if (!b.is_valid()) continue;
    }
    out.push_back(b);
  }

  if (noise.merge_prob > 0.0 && out.size() > 1) {
    std::bernoulli_distribution merge(noise.merge_prob);
    std::vector<bool> gone(out.size(), false);
    std::vector<bool> merged(out.size(), false);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (gone[i] || merged[i]) continue;
      for (std::size_t j = i + 1; j < out.size(); ++j) {
        if (gone[j] || merged[j]) continue;
        const bool overlap = std::min(out[i].x_max, out[j].x_max) > std::max(out[i].x_min, out[j].x_min) &&
                             std::min(out[i].y_max, out[j].y_max) > std::max(out[i].y_min, out[j].y_min);
        if (!overlap || !merge(rng)) continue;
        out[i].x_min = std::min(out[i].x_min, out[j].x_min);
        out[i].y_min = std::min(out[i].y_min, out[j].y_min);
        out[i].x_max = std::max(out[i].x_max, out[j].x_max);
        out[i].y_max = std::max(out[i].y_max, out[j].y_max);
        merged[i] = true;
        gone[j] = true;
        break;
      }
    }
    std::vector<BoundingBox> kept;
    kept.reserve(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!gone[i]) kept.push_back(out[i]);
    }
    out = std::move(kept);
  }
  return out;
}

std::vector<TwinRecord> twin_snapshot(const Scenario& scenario, double t, double twin_latency,
                                      double gnss_sigma, std::uint64_t seed) {
  if (twin_latency < 0.0) throw ConfigError("twin_latency", "must be >= 0");
  std::mt19937_64 rng(seed);
  const double report_time = std::max(0.0, t - twin_latency);
  std::vector<TwinRecord> out;
  for (const auto& track : scenario.tracks) {
    if (track.id == scenario.ego_id()) continue;
    const VehicleState s = track.state_at(report_time);
    TwinRecord r;
    r.vehicle_id = track.id;
    r.report_time = report_time;
    r.position = s.position;
    if (gnss_sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, gnss_sigma);
      r.position.x += noise(rng);
      r.position.y += noise(rng);
      r.position.z += noise(rng);
    }
    r.speed = s.speed;
    r.driver_type = s.driver_type;
    out.push_back(r);
  }
  return out;
}

Frame build_frame(const Scenario& scenario, std::size_t index) {
  const ScenarioConfig& cfg = scenario.config;
  if (index >= scenario.steps.size()) throw DataError("frame index out of range");

  Frame f;
  f.index = static_cast<std::int64_t>(index);
  f.timestamp = scenario.timestamps[index];
  f.vehicles = scenario.steps[index];
  f.intrinsics = cfg.intrinsics;
  const VehicleState& ego = f.vehicles[static_cast<std::size_t>(scenario.ego_id())];
  f.ego_pose = camera_pose_for(ego, cfg.camera_mount);

  std::vector<VehicleState> others;
  for (const auto& v : f.vehicles) {
    if (v.id != ego.id) others.push_back(v);
  }
  std::vector<BoundingBox> gt;
  for (const auto& v : others) {
    if (auto box = project_cuboid(v, f.ego_pose, f.intrinsics)) {
      f.gt_boxes.emplace(v.id, *box);
      gt.push_back(*box);
    }
  }
  f.depth = render_depth(others, f.ego_pose, f.intrinsics);

  const DetectionNoise noise{cfg.box_jitter_sigma, cfg.drop_prob, cfg.merge_prob};
  f.detections = perturb_detections(gt, noise, f.intrinsics.width, f.intrinsics.height,
                                    derive_seed(cfg.seed, {index, 1}));
  // Detector output order carries no identity.
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, {index, 2}));
  std::shuffle(f.detections.begin(), f.detections.end(), shuffle_rng);

  f.twin = twin_snapshot(scenario, f.timestamp, cfg.twin_latency, cfg.gnss_sigma, derive_seed(cfg.seed, {index, 3}));
  return f;
}

}  // namespace dtfusion::sim
