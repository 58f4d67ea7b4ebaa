#include "dtfusion/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dtfusion/seed.hpp"

namespace dtfusion::fusion {

using geometry::PixelPoint;

void DepthParams::validate() const {
  if (!(th > 0.0 && th < 1.0)) throw ConfigError("th", "must lie in (0, 1)");
  if (n < 1) throw ConfigError("n", "must be >= 1");
}

std::string_view to_string(NoMatchReason r) {
  switch (r) {
    case NoMatchReason::anchor_outside_all:
      return "anchor_outside_all";
    case NoMatchReason::behind_camera:
      return "behind_camera";
    case NoMatchReason::no_detections:
      return "no_detections";
  }
  return "anchor_outside_all";
}

std::string_view to_string(Mode m) { return m == Mode::fused ? "fused" : "baseline"; }

Mode mode_from_string(std::string_view s) {
  if (s == "fused") return Mode::fused;
  if (s == "baseline") return Mode::baseline;
  throw ConfigError("mode", "expected 'baseline' or 'fused', got '" + std::string(s) + "'");
}

SampleRegion sample_region(const BoundingBox& box, double th, int image_w, int image_h) {
  const PixelPoint c = box.center();
  const double half_w = 0.5 * box.width() * (1.0 - th);
  const double half_h = 0.5 * box.height() * (1.0 - th);
  const double bottom = c.v + half_h;
  // Lower quarter (largest v) of the shrunk box.
  SampleRegion r{c.u - half_w, bottom - 0.5 * half_h, c.u + half_w, bottom};

  r.x_min = std::max(r.x_min, 0.0);
  r.y_min = std::max(r.y_min, 0.0);
  r.x_max = std::min(r.x_max, static_cast<double>(image_w));
  r.y_max = std::min(r.y_max, static_cast<double>(image_h));
  if (!(r.x_min < r.x_max && r.y_min < r.y_max)) throw DegenerateRegion();
  return r;
}

double evaluate_box_distance(const DepthImage& img, const BoundingBox& box, const DepthParams& params,
                             std::size_t box_index) {
  const SampleRegion region = sample_region(box, params.th, img.width(), img.height());

  std::mt19937_64 rng(derive_seed(params.seed, {box_index}));
  std::uniform_real_distribution<double> du(region.x_min, region.x_max);
  std::uniform_real_distribution<double> dv(region.y_min, region.y_max);

  const long budget = 10L * params.n;
  long rejected = 0;
  // Running mean: a constant region returns that constant bit-exactly.
  double mean = 0.0;
  for (int taken = 0; taken < params.n;) {
    const int col = std::clamp(static_cast<int>(std::floor(du(rng))), 0, img.width() - 1);
    const int row = std::clamp(static_cast<int>(std::floor(dv(rng))), 0, img.height() - 1);
    const double r = img.at(col, row);
    if (DepthImage::is_no_return(r)) {
      if (++rejected > budget) throw AllSamplesInvalid();
      continue;
    }
    ++taken;
    mean += (r - mean) / taken;
  }
  return mean;
}

std::vector<double> depth_evaluate(const DepthImage& img, std::span<const BoundingBox> boxes,
                                   const DepthParams& params) {
  params.validate();
  std::vector<double> out;
  out.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    out.push_back(evaluate_box_distance(img, boxes[i], params, i));
  }
  return out;
}

std::vector<std::size_t> anchor_containment(const PixelPoint& anchor, std::span<const BoundingBox> boxes) {
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (boxes[i].contains(anchor)) inside.push_back(i);
  }
  return inside;
}

MatchOutcome match_target(const PixelPoint& anchor, std::span<const BoundingBox> boxes,
                          std::span<const double> distances, double d_gnss) {
  if (distances.size() != boxes.size()) throw LengthMismatch();

  const auto candidates = anchor_containment(anchor, boxes);
  if (candidates.empty()) return NoMatch{NoMatchReason::anchor_outside_all};

  std::size_t best = candidates.front();
  double best_diff = std::abs(distances[best] - d_gnss);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const std::size_t j = candidates[k];
    const double diff = std::abs(distances[j] - d_gnss);
    if (diff < best_diff) {
      best = j;
      best_diff = diff;
    }
  }
  return Matched{best, distances[best] - d_gnss};
}

MatchOutcome baseline_match(const PixelPoint& anchor, std::span<const BoundingBox> boxes) {
  const auto candidates = anchor_containment(anchor, boxes);
  if (candidates.empty()) return NoMatch{NoMatchReason::anchor_outside_all};

  auto center_dist = [&](std::size_t i) {
    const PixelPoint c = boxes[i].center();
    return std::hypot(c.u - anchor.u, c.v - anchor.v);
  };
  std::size_t best = candidates.front();
  double best_dist = center_dist(best);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const double d = center_dist(candidates[k]);
    if (d < best_dist) {
      best = candidates[k];
      best_dist = d;
    }
  }
  return Matched{best, 0.0};
}

MatchOutcome fuse_frame(const Frame& frame, VehicleId target_id, Mode mode, const DepthParams& params) {
  const TwinRecord* twin = frame.find_twin(target_id);
  if (twin == nullptr) throw UnknownTarget(target_id);

  PixelPoint anchor;
  try {
    anchor = geometry::project_anchor(twin->position, frame.ego_pose, frame.intrinsics);
  } catch (const geometry::BehindCamera&) {
    return NoMatch{NoMatchReason::behind_camera};
  }
  if (frame.detections.empty()) return NoMatch{NoMatchReason::no_detections};

  if (mode == Mode::baseline) return baseline_match(anchor, frame.detections);

  if (!frame.depth) throw DataError("fused matching needs a depth image for frame " + std::to_string(frame.index));
  params.validate();
  const double d_gnss = geometry::gnss_range(frame.ego_pose.origin(), twin->position);

  // A box whose depth cannot be evaluated stays matchable but never wins a
  // distance comparison against one that can.
  std::vector<double> distances(frame.detections.size());
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    try {
      distances[i] = evaluate_box_distance(*frame.depth, frame.detections[i], params, i);
    } catch (const DegenerateRegion&) {
      distances[i] = std::numeric_limits<double>::infinity();
    } catch (const AllSamplesInvalid&) {
      distances[i] = std::numeric_limits<double>::infinity();
    }
  }
  return match_target(anchor, frame.detections, distances, d_gnss);
}

}  // namespace dtfusion::fusion
