#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "dtfusion/frame.hpp"
#include "dtfusion/geometry.hpp"

namespace dtfusion::fusion {

class DegenerateRegion : public Error {
 public:
  DegenerateRegion() : Error("sample region is empty after clamping to the image") {}
};

class AllSamplesInvalid : public Error {
 public:
  AllSamplesInvalid() : Error("sample region holds no valid depth returns") {}
};

class LengthMismatch : public Error {
 public:
  LengthMismatch() : Error("distance list and box list differ in length") {}
};

class UnknownTarget : public Error {
 public:
  explicit UnknownTarget(VehicleId id) : Error("no twin record for target " + std::to_string(id)) {}
};

/// Depth sampling parameters: box shrink fraction, samples per box, seed.
struct DepthParams {
  double th = 0.1;
  int n = 25;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SampleRegion {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
};

enum class NoMatchReason { anchor_outside_all, behind_camera, no_detections };

std::string_view to_string(NoMatchReason r);

struct Matched {
  std::size_t box_index = 0;
  double delta_d = 0.0;  // d_i - d_gnss for the chosen box, meters
};

struct NoMatch {
  NoMatchReason reason = NoMatchReason::anchor_outside_all;
};

using MatchOutcome = std::variant<Matched, NoMatch>;

enum class Mode { baseline, fused };

std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);

/// Box scaled about its center by (1 - th), cut to its lowest quarter by
/// height, then clamped to [0, w] x [0, h]. Throws DegenerateRegion if
/// nothing remains.
SampleRegion sample_region(const BoundingBox& box, double th, int image_w, int image_h);

/// Mean of params.n range samples drawn uniformly inside the box's sample
/// region. No-return pixels are redrawn; after 10 * n rejections the box
/// throws AllSamplesInvalid. The draw stream depends only on
/// (params.seed, box_index).
double evaluate_box_distance(const DepthImage& img, const BoundingBox& box, const DepthParams& params,
                             std::size_t box_index);

/// One distance per box, in input order.
std::vector<double> depth_evaluate(const DepthImage& img, std::span<const BoundingBox> boxes,
                                   const DepthParams& params);

/// Ascending indices of the boxes whose closed rectangle holds the anchor.
std::vector<std::size_t> anchor_containment(const geometry::PixelPoint& anchor,
                                            std::span<const BoundingBox> boxes);

/// Among boxes containing the anchor, the one whose range estimate is
/// closest to the GNSS range (lowest index on ties). Throws LengthMismatch.
MatchOutcome match_target(const geometry::PixelPoint& anchor, std::span<const BoundingBox> boxes,
                          std::span<const double> distances, double d_gnss);

/// Camera-only matcher: among boxes containing the anchor, the one whose
/// center is nearest the anchor. delta_d is always 0.
MatchOutcome baseline_match(const geometry::PixelPoint& anchor, std::span<const BoundingBox> boxes);

/// End-to-end: project the target's twin position, then match against the
/// frame's detections. Baseline mode never touches frame.depth. Throws
/// UnknownTarget if the frame has no twin record for target_id.
MatchOutcome fuse_frame(const Frame& frame, VehicleId target_id, Mode mode, const DepthParams& params);

}  // namespace dtfusion::fusion
