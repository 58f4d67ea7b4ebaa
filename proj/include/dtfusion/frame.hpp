#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dtfusion/error.hpp"
#include "dtfusion/geometry.hpp"

namespace dtfusion {

using VehicleId = std::int64_t;

enum class BoxSource { ground_truth, detector };

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  int class_id = 0;
  BoxSource source = BoxSource::detector;
  std::optional<double> score;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  geometry::PixelPoint center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  bool contains(const geometry::PixelPoint& p) const {
    return x_min <= p.u && p.u <= x_max && y_min <= p.v && p.v <= y_max;
  }
  bool is_valid() const;

  bool operator==(const BoundingBox&) const = default;
};

/// Row-major raster of Euclidean ranges camera -> surface, meters. Pixels
/// with no surface hold +inf.
class DepthImage {
 public:
  static constexpr double kNoReturn = std::numeric_limits<double>::infinity();

  DepthImage() = default;
  DepthImage(int width, int height, double fill = kNoReturn);
  /// Throws DataError if the raster size or any value is invalid.
  DepthImage(int width, int height, std::vector<double> ranges);

  int width() const { return width_; }
  int height() const { return height_; }
  double at(int col, int row) const { return ranges_[static_cast<std::size_t>(row) * width_ + col]; }
  double& at(int col, int row) { return ranges_[static_cast<std::size_t>(row) * width_ + col]; }
  const std::vector<double>& ranges() const { return ranges_; }

  static bool is_no_return(double r) { return r == kNoReturn; }

  bool operator==(const DepthImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> ranges_;
};

enum class DriverType { aggressive, normal, conservative };

std::string_view to_string(DriverType t);
DriverType driver_type_from_string(std::string_view s);

struct Dimensions {
  double length = 4.5;
  double width = 1.8;
  double height = 1.5;

  bool operator==(const Dimensions&) const = default;
};

struct VehicleState {
  VehicleId id = 0;
  geometry::WorldPoint position;  // cuboid centroid
  double heading = 0.0;           // radians, world ground plane
  double speed = 0.0;             // m/s along heading
  Dimensions dims;
  DriverType driver_type = DriverType::normal;
};

/// Cloud-side vehicle report: GNSS-noised, possibly stale.
struct TwinRecord {
  VehicleId vehicle_id = 0;
  double report_time = 0.0;
  geometry::WorldPoint position;
  double speed = 0.0;
  DriverType driver_type = DriverType::normal;
};

struct Frame {
  std::int64_t index = 0;
  double timestamp = 0.0;
  geometry::CameraPose ego_pose;
  geometry::CameraIntrinsics intrinsics;
  std::vector<VehicleState> vehicles;
  std::map<VehicleId, BoundingBox> gt_boxes;
  // Absent when the frame was loaded without its depth raster.
  std::optional<DepthImage> depth;
  std::vector<BoundingBox> detections;
  std::vector<TwinRecord> twin;

  const TwinRecord* find_twin(VehicleId id) const;
};

}  // namespace dtfusion
