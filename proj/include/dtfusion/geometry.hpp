#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "dtfusion/error.hpp"

namespace dtfusion::geometry {

/// A point in the world frame, meters.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  static WorldPoint from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

/// A point in the camera frame, meters. X right, Y down, Z along the optical
/// axis (positive in front of the lens).
struct CameraPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  static CameraPoint from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

/// Continuous pixel coordinates, origin top-left, u right, v down. May lie
/// outside the image rectangle.
struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

class BehindCamera : public Error {
 public:
  BehindCamera() : Error("point is not in front of the camera") {}
};

class NonPositiveRange : public Error {
 public:
  NonPositiveRange() : Error("range must be positive") {}
};

class InvalidCamera : public Error {
 public:
  using Error::Error;
};

/// Camera-to-world pose: a camera-frame point maps to the world as
/// R * p_c + t. `rotation` holds the camera axes expressed in world
/// coordinates (column-wise); `translation` is the camera origin.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// Validating constructor; throws InvalidCamera if R is not a proper
  /// rotation within 1e-9.
  static CameraPose make(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  bool is_valid() const;
  WorldPoint origin() const { return WorldPoint::from(translation); }
};

struct CameraIntrinsics {
  double focal = 0.0;     // meters
  double pixel_dx = 0.0;  // meters per pixel
  double pixel_dy = 0.0;
  double u0 = 0.0;  // principal point, pixels
  double v0 = 0.0;
  int width = 0;
  int height = 0;

  double fx() const { return focal / pixel_dx; }
  double fy() const { return focal / pixel_dy; }

  /// Throws InvalidCamera naming the first violated constraint.
  void validate() const;
};

WorldPoint camera_to_world(const CameraPoint& p, const CameraPose& pose);
CameraPoint world_to_camera(const WorldPoint& p, const CameraPose& pose);

/// Pinhole projection. Throws BehindCamera when p.z <= 0.
PixelPoint camera_to_pixel(const CameraPoint& p, const CameraIntrinsics& intr);

/// World point to pixel through the full extrinsic + intrinsic chain.
PixelPoint project_anchor(const WorldPoint& p, const CameraPose& pose, const CameraIntrinsics& intr);

/// World point on the ray through `px` at Euclidean distance `range_m` from
/// the camera origin. Throws NonPositiveRange unless range_m > 0.
WorldPoint back_project(const PixelPoint& px, double range_m, const CameraIntrinsics& intr,
                        const CameraPose& pose);

double gnss_range(const WorldPoint& a, const WorldPoint& b);

/// The depth-scaled pixel-to-camera matrix: M * (u, v, 1)^T == P_c for a
/// point at optical depth z_c. Its inverse maps P_c back to homogeneous
/// pixel coordinates.
Eigen::Matrix3d pixel_to_camera_matrix(const CameraIntrinsics& intr, double z_c);

}  // namespace dtfusion::geometry
