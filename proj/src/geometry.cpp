#include "dtfusion/geometry.hpp"

#include <cmath>
#include <string>

namespace dtfusion::geometry {

namespace {
constexpr double kRotationTol = 1e-9;
}

CameraPose CameraPose::make(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation) {
  CameraPose pose{rotation, translation};
  if (!pose.is_valid()) {
    throw InvalidCamera("pose rotation is not orthonormal with determinant 1");
  }
  return pose;
}

bool CameraPose::is_valid() const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const Eigen::Matrix3d residual = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
  if (residual.cwiseAbs().maxCoeff() >= kRotationTol) return false;
  return std::abs(rotation.determinant() - 1.0) < kRotationTol;
}

void CameraIntrinsics::validate() const {
  auto fail = [](const std::string& what) { throw InvalidCamera("intrinsics: " + what); };
  if (!(focal > 0.0) || !std::isfinite(focal)) fail("focal must be > 0");
  if (!(pixel_dx > 0.0) || !std::isfinite(pixel_dx)) fail("pixel_dx must be > 0");
  if (!(pixel_dy > 0.0) || !std::isfinite(pixel_dy)) fail("pixel_dy must be > 0");
  if (width < 1) fail("width must be >= 1");
  if (height < 1) fail("height must be >= 1");
  if (!(u0 >= 0.0 && u0 < width)) fail("u0 must lie in [0, width)");
  if (!(v0 >= 0.0 && v0 < height)) fail("v0 must lie in [0, height)");
}

WorldPoint camera_to_world(const CameraPoint& p, const CameraPose& pose) {
  return WorldPoint::from(pose.rotation * p.vec() + pose.translation);
}

CameraPoint world_to_camera(const WorldPoint& p, const CameraPose& pose) {
  return CameraPoint::from(pose.rotation.transpose() * (p.vec() - pose.translation));
}

PixelPoint camera_to_pixel(const CameraPoint& p, const CameraIntrinsics& intr) {
  if (!(p.z > 0.0)) throw BehindCamera();
  return {intr.u0 + intr.fx() * (p.x / p.z), intr.v0 + intr.fy() * (p.y / p.z)};
}

PixelPoint project_anchor(const WorldPoint& p, const CameraPose& pose, const CameraIntrinsics& intr) {
  return camera_to_pixel(world_to_camera(p, pose), intr);
}

WorldPoint back_project(const PixelPoint& px, double range_m, const CameraIntrinsics& intr,
                        const CameraPose& pose) {
  if (!(range_m > 0.0)) throw NonPositiveRange();
  const Eigen::Vector3d ray((px.u - intr.u0) / intr.fx(), (px.v - intr.v0) / intr.fy(), 1.0);
  return camera_to_world(CameraPoint::from(ray.normalized() * range_m), pose);
}

double gnss_range(const WorldPoint& a, const WorldPoint& b) { return (a.vec() - b.vec()).norm(); }

Eigen::Matrix3d pixel_to_camera_matrix(const CameraIntrinsics& intr, double z_c) {
  const double sx = z_c * intr.pixel_dx / intr.focal;
  const double sy = z_c * intr.pixel_dy / intr.focal;
  Eigen::Matrix3d m;
  m << sx, 0.0, -sx * intr.u0,  //
      0.0, sy, -sy * intr.v0,   //
      0.0, 0.0, z_c;
  return m;
}

}  // namespace dtfusion::geometry
