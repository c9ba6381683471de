#include "physmo/camera.hpp"

#include <cmath>

namespace physmo {

Vec2 CameraModel::project(const Vec3& p_world, bool* behind) const {
  const Vec3 p = to_camera(p_world);
  const bool is_behind = p.z() <= 0.0;
  if (behind) *behind = is_behind;
  if (is_behind) return Vec2::Zero();
  return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
}

double viewing_angle(const CameraModel& a, const CameraModel& b) {
  // Optical axis in world = R^T * (0,0,1).
  const Vec3 za = a.rotation.transpose().col(2);
  const Vec3 zb = b.rotation.transpose().col(2);
  const double c = std::clamp(za.dot(zb), -1.0, 1.0);
  return std::acos(c);
}

void validate(const CameraModel& camera) {
  if (!(camera.fx > 0.0) || !(camera.fy > 0.0))
    throw ValidationError("camera '" + camera.name +
                          "': focal lengths must be positive");
  if (camera.width <= 0 || camera.height <= 0)
    throw ValidationError("camera '" + camera.name +
                          "': image size must be positive");
  const Mat3 should_be_identity =
      camera.rotation * camera.rotation.transpose();
  if ((should_be_identity - Mat3::Identity()).norm() > 1e-9 ||
      std::abs(camera.rotation.determinant() - 1.0) > 1e-9)
    throw ValidationError("camera '" + camera.name +
                          "': rotation is not a proper rotation matrix");
  if (!camera.translation.allFinite())
    throw ValidationError("camera '" + camera.name +
                          "': non-finite translation");
}

}  // namespace physmo
