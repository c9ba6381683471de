#pragma once

#include <string>

#include "physmo/types.hpp"

namespace physmo {

/// Calibrated pinhole camera. `rotation`/`translation` map world points into
/// the camera frame (p_cam = R * p_world + t); the camera looks along +z.
struct CameraModel {
  std::string name;
  double fx = 0.0;  ///< focal length [px]
  double fy = 0.0;
  double cx = 0.0;  ///< principal point [px]
  double cy = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  int width = 1024;
  int height = 1024;

  Vec3 to_camera(const Vec3& p_world) const {
    return rotation * p_world + translation;
  }

  /// Projects a world point to pixel coordinates. Sets *behind when the point
  /// has non-positive camera-frame depth (projection is then meaningless).
  Vec2 project(const Vec3& p_world, bool* behind = nullptr) const;
};

/// Angle between the optical axes of two cameras [rad].
double viewing_angle(const CameraModel& a, const CameraModel& b);

void validate(const CameraModel& camera);

}  // namespace physmo
