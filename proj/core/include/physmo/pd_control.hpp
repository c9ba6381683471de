#pragma once

#include <string>
#include <vector>

#include "physmo/dynamics.hpp"
#include "physmo/types.hpp"

namespace physmo {

// Per-coordinate-group feedback gains for the tracking controller.
struct PDGains {
  double joint_kp = 300.0;
  double joint_kd = 20.0;
  double root_angular_kp = 340.0;
  double root_angular_kd = 30.0;
  double root_linear_kp = 1000.0;
  double root_linear_kd = 80.0;
};

// Throws ValidationError on negative gains; returns one warning per gain
// pair whose damping exceeds the critical value (kd^2 > 4 kp), which slows
// convergence but is stable.
std::vector<std::string> validate(const PDGains& gains);

// Feedback-augmented reference acceleration, per coordinate:
//   qddot_ref + kp (q_ref - q) + kd (qdot_ref - qdot)
// with angle differences wrapped into (-pi, pi] for angular coordinates.
VecX desired_acceleration(const CompiledModel& model, const PoseState& current,
                          const VecX& q_ref, const VecX& qdot_ref,
                          const VecX& qddot_ref, const PDGains& gains);

}  // namespace physmo
