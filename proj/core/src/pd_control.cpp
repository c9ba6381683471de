#include "physmo/pd_control.hpp"

namespace physmo {

std::vector<std::string> validate(const PDGains& gains) {
  const struct {
    const char* name;
    double kp, kd;
  } groups[] = {
      {"joint", gains.joint_kp, gains.joint_kd},
      {"root angular", gains.root_angular_kp, gains.root_angular_kd},
      {"root linear", gains.root_linear_kp, gains.root_linear_kd},
  };
  std::vector<std::string> warnings;
  for (const auto& g : groups) {
    if (g.kp < 0.0 || g.kd < 0.0)
      throw ValidationError(std::string(g.name) + " gains must not be negative");
    // Mild overdamping is a deliberate tuning choice for tracking noisy
    // references, so only flag pairs well past critical (kd^2 > 36 kp,
    // i.e. a damping ratio above three).
    if (g.kd * g.kd > 36.0 * g.kp)
      warnings.push_back(std::string(g.name) +
                         " gains are heavily overdamped (kd^2 > 36 kp); "
                         "tracking will converge without overshoot but slowly");
  }
  return warnings;
}

VecX desired_acceleration(const CompiledModel& model, const PoseState& current,
                          const VecX& q_ref, const VecX& qdot_ref,
                          const VecX& qddot_ref, const PDGains& gains) {
  const int n = model.dof_count();
  if (current.q.size() != n || current.qdot.size() != n ||
      q_ref.size() != n || qdot_ref.size() != n || qddot_ref.size() != n)
    throw ValidationError("state size does not match the model's coordinates");

  VecX out(n);
  for (int c = 0; c < n; ++c) {
    double kp = gains.joint_kp, kd = gains.joint_kd;
    switch (model.coordinate_block(c)) {
      case 0:
        kp = gains.root_linear_kp;
        kd = gains.root_linear_kd;
        break;
      case 1:
        kp = gains.root_angular_kp;
        kd = gains.root_angular_kd;
        break;
      default:
        break;
    }
    const double err = model.coordinate_is_angular(c)
                           ? wrap_diff(q_ref[c], current.q[c])
                           : q_ref[c] - current.q[c];
    out[c] = qddot_ref[c] + kp * err + kd * (qdot_ref[c] - current.qdot[c]);
  }
  return out;
}

}  // namespace physmo
