#include "physmo/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "physmo/pipeline.hpp"

namespace physmo {

namespace {

// Box-Muller over a fixed-width engine; std::normal_distribution is not
// pinned down by the standard, and seeds here must reproduce bit-for-bit.
class GaussianSampler {
 public:
  explicit GaussianSampler(unsigned long long seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return radius * std::cos(2.0 * M_PI * u2);
  }

 private:
  double uniform() {  // (0, 1)
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

void require_floating(const CompiledModel& model, const char* generator) {
  if (model.model().base_welded)
    throw ValidationError(std::string(generator) +
                          " generation needs a floating base");
}

void check_options(const SyntheticOptions& options) {
  if (options.frames < 1)
    throw ValidationError("synthetic motion needs at least one frame");
  if (!(options.fps > 0.0))
    throw ValidationError("synthetic motion needs a positive frame rate");
}

double lowest_support_height(const CompiledModel& model, const VecX& q) {
  const Kinematics kin = model.forward_kinematics(q);
  const FloorPlane& floor = model.model().floor;
  double lowest = std::numeric_limits<double>::infinity();
  for (int link : model.model().foot_link_indices())
    lowest = std::min(lowest,
                      floor.height(model.proxy_support_point(kin, link, floor)));
  return lowest;
}

// Fills stationary flags with the same velocity rule the labeler applies;
// the foot flags stay whatever the caller decided analytically.
void fill_stationary(const CompiledModel& model, const std::vector<VecX>& poses,
                     double fps, std::vector<ContactState>& contacts) {
  const std::vector<ContactState> labeled =
      label_contacts(reference_foot_tracks(model, poses, fps),
                     model.model().floor, ContactThresholds{});
  for (size_t t = 0; t < contacts.size(); ++t)
    contacts[t].stationary = labeled[t].stationary;
}

struct LegChain {
  int hip_pitch = -1;    // coordinate indices
  int knee_pitch = -1;
  int ankle_pitch = -1;
  double thigh = 0.0;  // segment lengths [m]
  double shank = 0.0;
};

int pitch_coordinate(const CompiledModel& model, const std::string& joint_name,
                     const char* generator) {
  const int joint = model.model().joint_index(joint_name);
  if (joint < 0)
    throw ValidationError(std::string(generator) + " generation: no joint '" +
                          joint_name + "'");
  const JointSpec& spec = model.model().joints[joint];
  for (size_t k = 0; k < spec.axes.size(); ++k)
    if ((spec.axes[k] - Vec3::UnitY()).norm() < 1e-9)
      return model.joint_first_coordinate(joint) + static_cast<int>(k);
  throw ValidationError(std::string(generator) + " generation: joint '" +
                        joint_name + "' has no y (pitch) axis");
}

LegChain leg_chain(const CompiledModel& model, const std::string& side,
                   const char* generator) {
  LegChain leg;
  leg.hip_pitch = pitch_coordinate(model, side + "_hip", generator);
  leg.knee_pitch = pitch_coordinate(model, side + "_knee", generator);
  leg.ankle_pitch = pitch_coordinate(model, side + "_ankle", generator);
  leg.thigh = model.model().find_joint(side + "_knee")->offset.norm();
  leg.shank = model.model().find_joint(side + "_ankle")->offset.norm();
  return leg;
}

// Sagittal two-segment reach: hip at the origin, ankle at (dx, dz) with
// dz < 0, knee bending backward. Writes hip/knee pitch plus the ankle pitch
// that keeps the foot level.
void solve_leg(const LegChain& leg, double dx, double dz, VecX& q) {
  const double reach_min = std::abs(leg.thigh - leg.shank) + 1e-6;
  const double reach_max = leg.thigh + leg.shank - 1e-6;
  const double distance =
      std::clamp(std::sqrt(dx * dx + dz * dz), reach_min, reach_max);
  const auto wedge = [&](double a, double b) {
    return std::acos(std::clamp(
        (a * a + distance * distance - b * b) / (2.0 * a * distance), -1.0,
        1.0));
  };
  const double at_hip = wedge(leg.thigh, leg.shank);
  const double at_ankle = wedge(leg.shank, leg.thigh);
  const double aim = std::atan2(dx, -dz);  // from straight down, forward +
  q[leg.hip_pitch] = -(aim + at_hip);
  q[leg.knee_pitch] = at_hip + at_ankle;
  q[leg.ankle_pitch] = -(q[leg.hip_pitch] + q[leg.knee_pitch]);
}

SyntheticMotion finish(const CompiledModel& model, std::vector<VecX> poses,
                       std::vector<std::array<bool, 4>> feet, double fps) {
  SyntheticMotion out;
  out.fps = fps;
  out.poses = std::move(poses);
  out.corrupted = out.poses;
  out.contacts.resize(out.poses.size());
  for (size_t t = 0; t < out.contacts.size(); ++t)
    out.contacts[t].in_contact = feet[t];
  fill_stationary(model, out.poses, fps, out.contacts);
  return out;
}

constexpr std::array<bool, 4> kAllDown{true, true, true, true};

}  // namespace

VecX standing_pose(const CompiledModel& model) {
  require_floating(model, "pose");
  VecX q = VecX::Zero(model.dof_count());
  const double gap = lowest_support_height(model, q);
  q.head<3>() -= gap * model.model().floor.normal;
  return q;
}

std::vector<VecX> add_joint_noise(const CompiledModel& model,
                                  const std::vector<VecX>& poses,
                                  double stddev, unsigned long long seed) {
  if (stddev < 0.0)
    throw ValidationError("noise level must not be negative");
  GaussianSampler sampler(seed);
  std::vector<VecX> out = poses;
  for (VecX& q : out)
    for (int c = 0; c < q.size(); ++c)
      if (model.coordinate_block(c) == 2)
        q[c] = wrap_angle(q[c] + stddev * sampler.next());
  return out;
}

SyntheticMotion generate_stand(const CompiledModel& model,
                               const SyntheticOptions& options) {
  check_options(options);
  const VecX pose = standing_pose(model);
  return finish(model, std::vector<VecX>(options.frames, pose),
                std::vector<std::array<bool, 4>>(options.frames, kAllDown),
                options.fps);
}

SyntheticMotion generate_lean(const CompiledModel& model,
                              const SyntheticOptions& options) {
  check_options(options);
  VecX pose = standing_pose(model);
  const Mat3 frame = contact_frame(model.model().floor);
  const Mat3 tilt =
      Eigen::AngleAxisd(options.lean_angle, frame.col(2)).toRotationMatrix();
  pose.segment<3>(3) = euler_from_matrix(model.model().root_axes, tilt);
  const double gap = lowest_support_height(model, pose);
  pose.head<3>() -= gap * model.model().floor.normal;
  return finish(model, std::vector<VecX>(options.frames, pose),
                std::vector<std::array<bool, 4>>(options.frames, kAllDown),
                options.fps);
}

SyntheticMotion generate_squat(const CompiledModel& model,
                               const SyntheticOptions& options) {
  check_options(options);
  const VecX stand = standing_pose(model);
  const LegChain left = leg_chain(model, "l", "squat");
  const LegChain right = leg_chain(model, "r", "squat");
  const double limit = left.thigh + left.shank -
                       std::abs(left.thigh - left.shank) - 1e-3;
  const double depth = std::min(options.squat_depth, limit);

  std::vector<VecX> poses;
  poses.reserve(options.frames);
  for (int t = 0; t < options.frames; ++t) {
    const double phase =
        options.frames > 1 ? static_cast<double>(t) / (options.frames - 1)
                           : 0.0;
    const double drop = depth * std::sin(M_PI * phase) * std::sin(M_PI * phase);
    VecX q = stand;
    q.head<3>() -= drop * model.model().floor.normal;
    for (const LegChain& leg : {left, right})
      solve_leg(leg, 0.0, -(leg.thigh + leg.shank - drop), q);
    poses.push_back(std::move(q));
  }
  return finish(model, std::move(poses),
                std::vector<std::array<bool, 4>>(options.frames, kAllDown),
                options.fps);
}

SyntheticMotion generate_walk(const CompiledModel& model,
                              const SyntheticOptions& options) {
  check_options(options);
  if (!(options.walk_speed > 0.0) || !(options.step_period > 0.0))
    throw ValidationError("walk generation needs positive speed and period");
  const VecX stand = standing_pose(model);
  const LegChain legs[2] = {leg_chain(model, "l", "walk"),
                            leg_chain(model, "r", "walk")};
  const Mat3 frame = contact_frame(model.model().floor);
  const Vec3 forward = frame.col(1), up = frame.col(0);

  const double speed = options.walk_speed;
  const double period = options.step_period;
  const double lead_in = 0.4;  // s of double support before the gait starts
  const double leg_length = legs[0].thigh + legs[0].shank;
  const double crouch =
      std::clamp(options.walk_crouch, 0.01, 0.5 * leg_length);

  // Reach guard: the worst hip-to-ankle offset happens at stance edges.
  const double max_dx = 0.5 * speed * period;
  if (std::hypot(leg_length - crouch, max_dx) > leg_length - 1e-3)
    throw ValidationError(
        "walk generation: speed and period exceed the leg's reach at this "
        "crouch; lower the speed or shorten the step period");

  // Leg phase: left owns stance windows [2k p, (2k+1) p) in gait time,
  // right owns the odd ones. A stance window centered at time c plants the
  // ankle at forward distance speed * c.
  const auto ankle_offset = [&](int leg, double gait_time, double& lift) {
    const double cycle = 2.0 * period;
    const double shifted = gait_time - (leg == 1 ? period : 0.0);
    const double k = std::floor(shifted / cycle);
    const double in_cycle = shifted - k * cycle;
    const double window_start = k * cycle + (leg == 1 ? period : 0.0);
    lift = 0.0;
    if (in_cycle < period)  // stance
      return speed * (window_start + 0.5 * period);
    const double tau = (in_cycle - period) / period;  // swing progress
    lift = options.step_lift * std::sin(M_PI * tau) * std::sin(M_PI * tau);
    const double from = speed * (window_start + 0.5 * period);
    return from + 2.0 * speed * period * tau;
  };

  std::vector<VecX> poses;
  std::vector<std::array<bool, 4>> feet;
  poses.reserve(options.frames);
  feet.reserve(options.frames);
  for (int t = 0; t < options.frames; ++t) {
    const double time = t / options.fps;
    const double gait_time = std::max(0.0, time - lead_in);
    VecX q = stand;
    q.head<3>() +=
        (speed * gait_time) * forward - crouch * up;
    std::array<bool, 4> down{};
    for (int leg = 0; leg < 2; ++leg) {
      double lift = 0.0;
      const double ankle_forward = ankle_offset(leg, gait_time, lift);
      const double dx = ankle_forward - speed * gait_time;
      const double dz = -(leg_length - crouch) + lift;
      solve_leg(legs[leg], dx, dz, q);
      down[2 * leg] = down[2 * leg + 1] = lift == 0.0;
    }
    poses.push_back(std::move(q));
    feet.push_back(down);
  }
  return finish(model, std::move(poses), std::move(feet), options.fps);
}

SyntheticMotion generate_drop(const CompiledModel& model,
                              const SyntheticOptions& options) {
  check_options(options);
  if (options.drop_depth < 0.0)
    throw ValidationError("drop depth must not be negative");
  const VecX stand = standing_pose(model);
  VecX sunken = stand;
  sunken.head<3>() -= options.drop_depth * model.model().floor.normal;
  std::vector<VecX> poses;
  poses.reserve(options.frames);
  for (int t = 0; t < options.frames; ++t)
    poses.push_back(t < options.frames / 2 ? stand : sunken);
  return finish(model, std::move(poses),
                std::vector<std::array<bool, 4>>(options.frames, kAllDown),
                options.fps);
}

SyntheticMotion generate_jitter(const CompiledModel& model,
                                const SyntheticOptions& options) {
  SyntheticMotion out = generate_stand(model, options);
  out.corrupted =
      add_joint_noise(model, out.poses, options.noise_std, options.seed);
  return out;
}

SyntheticMotion generate(const CompiledModel& model, const std::string& kind,
                         const SyntheticOptions& options) {
  if (kind == "stand") return generate_stand(model, options);
  if (kind == "lean") return generate_lean(model, options);
  if (kind == "squat") return generate_squat(model, options);
  if (kind == "walk") return generate_walk(model, options);
  if (kind == "drop") return generate_drop(model, options);
  if (kind == "jitter") return generate_jitter(model, options);
  throw ValidationError("unknown synthetic motion kind '" + kind +
                        "' (expected stand, lean, squat, walk, drop, or "
                        "jitter)");
}

}  // namespace physmo
