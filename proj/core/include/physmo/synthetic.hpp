#pragma once

#include <string>
#include <vector>

#include "physmo/contact.hpp"
#include "physmo/dynamics.hpp"
#include "physmo/types.hpp"

namespace physmo {

struct SyntheticOptions {
  int frames = 100;
  double fps = 25.0;
  unsigned long long seed = 0;  // jitter corruption
  double noise_std = 0.02;      // rad, joint-angle jitter
  double lean_angle = 0.3;      // rad, initial whole-body lean
  double squat_depth = 0.25;    // m, pelvis drop at the deepest point
  double walk_speed = 0.3;      // m/s
  double step_period = 1.0;     // s per single-support phase
  double step_lift = 0.08;      // m, swing apex
  double walk_crouch = 0.05;    // m, pelvis drop while walking
  double drop_depth = 0.03;     // m, sudden root drop below ground
};

// A generated reference motion with exact contact ground truth. `corrupted`
// differs from `poses` only for generators that add noise.
struct SyntheticMotion {
  double fps = 0.0;
  std::vector<VecX> poses;
  std::vector<VecX> corrupted;
  std::vector<ContactState> contacts;
};

// The zero pose translated along the floor normal until the lowest foot
// proxy rests exactly on the floor.
VecX standing_pose(const CompiledModel& model);

// Gaussian joint-angle noise (root coordinates untouched); identical seeds
// give identical output on every platform.
std::vector<VecX> add_joint_noise(const CompiledModel& model,
                                  const std::vector<VecX>& poses,
                                  double stddev, unsigned long long seed);

SyntheticMotion generate_stand(const CompiledModel& model,
                               const SyntheticOptions& options);
// Whole body tilted about the root, re-grounded; the center of gravity ends
// up well outside the support area.
SyntheticMotion generate_lean(const CompiledModel& model,
                              const SyntheticOptions& options);
// One smooth knee-bend cycle with both feet planted (analytic leg geometry).
SyntheticMotion generate_squat(const CompiledModel& model,
                               const SyntheticOptions& options);
// Alternating single-support gait at constant speed after a standing
// lead-in; stance feet are pinned to the floor, swing feet follow a lifted
// profile, so contact ground truth is exact.
SyntheticMotion generate_walk(const CompiledModel& model,
                              const SyntheticOptions& options);
// Standing, then the whole body abruptly sinks below the floor by
// drop_depth and stays there.
SyntheticMotion generate_drop(const CompiledModel& model,
                              const SyntheticOptions& options);
// Standing still, with noise on the joint angles of the corrupted track.
SyntheticMotion generate_jitter(const CompiledModel& model,
                                const SyntheticOptions& options);

// Dispatch by kind name: stand, lean, squat, walk, drop, jitter.
SyntheticMotion generate(const CompiledModel& model, const std::string& kind,
                         const SyntheticOptions& options);

}  // namespace physmo
