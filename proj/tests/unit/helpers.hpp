#pragma once

#include <random>

#include "physmo/character.hpp"
#include "physmo/dynamics.hpp"

namespace physmo::test {

// One compiled default character shared across suites; compilation is pure,
// so reuse just saves time.
inline const CompiledModel& default_model() {
  static const CompiledModel model(reference_character());
  return model;
}

// Random configuration with root angles kept away from the pitch
// singularity so finite-difference comparisons stay well conditioned.
inline VecX random_pose(const CompiledModel& model, std::mt19937& rng,
                        double angle_range = 0.5) {
  std::uniform_real_distribution<double> angle(-angle_range, angle_range);
  std::uniform_real_distribution<double> shift(-1.0, 1.0);
  VecX q(model.dof_count());
  for (int c = 0; c < model.dof_count(); ++c)
    q[c] = model.coordinate_is_angular(c) ? angle(rng) : shift(rng);
  return q;
}

inline VecX random_velocity(const CompiledModel& model, std::mt19937& rng,
                            double range = 1.0) {
  std::uniform_real_distribution<double> dist(-range, range);
  VecX qdot(model.dof_count());
  for (int c = 0; c < model.dof_count(); ++c) qdot[c] = dist(rng);
  return qdot;
}

}  // namespace physmo::test
