#pragma once

#include <vector>

#include "physmo/character.hpp"
#include "physmo/contact.hpp"
#include "physmo/dynamics.hpp"
#include "physmo/qp.hpp"
#include "physmo/types.hpp"

namespace physmo {

// Linearized friction cone: a square pyramid inscribed in the Coulomb cone,
// expressed in an orthonormal contact frame with columns (normal, tangent,
// bitangent).
struct FrictionCone {
  double mu = 0.8;
  Mat3 frame = Mat3::Identity();

  // Pyramid edge coefficient; the inscribed pyramid keeps |f_t| and |f_b|
  // within mu/sqrt(2) of the normal force so any admissible force also
  // satisfies the exact cone.
  double scaled_friction() const { return mu / std::sqrt(2.0); }

  static FrictionCone from_floor(const FloorPlane& floor) {
    return {floor.friction, contact_frame(floor)};
  }
};

// Ground reaction forces for the active contacts, stacked per contact in
// cone coordinates (normal, tangent, bitangent).
struct GRFSolution {
  std::vector<int> links;  // active contact links, canonical foot order
  VecX forces;             // 3 per entry of links
  QPSolution qp;
};

// Fits contact forces to the six unactuated floating-base equations:
//   minimize || A lambda - b ||^2   over the friction pyramid,
// where A maps cone-coordinate forces to root generalized forces and b is
// the root portion of M qddot_des + c. The Hessian is singular whenever two
// or more contacts are active; minimum-norm subproblem solves make the
// resulting force split deterministic without extra regularization.
GRFSolution estimate_grf(const CompiledModel& model, const PoseState& state,
                         const VecX& qddot_des, const ContactState& contacts,
                         const FrictionCone& cone, const Vec3& gravity,
                         const QPSolver& solver,
                         const VecX* warm_start = nullptr);

struct TorqueSolution {
  VecX qddot;
  VecX tau;  // generalized forces balancing the equations of motion
  // 0: all contact rows enforced; 1: tangential rows dropped; 2: all rows
  // dropped. Nonzero levels mean the contact constraints were mutually
  // infeasible at this state.
  int relaxation_level = 0;
  QPSolution qp;
};

// Time constant (s) for pushing an already-penetrating support point back
// to the floor surface. The normal-velocity lower bound becomes depth over
// this constant instead of zero, so penetration left over from impacts or
// from a penetrated initial pose decays exponentially rather than lingering
// (the bound alone only prevents sinking further).
inline constexpr double kPenetrationRecoveryTime = 0.1;

// Acceleration/torque trade-off at fixed contact forces:
//   minimize ||qddot - qddot_des||^2 + tau_weight ||tau||^2
// with tau = M qddot - (J' G lambda - c) eliminated, subject to the
// post-step contact point velocities staying admissible: outward normal
// speed >= 0 (plus a recovery lift when penetrating) and tangential speeds
// within slip_tolerance. Eliminating tau keeps the Hessian strictly
// positive definite for any tau_weight >= 0.
TorqueSolution solve_torques(const CompiledModel& model,
                             const PoseState& state, const VecX& qddot_des,
                             const GRFSolution& grf, const FrictionCone& cone,
                             double slip_tolerance, double tau_weight,
                             double phi, const Vec3& gravity,
                             const QPSolver& solver);

}  // namespace physmo
