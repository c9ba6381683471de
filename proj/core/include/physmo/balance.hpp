#pragma once

#include <string>
#include <vector>

#include "physmo/character.hpp"
#include "physmo/contact.hpp"
#include "physmo/dynamics.hpp"
#include "physmo/types.hpp"

namespace physmo {

// Andrew monotone chain; returns the hull counter-clockwise with collinear
// points removed. Fewer than three distinct extreme points collapse the hull.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

// Boundary points count as inside. A polygon with fewer than three vertices
// contains nothing.
bool point_in_convex_polygon(const Vec2& point,
                             const std::vector<Vec2>& hull_ccw);

struct BalanceAssessment {
  Vec3 cog = Vec3::Zero();
  Vec2 cog_floor = Vec2::Zero();       // in the floor tangent basis
  std::vector<Vec2> support_polygon;   // ccw hull of the active contact pads
  bool cog_inside = false;
  bool degenerate = false;  // no usable support area
  double lean_angle = 0.0;  // spine direction vs. floor normal [rad]
  Vec3 lean_axis = Vec3::Zero();  // world axis; +lean_angle about it rights
                                  // the spine, zero when upright
};

// Support polygon from the octagonal pads of the feet currently labeled in
// contact, plus the lean of the root->spine-tip direction.
BalanceAssessment assess_balance(const CompiledModel& model, const VecX& q,
                                 const ContactState& contacts,
                                 const std::string& spine_tip_joint);

struct BalanceOptions {
  double step_fraction = 0.1;  // share of the residual applied per frame
  double small_lean = 0.05;    // rad; below this the leg strategy takes over
  std::string spine_tip_joint = "neck";
  std::vector<std::string> leg_joints = {"l_hip", "r_hip", "l_knee", "r_knee"};
};

enum class CorrectionMode {
  Inactive,        // frame not stationary: accumulators reset, pose untouched
  Balanced,        // cog inside the support polygon: accumulators frozen
  Hold,            // no support area to reason about: accumulators frozen
  Rotate,          // leaning: whole-body rotation accumulator grew
  StraightenLegs,  // upright but unbalanced: leg accumulators grew
};

struct CorrectionResult {
  VecX pose;
  BalanceAssessment assessment;  // measured before this frame's growth
  CorrectionMode mode = CorrectionMode::Inactive;
  double increment = 0.0;  // rotation added this frame [rad]
};

// Stateful reference-pose corrector. Each frame it applies what has been
// accumulated so far, assesses the result, and either grows, freezes, or
// resets the accumulators:
//   - non-stationary frame: full reset, raw reference returned;
//   - cog inside the support polygon: frozen, corrected pose returned;
//   - leaning by more than small_lean: the whole body is rotated about the
//     root by an accumulated angle that grows by step_fraction of the
//     remaining lean, so the lean decays geometrically;
//   - nearly upright yet still unbalanced: hip and knee coordinates are
//     driven toward zero, again by step_fraction of the remainder.
class BalanceCorrector {
 public:
  BalanceCorrector() = default;
  explicit BalanceCorrector(BalanceOptions options)
      : options_(std::move(options)) {}

  CorrectionResult correct(const CompiledModel& model, const VecX& reference,
                           const ContactState& contacts);
  void reset();

  double accumulated_rotation() const { return xi_; }
  const BalanceOptions& options() const { return options_; }

 private:
  VecX apply(const CompiledModel& model, const VecX& reference) const;
  std::vector<int> leg_coordinates(const CompiledModel& model) const;

  BalanceOptions options_;
  double xi_ = 0.0;
  Vec3 axis_ = Vec3::Zero();
  VecX leg_offsets_;  // accumulated magnitude reduction per coordinate
};

}  // namespace physmo
