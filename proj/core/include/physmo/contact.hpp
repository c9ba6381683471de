#pragma once

#include <array>
#include <vector>

#include "physmo/character.hpp"
#include "physmo/dynamics.hpp"
#include "physmo/types.hpp"

namespace physmo {

struct ContactThresholds {
  double speed = 0.05;           // m/s; slower foot points are candidates
  double height_margin = 0.05;   // m above the calibrated ground height
  double root_speed = 0.2;       // m/s; slower roots mark a stationary frame
  double refine_height = 0.1;    // m; keeps labels only near the floor
  int calibration_frames = 10;   // frames averaged for the ground height
  // m; a proxy hovering within this of the floor still counts as touching
  // during refinement, so resting contacts survive micrometer-level drift.
  double touch_tolerance = 1e-4;
};

// Per-frame label set for the four foot points in canonical order
// (left heel, left forefoot, right heel, right forefoot).
struct ContactState {
  bool stationary = false;
  std::array<bool, 4> in_contact{};

  int contact_count() const {
    int n = 0;
    for (bool b : in_contact) n += b ? 1 : 0;
    return n;
  }
};

// Position tracks sampled at a fixed rate, straight from the kinematic input.
struct FootTracks {
  double fps = 0.0;
  std::vector<Vec3> root;
  std::array<std::vector<Vec3>, 4> foot;

  int frame_count() const { return static_cast<int>(root.size()); }
};

// Velocity-and-height labeling over a whole sequence. Speeds come from
// central differences (one-sided at the ends); the ground reference height
// per foot point is the average over the leading calibration frames.
std::vector<ContactState> label_contacts(const FootTracks& tracks,
                                         const FloorPlane& floor,
                                         const ContactThresholds& thresholds);

struct FloorContact {
  bool colliding = false;
  double signed_gap = 0.0;  // support-point height above the floor
};

// Collision test between a link's contact proxy and the floor. Exact
// tangency counts as a collision.
FloorContact check_floor_collision(const CompiledModel& model,
                                   const Kinematics& kin, int link);

// Tightens (or re-adds) labels against the simulated pose: a label survives
// only while the foot point stays near the floor, and a colliding proxy is
// always in contact.
ContactState refine_contacts(const CompiledModel& model, const Kinematics& kin,
                             const ContactState& labeled,
                             const ContactThresholds& thresholds);

}  // namespace physmo
