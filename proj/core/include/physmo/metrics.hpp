#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "physmo/camera.hpp"
#include "physmo/contact.hpp"
#include "physmo/dynamics.hpp"
#include "physmo/types.hpp"

namespace physmo {

// Joint position tracks: frames x joints, world coordinates [m].
using JointTracks = std::vector<std::vector<Vec3>>;

struct MetricStat {
  double mean = 0.0;
  double stddev = 0.0;  // population
  long samples = 0;
};

// Smoothness mismatch [mm]: per transition and joint, the absolute
// difference between the frame-to-frame displacement magnitudes of the two
// tracks, averaged over every (transition, joint) sample. Zero for an
// estimate exactly as jittery as the reference; large when the estimate adds
// or removes jitter.
MetricStat smoothness_error(const JointTracks& reference,
                            const JointTracks& estimate);

struct PenetrationMetrics {
  // Mean absolute floor distance [mm] over (frame, foot) samples labeled in
  // contact; its population spread follows.
  double mean_penetration_mm = 0.0;
  double stddev_mm = 0.0;
  // Share [%] of frames where no foot point is below the floor; complements
  // the share of frames with any penetration to exactly 100.
  double percent_non_penetrating = 100.0;
  long contact_samples = 0;
  long penetrating_frames = 0;
  long frames = 0;
};

// Floor clearance of the four foot points. heights[t][f] is the signed
// height of foot point f above the floor at frame t; labels supply the
// in-contact samples that enter the mean distance. A sample counts as below
// the floor when its height drops under -1e-9 m, so resting exactly on the
// floor is clean.
PenetrationMetrics penetration_metrics(
    const std::vector<std::array<double, 4>>& foot_heights,
    std::span<const ContactState> labels);

// Signed sole heights (proxy support points of the four foot links) for use
// with penetration_metrics.
std::vector<std::array<double, 4>> foot_sole_heights(
    const CompiledModel& model, const std::vector<VecX>& poses);

struct ReprojectionMetrics {
  double mean_px = 0.0;
  double stddev_px = 0.0;  // population, over per-frame means
  long frames = 0;
  long behind_camera = 0;  // (frame, joint) samples skipped
  std::vector<std::string> warnings;
};

// Pixel distance between the camera projections of two joint tracks:
// per-frame mean over joints, then mean and spread over frames. Joints
// behind the camera in either track are excluded (and counted). When the
// view camera doubles as (or sits within pi/15 of) the capture camera given
// in `capture`, a warning flags that out-of-plane errors stay invisible.
ReprojectionMetrics reprojection_error(const CameraModel& camera,
                                       const JointTracks& reference,
                                       const JointTracks& estimate,
                                       const CameraModel* capture = nullptr);

enum class AlignmentMode {
  Raw,         // compare world positions as they are
  GlobalRoot,  // translate the estimate to match the reference root per frame
  Procrustes,  // per-frame similarity alignment (rotation/translation/scale)
};

AlignmentMode alignment_mode_from_string(const std::string& name);
const char* to_string(AlignmentMode mode);

struct PositionMetrics {
  double mpjpe_mm = 0.0;  // mean joint distance
  double pck_150 = 0.0;   // % of joints strictly within 150 mm
  double auc = 0.0;       // mean of PCK over thresholds 1..150 mm
  long samples = 0;
};

// Joint position accuracy under the chosen per-frame alignment. root_index
// selects the joint used by GlobalRoot alignment.
PositionMetrics position_metrics(const JointTracks& reference,
                                 const JointTracks& estimate,
                                 AlignmentMode mode, int root_index = 0);

}  // namespace physmo
