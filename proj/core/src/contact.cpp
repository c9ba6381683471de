#include "physmo/contact.hpp"

#include <algorithm>
#include <cmath>

namespace physmo {

namespace {

// Central difference speed, falling back to one-sided at the sequence ends.
double track_speed(const std::vector<Vec3>& track, int frame, double fps) {
  const int last = static_cast<int>(track.size()) - 1;
  if (last < 1) return 0.0;
  if (frame == 0) return (track[1] - track[0]).norm() * fps;
  if (frame == last) return (track[last] - track[last - 1]).norm() * fps;
  return (track[frame + 1] - track[frame - 1]).norm() * fps * 0.5;
}

}  // namespace

std::vector<ContactState> label_contacts(const FootTracks& tracks,
                                         const FloorPlane& floor,
                                         const ContactThresholds& thresholds) {
  const int frames = tracks.frame_count();
  for (const auto& track : tracks.foot)
    if (static_cast<int>(track.size()) != frames)
      throw ValidationError("foot tracks must all have the same length");
  if (!(tracks.fps > 0.0))
    throw ValidationError("foot tracks need a positive frame rate");

  std::array<double, 4> ground{};
  const int calibration =
      std::min(frames, std::max(1, thresholds.calibration_frames));
  for (int foot = 0; foot < 4; ++foot) {
    double sum = 0.0;
    for (int t = 0; t < calibration; ++t)
      sum += floor.height(tracks.foot[foot][t]);
    ground[foot] = frames > 0 ? sum / calibration : 0.0;
  }

  std::vector<ContactState> out(frames);
  for (int t = 0; t < frames; ++t) {
    out[t].stationary =
        track_speed(tracks.root, t, tracks.fps) < thresholds.root_speed;
    for (int foot = 0; foot < 4; ++foot) {
      const double speed = track_speed(tracks.foot[foot], t, tracks.fps);
      const double height = floor.height(tracks.foot[foot][t]);
      out[t].in_contact[foot] =
          speed < thresholds.speed &&
          height < ground[foot] + thresholds.height_margin;
    }
  }
  return out;
}

FloorContact check_floor_collision(const CompiledModel& model,
                                   const Kinematics& kin, int link) {
  const Vec3 support =
      model.proxy_support_point(kin, link, model.model().floor);
  FloorContact out;
  out.signed_gap = model.model().floor.height(support);
  out.colliding = out.signed_gap <= 0.0;
  return out;
}

ContactState refine_contacts(const CompiledModel& model, const Kinematics& kin,
                             const ContactState& labeled,
                             const ContactThresholds& thresholds) {
  const std::array<int, 4> feet = model.model().foot_link_indices();
  ContactState out;
  out.stationary = labeled.stationary;
  for (int foot = 0; foot < 4; ++foot) {
    const double height =
        model.model().floor.height(kin.link_pose[feet[foot]].position);
    const bool near_floor =
        labeled.in_contact[foot] && height < thresholds.refine_height;
    const double gap = check_floor_collision(model, kin, feet[foot]).signed_gap;
    out.in_contact[foot] = near_floor || gap <= thresholds.touch_tolerance;
  }
  return out;
}

}  // namespace physmo
