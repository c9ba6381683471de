#include "physmo/metrics.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace physmo {

namespace {

void check_tracks(const JointTracks& reference, const JointTracks& estimate) {
  if (reference.size() != estimate.size())
    throw ValidationError("joint tracks differ in frame count");
  for (size_t t = 0; t < reference.size(); ++t)
    if (reference[t].size() != estimate[t].size() ||
        (t > 0 && reference[t].size() != reference[0].size()))
      throw ValidationError("joint tracks differ in joint count");
  if (!reference.empty() && reference[0].empty())
    throw ValidationError("joint tracks have no joints");
}

MetricStat finish_stat(double sum, double sum_sq, long n) {
  MetricStat stat;
  stat.samples = n;
  if (n == 0) return stat;
  stat.mean = sum / n;
  stat.stddev = std::sqrt(std::max(0.0, sum_sq / n - stat.mean * stat.mean));
  return stat;
}

}  // namespace

MetricStat smoothness_error(const JointTracks& reference,
                            const JointTracks& estimate) {
  check_tracks(reference, estimate);
  const long frames = static_cast<long>(reference.size());
  double sum = 0.0, sum_sq = 0.0;
  long n = 0;
  for (long t = 1; t < frames; ++t) {
    for (size_t j = 0; j < reference[t].size(); ++j) {
      const double ref_step = (reference[t][j] - reference[t - 1][j]).norm();
      const double est_step = (estimate[t][j] - estimate[t - 1][j]).norm();
      const double value = std::abs(ref_step - est_step) * 1000.0;
      sum += value;
      sum_sq += value * value;
      ++n;
    }
  }
  return finish_stat(sum, sum_sq, n);
}

PenetrationMetrics penetration_metrics(
    const std::vector<std::array<double, 4>>& foot_heights,
    std::span<const ContactState> labels) {
  constexpr double kBelow = -1e-9;
  if (labels.size() != foot_heights.size())
    throw ValidationError("contact labels do not cover every frame");
  PenetrationMetrics out;
  out.frames = static_cast<long>(foot_heights.size());
  double sum = 0.0, sum_sq = 0.0;
  for (size_t t = 0; t < foot_heights.size(); ++t) {
    bool any_below = false;
    for (int foot = 0; foot < 4; ++foot) {
      const double height = foot_heights[t][foot];
      any_below = any_below || height < kBelow;
      if (!labels[t].in_contact[foot]) continue;
      const double distance = std::abs(height) * 1000.0;
      sum += distance;
      sum_sq += distance * distance;
      ++out.contact_samples;
    }
    if (any_below) ++out.penetrating_frames;
  }
  if (out.contact_samples > 0) {
    out.mean_penetration_mm = sum / out.contact_samples;
    out.stddev_mm = std::sqrt(std::max(
        0.0, sum_sq / out.contact_samples -
                 out.mean_penetration_mm * out.mean_penetration_mm));
  }
  if (out.frames > 0)
    out.percent_non_penetrating =
        100.0 * (out.frames - out.penetrating_frames) / out.frames;
  return out;
}

std::vector<std::array<double, 4>> foot_sole_heights(
    const CompiledModel& model, const std::vector<VecX>& poses) {
  const std::array<int, 4> feet = model.model().foot_link_indices();
  const FloorPlane& floor = model.model().floor;
  std::vector<std::array<double, 4>> heights;
  heights.reserve(poses.size());
  for (const VecX& q : poses) {
    const Kinematics kin = model.forward_kinematics(q);
    std::array<double, 4> row{};
    for (int foot = 0; foot < 4; ++foot)
      row[foot] =
          floor.height(model.proxy_support_point(kin, feet[foot], floor));
    heights.push_back(row);
  }
  return heights;
}

ReprojectionMetrics reprojection_error(const CameraModel& camera,
                                       const JointTracks& reference,
                                       const JointTracks& estimate,
                                       const CameraModel* capture) {
  check_tracks(reference, estimate);
  ReprojectionMetrics out;
  double sum = 0.0, sum_sq = 0.0;
  for (size_t t = 0; t < reference.size(); ++t) {
    double frame_sum = 0.0;
    long frame_n = 0;
    for (size_t j = 0; j < reference[t].size(); ++j) {
      bool ref_behind = false, est_behind = false;
      const Vec2 ref_px = camera.project(reference[t][j], &ref_behind);
      const Vec2 est_px = camera.project(estimate[t][j], &est_behind);
      if (ref_behind || est_behind) {
        ++out.behind_camera;
        continue;
      }
      frame_sum += (ref_px - est_px).norm();
      ++frame_n;
    }
    if (frame_n == 0) continue;
    const double frame_mean = frame_sum / frame_n;
    sum += frame_mean;
    sum_sq += frame_mean * frame_mean;
    ++out.frames;
  }
  if (out.frames > 0) {
    out.mean_px = sum / out.frames;
    out.stddev_px = std::sqrt(
        std::max(0.0, sum_sq / out.frames - out.mean_px * out.mean_px));
  }

  if (capture != nullptr && viewing_angle(camera, *capture) < M_PI / 15.0)
    out.warnings.push_back(
        "view direction is within pi/15 of the capture camera; depth-axis "
        "errors stay nearly invisible from here");
  return out;
}

AlignmentMode alignment_mode_from_string(const std::string& name) {
  if (name == "raw") return AlignmentMode::Raw;
  if (name == "root") return AlignmentMode::GlobalRoot;
  if (name == "procrustes") return AlignmentMode::Procrustes;
  throw ValidationError("unknown alignment mode '" + name +
                        "' (expected raw, root, or procrustes)");
}

const char* to_string(AlignmentMode mode) {
  switch (mode) {
    case AlignmentMode::Raw: return "raw";
    case AlignmentMode::GlobalRoot: return "root";
    case AlignmentMode::Procrustes: return "procrustes";
  }
  return "unknown";
}

PositionMetrics position_metrics(const JointTracks& reference,
                                 const JointTracks& estimate,
                                 AlignmentMode mode, int root_index) {
  check_tracks(reference, estimate);
  PositionMetrics out;
  std::vector<double> distances_mm;
  for (size_t t = 0; t < reference.size(); ++t) {
    const int joints = static_cast<int>(reference[t].size());
    if (mode == AlignmentMode::GlobalRoot &&
        (root_index < 0 || root_index >= joints))
      throw ValidationError("root joint index out of range");

    std::vector<Vec3> aligned(estimate[t]);
    if (mode == AlignmentMode::GlobalRoot) {
      const Vec3 shift = reference[t][root_index] - estimate[t][root_index];
      for (Vec3& p : aligned) p += shift;
    } else if (mode == AlignmentMode::Procrustes) {
      MatX src(3, joints), dst(3, joints);
      for (int j = 0; j < joints; ++j) {
        src.col(j) = estimate[t][j];
        dst.col(j) = reference[t][j];
      }
      const MatX transform = Eigen::umeyama(src, dst, true);
      for (Vec3& p : aligned)
        p = transform.topLeftCorner<3, 3>() * p +
            transform.topRightCorner<3, 1>();
    }
    for (int j = 0; j < joints; ++j)
      distances_mm.push_back((reference[t][j] - aligned[j]).norm() * 1000.0);
  }

  out.samples = static_cast<long>(distances_mm.size());
  if (out.samples == 0) return out;
  double sum = 0.0;
  for (double d : distances_mm) sum += d;
  out.mpjpe_mm = sum / out.samples;

  const auto pck = [&](double threshold_mm) {
    long hits = 0;
    for (double d : distances_mm)
      if (d < threshold_mm) ++hits;
    return 100.0 * hits / out.samples;
  };
  out.pck_150 = pck(150.0);
  double auc_sum = 0.0;
  for (int k = 1; k <= 150; ++k) auc_sum += pck(static_cast<double>(k));
  out.auc = auc_sum / 150.0;
  return out;
}

}  // namespace physmo
