#include <doctest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <random>

#include "physmo/metrics.hpp"

using namespace physmo;

namespace {

JointTracks constant_tracks(int frames, int joints, const Vec3& at = Vec3::Zero()) {
  return JointTracks(frames, std::vector<Vec3>(joints, at));
}

JointTracks random_tracks(int frames, int joints, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  JointTracks tracks(frames, std::vector<Vec3>(joints));
  for (auto& frame : tracks)
    for (auto& p : frame) p = Vec3(dist(rng), dist(rng), dist(rng));
  return tracks;
}

CameraModel test_camera() {
  CameraModel camera;
  camera.name = "input";
  camera.fx = 1000.0;
  camera.fy = 1000.0;
  camera.cx = 512.0;
  camera.cy = 512.0;
  return camera;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("identical motion has zero smoothness error") {
  const JointTracks tracks = random_tracks(20, 5, 41);
  const MetricStat stat = smoothness_error(tracks, tracks);
  CHECK(stat.mean == 0.0);
  CHECK(stat.stddev == 0.0);
  CHECK(stat.samples == 19 * 5);
}

TEST_CASE("an alternating one-joint wobble has a closed-form error") {
  // Ground truth holds still; the estimate moves one of two joints through
  // 0, +d, -d. Step sizes are d then 2d, so over 2 transitions x 2 joints
  // the mean absolute step difference is 3d/4.
  const double d = 0.004;
  JointTracks gt = constant_tracks(3, 2);
  JointTracks pred = gt;
  pred[1][0] = Vec3(d, 0.0, 0.0);
  pred[2][0] = Vec3(-d, 0.0, 0.0);
  const MetricStat stat = smoothness_error(gt, pred);
  const double expected_mm = 1000.0 * 3.0 * d / 4.0;
  CHECK(stat.mean == doctest::Approx(expected_mm).epsilon(1e-9));
}

TEST_CASE("smoothness ignores a constant offset") {
  const JointTracks gt = random_tracks(15, 4, 42);
  JointTracks pred = random_tracks(15, 4, 43);
  const MetricStat base = smoothness_error(gt, pred);
  for (auto& frame : pred)
    for (auto& p : frame) p += Vec3(0.3, -0.2, 0.9);
  const MetricStat shifted = smoothness_error(gt, pred);
  CHECK(shifted.mean == doctest::Approx(base.mean).epsilon(1e-12));
}

TEST_CASE("smoothness is invariant to a shared rigid transform") {
  const JointTracks gt = random_tracks(15, 4, 44);
  const JointTracks pred = random_tracks(15, 4, 45);
  const MetricStat base = smoothness_error(gt, pred);

  const Mat3 rot = Eigen::AngleAxisd(0.7, Vec3(1.0, 2.0, -1.0).normalized())
                       .toRotationMatrix();
  const Vec3 shift(0.4, 0.1, -0.6);
  JointTracks gt_moved = gt, pred_moved = pred;
  for (auto* tracks : {&gt_moved, &pred_moved})
    for (auto& frame : *tracks)
      for (auto& p : frame) p = rot * p + shift;
  const MetricStat moved = smoothness_error(gt_moved, pred_moved);
  CHECK(moved.mean == doctest::Approx(base.mean).epsilon(1e-9));
}

TEST_CASE("smoothness rejects mismatched shapes") {
  CHECK_THROWS_AS(
      smoothness_error(constant_tracks(3, 2), constant_tracks(4, 2)),
      ValidationError);
  CHECK_THROWS_AS(
      smoothness_error(constant_tracks(3, 2), constant_tracks(3, 3)),
      ValidationError);
}

TEST_CASE("feet on the floor every frame are a perfect penetration score") {
  std::vector<std::array<double, 4>> heights(10, {0.0, 0.0, 0.0, 0.0});
  std::vector<ContactState> labels(10);
  for (auto& state : labels) state.in_contact = {true, true, true, true};
  const PenetrationMetrics metrics = penetration_metrics(heights, labels);
  CHECK(metrics.mean_penetration_mm == 0.0);
  CHECK(metrics.percent_non_penetrating == 100.0);
  CHECK(metrics.contact_samples == 40);
}

TEST_CASE("a single sunken frame splits the penetration metrics") {
  // One foot labeled in contact for both frames, 10 mm under in the first:
  // the mean over the two contact samples is 5 mm and half the frames are
  // clean.
  std::vector<std::array<double, 4>> heights(2, {0.0, 0.0, 0.0, 0.0});
  heights[0][0] = -0.010;
  std::vector<ContactState> labels(2);
  labels[0].in_contact[0] = true;
  labels[1].in_contact[0] = true;
  const PenetrationMetrics metrics = penetration_metrics(heights, labels);
  CHECK(metrics.mean_penetration_mm == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(metrics.percent_non_penetrating == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(metrics.penetrating_frames == 1);
}

TEST_CASE("hovering feet never count as penetration") {
  std::vector<std::array<double, 4>> heights(8, {0.001, 0.002, 0.001, 0.005});
  std::vector<ContactState> labels(8);
  for (auto& state : labels) state.in_contact = {true, false, false, true};
  const PenetrationMetrics metrics = penetration_metrics(heights, labels);
  CHECK(metrics.percent_non_penetrating == 100.0);
  CHECK(metrics.penetrating_frames == 0);
}

TEST_CASE("clean-frame percentage and penetrating frames always add up") {
  std::mt19937 rng(46);
  std::uniform_real_distribution<double> dist(-0.02, 0.02);
  std::vector<std::array<double, 4>> heights(50);
  std::vector<ContactState> labels(50);
  for (auto& row : heights)
    for (double& h : row) h = dist(rng);
  for (auto& state : labels) state.in_contact = {true, true, true, true};
  const PenetrationMetrics metrics = penetration_metrics(heights, labels);
  const double penetrating_pct = 100.0 * metrics.penetrating_frames /
                                 static_cast<double>(metrics.frames);
  CHECK(metrics.percent_non_penetrating + penetrating_pct ==
        doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("penetration requires one label row per frame") {
  std::vector<std::array<double, 4>> heights(5, {0.0, 0.0, 0.0, 0.0});
  std::vector<ContactState> labels(4);
  CHECK_THROWS_AS(penetration_metrics(heights, labels), ValidationError);
}

TEST_CASE("projecting a motion onto itself has zero reprojection error") {
  const JointTracks tracks = random_tracks(10, 6, 47);
  JointTracks shifted = tracks;
  for (auto& frame : shifted)
    for (auto& p : frame) p += Vec3(0.0, 0.0, 4.0);  // in front of the lens
  const ReprojectionMetrics metrics =
      reprojection_error(test_camera(), shifted, shifted);
  CHECK(metrics.mean_px == 0.0);
  CHECK(metrics.behind_camera == 0);
}

TEST_CASE("a 3-4 pixel offset reads as five pixels of error") {
  // At depth z, shifting a point by (3 z / fx, 4 z / fy) moves its image by
  // exactly (3, 4) pixels.
  const double z = 2.0;
  JointTracks gt(4, std::vector<Vec3>(3));
  for (int t = 0; t < 4; ++t)
    for (int j = 0; j < 3; ++j)
      gt[t][j] = Vec3(0.1 * j - 0.2, 0.05 * t, z);
  JointTracks pred = gt;
  for (auto& frame : pred)
    for (auto& p : frame) p += Vec3(3.0 * z / 1000.0, 4.0 * z / 1000.0, 0.0);
  const ReprojectionMetrics metrics =
      reprojection_error(test_camera(), gt, pred);
  CHECK(metrics.mean_px == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(metrics.stddev_px == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("points behind the camera are excluded and counted") {
  JointTracks gt(1, std::vector<Vec3>(2, Vec3(0.0, 0.0, 3.0)));
  JointTracks pred = gt;
  gt[0][1] = Vec3(0.0, 0.0, -1.0);  // behind
  const ReprojectionMetrics metrics =
      reprojection_error(test_camera(), gt, pred);
  CHECK(metrics.behind_camera == 1);
  CHECK(metrics.frames == 1);  // the frame survives on its other joint
}

TEST_CASE("a nearly coincident viewpoint triggers the depth warning") {
  const CameraModel capture = test_camera();
  CameraModel side = test_camera();
  side.name = "side";
  side.rotation =
      Eigen::AngleAxisd(M_PI / 30.0, Vec3::UnitY()).toRotationMatrix();
  const JointTracks tracks = [] {
    JointTracks t = random_tracks(3, 4, 48);
    for (auto& frame : t)
      for (auto& p : frame) p += Vec3(0.0, 0.0, 5.0);
    return t;
  }();
  const ReprojectionMetrics close =
      reprojection_error(side, tracks, tracks, &capture);
  CHECK_FALSE(close.warnings.empty());

  CameraModel orthogonal = test_camera();
  orthogonal.rotation =
      Eigen::AngleAxisd(M_PI / 2.0, Vec3::UnitY()).toRotationMatrix();
  const ReprojectionMetrics far =
      reprojection_error(orthogonal, tracks, tracks, &capture);
  CHECK(far.warnings.empty());
}

TEST_CASE("identical poses score perfectly in every alignment mode") {
  const JointTracks tracks = random_tracks(6, 8, 49);
  for (const AlignmentMode mode :
       {AlignmentMode::Raw, AlignmentMode::GlobalRoot,
        AlignmentMode::Procrustes}) {
    const PositionMetrics metrics = position_metrics(tracks, tracks, mode);
    CHECK(metrics.mpjpe_mm == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(metrics.pck_150 == 100.0);
    CHECK(metrics.auc == 100.0);
  }
}

TEST_CASE("a 150 mm offset sits exactly on the strict threshold") {
  // From a zero base the shifted distance lands on exactly 150.0 mm in
  // floating point, exercising the strict inequality; a random base would
  // scatter one ulp to either side of the threshold.
  const JointTracks gt = constant_tracks(5, 4);
  JointTracks pred = gt;
  for (auto& frame : pred)
    for (auto& p : frame) p += Vec3(0.15, 0.0, 0.0);
  const PositionMetrics metrics =
      position_metrics(gt, pred, AlignmentMode::Raw);
  CHECK(metrics.mpjpe_mm == 150.0);
  CHECK(metrics.pck_150 == 0.0);  // 150 is not under 150
  CHECK(metrics.auc == 0.0);
}

TEST_CASE("a 75 mm offset scores half the area under the curve") {
  const JointTracks gt = constant_tracks(5, 4);
  JointTracks pred = gt;
  for (auto& frame : pred)
    for (auto& p : frame) p += Vec3(0.0, 0.075, 0.0);
  const PositionMetrics metrics =
      position_metrics(gt, pred, AlignmentMode::Raw);
  CHECK(metrics.mpjpe_mm == 75.0);
  CHECK(metrics.pck_150 == 100.0);  // within 150, outside 1..75
  CHECK(metrics.auc == 50.0);
}

TEST_CASE("root alignment removes a whole-body offset") {
  const JointTracks gt = random_tracks(5, 6, 52);
  JointTracks pred = gt;
  for (auto& frame : pred)
    for (auto& p : frame) p += Vec3(0.3, -0.1, 0.2);
  CHECK(position_metrics(gt, pred, AlignmentMode::Raw).mpjpe_mm > 100.0);
  const PositionMetrics aligned =
      position_metrics(gt, pred, AlignmentMode::GlobalRoot);
  CHECK(aligned.mpjpe_mm == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("similarity alignment undoes rotation translation and scale") {
  const JointTracks gt = random_tracks(5, 6, 53);
  const Mat3 rot = Eigen::AngleAxisd(1.1, Vec3(0.2, -1.0, 0.4).normalized())
                       .toRotationMatrix();
  JointTracks pred = gt;
  for (auto& frame : pred)
    for (auto& p : frame) p = 1.3 * (rot * p) + Vec3(0.5, 0.2, -0.7);
  CHECK(position_metrics(gt, pred, AlignmentMode::Raw).mpjpe_mm > 1.0);
  const PositionMetrics aligned =
      position_metrics(gt, pred, AlignmentMode::Procrustes);
  CHECK(aligned.mpjpe_mm < 1e-6);
  CHECK(aligned.pck_150 == 100.0);
}

TEST_CASE("metrics do not depend on joint ordering") {
  const JointTracks gt = random_tracks(7, 5, 54);
  const JointTracks pred = random_tracks(7, 5, 55);
  JointTracks gt_perm = gt, pred_perm = pred;
  const int perm[5] = {3, 0, 4, 1, 2};
  for (size_t t = 0; t < gt.size(); ++t)
    for (int j = 0; j < 5; ++j) {
      gt_perm[t][j] = gt[t][perm[j]];
      pred_perm[t][j] = pred[t][perm[j]];
    }
  CHECK(position_metrics(gt, pred, AlignmentMode::Raw).mpjpe_mm ==
        doctest::Approx(
            position_metrics(gt_perm, pred_perm, AlignmentMode::Raw).mpjpe_mm)
            .epsilon(1e-12));
  CHECK(smoothness_error(gt, pred).mean ==
        doctest::Approx(smoothness_error(gt_perm, pred_perm).mean)
            .epsilon(1e-12));
}

TEST_CASE("alignment modes parse from their names") {
  CHECK(alignment_mode_from_string("raw") == AlignmentMode::Raw);
  CHECK(alignment_mode_from_string("root") == AlignmentMode::GlobalRoot);
  CHECK(alignment_mode_from_string("procrustes") == AlignmentMode::Procrustes);
  CHECK_THROWS_AS(alignment_mode_from_string("fancy"), ValidationError);
  CHECK(std::string(to_string(AlignmentMode::Procrustes)) == "procrustes");
}

}  // TEST_SUITE
