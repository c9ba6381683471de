#include "physmo/balance.hpp"

#include <algorithm>
#include <cmath>

namespace physmo {

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) -
         (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

std::vector<Vec2> convex_hull(std::vector<Vec2> points) {
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec2& a, const Vec2& b) {
                             return a.x() == b.x() && a.y() == b.y();
                           }),
               points.end());
  const int n = static_cast<int>(points.size());
  if (n < 3) return points;

  std::vector<Vec2> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  const int lower = k + 1;
  for (int i = n - 2; i >= 0; --i) {  // upper chain
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0.0)
      --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);  // last point repeats the first
  return hull;
}

bool point_in_convex_polygon(const Vec2& point,
                             const std::vector<Vec2>& hull_ccw) {
  const int n = static_cast<int>(hull_ccw.size());
  if (n < 3) return false;
  for (int i = 0; i < n; ++i) {
    if (cross2(hull_ccw[i], hull_ccw[(i + 1) % n], point) < -1e-12)
      return false;
  }
  return true;
}

BalanceAssessment assess_balance(const CompiledModel& model, const VecX& q,
                                 const ContactState& contacts,
                                 const std::string& spine_tip_joint) {
  const Kinematics kin = model.forward_kinematics(q);
  const FloorPlane& floor = model.model().floor;
  const Mat3 frame = contact_frame(floor);
  const Vec3 normal = frame.col(0), tangent = frame.col(1),
             bitangent = frame.col(2);

  BalanceAssessment out;
  out.cog = model.center_of_gravity(kin);
  out.cog_floor = Vec2{out.cog.dot(tangent), out.cog.dot(bitangent)};

  // Support pads: an octagon around each active proxy's support point.
  const std::array<int, 4> feet = model.model().foot_link_indices();
  std::vector<Vec2> pad_points;
  for (int foot = 0; foot < 4; ++foot) {
    if (!contacts.in_contact[foot]) continue;
    const int link = feet[foot];
    const ContactProxy& proxy = model.model().links[link].proxy;
    const double radius = proxy.kind == ProxyKind::Box
                              ? proxy.half_extents.maxCoeff()
                              : proxy.radius;
    const Vec3 support = model.proxy_support_point(kin, link, floor);
    const Vec2 center{support.dot(tangent), support.dot(bitangent)};
    for (int k = 0; k < 8; ++k) {
      const double angle = k * M_PI / 4.0;
      pad_points.push_back(
          center + radius * Vec2{std::cos(angle), std::sin(angle)});
    }
  }
  out.support_polygon = convex_hull(std::move(pad_points));
  out.degenerate = out.support_polygon.size() < 3;
  out.cog_inside = !out.degenerate &&
                   point_in_convex_polygon(out.cog_floor, out.support_polygon);

  const int root_link = model.model().link_index(model.model().root_link);
  const int tip_link = model.model().link_index(spine_tip_joint);
  if (tip_link < 0)
    throw ValidationError("balance assessment: unknown spine tip joint '" +
                          spine_tip_joint + "'");
  const Vec3 spine =
      kin.link_pose[tip_link].position - kin.link_pose[root_link].position;
  const double length = spine.norm();
  if (length > 1e-9) {
    const Vec3 dir = spine / length;
    out.lean_angle = std::acos(std::clamp(dir.dot(normal), -1.0, 1.0));
    const Vec3 horizontal = dir - dir.dot(normal) * normal;
    if (horizontal.norm() > 1e-9)
      out.lean_axis = horizontal.normalized().cross(normal);
  }
  return out;
}

std::vector<int> BalanceCorrector::leg_coordinates(
    const CompiledModel& model) const {
  std::vector<int> coords;
  for (const std::string& name : options_.leg_joints) {
    const int joint = model.model().joint_index(name);
    if (joint < 0) continue;
    const int first = model.joint_first_coordinate(joint);
    if (first < 0) continue;
    const int dof =
        static_cast<int>(model.model().joints[joint].axes.size());
    for (int k = 0; k < dof; ++k) coords.push_back(first + k);
  }
  return coords;
}

VecX BalanceCorrector::apply(const CompiledModel& model,
                             const VecX& reference) const {
  VecX pose = reference;
  if (xi_ != 0.0 && axis_.norm() > 1e-9 && !model.model().base_welded) {
    const Mat3 delta =
        Eigen::AngleAxisd(xi_, axis_.normalized()).toRotationMatrix();
    const Mat3 old_rot =
        euler_to_matrix(model.model().root_axes, pose.segment<3>(3));
    pose.segment<3>(3) =
        euler_from_matrix(model.model().root_axes, delta * old_rot);
  }
  if (leg_offsets_.size() == reference.size()) {
    for (int c : leg_coordinates(model)) {
      const double magnitude =
          std::max(0.0, std::abs(reference[c]) - leg_offsets_[c]);
      pose[c] = reference[c] >= 0.0 ? magnitude : -magnitude;
    }
  }
  return pose;
}

void BalanceCorrector::reset() {
  xi_ = 0.0;
  axis_.setZero();
  leg_offsets_.resize(0);
}

CorrectionResult BalanceCorrector::correct(const CompiledModel& model,
                                           const VecX& reference,
                                           const ContactState& contacts) {
  CorrectionResult out;
  if (!contacts.stationary) {
    reset();
    out.pose = reference;
    out.assessment = assess_balance(model, reference, contacts,
                                    options_.spine_tip_joint);
    out.mode = CorrectionMode::Inactive;
    return out;
  }

  if (leg_offsets_.size() != reference.size())
    leg_offsets_ = VecX::Zero(reference.size());

  out.pose = apply(model, reference);
  out.assessment =
      assess_balance(model, out.pose, contacts, options_.spine_tip_joint);

  if (out.assessment.degenerate) {
    out.mode = CorrectionMode::Hold;
    return out;
  }
  if (out.assessment.cog_inside) {
    out.mode = CorrectionMode::Balanced;
    return out;
  }

  if (out.assessment.lean_angle >= options_.small_lean &&
      out.assessment.lean_axis.norm() > 1e-9) {
    out.increment = options_.step_fraction * out.assessment.lean_angle;
    xi_ += out.increment;
    axis_ = out.assessment.lean_axis;
    out.mode = CorrectionMode::Rotate;
  } else {
    for (int c : leg_coordinates(model)) {
      const double remaining =
          std::max(0.0, std::abs(reference[c]) - leg_offsets_[c]);
      leg_offsets_[c] += options_.step_fraction * remaining;
    }
    out.mode = CorrectionMode::StraightenLegs;
  }
  out.pose = apply(model, reference);
  return out;
}

}  // namespace physmo
