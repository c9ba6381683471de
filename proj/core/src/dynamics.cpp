#include "physmo/dynamics.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace physmo {

Mat6 spatial_inertia_about_origin(double mass, const Vec3& com_world,
                                  const Mat3& inertia_about_com_world) {
  const Mat3 c = skew(com_world);
  Mat6 inertia;
  inertia.topLeftCorner<3, 3>() =
      inertia_about_com_world + mass * c * c.transpose();
  inertia.topRightCorner<3, 3>() = mass * c;
  inertia.bottomLeftCorner<3, 3>() = mass * c.transpose();
  inertia.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
  return inertia;
}

Vec6 motion_cross(const Vec6& v, const Vec6& m) {
  const Vec3 w = v.head<3>(), v0 = v.tail<3>();
  Vec6 out;
  out.head<3>() = w.cross(m.head<3>());
  out.tail<3>() = v0.cross(m.head<3>()) + w.cross(m.tail<3>());
  return out;
}

Vec6 force_cross(const Vec6& v, const Vec6& f) {
  const Vec3 w = v.head<3>(), v0 = v.tail<3>();
  Vec6 out;
  out.head<3>() = w.cross(f.head<3>()) + v0.cross(f.tail<3>());
  out.tail<3>() = w.cross(f.tail<3>());
  return out;
}

namespace {

int axis_id(const Vec3& a) {
  if ((a - Vec3::UnitX()).norm() < 1e-12) return 0;
  if ((a - Vec3::UnitY()).norm() < 1e-12) return 1;
  if ((a - Vec3::UnitZ()).norm() < 1e-12) return 2;
  return -1;
}

}  // namespace

Mat3 euler_to_matrix(std::span<const Vec3> axes, const Vec3& angles) {
  Mat3 r = Mat3::Identity();
  for (size_t k = 0; k < axes.size(); ++k)
    r = r * Eigen::AngleAxisd(angles[static_cast<int>(k)], axes[k]);
  return r;
}

Vec3 euler_from_matrix(std::span<const Vec3> axes, const Mat3& rotation) {
  if (axes.size() != 3)
    throw ValidationError("euler_from_matrix needs three axes");
  const int i = axis_id(axes[0]), j = axis_id(axes[1]), k = axis_id(axes[2]);
  if (i < 0 || j < 0 || k < 0 || i == j || j == k || i == k)
    throw ValidationError(
        "euler_from_matrix supports distinct axis-aligned axes only");
  // +1 for cyclic (x,y,z)-order triples, -1 otherwise.
  const double eps = ((j - i + 3) % 3 == 1) ? 1.0 : -1.0;
  const double sb = std::clamp(eps * rotation(i, k), -1.0, 1.0);
  Vec3 out;
  out[1] = std::asin(sb);
  if (std::abs(sb) > 1.0 - 1e-12) {
    // Exact lock: only a+c (or a-c) is defined; put everything in the first.
    out[2] = 0.0;
    out[0] = std::atan2(eps * rotation(k, j), rotation(j, j));
  } else {
    out[0] = std::atan2(-eps * rotation(j, k), rotation(k, k));
    out[2] = std::atan2(-eps * rotation(i, j), rotation(i, i));
  }
  return out;
}

Mat3 euler_rate_map(std::span<const Vec3> axes, const Vec3& angles) {
  Mat3 e;
  Mat3 prefix = Mat3::Identity();
  for (int k = 0; k < 3; ++k) {
    e.col(k) = prefix * axes[k];
    prefix = prefix * Eigen::AngleAxisd(angles[k], axes[k]).toRotationMatrix();
  }
  return e;
}

struct CompiledModel::Body {
  int parent = -1;
  Vec3 pre_translation = Vec3::Zero();
  enum Kind { Fixed, Prismatic, Revolute } kind = Fixed;
  Vec3 axis = Vec3::UnitZ();
  int coord = -1;
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();  // about the com, body frame
  int model_link = -1;
};

void CompiledModel::append_joint_chain(const std::string& joint_name,
                                       int parent_body, const Vec3& offset,
                                       std::span<const Vec3> axes,
                                       int model_link, int model_joint) {
  const int dof = static_cast<int>(axes.size());
  int coord = model_joint < 0 ? -1 : joint_first_coord_[model_joint];
  (void)joint_name;
  if (dof == 0) {
    Body body;
    body.parent = parent_body;
    body.pre_translation = offset;
    body.kind = Body::Fixed;
    body.model_link = model_link;
    bodies_.push_back(body);
  } else {
    for (int k = 0; k < dof; ++k) {
      Body body;
      body.parent = k == 0 ? parent_body : static_cast<int>(bodies_.size()) - 1;
      body.pre_translation = k == 0 ? offset : Vec3::Zero();
      body.kind = Body::Revolute;
      body.axis = axes[k];
      body.coord = coord + k;
      if (k == dof - 1) body.model_link = model_link;
      coord_body_[coord + k] = static_cast<int>(bodies_.size());
      bodies_.push_back(body);
    }
  }
  const int link_body = static_cast<int>(bodies_.size()) - 1;
  if (model_link >= 0) {
    link_body_[model_link] = link_body;
    const LinkSpec& spec = model_.links[model_link];
    bodies_[link_body].mass = spec.mass;
    bodies_[link_body].com = spec.com;
    bodies_[link_body].inertia = spec.inertia;
  }
  if (model_joint >= 0) joint_body_[model_joint] = link_body;
}

// Body is complete here, so the compiler-generated member lifecycles must
// live in this translation unit.
CompiledModel::CompiledModel(const CompiledModel&) = default;
CompiledModel::CompiledModel(CompiledModel&&) noexcept = default;
CompiledModel& CompiledModel::operator=(const CompiledModel&) = default;
CompiledModel& CompiledModel::operator=(CompiledModel&&) noexcept = default;
CompiledModel::~CompiledModel() = default;

CompiledModel::CompiledModel(CharacterModel model) : model_(std::move(model)) {
  validate(model_);
  dof_count_ = model_.dof_count();

  const int n_joints = static_cast<int>(model_.joints.size());
  const int n_links = static_cast<int>(model_.links.size());
  coord_body_.assign(dof_count_, -1);
  coord_angular_.assign(dof_count_, true);
  coord_block_.assign(dof_count_, 2);
  coord_joint_.assign(dof_count_, -1);
  joint_first_coord_.assign(n_joints, -1);
  link_body_.assign(n_links, -1);
  joint_body_.assign(n_joints, -1);

  // Coordinates are numbered by declaration order regardless of the order in
  // which bodies get laid out below.
  int next = model_.root_dof();
  for (int j = 0; j < n_joints; ++j) {
    const int dof = static_cast<int>(model_.joints[j].axes.size());
    joint_first_coord_[j] = dof == 0 ? -1 : next;
    for (int k = 0; k < dof; ++k) coord_joint_[next + k] = j;
    next += dof;
  }

  const int root_link = model_.link_index(model_.root_link);
  if (model_.base_welded) {
    Body body;
    body.kind = Body::Fixed;
    body.model_link = root_link;
    bodies_.push_back(body);
    link_body_[root_link] = 0;
    const LinkSpec& spec = model_.links[root_link];
    bodies_[0].mass = spec.mass;
    bodies_[0].com = spec.com;
    bodies_[0].inertia = spec.inertia;
  } else {
    const Vec3 world_axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    for (int k = 0; k < 3; ++k) {
      Body body;
      body.parent = k - 1;
      body.kind = Body::Prismatic;
      body.axis = world_axes[k];
      body.coord = k;
      coord_body_[k] = static_cast<int>(bodies_.size());
      coord_angular_[k] = false;
      coord_block_[k] = 0;
      bodies_.push_back(body);
    }
    for (int k = 0; k < 3; ++k) {
      Body body;
      body.parent = static_cast<int>(bodies_.size()) - 1;
      body.kind = Body::Revolute;
      body.axis = model_.root_axes[k];
      body.coord = 3 + k;
      coord_block_[3 + k] = 1;
      coord_body_[3 + k] = static_cast<int>(bodies_.size());
      if (k == 2) body.model_link = root_link;
      bodies_.push_back(body);
    }
    const int body = static_cast<int>(bodies_.size()) - 1;
    link_body_[root_link] = body;
    const LinkSpec& spec = model_.links[root_link];
    bodies_[body].mass = spec.mass;
    bodies_[body].com = spec.com;
    bodies_[body].inertia = spec.inertia;
  }

  // Joints may be declared in any order; lay out bodies parents-first.
  std::vector<bool> placed(n_joints, false);
  int remaining = n_joints;
  while (remaining > 0) {
    int placed_this_pass = 0;
    for (int j = 0; j < n_joints; ++j) {
      if (placed[j]) continue;
      const JointSpec& joint = model_.joints[j];
      const int parent_link = model_.link_index(joint.parent_link);
      if (link_body_[parent_link] < 0) continue;
      append_joint_chain(joint.name, link_body_[parent_link], joint.offset,
                         joint.axes, model_.link_index(joint.name), j);
      placed[j] = true;
      ++placed_this_pass;
      --remaining;
    }
    if (placed_this_pass == 0)
      throw ValidationError("joint tree is not connected to the root");
  }
}

bool CompiledModel::coordinate_is_angular(int coord) const {
  return coord_angular_[coord];
}
int CompiledModel::coordinate_block(int coord) const {
  return coord_block_[coord];
}
int CompiledModel::coordinate_joint(int coord) const {
  return coord_joint_[coord];
}
int CompiledModel::joint_first_coordinate(int joint) const {
  return joint_first_coord_[joint];
}

void CompiledModel::compute_body_poses(const VecX& q, std::vector<Mat3>& rot,
                                       std::vector<Vec3>& pos) const {
  if (q.size() != dof_count_)
    throw ValidationError("state size does not match the model's coordinates");
  const size_t n = bodies_.size();
  rot.resize(n);
  pos.resize(n);
  for (size_t b = 0; b < n; ++b) {
    const Body& body = bodies_[b];
    const Mat3 parent_rot =
        body.parent < 0 ? Mat3::Identity() : rot[body.parent];
    const Vec3 parent_pos = body.parent < 0 ? Vec3::Zero() : pos[body.parent];
    const Vec3 base = parent_pos + parent_rot * body.pre_translation;
    switch (body.kind) {
      case Body::Fixed:
        rot[b] = parent_rot;
        pos[b] = base;
        break;
      case Body::Prismatic:
        rot[b] = parent_rot;
        pos[b] = base + parent_rot * body.axis * q[body.coord];
        break;
      case Body::Revolute:
        rot[b] = parent_rot *
                 Eigen::AngleAxisd(q[body.coord], body.axis).toRotationMatrix();
        pos[b] = base;
        break;
    }
  }
}

Vec6 CompiledModel::coordinate_axis(int coord, const std::vector<Mat3>& rot,
                                    const std::vector<Vec3>& pos) const {
  const int b = coord_body_[coord];
  const Body& body = bodies_[b];
  Vec6 h;
  if (body.kind == Body::Prismatic) {
    h.head<3>().setZero();
    h.tail<3>() = rot[b] * body.axis;
  } else {
    const Vec3 s = rot[b] * body.axis;
    h.head<3>() = s;
    h.tail<3>() = pos[b].cross(s);
  }
  return h;
}

Kinematics CompiledModel::forward_kinematics(const VecX& q) const {
  std::vector<Mat3> rot;
  std::vector<Vec3> pos;
  compute_body_poses(q, rot, pos);
  Kinematics kin;
  kin.link_pose.resize(link_body_.size());
  for (size_t l = 0; l < link_body_.size(); ++l)
    kin.link_pose[l] = {rot[link_body_[l]], pos[link_body_[l]]};
  return kin;
}

std::vector<Vec3> CompiledModel::joint_positions(const Kinematics& kin) const {
  std::vector<Vec3> out(model_.joints.size());
  for (size_t j = 0; j < model_.joints.size(); ++j) {
    const int link = model_.link_index(model_.joints[j].name);
    out[j] = kin.link_pose[link].position;
  }
  return out;
}

std::vector<Vec3> CompiledModel::joint_positions(const VecX& q) const {
  return joint_positions(forward_kinematics(q));
}

Vec3 CompiledModel::center_of_gravity(const Kinematics& kin) const {
  Vec3 weighted = Vec3::Zero();
  double total = 0.0;
  for (size_t l = 0; l < model_.links.size(); ++l) {
    const LinkSpec& link = model_.links[l];
    weighted += link.mass * (kin.link_pose[l].position +
                             kin.link_pose[l].rotation * link.com);
    total += link.mass;
  }
  return weighted / total;
}

MatX CompiledModel::mass_matrix(const VecX& q) const {
  std::vector<Mat3> rot;
  std::vector<Vec3> pos;
  compute_body_poses(q, rot, pos);

  const size_t n = bodies_.size();
  std::vector<Mat6> composite(n);
  for (size_t b = 0; b < n; ++b) {
    const Body& body = bodies_[b];
    if (body.mass == 0.0 && body.inertia.isZero(0.0)) {
      composite[b].setZero();
    } else {
      composite[b] = spatial_inertia_about_origin(
          body.mass, pos[b] + rot[b] * body.com,
          rot[b] * body.inertia * rot[b].transpose());
    }
  }
  for (size_t b = n; b-- > 0;)
    if (bodies_[b].parent >= 0) composite[bodies_[b].parent] += composite[b];

  std::vector<Vec6> axes(dof_count_);
  for (int c = 0; c < dof_count_; ++c) axes[c] = coordinate_axis(c, rot, pos);

  MatX m = MatX::Zero(dof_count_, dof_count_);
  for (int j = 0; j < dof_count_; ++j) {
    const int body = coord_body_[j];
    const Vec6 force = composite[body] * axes[j];
    m(j, j) = axes[j].dot(force);
    for (int b = bodies_[body].parent; b >= 0; b = bodies_[b].parent) {
      const int i = bodies_[b].coord;
      if (i < 0) continue;
      const double value = axes[i].dot(force);
      m(i, j) = value;
      m(j, i) = value;
    }
  }
  return m;
}

VecX CompiledModel::inverse_dynamics(const VecX& q, const VecX& qdot,
                                     const VecX& qddot,
                                     const Vec3& gravity) const {
  if (qdot.size() != dof_count_ || qddot.size() != dof_count_)
    throw ValidationError("state size does not match the model's coordinates");
  std::vector<Mat3> rot;
  std::vector<Vec3> pos;
  compute_body_poses(q, rot, pos);

  const size_t n = bodies_.size();
  std::vector<Vec6> vel(n), acc(n), force(n);
  Vec6 base_acc = Vec6::Zero();
  base_acc.tail<3>() = -gravity;  // uniform gravity as base acceleration

  for (size_t b = 0; b < n; ++b) {
    const Body& body = bodies_[b];
    const Vec6 parent_vel =
        body.parent < 0 ? Vec6::Zero() : vel[body.parent];
    const Vec6 parent_acc = body.parent < 0 ? base_acc : acc[body.parent];
    if (body.coord >= 0) {
      const Vec6 h = coordinate_axis(body.coord, rot, pos);
      vel[b] = parent_vel + h * qdot[body.coord];
      acc[b] = parent_acc + h * qddot[body.coord] +
               motion_cross(vel[b], h) * qdot[body.coord];
    } else {
      vel[b] = parent_vel;
      acc[b] = parent_acc;
    }
    if (body.mass == 0.0 && body.inertia.isZero(0.0)) {
      force[b].setZero();
    } else {
      const Mat6 inertia = spatial_inertia_about_origin(
          body.mass, pos[b] + rot[b] * body.com,
          rot[b] * body.inertia * rot[b].transpose());
      force[b] = inertia * acc[b] + force_cross(vel[b], inertia * vel[b]);
    }
  }

  VecX tau = VecX::Zero(dof_count_);
  for (size_t b = n; b-- > 0;) {
    const Body& body = bodies_[b];
    if (body.coord >= 0)
      tau[body.coord] = coordinate_axis(body.coord, rot, pos).dot(force[b]);
    if (body.parent >= 0) force[body.parent] += force[b];
  }
  return tau;
}

VecX CompiledModel::bias_forces(const VecX& q, const VecX& qdot,
                                const Vec3& gravity) const {
  return inverse_dynamics(q, qdot, VecX::Zero(dof_count_), gravity);
}

MatX CompiledModel::contact_jacobian(const VecX& q,
                                     std::span<const int> links) const {
  std::vector<Mat3> rot;
  std::vector<Vec3> pos;
  compute_body_poses(q, rot, pos);
  MatX jac = MatX::Zero(6 * static_cast<int>(links.size()), dof_count_);
  for (size_t i = 0; i < links.size(); ++i) {
    for (int b = link_body_[links[i]]; b >= 0; b = bodies_[b].parent) {
      const int c = bodies_[b].coord;
      if (c < 0) continue;
      jac.block<6, 1>(6 * static_cast<int>(i), c) =
          coordinate_axis(c, rot, pos);
    }
  }
  return jac;
}

MatX CompiledModel::point_jacobian(const VecX& q, int link,
                                   const Vec3& point_world) const {
  std::vector<Mat3> rot;
  std::vector<Vec3> pos;
  compute_body_poses(q, rot, pos);
  MatX jac = MatX::Zero(3, dof_count_);
  for (int b = link_body_[link]; b >= 0; b = bodies_[b].parent) {
    const int c = bodies_[b].coord;
    if (c < 0) continue;
    const Vec6 h = coordinate_axis(c, rot, pos);
    jac.col(c) = h.tail<3>() + h.head<3>().cross(point_world);
  }
  return jac;
}

Vec3 CompiledModel::proxy_support_point(const Kinematics& kin, int link,
                                        const FloorPlane& floor) const {
  const ContactProxy& proxy = model_.links[link].proxy;
  const LinkPose& pose = kin.link_pose[link];
  switch (proxy.kind) {
    case ProxyKind::None:
      return pose.position;
    case ProxyKind::Sphere:
      return pose.position - floor.normal * proxy.radius;
    case ProxyKind::Box: {
      const Vec3 local_normal = pose.rotation.transpose() * floor.normal;
      Vec3 d;
      for (int k = 0; k < 3; ++k)
        d[k] = local_normal[k] >= 0.0 ? -proxy.half_extents[k]
                                      : proxy.half_extents[k];
      return pose.position + pose.rotation * d;
    }
  }
  return pose.position;
}

MatX CompiledModel::force_transform(const Kinematics& kin,
                                    std::span<const int> links,
                                    const FloorPlane& floor,
                                    const Mat3& frame) const {
  MatX g = MatX::Zero(6 * static_cast<int>(links.size()),
                      3 * static_cast<int>(links.size()));
  for (size_t i = 0; i < links.size(); ++i) {
    const Vec3 p = proxy_support_point(kin, links[i], floor);
    g.block<3, 3>(6 * static_cast<int>(i), 3 * static_cast<int>(i)) =
        skew(p) * frame;
    g.block<3, 3>(6 * static_cast<int>(i) + 3, 3 * static_cast<int>(i)) = frame;
  }
  return g;
}

MatX CompiledModel::point_velocity_map(const VecX& q,
                                       std::span<const int> links,
                                       const FloorPlane& floor,
                                       const Mat3& frame) const {
  const Kinematics kin = forward_kinematics(q);
  MatX map(3 * static_cast<int>(links.size()), dof_count_);
  for (size_t i = 0; i < links.size(); ++i) {
    const Vec3 p = proxy_support_point(kin, links[i], floor);
    map.middleRows<3>(3 * static_cast<int>(i)) =
        frame.transpose() * point_jacobian(q, links[i], p);
  }
  return map;
}

IntegrationResult CompiledModel::integrate(const PoseState& state,
                                           const VecX& qddot,
                                           double phi) const {
  if (state.q.size() != dof_count_ || state.qdot.size() != dof_count_ ||
      qddot.size() != dof_count_)
    throw ValidationError("state size does not match the model's coordinates");
  if (!qddot.allFinite())
    throw NumericError("non-finite accelerations passed to integrate");
  if (!(phi > 0.0)) throw ValidationError("time step must be positive");

  IntegrationResult out;
  out.state.qdot = state.qdot + phi * qddot;
  out.state.q = state.q + phi * out.state.qdot;
  for (int c = 0; c < dof_count_; ++c)
    if (coord_angular_[c]) out.state.q[c] = wrap_angle(out.state.q[c]);

  if (!model_.base_welded) {
    const double middle = out.state.q[4];
    const bool near_lock = std::abs(std::abs(middle) - M_PI / 2.0) < 1e-3 ||
                           std::abs(middle) > M_PI / 2.0;
    const bool aligned = axis_id(model_.root_axes[0]) >= 0 &&
                         axis_id(model_.root_axes[1]) >= 0 &&
                         axis_id(model_.root_axes[2]) >= 0;
    if (near_lock && aligned) {
      const Vec3 angles = out.state.q.segment<3>(3);
      const Mat3 r = euler_to_matrix(model_.root_axes, angles);
      const Vec3 fresh = euler_from_matrix(model_.root_axes, r);
      if ((fresh - angles).cwiseAbs().maxCoeff() > 1e-12) {
        const Mat3 e_old = euler_rate_map(model_.root_axes, angles);
        const Mat3 e_new = euler_rate_map(model_.root_axes, fresh);
        const Vec3 omega = e_old * out.state.qdot.segment<3>(3);
        Eigen::JacobiSVD<Mat3> svd(
            e_new, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Vec3 inv_s;
        for (int k = 0; k < 3; ++k) {
          const double s = svd.singularValues()[k];
          inv_s[k] = s / (s * s + 1e-12);
        }
        out.state.qdot.segment<3>(3) =
            svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose() *
            omega;
        out.state.q.segment<3>(3) = fresh;
        out.reparameterized = true;
      }
    }
  }
  return out;
}

double CompiledModel::kinetic_energy(const VecX& q, const VecX& qdot) const {
  std::vector<Mat3> rot;
  std::vector<Vec3> pos;
  compute_body_poses(q, rot, pos);
  const size_t n = bodies_.size();
  std::vector<Vec6> vel(n);
  double energy = 0.0;
  for (size_t b = 0; b < n; ++b) {
    const Body& body = bodies_[b];
    const Vec6 parent_vel = body.parent < 0 ? Vec6::Zero() : vel[body.parent];
    vel[b] = body.coord >= 0
                 ? Vec6(parent_vel +
                        coordinate_axis(body.coord, rot, pos) * qdot[body.coord])
                 : parent_vel;
    if (body.mass == 0.0 && body.inertia.isZero(0.0)) continue;
    const Mat6 inertia = spatial_inertia_about_origin(
        body.mass, pos[b] + rot[b] * body.com,
        rot[b] * body.inertia * rot[b].transpose());
    energy += 0.5 * vel[b].dot(inertia * vel[b]);
  }
  return energy;
}

double CompiledModel::potential_energy(const VecX& q,
                                       const Vec3& gravity) const {
  const Kinematics kin = forward_kinematics(q);
  double energy = 0.0;
  for (size_t l = 0; l < model_.links.size(); ++l) {
    const LinkSpec& link = model_.links[l];
    const Vec3 com =
        kin.link_pose[l].position + kin.link_pose[l].rotation * link.com;
    energy -= link.mass * gravity.dot(com);
  }
  return energy;
}

}  // namespace physmo
