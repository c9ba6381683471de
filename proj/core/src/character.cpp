#include "physmo/character.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <set>

namespace physmo {

int CharacterModel::dof_count() const {
  int n = root_dof();
  for (const auto& j : joints) n += static_cast<int>(j.axes.size());
  return n;
}

double CharacterModel::total_mass() const {
  double m = 0.0;
  for (const auto& l : links) m += l.mass;
  return m;
}

const LinkSpec* CharacterModel::find_link(const std::string& name) const {
  const int i = link_index(name);
  return i < 0 ? nullptr : &links[i];
}

const JointSpec* CharacterModel::find_joint(const std::string& name) const {
  const int i = joint_index(name);
  return i < 0 ? nullptr : &joints[i];
}

int CharacterModel::link_index(const std::string& name) const {
  for (size_t i = 0; i < links.size(); ++i)
    if (links[i].name == name) return static_cast<int>(i);
  return -1;
}

int CharacterModel::joint_index(const std::string& name) const {
  for (size_t i = 0; i < joints.size(); ++i)
    if (joints[i].name == name) return static_cast<int>(i);
  return -1;
}

std::array<int, 4> CharacterModel::foot_link_indices() const {
  std::array<int, 4> out{};
  const auto names = foot_links.ordered();
  for (int i = 0; i < 4; ++i) out[i] = link_index(*names[i]);
  return out;
}

Mat3 contact_frame(const FloorPlane& floor) {
  const Vec3 n = floor.normal;
  Vec3 t = Vec3::UnitX() - n.x() * n;
  if (t.norm() < 1e-9) t = Vec3::UnitY() - n.y() * n;
  t.normalize();
  Mat3 frame;
  frame.col(0) = n;
  frame.col(1) = t;
  frame.col(2) = n.cross(t);
  return frame;
}

namespace {

void validate_inertia(const LinkSpec& link) {
  if ((link.inertia - link.inertia.transpose()).norm() > 1e-9)
    throw ValidationError("link '" + link.name + "': inertia not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> eig(link.inertia);
  const Vec3 ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 0.0))
    throw ValidationError("link '" + link.name +
                          "': inertia not positive definite");
  // Principal moments of a rigid body obey the triangle inequalities.
  const double tol = 1e-9 * ev.maxCoeff();
  if (ev[0] + ev[1] < ev[2] - tol)
    throw ValidationError("link '" + link.name +
                          "': inertia violates the triangle inequality");
}

void validate_proxy(const LinkSpec& link) {
  switch (link.proxy.kind) {
    case ProxyKind::None:
      return;
    case ProxyKind::Sphere:
      if (!(link.proxy.radius > 0.0))
        throw ValidationError("link '" + link.name +
                              "': sphere proxy needs a positive radius");
      return;
    case ProxyKind::Box:
      if (!(link.proxy.half_extents.minCoeff() > 0.0))
        throw ValidationError("link '" + link.name +
                              "': box proxy needs positive half extents");
      return;
  }
}

}  // namespace

void validate(const CharacterModel& model) {
  if (model.links.empty()) throw ValidationError("model has no links");
  if (model.root_link.empty()) throw ValidationError("root link not named");

  std::set<std::string> link_names;
  for (const auto& l : model.links)
    if (!link_names.insert(l.name).second)
      throw ValidationError("duplicate link name '" + l.name + "'");
  std::set<std::string> joint_names;
  for (const auto& j : model.joints)
    if (!joint_names.insert(j.name).second)
      throw ValidationError("duplicate joint name '" + j.name + "'");

  if (!link_names.count(model.root_link))
    throw ValidationError("root link '" + model.root_link + "' is not a link");
  if (joint_names.count(model.root_link))
    throw ValidationError("root link '" + model.root_link +
                          "' must not be moved by a joint");

  // Every non-root link is the child of the joint sharing its name.
  for (const auto& l : model.links) {
    if (l.name == model.root_link) continue;
    if (!joint_names.count(l.name))
      throw ValidationError("link '" + l.name + "' has no joint of its name");
  }
  for (const auto& j : model.joints) {
    if (!link_names.count(j.name))
      throw ValidationError("joint '" + j.name + "' has no link of its name");
    if (!link_names.count(j.parent_link))
      throw ValidationError("joint '" + j.name + "': parent link '" +
                            j.parent_link + "' does not exist");
    if (j.name == j.parent_link)
      throw ValidationError("joint '" + j.name + "' is its own parent");
    if (!j.offset.allFinite())
      throw ValidationError("joint '" + j.name + "': non-finite offset");
    if (j.axes.size() > 3)
      throw ValidationError("joint '" + j.name + "': more than three axes");
    for (const auto& a : j.axes)
      if (std::abs(a.norm() - 1.0) > 1e-9)
        throw ValidationError("joint '" + j.name + "': axis is not unit");
    const int dof = static_cast<int>(j.axes.size());
    for (const auto* lim : {&j.lower_limits, &j.upper_limits})
      if (lim->has_value() && (*lim)->size() != dof)
        throw ValidationError("joint '" + j.name +
                              "': limit size does not match axis count");
    if (j.lower_limits && j.upper_limits)
      for (int k = 0; k < dof; ++k)
        if (!((*j.lower_limits)[k] < (*j.upper_limits)[k]))
          throw ValidationError("joint '" + j.name + "': inverted limits");
  }

  // Walk parents up to the root to reject cycles and disconnected subtrees.
  for (const auto& j : model.joints) {
    std::set<std::string> seen{j.name};
    std::string cur = j.parent_link;
    while (cur != model.root_link) {
      if (!seen.insert(cur).second)
        throw ValidationError("cycle through joint '" + j.name + "'");
      const JointSpec* parent = model.find_joint(cur);
      if (!parent)
        throw ValidationError("link '" + cur + "' is not connected to the root");
      cur = parent->parent_link;
    }
  }

  for (const auto& l : model.links) {
    if (!(l.mass > 0.0))
      throw ValidationError("link '" + l.name + "': mass must be positive");
    if (!l.com.allFinite())
      throw ValidationError("link '" + l.name + "': non-finite com");
    validate_inertia(l);
    validate_proxy(l);
  }

  const auto foot_names = model.foot_links.ordered();
  for (const auto* name : foot_names) {
    if (name->empty())
      throw ValidationError("all four foot links must be designated");
    const LinkSpec* link = model.find_link(*name);
    if (!link)
      throw ValidationError("foot link '" + *name + "' does not exist");
    if (link->proxy.kind == ProxyKind::None)
      throw ValidationError("foot link '" + *name + "' has no contact proxy");
  }
  if (std::set<std::string>(
          {model.foot_links.left_heel, model.foot_links.left_forefoot,
           model.foot_links.right_heel, model.foot_links.right_forefoot})
          .size() != 4)
    throw ValidationError("foot links must be four distinct links");

  if (!model.base_welded) {
    if (model.root_axes.size() != 3)
      throw ValidationError("floating base needs three root rotation axes");
    for (const auto& a : model.root_axes)
      if (std::abs(a.norm() - 1.0) > 1e-9)
        throw ValidationError("root rotation axis is not unit");
  }

  if (std::abs(model.floor.normal.norm() - 1.0) > 1e-9)
    throw ValidationError("floor normal must be unit length");
  if (!(model.floor.friction > 0.0))
    throw ValidationError("floor friction must be positive");

  for (const auto& cam : model.cameras) validate(cam);
}

}  // namespace physmo
