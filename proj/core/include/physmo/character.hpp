#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "physmo/camera.hpp"
#include "physmo/types.hpp"

namespace physmo {

enum class ProxyKind { None, Sphere, Box };

/// Collision proxy for floor contact, centered at the owning link's joint.
struct ContactProxy {
  ProxyKind kind = ProxyKind::None;
  double radius = 0.0;               ///< sphere [m]
  Vec3 half_extents = Vec3::Zero();  ///< box [m]
};

/// One joint of the kinematic tree. A joint with k axes contributes k
/// generalized coordinates (successive rotations about the listed axes,
/// applied left to right); an empty axis list is a fixed attachment.
struct JointSpec {
  std::string name;
  std::string parent_link;
  Vec3 offset = Vec3::Zero();  ///< joint origin in the parent link frame [m]
  std::vector<Vec3> axes;      ///< unit rotation axes in the joint base frame
  std::optional<VecX> lower_limits;  ///< per axis [rad]
  std::optional<VecX> upper_limits;
};

/// Rigid body moved by the joint of the same name. The link frame coincides
/// with the joint frame after rotation.
struct LinkSpec {
  std::string name;
  double mass = 0.0;           ///< [kg]
  Vec3 com = Vec3::Zero();     ///< center of mass in the link frame [m]
  Mat3 inertia = Mat3::Zero(); ///< about the com, link frame [kg m^2]
  ContactProxy proxy;
};

/// Floor half-space: points with normal.dot(p) - offset < 0 are below.
struct FloorPlane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  double friction = 0.8;

  double height(const Vec3& p) const { return normal.dot(p) - offset; }
};

/// Orthonormal contact frame for a floor: columns are (normal, tangent,
/// bitangent). The tangent is world x projected onto the plane, or world y
/// when the normal is (anti)parallel to x.
Mat3 contact_frame(const FloorPlane& floor);

/// Names of the four contact-bearing foot links, in the canonical order
/// (left heel, left forefoot, right heel, right forefoot).
struct FootLinks {
  std::string left_heel;
  std::string left_forefoot;
  std::string right_heel;
  std::string right_forefoot;

  std::array<const std::string*, 4> ordered() const {
    return {&left_heel, &left_forefoot, &right_heel, &right_forefoot};
  }
};

/// Full character description. Immutable after load_character/validate;
/// safe to share across threads by const reference.
struct CharacterModel {
  int schema_version = 1;
  std::string name;
  bool base_welded = false;        ///< true: no floating-base coordinates
  std::string root_link;
  std::vector<Vec3> root_axes;     ///< root orientation rotation axes (3)
  std::vector<JointSpec> joints;
  std::vector<LinkSpec> links;
  FootLinks foot_links;
  FloorPlane floor;
  std::vector<CameraModel> cameras;

  /// 6 + sum of joint DoFs (0 + sum when base_welded).
  int dof_count() const;
  int root_dof() const { return base_welded ? 0 : 6; }
  double total_mass() const;

  const LinkSpec* find_link(const std::string& name) const;
  const JointSpec* find_joint(const std::string& name) const;
  int link_index(const std::string& name) const;  ///< -1 when absent
  int joint_index(const std::string& name) const;

  /// Indices into links of the four foot links, canonical order.
  std::array<int, 4> foot_link_indices() const;
};

/// Structural and numeric validation; throws ValidationError on a malformed
/// tree (cycle, missing parent, duplicate names, missing foot links) and on
/// bad numbers (non-positive mass, non-positive-definite inertia, non-unit
/// axes, inverted limits).
void validate(const CharacterModel& model);

/// Parses and validates a character config document. `strict` additionally
/// rejects unknown fields anywhere in the document.
CharacterModel load_character(const std::string& json_text, bool strict = false);
CharacterModel load_character_file(const std::string& path, bool strict = false);

/// Serializes a validated model; load_character(save_character(m)) reproduces
/// every numeric field bit-for-bit.
std::string save_character(const CharacterModel& model);
void save_character_file(const CharacterModel& model, const std::string& path);

/// Mass properties assigned to one link by distribute_mass.
struct LinkMassProperties {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();  ///< about the com
};

/// Splits a subject's total mass over the reference skeleton's links using the
/// documented anthropometric fraction table, with solid-primitive inertias
/// scaled by stature. Throws ValidationError for non-positive inputs.
std::map<std::string, LinkMassProperties> distribute_mass(double total_mass,
                                                          double height);

/// Fraction of total body mass carried by a reference-skeleton link.
/// Throws ValidationError for an unknown link name.
double reference_mass_fraction(const std::string& link_name);

/// Builds the reference humanoid (43 generalized coordinates, 37 joints,
/// 4 foot links) for a subject of the given mass [kg] and stature [m].
CharacterModel reference_character(double total_mass = 70.0,
                                   double height = 1.75);

}  // namespace physmo
