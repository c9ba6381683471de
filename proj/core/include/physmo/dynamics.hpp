#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "physmo/character.hpp"
#include "physmo/types.hpp"

namespace physmo {

/// Generalized state. Layout of q: root position (3), root orientation as
/// successive rotation angles about the configured root axes (3), then joint
/// coordinates in declaration order. Welded-base models drop the first six.
struct PoseState {
  VecX q;
  VecX qdot;
};

struct LinkPose {
  Mat3 rotation = Mat3::Identity();  ///< link frame in world
  Vec3 position = Vec3::Zero();
};

/// World poses of all links for one configuration.
struct Kinematics {
  std::vector<LinkPose> link_pose;  ///< indexed like CharacterModel::links
  Vec3 link_position(int link) const { return link_pose[link].position; }
};

struct IntegrationResult {
  PoseState state;
  bool reparameterized = false;  ///< root orientation re-extracted
};

/// 6D spatial vectors are [angular; linear] referred to the world origin:
/// a motion vector holds (omega, velocity of the body-fixed point at the
/// origin); a force vector holds (moment about the origin, force).
Mat6 spatial_inertia_about_origin(double mass, const Vec3& com_world,
                                  const Mat3& inertia_about_com_world);
Vec6 motion_cross(const Vec6& v, const Vec6& m);
Vec6 force_cross(const Vec6& v, const Vec6& f);

/// CharacterModel compiled to a chain of single-coordinate primitive joints
/// (three world-axis prismatic + three revolute for the floating base, one
/// revolute per Euler axis elsewhere). Immutable; all queries are const and
/// safe to call concurrently.
class CompiledModel {
 public:
  explicit CompiledModel(CharacterModel model);
  CompiledModel(const CompiledModel&);
  CompiledModel(CompiledModel&&) noexcept;
  CompiledModel& operator=(const CompiledModel&);
  CompiledModel& operator=(CompiledModel&&) noexcept;
  ~CompiledModel();

  const CharacterModel& model() const { return model_; }
  int dof_count() const { return dof_count_; }
  int link_count() const { return static_cast<int>(model_.links.size()); }

  /// True for coordinates that are angles (wrapped by the integrator).
  bool coordinate_is_angular(int coord) const;
  /// 0 = root linear, 1 = root angular, 2 = joint.
  int coordinate_block(int coord) const;
  /// Joint owning the coordinate, -1 for root coordinates.
  int coordinate_joint(int coord) const;
  /// First coordinate of a joint, -1 for fixed joints.
  int joint_first_coordinate(int joint) const;

  Kinematics forward_kinematics(const VecX& q) const;

  /// Joint origin positions in world, indexed like CharacterModel::joints.
  std::vector<Vec3> joint_positions(const Kinematics& kin) const;
  std::vector<Vec3> joint_positions(const VecX& q) const;

  /// Whole-body center of gravity in world.
  Vec3 center_of_gravity(const Kinematics& kin) const;

  /// Joint-space mass matrix via composite rigid bodies; symmetric positive
  /// definite away from representation singularities.
  MatX mass_matrix(const VecX& q) const;

  /// Coriolis/centrifugal + gravity bias c: the equation of motion reads
  /// M(q) qddot + c(q, qdot) = tau + generalized contact forces.
  VecX bias_forces(const VecX& q, const VecX& qdot, const Vec3& gravity) const;

  /// Recursive Newton-Euler: generalized forces producing qddot, equal to
  /// M qddot + c under the given gravity.
  VecX inverse_dynamics(const VecX& q, const VecX& qdot, const VecX& qddot,
                        const Vec3& gravity) const;

  /// Stacked 6D spatial Jacobian of the given links (6 rows per link, world
  /// origin reference): J * qdot = stacked link spatial velocities.
  MatX contact_jacobian(const VecX& q, std::span<const int> links) const;

  /// Linear velocity map of a world point rigidly attached to a link
  /// (3 x dof): rows * qdot = world velocity of the point.
  MatX point_jacobian(const VecX& q, int link, const Vec3& point_world) const;

  /// Lowest point of a link's contact proxy along the floor normal.
  Vec3 proxy_support_point(const Kinematics& kin, int link,
                           const FloorPlane& floor) const;

  /// Maps per-contact forces (columns of `frame` = force basis, typically the
  /// friction-cone axes n, t, b) to world-origin wrenches, one 6x3 block per
  /// link: contact_jacobian(...)^T * force_transform(...) * lambda is the
  /// generalized contact force.
  MatX force_transform(const Kinematics& kin, std::span<const int> links,
                       const FloorPlane& floor, const Mat3& frame) const;

  /// Contact-point velocity map in the columns-of-`frame` basis
  /// (3 rows per link): rows * qdot = support-point velocity components.
  MatX point_velocity_map(const VecX& q, std::span<const int> links,
                          const FloorPlane& floor, const Mat3& frame) const;

  /// Semi-implicit step: qdot += phi * qddot, then q += phi * qdot, angular
  /// coordinates wrapped to (-pi, pi]. When the middle root angle lands within
  /// 1e-3 of +-pi/2 or beyond, the root triple is re-extracted from the
  /// rotation matrix (canonical branch) and qdot is remapped to preserve
  /// angular velocity. Throws NumericError on non-finite input.
  IntegrationResult integrate(const PoseState& state, const VecX& qddot,
                              double phi) const;

  /// Sum of per-link kinetic energies at the given state.
  double kinetic_energy(const VecX& q, const VecX& qdot) const;
  /// Gravitational potential (zero level at world origin plane).
  double potential_energy(const VecX& q, const Vec3& gravity) const;

 private:
  struct Body;
  void append_joint_chain(const std::string& joint_name, int parent_body,
                          const Vec3& offset, std::span<const Vec3> axes,
                          int model_link, int model_joint);
  void compute_body_poses(const VecX& q, std::vector<Mat3>& rot,
                          std::vector<Vec3>& pos) const;
  Vec6 coordinate_axis(int coord, const std::vector<Mat3>& rot,
                       const std::vector<Vec3>& pos) const;

  CharacterModel model_;
  std::vector<Body> bodies_;
  std::vector<int> coord_body_;        ///< compiled body per coordinate
  std::vector<bool> coord_angular_;
  std::vector<int> coord_block_;
  std::vector<int> coord_joint_;
  std::vector<int> joint_first_coord_;
  std::vector<int> link_body_;         ///< compiled body per model link
  std::vector<int> joint_body_;        ///< body whose frame origin is the joint
  int dof_count_ = 0;
};

/// Euler triple <-> rotation matrix for three successive rotations about the
/// given (distinct, axis-aligned) axes. Used for root reparameterization.
Mat3 euler_to_matrix(std::span<const Vec3> axes, const Vec3& angles);
Vec3 euler_from_matrix(std::span<const Vec3> axes, const Mat3& rotation);
/// Maps Euler angle rates to world angular velocity: omega = E(angles) * rates.
Mat3 euler_rate_map(std::span<const Vec3> axes, const Vec3& angles);

}  // namespace physmo
