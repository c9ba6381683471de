#include "physmo/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace physmo {

namespace {

std::vector<int> active_links(const CompiledModel& model,
                              const ContactState& contacts) {
  const std::array<int, 4> feet = model.model().foot_link_indices();
  std::vector<int> links;
  for (int foot = 0; foot < 4; ++foot)
    if (contacts.in_contact[foot]) links.push_back(feet[foot]);
  return links;
}

// Friction pyramid rows for stacked cone-coordinate forces: per contact,
// lambda_n >= epsilon and mu_bar lambda_n +- lambda_{t,b} >= 0.
void append_pyramid(const FrictionCone& cone, int contacts, MatX& c, VecX& d) {
  constexpr double kMinNormal = 1e-9;
  const double mu_bar = cone.scaled_friction();
  c = MatX::Zero(5 * contacts, 3 * contacts);
  d = VecX::Zero(5 * contacts);
  for (int i = 0; i < contacts; ++i) {
    const int row = 5 * i, col = 3 * i;
    c(row, col) = 1.0;
    d[row] = kMinNormal;
    c(row + 1, col) = mu_bar;
    c(row + 1, col + 1) = 1.0;
    c(row + 2, col) = mu_bar;
    c(row + 2, col + 1) = -1.0;
    c(row + 3, col) = mu_bar;
    c(row + 3, col + 2) = 1.0;
    c(row + 4, col) = mu_bar;
    c(row + 4, col + 2) = -1.0;
  }
}

}  // namespace

GRFSolution estimate_grf(const CompiledModel& model, const PoseState& state,
                         const VecX& qddot_des, const ContactState& contacts,
                         const FrictionCone& cone, const Vec3& gravity,
                         const QPSolver& solver, const VecX* warm_start) {
  if (model.model().base_welded)
    throw ValidationError(
        "contact force estimation needs a floating base (the welded base has "
        "no unactuated equations)");

  GRFSolution out;
  out.links = active_links(model, contacts);
  const int nc = static_cast<int>(out.links.size());
  if (nc == 0) {
    out.forces.resize(0);
    out.qp.status = QPStatus::Optimal;
    out.qp.x.resize(0);
    return out;
  }

  const Kinematics kin = model.forward_kinematics(state.q);
  const MatX jac = model.contact_jacobian(state.q, out.links);
  const MatX g_map =
      model.force_transform(kin, out.links, model.model().floor, cone.frame);
  const MatX a = (jac.transpose() * g_map).topRows(6);
  const VecX b = (model.mass_matrix(state.q) * qddot_des +
                  model.bias_forces(state.q, state.qdot, gravity))
                     .head(6);

  QPProblem problem;
  problem.hessian = 2.0 * a.transpose() * a;
  problem.gradient = -2.0 * a.transpose() * b;
  problem.eq_matrix.resize(0, 3 * nc);
  problem.eq_rhs.resize(0);
  append_pyramid(cone, nc, problem.ineq_matrix, problem.ineq_rhs);

  VecX start;
  if (warm_start != nullptr && warm_start->size() == 3 * nc &&
      warm_start->allFinite()) {
    start = *warm_start;
  } else {
    // Unit normal force per contact sits strictly inside the pyramid.
    start = VecX::Zero(3 * nc);
    for (int i = 0; i < nc; ++i) start[3 * i] = 1.0;
  }
  out.qp = solver.solve(problem, start);
  out.forces = out.qp.x;
  return out;
}

TorqueSolution solve_torques(const CompiledModel& model,
                             const PoseState& state, const VecX& qddot_des,
                             const GRFSolution& grf, const FrictionCone& cone,
                             double slip_tolerance, double tau_weight,
                             double phi, const Vec3& gravity,
                             const QPSolver& solver) {
  if (tau_weight < 0.0)
    throw ValidationError("torque weight must not be negative");
  if (slip_tolerance < 0.0)
    throw ValidationError("slip tolerance must not be negative");

  const int n = model.dof_count();
  const int nc = static_cast<int>(grf.links.size());
  const MatX mass = model.mass_matrix(state.q);
  const VecX bias = model.bias_forces(state.q, state.qdot, gravity);

  // r collects everything on the force side: tau = M qddot - r.
  VecX r = -bias;
  VecX support_height = VecX::Zero(nc);
  if (nc > 0) {
    const Kinematics kin = model.forward_kinematics(state.q);
    const MatX jac = model.contact_jacobian(state.q, grf.links);
    const MatX g_map =
        model.force_transform(kin, grf.links, model.model().floor, cone.frame);
    r += jac.transpose() * (g_map * grf.forces);
    for (int i = 0; i < nc; ++i) {
      const Vec3 support =
          model.proxy_support_point(kin, grf.links[i], model.model().floor);
      support_height[i] = model.model().floor.height(support);
    }
  }

  QPProblem problem;
  problem.hessian =
      2.0 * (MatX::Identity(n, n) + tau_weight * mass.transpose() * mass);
  problem.gradient = -2.0 * qddot_des - 2.0 * tau_weight * mass.transpose() * r;
  problem.eq_matrix.resize(0, n);
  problem.eq_rhs.resize(0);

  TorqueSolution out;
  MatX velocity_map;
  if (nc > 0)
    velocity_map = model.point_velocity_map(state.q, grf.links,
                                            model.model().floor, cone.frame);

  // Relaxation ladder: full constraints, then normals only, then none.
  for (int level = 0; level < 3; ++level) {
    const int rows_per_contact = level == 0 ? 5 : (level == 1 ? 1 : 0);
    const int rows = nc * rows_per_contact;
    problem.ineq_matrix = MatX::Zero(rows, n);
    problem.ineq_rhs = VecX::Zero(rows);
    for (int i = 0; i < nc && rows_per_contact > 0; ++i) {
      const auto normal_row = velocity_map.row(3 * i);
      const double normal_now = normal_row.dot(state.qdot);
      const int base = rows_per_contact * i;
      // phi * P_n x >= lift - P_n qdot keeps the post-step normal speed
      // outward; when the support point already sits below the floor the
      // lift term pushes it back toward the surface with a kRecoveryTime
      // time constant, gentle enough not to bounce off micrometer overlaps.
      const double lift =
          std::max(0.0, -support_height[i] / kPenetrationRecoveryTime);
      problem.ineq_matrix.row(base) = phi * normal_row;
      problem.ineq_rhs[base] = lift - normal_now;
      if (rows_per_contact == 5) {
        for (int axis = 1; axis <= 2; ++axis) {
          const auto row = velocity_map.row(3 * i + axis);
          const double now = row.dot(state.qdot);
          problem.ineq_matrix.row(base + 2 * axis - 1) = phi * row;
          problem.ineq_rhs[base + 2 * axis - 1] = -slip_tolerance - now;
          problem.ineq_matrix.row(base + 2 * axis) = -phi * row;
          problem.ineq_rhs[base + 2 * axis] = -slip_tolerance + now;
        }
      }
    }

    QPSolution qp;
    if (rows == 0) {
      qp = solver.solve(problem, qddot_des);
    } else {
      // Feasible hint: the acceleration that drives every post-step contact
      // point velocity to its target (zero, or the recovery lift speed).
      VecX target = VecX::Zero(3 * nc);
      for (int i = 0; i < nc; ++i)
        target[3 * i] =
            std::max(0.0, -support_height[i] / kPenetrationRecoveryTime);
      const VecX hint = (phi * velocity_map)
                            .completeOrthogonalDecomposition()
                            .solve(target - velocity_map * state.qdot);
      qp = solver.solve(problem, hint);
    }
    if (qp.status == QPStatus::Infeasible && level < 2) continue;
    out.relaxation_level = level;
    out.qp = std::move(qp);
    break;
  }

  out.qddot = out.qp.x.size() == n ? out.qp.x : VecX::Zero(n);
  out.tau = mass * out.qddot - r;
  return out;
}

}  // namespace physmo
