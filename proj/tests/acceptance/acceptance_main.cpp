// Release gate: one self-contained check per acceptance criterion, each
// printing a single PASS/FAIL line with the measured numbers. The process
// exits with the number of failed criteria.

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "physmo/balance.hpp"
#include "physmo/contact.hpp"
#include "physmo/dynamics.hpp"
#include "physmo/metrics.hpp"
#include "physmo/optimizer.hpp"
#include "physmo/pipeline.hpp"
#include "physmo/qp.hpp"
#include "physmo/synthetic.hpp"

using namespace physmo;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

const CompiledModel& shared_model() {
  static const CompiledModel model(reference_character());
  return model;
}

VecX random_pose(const CompiledModel& model, std::mt19937& rng) {
  std::uniform_real_distribution<double> angle(-0.5, 0.5);
  std::uniform_real_distribution<double> shift(-1.0, 1.0);
  VecX q(model.dof_count());
  for (int c = 0; c < model.dof_count(); ++c)
    q[c] = model.coordinate_is_angular(c) ? angle(rng) : shift(rng);
  return q;
}

Vec3 vee(const Mat3& m) {
  return Vec3(0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
              0.5 * (m(1, 0) - m(0, 1)));
}

JointTracks joint_tracks(const CompiledModel& model,
                         const std::vector<VecX>& poses) {
  JointTracks tracks;
  tracks.reserve(poses.size());
  for (const VecX& q : poses) tracks.push_back(model.joint_positions(q));
  return tracks;
}

std::vector<VecX> result_poses(const std::vector<FrameResult>& results) {
  std::vector<VecX> poses;
  poses.reserve(results.size());
  for (const FrameResult& frame : results) poses.push_back(frame.state.q);
  return poses;
}

ContactState planted() {
  ContactState contacts;
  contacts.stationary = true;
  contacts.in_contact = {true, true, true, true};
  return contacts;
}

// ---------------------------------------------------------------- 1 -----

Outcome dynamics_identities() {
  const auto start = std::chrono::steady_clock::now();
  const CompiledModel& model = shared_model();
  const int n = model.dof_count();
  const auto feet = model.model().foot_link_indices();
  const std::vector<int> links(feet.begin(), feet.end());
  std::mt19937 rng(90210);

  double worst_sym = 0.0, worst_crba = 0.0, worst_jac = 0.0;
  const double h = 1e-6;
  for (int trial = 0; trial < 1000; ++trial) {
    const VecX q = random_pose(model, rng);
    const MatX m = model.mass_matrix(q);
    worst_sym = std::max(worst_sym, (m - m.transpose()).norm() / m.norm());

    // Unit-acceleration inverse dynamics reads out columns of M.
    const VecX zero = VecX::Zero(n);
    for (int c = 0; c < n; ++c) {
      VecX unit = VecX::Zero(n);
      unit[c] = 1.0;
      const VecX column = model.inverse_dynamics(q, zero, unit, Vec3::Zero());
      worst_crba = std::max(worst_crba, (column - m.col(c)).norm() /
                                            std::max(1.0, m.col(c).norm()));
    }

    // Contact jacobian columns against central differences of the poses.
    const MatX jac = model.contact_jacobian(q, links);
    const Kinematics kin = model.forward_kinematics(q);
    for (int c = 0; c < n; ++c) {
      VecX hi = q, lo = q;
      hi[c] += h;
      lo[c] -= h;
      const Kinematics kin_hi = model.forward_kinematics(hi);
      const Kinematics kin_lo = model.forward_kinematics(lo);
      for (size_t i = 0; i < links.size(); ++i) {
        const LinkPose& pose = kin.link_pose[links[i]];
        const Vec3 omega =
            vee(((kin_hi.link_pose[links[i]].rotation -
                  kin_lo.link_pose[links[i]].rotation) /
                 (2.0 * h)) *
                pose.rotation.transpose());
        const Vec3 pdot = (kin_hi.link_pose[links[i]].position -
                           kin_lo.link_pose[links[i]].position) /
                          (2.0 * h);
        Vec6 expected;
        expected << omega, pdot - omega.cross(pose.position);
        worst_jac = std::max(
            worst_jac,
            (jac.block<6, 1>(6 * static_cast<int>(i), c) - expected).norm());
      }
    }
  }

  // Energy-rate balance: one second of torque-driven free flight without
  // gravity; the work integral must reproduce the kinetic energy gain.
  // Torque amplitudes scale with each coordinate's inertia so every joint
  // sees accelerations of the same order and the step resolves the motion.
  PoseState state;
  state.q = VecX::Zero(n);
  state.qdot = VecX::Zero(n);
  const MatX m0 = model.mass_matrix(state.q);
  const double phi = 1e-5;
  const int steps = 100000;
  double work = 0.0;
  const double initial = model.kinetic_energy(state.q, state.qdot);
  for (int s = 0; s < steps; ++s) {
    const double t = s * phi;
    VecX tau = VecX::Zero(n);
    for (int c = 6; c < n; ++c)
      tau[c] = 10.0 * m0(c, c) * std::sin(2.0 * M_PI * t + 0.37 * c);
    const VecX qddot = model.mass_matrix(state.q).llt().solve(
        tau - model.bias_forces(state.q, state.qdot, Vec3::Zero()));
    const VecX mid = state.qdot + 0.5 * phi * qddot;
    state = model.integrate(state, qddot, phi).state;
    work += phi * mid.dot(tau);
  }
  const double gained = model.kinetic_energy(state.q, state.qdot) - initial;
  const double energy_err =
      std::abs(gained - work) / std::max(1.0, std::abs(work));

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  Outcome out;
  out.pass = worst_sym <= 1e-9 && worst_crba <= 1e-9 && worst_jac <= 1e-5 &&
             energy_err <= 1e-4 && seconds < 60.0;
  out.detail = fmt("sym %.1e, crba %.1e, jacobian %.1e, energy %.1e, %.1f s",
                   worst_sym, worst_crba, worst_jac, energy_err, seconds);
  return out;
}

// ---------------------------------------------------------------- 2 -----

double qp_objective(const QPProblem& problem, const VecX& x) {
  return 0.5 * x.dot(problem.hessian * x) + problem.gradient.dot(x);
}

QPProblem random_qp(std::mt19937& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int n = std::uniform_int_distribution<int>(1, 6)(rng);
  const int max_eq = std::min(2, std::max(0, n - 1));
  const int neq = std::uniform_int_distribution<int>(0, max_eq)(rng);
  const int nineq = std::uniform_int_distribution<int>(0, 6)(rng);

  QPProblem problem;
  MatX a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = unit(rng);
  problem.hessian = a.transpose() * a + 0.3 * MatX::Identity(n, n);
  problem.gradient = VecX::NullaryExpr(n, [&](int) { return unit(rng); });
  VecX anchor = VecX::NullaryExpr(n, [&](int) { return unit(rng); });
  problem.eq_matrix = MatX(neq, n);
  for (int i = 0; i < neq; ++i)
    for (int j = 0; j < n; ++j) problem.eq_matrix(i, j) = unit(rng);
  problem.eq_rhs = problem.eq_matrix * anchor;
  problem.ineq_matrix = MatX(nineq, n);
  problem.ineq_rhs = VecX(nineq);
  for (int i = 0; i < nineq; ++i) {
    for (int j = 0; j < n; ++j) problem.ineq_matrix(i, j) = unit(rng);
    const double slack = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    problem.ineq_rhs[i] =
        problem.ineq_matrix.row(i).dot(anchor) - (i % 3 == 0 ? 0.0 : slack);
  }
  return problem;
}

bool enumerate_optimum(const QPProblem& problem, double* best) {
  const int n = problem.variables();
  const int neq = static_cast<int>(problem.eq_matrix.rows());
  const int nineq = static_cast<int>(problem.ineq_matrix.rows());
  bool found = false;
  *best = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << nineq); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < nineq; ++i)
      if (mask & (1 << i)) active.push_back(i);
    const int na = static_cast<int>(active.size());
    const int dim = n + neq + na;
    MatX kkt = MatX::Zero(dim, dim);
    VecX rhs = VecX::Zero(dim);
    kkt.topLeftCorner(n, n) = problem.hessian;
    rhs.head(n) = -problem.gradient;
    if (neq > 0) {
      kkt.block(0, n, n, neq) = -problem.eq_matrix.transpose();
      kkt.block(n, 0, neq, n) = problem.eq_matrix;
      rhs.segment(n, neq) = problem.eq_rhs;
    }
    for (int i = 0; i < na; ++i) {
      kkt.block(0, n + neq + i, n, 1) =
          -problem.ineq_matrix.row(active[i]).transpose();
      kkt.block(n + neq + i, 0, 1, n) = problem.ineq_matrix.row(active[i]);
      rhs[n + neq + i] = problem.ineq_rhs[active[i]];
    }
    Eigen::CompleteOrthogonalDecomposition<MatX> cod(kkt);
    const VecX z = cod.solve(rhs);
    if ((kkt * z - rhs).norm() > 1e-8 * std::max(1.0, rhs.norm())) continue;
    const VecX x = z.head(n);
    if (nineq > 0 &&
        (problem.ineq_matrix * x - problem.ineq_rhs).minCoeff() < -1e-9)
      continue;
    bool dual_ok = true;
    for (int i = 0; i < na; ++i)
      if (z[n + neq + i] < -1e-9) dual_ok = false;
    if (!dual_ok) continue;
    found = true;
    *best = std::min(*best, qp_objective(problem, x));
  }
  return found;
}

// Shared pipeline runs reused by several criteria.
struct PipelineFixtures {
  SyntheticMotion drop;
  std::vector<FrameResult> drop_filtered;
  SyntheticMotion jitter;  // seed 1
  std::vector<FrameResult> jitter_filtered;
  SyntheticMotion walk;
  std::vector<FrameResult> walk_filtered;
};

const PipelineFixtures& fixtures() {
  static const PipelineFixtures fixed = [] {
    PipelineFixtures f;
    const CompiledModel& model = shared_model();
    SyntheticOptions drop_options;
    drop_options.frames = 60;
    drop_options.drop_depth = 0.03;
    f.drop = generate_drop(model, drop_options);
    f.drop_filtered = process_sequence(model, PipelineConfig{}, f.drop.corrupted,
                                       f.drop.contacts, f.drop.fps);

    SyntheticOptions jitter_options;
    jitter_options.frames = 100;
    jitter_options.noise_std = 0.02;
    jitter_options.seed = 1;
    f.jitter = generate_jitter(model, jitter_options);
    f.jitter_filtered =
        process_sequence(model, PipelineConfig{}, f.jitter.corrupted,
                         f.jitter.contacts, f.jitter.fps);

    SyntheticOptions walk_options;
    walk_options.frames = 120;
    f.walk = generate_walk(model, walk_options);
    f.walk_filtered = process_sequence(model, PipelineConfig{},
                                       f.walk.poses, f.walk.fps);
    return f;
  }();
  return fixed;
}

Outcome qp_oracle() {
  std::mt19937 rng(5150);
  QPSolver solver;
  double worst_gap = 0.0;
  int solved = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const QPProblem problem = random_qp(rng);
    double oracle = 0.0;
    if (!enumerate_optimum(problem, &oracle)) continue;
    const QPSolution solution = solver.solve(problem);
    if (solution.status != QPStatus::Optimal) continue;
    ++solved;
    worst_gap = std::max(worst_gap,
                         std::abs(qp_objective(problem, solution.x) - oracle) /
                             std::max(1.0, std::abs(oracle)));
  }

  // KKT residuals on every QP the tracking pipeline produced.
  double worst_kkt = 0.0;
  const auto scan = [&](const std::vector<FrameResult>& results) {
    for (const FrameResult& frame : results)
      for (const IterationDiagnostics& it : frame.iterations) {
        for (const QPDiagnostics* d : {&it.grf, &it.torque}) {
          worst_kkt = std::max({worst_kkt, d->stationarity,
                                d->primal_feasibility, d->dual_feasibility,
                                d->complementarity});
        }
      }
  };
  scan(fixtures().drop_filtered);
  scan(fixtures().jitter_filtered);
  scan(fixtures().walk_filtered);

  Outcome out;
  out.pass = solved == 500 && worst_gap <= 1e-8 && worst_kkt <= 1e-6;
  out.detail = fmt("%d/500 solved, objective gap %.1e, pipeline kkt %.1e",
                   solved, worst_gap, worst_kkt);
  return out;
}

// ---------------------------------------------------------------- 3 -----

Outcome static_equilibrium() {
  const CompiledModel& model = shared_model();
  PoseState state;
  state.q = standing_pose(model);
  state.qdot = VecX::Zero(model.dof_count());
  const VecX zero = VecX::Zero(model.dof_count());
  const FrictionCone cone = FrictionCone::from_floor(model.model().floor);
  const Vec3 gravity(0.0, 0.0, -9.81);
  QPSolver solver;

  const GRFSolution grf =
      estimate_grf(model, state, zero, planted(), cone, gravity, solver);
  double normal_sum = 0.0;
  for (size_t i = 0; i < grf.links.size(); ++i) normal_sum += grf.forces[3 * i];
  const double weight = model.model().total_mass() * 9.81;
  const double sum_err = std::abs(normal_sum - weight) / weight;

  // A near-exact fit isolates the equations of motion from the torque
  // regularizer when measuring the fictitious root actuation.
  const TorqueSolution torques = solve_torques(
      model, state, zero, grf, cone, 0.02, 1e-6, 0.01, gravity, solver);
  const double root_force = torques.tau.head<6>().norm();

  Outcome out;
  out.pass = grf.qp.status == QPStatus::Optimal &&
             torques.qp.status == QPStatus::Optimal && sum_err <= 1e-6 &&
             root_force <= 1e-3 * weight;
  out.detail = fmt("normals %.3f N vs weight %.3f N (rel %.1e), "
                   "root residual %.2e N (cap %.2e)",
                   normal_sum, weight, sum_err, root_force, 1e-3 * weight);
  return out;
}

// ---------------------------------------------------------------- 4 -----

Outcome penetration_elimination() {
  const CompiledModel& model = shared_model();
  const PipelineFixtures& f = fixtures();
  const int sunk_from = 30;  // second half of the drop fixture

  const auto slice = [&](const std::vector<std::array<double, 4>>& heights,
                         const std::vector<ContactState>& labels) {
    const std::vector<std::array<double, 4>> h(heights.begin() + sunk_from,
                                               heights.end());
    const std::vector<ContactState> l(labels.begin() + sunk_from, labels.end());
    return penetration_metrics(h, l);
  };

  const auto raw_heights = foot_sole_heights(model, f.drop.corrupted);
  const PenetrationMetrics raw_sunk = slice(raw_heights, f.drop.contacts);
  const PenetrationMetrics raw_all =
      penetration_metrics(raw_heights, f.drop.contacts);

  const auto filtered_heights =
      foot_sole_heights(model, result_poses(f.drop_filtered));
  const PenetrationMetrics filtered_sunk =
      slice(filtered_heights, f.drop.contacts);
  const PenetrationMetrics filtered_all =
      penetration_metrics(filtered_heights, f.drop.contacts);

  Outcome out;
  out.pass = std::abs(raw_sunk.mean_penetration_mm - 30.0) < 1e-6 &&
             raw_all.percent_non_penetrating < 100.0 &&
             filtered_sunk.mean_penetration_mm <= 1.0 &&
             filtered_all.percent_non_penetrating >= 99.0;
  out.detail = fmt("raw mpe %.1f mm pnp %.1f%% -> filtered mpe %.4f mm "
                   "pnp %.1f%%",
                   raw_sunk.mean_penetration_mm,
                   raw_all.percent_non_penetrating,
                   filtered_sunk.mean_penetration_mm,
                   filtered_all.percent_non_penetrating);
  return out;
}

// ---------------------------------------------------------------- 5 -----

Outcome jitter_reduction() {
  const CompiledModel& model = shared_model();
  double worst_ratio = 0.0;
  std::string ratios;
  for (unsigned long long seed = 1; seed <= 5; ++seed) {
    SyntheticOptions options;
    options.frames = 100;
    options.noise_std = 0.02;
    options.seed = seed;
    const SyntheticMotion jitter = generate_jitter(model, options);
    const auto filtered = process_sequence(
        model, PipelineConfig{}, jitter.corrupted, jitter.contacts, jitter.fps);

    const JointTracks clean = joint_tracks(model, jitter.poses);
    const double noisy =
        smoothness_error(clean, joint_tracks(model, jitter.corrupted)).mean;
    const double smoothed =
        smoothness_error(clean, joint_tracks(model, result_poses(filtered)))
            .mean;
    const double ratio = smoothed / noisy;
    worst_ratio = std::max(worst_ratio, ratio);
    ratios += fmt("%s%.3f", seed == 1 ? "" : " ", ratio);
  }
  Outcome out;
  out.pass = worst_ratio <= 0.6;
  out.detail = fmt("smoothness ratios [%s], worst %.3f (cap 0.6)",
                   ratios.c_str(), worst_ratio);
  return out;
}

// ---------------------------------------------------------------- 6 -----

Outcome contact_constraints() {
  const CompiledModel& model = shared_model();
  const FloorPlane& floor = model.model().floor;
  const Mat3 frame = contact_frame(floor);
  const PipelineConfig config;  // slip tolerance and step length
  double worst_normal = 0.0, worst_tangent = 0.0;
  long checked = 0;

  const auto scan = [&](const std::vector<FrameResult>& results) {
    for (const FrameResult& frame_result : results) {
      if (frame_result.grf_links.empty()) continue;
      if (!frame_result.iterations.empty() &&
          frame_result.iterations.back().relaxation_level != 0)
        continue;
      ++checked;
      // The last physics iteration bounded the post-step velocities at its
      // pre-step kinematics; the semi-implicit update is exactly
      // invertible, so that state is recoverable from the outputs.
      const VecX q_pre =
          frame_result.state.q - config.phi * frame_result.state.qdot;
      const MatX velocity_map = model.point_velocity_map(
          q_pre, frame_result.grf_links, floor, frame);
      const VecX v = velocity_map * frame_result.state.qdot;
      for (size_t i = 0; i < frame_result.grf_links.size(); ++i) {
        worst_normal = std::min(worst_normal, v[3 * i]);
        worst_tangent = std::max({worst_tangent, std::abs(v[3 * i + 1]),
                                  std::abs(v[3 * i + 2])});
      }
    }
  };
  scan(fixtures().drop_filtered);
  scan(fixtures().jitter_filtered);
  scan(fixtures().walk_filtered);

  Outcome out;
  out.pass = checked > 0 && worst_normal >= -1e-8 &&
             worst_tangent <= config.slip_tolerance + 1e-8;
  out.detail = fmt("%ld frames, min normal speed %.2e, max tangential "
                   "%.4f (cap %.4f)",
                   checked, worst_normal, worst_tangent,
                   config.slip_tolerance + 1e-8);
  return out;
}

// ---------------------------------------------------------------- 7 -----

Outcome balance_convergence() {
  const CompiledModel& model = shared_model();
  SyntheticOptions options;
  options.frames = 3;
  options.lean_angle = 0.3;
  const VecX leaned = generate_lean(model, options).poses.back();

  BalanceCorrector corrector;
  const CorrectionResult first = corrector.correct(model, leaned, planted());
  const double theta0 = first.assessment.lean_angle;
  const bool initially_outside = !first.assessment.cog_inside;
  const double first_step_err = std::abs(first.increment - theta0 / 10.0);

  bool monotone = true;
  bool geometric = true;
  int inside_at = -1;
  double previous = theta0;
  for (int t = 1; t <= 40 && inside_at < 0; ++t) {
    const CorrectionResult result = corrector.correct(model, leaned, planted());
    if (result.assessment.cog_inside) {
      inside_at = t;
      break;
    }
    monotone = monotone && result.assessment.lean_angle < previous;
    geometric = geometric && std::abs(result.assessment.lean_angle -
                                      theta0 * std::pow(0.9, t)) <= 1e-9;
    previous = result.assessment.lean_angle;
  }

  Outcome out;
  out.pass = initially_outside && std::abs(theta0 - 0.3) < 0.05 &&
             first_step_err <= 1e-12 && monotone && geometric &&
             inside_at > 0 && inside_at <= 40;
  out.detail = fmt("lean %.4f rad outside, first step err %.1e, geometric "
                   "decay %s, inside support at frame %d",
                   theta0, first_step_err, geometric ? "exact" : "BROKEN",
                   inside_at);
  return out;
}

// ---------------------------------------------------------------- 8 -----

Outcome friction_cone() {
  const FrictionCone cone = FrictionCone::from_floor(
      shared_model().model().floor);
  const double edge = cone.scaled_friction();
  double worst_excess = -1e9;
  long forces = 0;
  const auto scan = [&](const std::vector<FrameResult>& results) {
    for (const FrameResult& frame : results) {
      for (size_t i = 0; i < frame.grf_links.size(); ++i) {
        const double normal = frame.grf[3 * i];
        ++forces;
        worst_excess = std::max(
            {worst_excess, std::abs(frame.grf[3 * i + 1]) - edge * normal,
             std::abs(frame.grf[3 * i + 2]) - edge * normal, -normal});
      }
    }
  };
  scan(fixtures().drop_filtered);
  scan(fixtures().jitter_filtered);
  scan(fixtures().walk_filtered);

  Outcome out;
  out.pass = forces > 0 && worst_excess <= 1e-8;
  out.detail = fmt("%ld contact forces, worst pyramid excess %.2e "
                   "(mu/sqrt2 = %.4f)",
                   forces, worst_excess, edge);
  return out;
}

// ---------------------------------------------------------------- 9 -----

Outcome realtime_budget() {
  const CompiledModel& model = shared_model();
  SyntheticOptions options;
  options.frames = 100;
  const SyntheticMotion stand = generate_stand(model, options);
  Pipeline pipeline(model, PipelineConfig{}, stand.fps);
  pipeline.reset(stand.poses.front());
  std::vector<double> times;
  for (size_t t = 0; t < stand.poses.size(); ++t)
    times.push_back(pipeline.step(stand.poses[t], stand.contacts[t]).compute_ms);

  double mean = 0.0;
  for (double v : times) mean += v;
  mean /= static_cast<double>(times.size());
  std::nth_element(times.begin(), times.begin() + 94, times.end());
  const double p95 = times[94];

  Outcome out;
  out.pass = mean <= 40.0 && p95 <= 60.0;
  out.detail = fmt("mean %.2f ms (cap 40), p95 %.2f ms (cap 60), 4 contacts",
                   mean, p95);
  return out;
}

// --------------------------------------------------------------- 10 -----

Outcome constant_conformance() {
  const PipelineConfig config;
  const PDGains gains;
  const ContactThresholds thresholds;
  const FrictionCone cone;
  const BalanceOptions balance;
  const FloorPlane floor;

  struct Pin {
    const char* name;
    double actual;
    double expected;
  };
  const Pin pins[] = {
      {"phi", config.phi, 0.01},
      {"iterations", static_cast<double>(config.iterations), 4.0},
      {"joint kp", gains.joint_kp, 300.0},
      {"joint kd", gains.joint_kd, 20.0},
      {"root angular kp", gains.root_angular_kp, 340.0},
      {"root angular kd", gains.root_angular_kd, 30.0},
      {"root linear kp", gains.root_linear_kp, 1000.0},
      {"root linear kd", gains.root_linear_kd, 80.0},
      {"friction", cone.mu, 0.8},
      {"floor friction", floor.friction, 0.8},
      {"label survival height", thresholds.refine_height, 0.1},
      {"sliding threshold", thresholds.speed, 0.05},
      {"height margin", thresholds.height_margin, 0.05},
      {"correction step fraction", balance.step_fraction, 0.1},
  };
  std::string bad;
  for (const Pin& pin : pins)
    if (pin.actual != pin.expected) bad += fmt(" %s=%g", pin.name, pin.actual);

  Outcome out;
  out.pass = bad.empty();
  out.detail = bad.empty()
                   ? fmt("%zu constants pinned at their defaults",
                         sizeof(pins) / sizeof(pins[0]))
                   : "drifted:" + bad;
  return out;
}

// --------------------------------------------------------------- 11 -----

Outcome metrics_examples() {
  std::string failures;
  const auto expect = [&](bool ok, const char* what) {
    if (!ok) failures += fmt(" %s", what);
  };

  // Smoothness: identical tracks, a closed-form wobble, offset invariance.
  JointTracks gt(3, std::vector<Vec3>(2, Vec3::Zero()));
  expect(smoothness_error(gt, gt).mean == 0.0, "identical-smoothness");
  const double d = 0.004;
  JointTracks wobble = gt;
  wobble[1][0] = Vec3(d, 0.0, 0.0);
  wobble[2][0] = Vec3(-d, 0.0, 0.0);
  expect(std::abs(smoothness_error(gt, wobble).mean - 1000.0 * 3.0 * d / 4.0) <=
             1e-9 * (1000.0 * 3.0 * d / 4.0),
         "wobble-closed-form");
  JointTracks shifted = wobble;
  for (auto& frame : shifted)
    for (auto& p : frame) p += Vec3(0.4, -0.2, 0.1);
  expect(std::abs(smoothness_error(gt, shifted).mean -
                  smoothness_error(gt, wobble).mean) <= 1e-9,
         "offset-invariance");

  // Penetration: on-floor zero, the 10 mm / two-frame split, hovering feet.
  {
    std::vector<std::array<double, 4>> heights(4, {0.0, 0.0, 0.0, 0.0});
    std::vector<ContactState> labels(4);
    for (auto& l : labels) l.in_contact = {true, true, true, true};
    const PenetrationMetrics metrics = penetration_metrics(heights, labels);
    expect(metrics.mean_penetration_mm == 0.0 &&
               metrics.percent_non_penetrating == 100.0,
           "on-floor-zero");
  }
  {
    std::vector<std::array<double, 4>> heights(2, {0.0, 0.0, 0.0, 0.0});
    heights[0][0] = -0.010;
    std::vector<ContactState> labels(2);
    labels[0].in_contact[0] = true;
    labels[1].in_contact[0] = true;
    const PenetrationMetrics metrics = penetration_metrics(heights, labels);
    expect(std::abs(metrics.mean_penetration_mm - 5.0) <= 5e-9 &&
               metrics.percent_non_penetrating == 50.0,
           "ten-mm-split");
  }
  {
    std::vector<std::array<double, 4>> heights(6, {0.002, 0.001, 0.004, 0.001});
    std::vector<ContactState> labels(6);
    for (auto& l : labels) l.in_contact = {true, true, true, true};
    expect(penetration_metrics(heights, labels).percent_non_penetrating ==
               100.0,
           "hovering-pnp");
  }

  // Reprojection: exact identity, the 3-4-5 offset, the view-angle warning.
  CameraModel camera;
  camera.fx = camera.fy = 1000.0;
  camera.cx = camera.cy = 512.0;
  {
    JointTracks tracks(3, std::vector<Vec3>(4, Vec3(0.1, -0.2, 3.0)));
    expect(reprojection_error(camera, tracks, tracks).mean_px == 0.0,
           "projection-identity");
    JointTracks moved = tracks;
    for (auto& frame : moved)
      for (auto& p : frame) p += Vec3(3.0 * 3.0 / 1000.0, 4.0 * 3.0 / 1000.0, 0.0);
    expect(std::abs(reprojection_error(camera, tracks, moved).mean_px - 5.0) <=
               5e-9,
           "three-four-five");
    CameraModel near_copy = camera;
    near_copy.rotation =
        Eigen::AngleAxisd(M_PI / 30.0, Vec3::UnitY()).toRotationMatrix();
    expect(!reprojection_error(near_copy, tracks, tracks, &camera)
                .warnings.empty(),
           "view-angle-warning");
  }

  // Positions: perfect score, the strict 150 mm edge, the 75 mm half-area,
  // and alignment modes undoing their own transform class.
  {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    JointTracks ref(5, std::vector<Vec3>(6));
    for (auto& frame : ref)
      for (auto& p : frame) p = Vec3(dist(rng), dist(rng), dist(rng));
    const PositionMetrics perfect =
        position_metrics(ref, ref, AlignmentMode::Raw);
    expect(perfect.mpjpe_mm == 0.0 && perfect.pck_150 == 100.0 &&
               perfect.auc == 100.0,
           "position-identity");

    // From a zero base the shifted distances land on exactly 150.0 and
    // 75.0 mm in floating point, exercising the strict thresholds.
    const JointTracks zeros(5, std::vector<Vec3>(6, Vec3::Zero()));
    JointTracks at150 = zeros;
    for (auto& frame : at150)
      for (auto& p : frame) p += Vec3(0.15, 0.0, 0.0);
    const PositionMetrics edge =
        position_metrics(zeros, at150, AlignmentMode::Raw);
    expect(edge.mpjpe_mm == 150.0 && edge.pck_150 == 0.0 && edge.auc == 0.0,
           "strict-150-edge");

    JointTracks at75 = zeros;
    for (auto& frame : at75)
      for (auto& p : frame) p += Vec3(0.0, 0.075, 0.0);
    const PositionMetrics half =
        position_metrics(zeros, at75, AlignmentMode::Raw);
    expect(half.mpjpe_mm == 75.0 && half.pck_150 == 100.0 && half.auc == 50.0,
           "half-area-75mm");

    JointTracks offset = ref;
    for (auto& frame : offset)
      for (auto& p : frame) p += Vec3(0.3, -0.1, 0.2);
    expect(position_metrics(ref, offset, AlignmentMode::GlobalRoot).mpjpe_mm <=
               1e-9,
           "root-alignment");

    const Mat3 rot = Eigen::AngleAxisd(1.0, Vec3(0.3, 0.2, -0.5).normalized())
                         .toRotationMatrix();
    JointTracks similar = ref;
    for (auto& frame : similar)
      for (auto& p : frame) p = 1.2 * (rot * p) + Vec3(0.4, 0.0, -0.3);
    expect(position_metrics(ref, similar, AlignmentMode::Procrustes).mpjpe_mm <=
               1e-6,
           "similarity-alignment");
    expect(position_metrics(ref, similar, AlignmentMode::Raw).mpjpe_mm > 1.0,
           "raw-sees-transform");
  }

  Outcome out;
  out.pass = failures.empty();
  out.detail = failures.empty() ? "every worked example reproduced"
                                : "failed:" + failures;
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"dynamics identities", dynamics_identities},
      {"qp oracle equivalence", qp_oracle},
      {"static equilibrium", static_equilibrium},
      {"penetration elimination", penetration_elimination},
      {"jitter reduction", jitter_reduction},
      {"contact constraint satisfaction", contact_constraints},
      {"balance correction convergence", balance_convergence},
      {"friction cone", friction_cone},
      {"real-time budget", realtime_budget},
      {"constant conformance", constant_conformance},
      {"metrics worked examples", metrics_examples},
  };

  int failures = 0;
  int index = 0;
  for (const Criterion& criterion : criteria) {
    ++index;
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = fmt("threw: %s", e.what());
    }
    failures += outcome.pass ? 0 : 1;
    std::printf("[%s] %2d. %-33s %s\n", outcome.pass ? "PASS" : "FAIL", index,
                criterion.name, outcome.detail.c_str());
    std::fflush(stdout);
  }
  if (failures == 0)
    std::printf("all %d acceptance criteria hold\n", index);
  else
    std::printf("%d of %d acceptance criteria FAILED\n", failures, index);
  return failures;
}
