#include "physmo/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace physmo {

Pipeline::Pipeline(const CompiledModel& model, PipelineConfig config,
                   double fps)
    : model_(model),
      config_(std::move(config)),
      fps_(fps),
      cone_(FrictionCone::from_floor(model.model().floor)),
      solver_(config_.qp) {
  if (!(config_.phi > 0.0))
    throw ValidationError("integrator step must be positive");
  if (config_.iterations < 1)
    throw ValidationError("at least one physics iteration per frame");
  if (!(config_.accel_clamp > 0.0))
    throw ValidationError("reference acceleration cap must be positive");
  if (config_.tau_weight < 0.0)
    throw ValidationError("torque weight must not be negative");
  if (config_.slip_tolerance < 0.0)
    throw ValidationError("slip tolerance must not be negative");
  if (!(fps_ > 0.0)) throw ValidationError("frame rate must be positive");
  if (!(config_.gravity >= 0.0))
    throw ValidationError("gravity magnitude must not be negative");

  warnings_ = validate(config_.gains);

  const double covered = config_.iterations * config_.phi;
  if (std::abs(covered - 1.0 / fps_) > 1e-9) {
    if (!config_.allow_frame_rate_mismatch)
      throw ValidationError(
          "iterations * phi does not cover one frame interval; set "
          "allow_frame_rate_mismatch to run anyway");
    warnings_.push_back(
        "simulated time per frame differs from the frame interval; the "
        "output will drift against the input timeline");
  }

  gravity_ = -config_.gravity * model_.model().floor.normal;
  state_.q = VecX::Zero(model_.dof_count());
  state_.qdot = VecX::Zero(model_.dof_count());
}

void Pipeline::reset(const VecX& initial_pose) {
  if (initial_pose.size() != model_.dof_count())
    throw ValidationError("state size does not match the model's coordinates");
  state_.q = initial_pose;
  state_.qdot = VecX::Zero(model_.dof_count());
  corrector_.reset();
  frame_index_ = 0;
  prev_ref_q_.resize(0);
  prev_prev_ref_q_.resize(0);
  prev_ref_qdot_.resize(0);
  grf_warm_.resize(0);
  grf_warm_links_.clear();
}

FrameResult Pipeline::step(const VecX& reference_pose,
                           const ContactState& labeled) {
  const int n = model_.dof_count();
  if (reference_pose.size() != n)
    throw ValidationError("state size does not match the model's coordinates");
  if (!reference_pose.allFinite())
    throw NumericError("non-finite reference pose");

  const auto started = std::chrono::steady_clock::now();
  FrameResult out;

  // Labels are tightened against the simulated pose, not the reference one:
  // the simulation is what decides whether a proxy actually hit the floor.
  const Kinematics sim_kin = model_.forward_kinematics(state_.q);
  out.contacts = refine_contacts(model_, sim_kin, labeled, config_.thresholds);

  if (config_.balance_correction) {
    CorrectionResult correction =
        corrector_.correct(model_, reference_pose, out.contacts);
    out.reference = std::move(correction.pose);
    out.correction_mode = correction.mode;
    out.lean_angle = correction.assessment.lean_angle;
  } else {
    out.reference = reference_pose;
  }

  // Causal reference derivatives over the raw stream (the corrected pose
  // only replaces the position target, so correction increments do not
  // masquerade as reference velocity). Velocities use the lagged central
  // difference over two frame intervals, which has zero gain at the frame
  // alternation frequency and so does not replay per-frame estimation
  // jitter into the feedforward terms.
  VecX ref_qdot = VecX::Zero(n);
  VecX ref_qddot = VecX::Zero(n);
  if (frame_index_ == 1) {
    for (int c = 0; c < n; ++c) {
      const double dq = model_.coordinate_is_angular(c)
                            ? wrap_diff(reference_pose[c], prev_ref_q_[c])
                            : reference_pose[c] - prev_ref_q_[c];
      ref_qdot[c] = dq * fps_;
    }
  } else if (frame_index_ > 1) {
    for (int c = 0; c < n; ++c) {
      const double dq =
          model_.coordinate_is_angular(c)
              ? wrap_diff(reference_pose[c], prev_prev_ref_q_[c])
              : reference_pose[c] - prev_prev_ref_q_[c];
      ref_qdot[c] = dq * fps_ * 0.5;
    }
    ref_qddot = ((ref_qdot - prev_ref_qdot_) * fps_)
                    .cwiseMax(-config_.accel_clamp)
                    .cwiseMin(config_.accel_clamp);
  }
  prev_prev_ref_q_ = std::move(prev_ref_q_);
  prev_ref_q_ = reference_pose;
  prev_ref_qdot_ = ref_qdot;
  ++frame_index_;

  out.iterations.reserve(config_.iterations);
  for (int k = 0; k < config_.iterations; ++k) {
    const VecX qddot_des = desired_acceleration(
        model_, state_, out.reference, ref_qdot, ref_qddot, config_.gains);

    const VecX* warm = nullptr;
    std::vector<int> links;
    {
      const std::array<int, 4> feet = model_.model().foot_link_indices();
      for (int foot = 0; foot < 4; ++foot)
        if (out.contacts.in_contact[foot]) links.push_back(feet[foot]);
    }
    if (grf_warm_links_ == links && grf_warm_.size() == 3 * (Eigen::Index)links.size())
      warm = &grf_warm_;
    GRFSolution grf = estimate_grf(model_, state_, qddot_des, out.contacts,
                                   cone_, gravity_, solver_, warm);
    TorqueSolution torque =
        solve_torques(model_, state_, qddot_des, grf, cone_,
                      config_.slip_tolerance, config_.tau_weight, config_.phi,
                      gravity_, solver_);

    const IntegrationResult integrated =
        model_.integrate(state_, torque.qddot, config_.phi);
    state_ = integrated.state;

    IterationDiagnostics diag;
    diag.grf_status = grf.qp.status;
    diag.grf = grf.qp.diagnostics;
    diag.torque_status = torque.qp.status;
    diag.torque = torque.qp.diagnostics;
    diag.relaxation_level = torque.relaxation_level;
    diag.contact_count = static_cast<int>(grf.links.size());
    out.iterations.push_back(diag);

    if (!grf.links.empty() && grf.qp.status != QPStatus::Optimal)
      ++counters_.grf_failures;
    if (torque.relaxation_level > 0) ++counters_.torque_relaxations;
    if (grf.qp.status == QPStatus::MaxIterations ||
        torque.qp.status == QPStatus::MaxIterations)
      ++counters_.qp_max_iterations;
    if (integrated.reparameterized) ++counters_.reparameterizations;

    if (grf.qp.status == QPStatus::Optimal) {
      grf_warm_ = grf.forces;
      grf_warm_links_ = grf.links;
    }
    if (k + 1 == config_.iterations) {
      out.grf_links = std::move(grf.links);
      out.grf = std::move(grf.forces);
      out.tau = std::move(torque.tau);
    }
  }
  out.state = state_;
  out.compute_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  return out;
}

FootTracks reference_foot_tracks(const CompiledModel& model,
                                 const std::vector<VecX>& references,
                                 double fps) {
  FootTracks tracks;
  tracks.fps = fps;
  const std::array<int, 4> feet = model.model().foot_link_indices();
  const int root =
      model.model().link_index(model.model().root_link);
  tracks.root.reserve(references.size());
  for (auto& track : tracks.foot) track.reserve(references.size());
  for (const VecX& q : references) {
    const Kinematics kin = model.forward_kinematics(q);
    tracks.root.push_back(kin.link_pose[root].position);
    for (int foot = 0; foot < 4; ++foot)
      tracks.foot[foot].push_back(kin.link_pose[feet[foot]].position);
  }
  return tracks;
}

std::vector<FrameResult> process_sequence(const CompiledModel& model,
                                          const PipelineConfig& config,
                                          const std::vector<VecX>& references,
                                          const std::vector<ContactState>& contacts,
                                          double fps) {
  if (references.empty()) return {};
  if (contacts.size() != references.size())
    throw ValidationError("contact labels do not cover every frame");
  Pipeline pipeline(model, config, fps);
  pipeline.reset(references.front());
  std::vector<FrameResult> out;
  out.reserve(references.size());
  for (size_t t = 0; t < references.size(); ++t)
    out.push_back(pipeline.step(references[t], contacts[t]));
  return out;
}

std::vector<FrameResult> process_sequence(const CompiledModel& model,
                                          const PipelineConfig& config,
                                          const std::vector<VecX>& references,
                                          double fps) {
  if (references.empty()) return {};
  const std::vector<ContactState> labels =
      label_contacts(reference_foot_tracks(model, references, fps),
                     model.model().floor, config.thresholds);
  return process_sequence(model, config, references, labels, fps);
}

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError("pipeline config: " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed, bool strict) {
  if (!strict) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) { known = true; break; }
    if (!known) fail(where, "unknown field '" + it.key() + "'");
  }
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

void read_number(const json& obj, const char* key, const std::string& where,
                 double& target) {
  if (obj.contains(key)) target = number(obj[key], where + "." + key);
}

void read_int(const json& obj, const char* key, const std::string& where,
              int& target) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_number_integer())
    fail(where + "." + key, "expected an integer");
  target = obj[key].get<int>();
}

void read_bool(const json& obj, const char* key, const std::string& where,
               bool& target) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_boolean()) fail(where + "." + key, "expected a boolean");
  target = obj[key].get<bool>();
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& json_text,
                                    bool strict) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("pipeline config: invalid JSON: ") +
                          e.what());
  }
  if (!doc.is_object()) fail("document", "expected a JSON object");
  check_keys(doc, "document",
             {"phi", "iterations", "gains", "contact", "balance",
              "slip_tolerance", "tau_weight", "gravity", "balance_correction",
              "accel_clamp", "allow_frame_rate_mismatch", "qp"},
             strict);

  PipelineConfig config;
  read_number(doc, "phi", "document", config.phi);
  read_int(doc, "iterations", "document", config.iterations);
  read_number(doc, "slip_tolerance", "document", config.slip_tolerance);
  read_number(doc, "tau_weight", "document", config.tau_weight);
  read_number(doc, "gravity", "document", config.gravity);
  read_bool(doc, "balance_correction", "document", config.balance_correction);
  read_number(doc, "accel_clamp", "document", config.accel_clamp);
  read_bool(doc, "allow_frame_rate_mismatch", "document",
            config.allow_frame_rate_mismatch);

  if (doc.contains("gains")) {
    const json& g = doc["gains"];
    check_keys(g, "gains",
               {"joint_kp", "joint_kd", "root_angular_kp", "root_angular_kd",
                "root_linear_kp", "root_linear_kd"},
               strict);
    read_number(g, "joint_kp", "gains", config.gains.joint_kp);
    read_number(g, "joint_kd", "gains", config.gains.joint_kd);
    read_number(g, "root_angular_kp", "gains", config.gains.root_angular_kp);
    read_number(g, "root_angular_kd", "gains", config.gains.root_angular_kd);
    read_number(g, "root_linear_kp", "gains", config.gains.root_linear_kp);
    read_number(g, "root_linear_kd", "gains", config.gains.root_linear_kd);
  }
  if (doc.contains("contact")) {
    const json& c = doc["contact"];
    check_keys(c, "contact",
               {"speed", "height_margin", "root_speed", "refine_height",
                "calibration_frames", "touch_tolerance"},
               strict);
    read_number(c, "speed", "contact", config.thresholds.speed);
    read_number(c, "height_margin", "contact",
                config.thresholds.height_margin);
    read_number(c, "root_speed", "contact", config.thresholds.root_speed);
    read_number(c, "refine_height", "contact",
                config.thresholds.refine_height);
    read_int(c, "calibration_frames", "contact",
             config.thresholds.calibration_frames);
    read_number(c, "touch_tolerance", "contact",
                config.thresholds.touch_tolerance);
  }
  if (doc.contains("balance")) {
    const json& b = doc["balance"];
    check_keys(b, "balance",
               {"step_fraction", "small_lean", "spine_tip_joint",
                "leg_joints"},
               strict);
    read_number(b, "step_fraction", "balance", config.balance.step_fraction);
    read_number(b, "small_lean", "balance", config.balance.small_lean);
    if (b.contains("spine_tip_joint")) {
      if (!b["spine_tip_joint"].is_string())
        fail("balance.spine_tip_joint", "expected a joint name");
      config.balance.spine_tip_joint =
          b["spine_tip_joint"].get<std::string>();
    }
    if (b.contains("leg_joints")) {
      if (!b["leg_joints"].is_array())
        fail("balance.leg_joints", "expected an array");
      config.balance.leg_joints.clear();
      for (const auto& name : b["leg_joints"]) {
        if (!name.is_string()) fail("balance.leg_joints", "expected joint names");
        config.balance.leg_joints.push_back(name.get<std::string>());
      }
    }
  }
  if (doc.contains("qp")) {
    const json& q = doc["qp"];
    check_keys(q, "qp", {"max_iterations"}, strict);
    read_int(q, "max_iterations", "qp", config.qp.max_iterations);
    if (config.qp.max_iterations < 1)
      fail("qp.max_iterations", "must be at least 1");
  }

  // Negated comparisons so NaN fails the sanity checks too.
  if (!(config.phi > 0.0)) fail("phi", "the physics step must be positive");
  if (config.iterations < 1) fail("iterations", "must be at least 1");
  if (!(config.accel_clamp > 0.0))
    fail("accel_clamp", "the acceleration limit must be positive");
  if (!(config.gravity >= 0.0)) fail("gravity", "must not be negative");
  if (!(config.slip_tolerance >= 0.0))
    fail("slip_tolerance", "must not be negative");
  if (!(config.tau_weight >= 0.0)) fail("tau_weight", "must not be negative");
  if (!(config.thresholds.speed >= 0.0))
    fail("contact.speed", "must not be negative");
  if (!(config.thresholds.height_margin >= 0.0))
    fail("contact.height_margin", "must not be negative");
  if (config.thresholds.calibration_frames < 1)
    fail("contact.calibration_frames", "must be at least 1");
  if (!(config.balance.step_fraction > 0.0 &&
        config.balance.step_fraction <= 1.0))
    fail("balance.step_fraction", "must lie in (0, 1]");
  return config;
}

PipelineConfig load_pipeline_config_file(const std::string& path,
                                         bool strict) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open pipeline config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_pipeline_config(buffer.str(), strict);
}

std::string save_pipeline_config(const PipelineConfig& config) {
  json doc;
  doc["phi"] = config.phi;
  doc["iterations"] = config.iterations;
  doc["gains"] = json{{"joint_kp", config.gains.joint_kp},
                      {"joint_kd", config.gains.joint_kd},
                      {"root_angular_kp", config.gains.root_angular_kp},
                      {"root_angular_kd", config.gains.root_angular_kd},
                      {"root_linear_kp", config.gains.root_linear_kp},
                      {"root_linear_kd", config.gains.root_linear_kd}};
  doc["contact"] =
      json{{"speed", config.thresholds.speed},
           {"height_margin", config.thresholds.height_margin},
           {"root_speed", config.thresholds.root_speed},
           {"refine_height", config.thresholds.refine_height},
           {"calibration_frames", config.thresholds.calibration_frames},
           {"touch_tolerance", config.thresholds.touch_tolerance}};
  doc["balance"] = json{{"step_fraction", config.balance.step_fraction},
                        {"small_lean", config.balance.small_lean},
                        {"spine_tip_joint", config.balance.spine_tip_joint},
                        {"leg_joints", config.balance.leg_joints}};
  doc["slip_tolerance"] = config.slip_tolerance;
  doc["tau_weight"] = config.tau_weight;
  doc["gravity"] = config.gravity;
  doc["balance_correction"] = config.balance_correction;
  doc["accel_clamp"] = config.accel_clamp;
  doc["allow_frame_rate_mismatch"] = config.allow_frame_rate_mismatch;
  doc["qp"] = json{{"max_iterations", config.qp.max_iterations}};
  return doc.dump(2) + "\n";
}

}  // namespace physmo
