// physmo: kinematic-to-dynamic motion filtering from the command line.
//
// Subcommands:
//   filter          track a kinematic motion through the physics pipeline
//   label-contacts  heuristic foot contact labels for a motion
//   evaluate        compare an estimate against a reference motion
//   simulate        forward-simulate the character under given torques
//   gen             generate synthetic test motions with exact ground truth
//
// Exit codes: 0 success, 1 invalid input or arguments, 2 numeric failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "physmo/balance.hpp"
#include "physmo/camera.hpp"
#include "physmo/character.hpp"
#include "physmo/contact.hpp"
#include "physmo/dynamics.hpp"
#include "physmo/metrics.hpp"
#include "physmo/motion.hpp"
#include "physmo/pipeline.hpp"
#include "physmo/synthetic.hpp"
#include "physmo/types.hpp"

using namespace physmo;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string character_path;
  std::string diagnostics_path;
  unsigned long long seed = 0;
  bool strict = false;
};

struct Context {
  CompiledModel model;
  PipelineConfig config;
};

Context make_context(const GlobalOptions& options) {
  CharacterModel character = options.character_path.empty()
                                 ? reference_character()
                                 : load_character_file(options.character_path,
                                                       options.strict);
  PipelineConfig config;
  if (!options.config_path.empty())
    config = load_pipeline_config_file(options.config_path, options.strict);
  return Context{CompiledModel(std::move(character)), config};
}

MotionSequence load_motion_checked(const std::string& path,
                                   const CompiledModel& model, bool strict) {
  MotionSequence motion = load_motion_file(path, strict);
  if (motion.frame_count() == 0)
    throw ValidationError(path + ": motion has no frames");
  if (motion.dof_count() != model.dof_count())
    throw ValidationError(path + ": motion has " +
                          std::to_string(motion.dof_count()) +
                          " coordinates but the character has " +
                          std::to_string(model.dof_count()));
  return motion;
}

std::vector<std::string> model_joint_names(const CompiledModel& model) {
  std::vector<std::string> names;
  names.reserve(model.model().joints.size());
  for (const JointSpec& joint : model.model().joints) names.push_back(joint.name);
  return names;
}

MotionSequence motion_from_poses(const CompiledModel& model,
                                 const std::string& name, double fps,
                                 const std::vector<VecX>& poses,
                                 bool with_joints) {
  MotionSequence motion;
  motion.name = name;
  motion.fps = fps;
  motion.joint_names = model_joint_names(model);
  motion.frames.resize(poses.size());
  for (size_t t = 0; t < poses.size(); ++t) {
    motion.frames[t].time = static_cast<double>(t) / fps;
    motion.frames[t].q = poses[t];
    if (with_joints) motion.frames[t].joints3d = model.joint_positions(poses[t]);
  }
  return motion;
}

JointTracks tracks_from_poses(const CompiledModel& model,
                              const std::vector<VecX>& poses) {
  JointTracks tracks;
  tracks.reserve(poses.size());
  for (const VecX& q : poses) tracks.push_back(model.joint_positions(q));
  return tracks;
}

const char* to_string(CorrectionMode mode) {
  switch (mode) {
    case CorrectionMode::Inactive: return "inactive";
    case CorrectionMode::Balanced: return "balanced";
    case CorrectionMode::Hold: return "hold";
    case CorrectionMode::Rotate: return "rotate";
    case CorrectionMode::StraightenLegs: return "straighten-legs";
  }
  return "unknown";
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

double percentile95(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const size_t index = (values.size() * 95) / 100;
  const size_t at = std::min(index, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + at, values.end());
  return values[at];
}

// ------------------------------------------------------------- filter ---

struct FilterOptions {
  std::string input;
  std::string output;
  std::string contacts = "auto";
  bool no_balance_correction = false;
};

void write_diagnostics_csv(const std::string& path,
                           const std::vector<FrameResult>& results) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path + ": cannot open for writing");
  out << "frame,compute_ms,contacts,stationary,correction,lean_rad,"
         "relaxation,grf_status,torque_status,kkt_max,normal_force_n\n";
  for (size_t t = 0; t < results.size(); ++t) {
    const FrameResult& frame = results[t];
    double kkt = 0.0;
    int relaxation = 0;
    const char* grf_status = "optimal";
    const char* torque_status = "optimal";
    if (!frame.iterations.empty()) {
      const IterationDiagnostics& last = frame.iterations.back();
      for (const QPDiagnostics* d : {&last.grf, &last.torque})
        kkt = std::max({kkt, d->stationarity, d->primal_feasibility,
                        d->dual_feasibility, d->complementarity});
      relaxation = last.relaxation_level;
      grf_status = to_string(last.grf_status);
      torque_status = to_string(last.torque_status);
    }
    double normal_sum = 0.0;
    for (size_t i = 0; i < frame.grf_links.size(); ++i)
      normal_sum += frame.grf[3 * static_cast<int>(i)];
    out << t << ',' << frame.compute_ms << ','
        << frame.contacts.contact_count() << ','
        << (frame.contacts.stationary ? 1 : 0) << ','
        << to_string(frame.correction_mode) << ',' << frame.lean_angle << ','
        << relaxation << ',' << grf_status << ',' << torque_status << ','
        << kkt << ',' << normal_sum << '\n';
  }
}

int run_filter(const GlobalOptions& global, const FilterOptions& options) {
  Context ctx = make_context(global);
  if (options.no_balance_correction) ctx.config.balance_correction = false;

  const MotionSequence motion =
      load_motion_checked(options.input, ctx.model, global.strict);
  const std::vector<VecX> references = motion.poses();

  std::vector<ContactState> contacts;
  if (options.contacts == "auto") {
    const FootTracks tracks =
        reference_foot_tracks(ctx.model, references, motion.fps);
    contacts =
        label_contacts(tracks, ctx.model.model().floor, ctx.config.thresholds);
  } else {
    contacts = load_contact_csv_file(options.contacts);
    if (contacts.size() != references.size())
      throw ValidationError(options.contacts + ": " +
                            std::to_string(contacts.size()) +
                            " contact rows for " +
                            std::to_string(references.size()) + " frames");
  }

  Pipeline pipeline(ctx.model, ctx.config, motion.fps);
  print_warnings(pipeline.warnings());
  pipeline.reset(references.front());
  std::vector<FrameResult> results;
  results.reserve(references.size());
  for (size_t t = 0; t < references.size(); ++t)
    results.push_back(pipeline.step(references[t], contacts[t]));

  std::vector<VecX> poses;
  std::vector<double> times;
  double contact_sum = 0.0;
  long corrected = 0;
  for (const FrameResult& frame : results) {
    poses.push_back(frame.state.q);
    times.push_back(frame.compute_ms);
    contact_sum += frame.contacts.contact_count();
    if (frame.correction_mode == CorrectionMode::Rotate ||
        frame.correction_mode == CorrectionMode::StraightenLegs)
      ++corrected;
  }
  save_motion_file(
      motion_from_poses(ctx.model, motion.name, motion.fps, poses, true),
      options.output);
  if (!global.diagnostics_path.empty())
    write_diagnostics_csv(global.diagnostics_path, results);

  const PipelineCounters& counters = pipeline.counters();
  const double mean_ms =
      std::accumulate(times.begin(), times.end(), 0.0) /
      static_cast<double>(times.size());
  std::printf("filtered %d frames at %g fps (%d coordinates)\n",
              motion.frame_count(), motion.fps, motion.dof_count());
  std::printf("contacts: %s, mean %.2f active per frame\n",
              options.contacts == "auto" ? "labeled from the input"
                                         : options.contacts.c_str(),
              contact_sum / static_cast<double>(results.size()));
  std::printf("balance: %ld corrected frames\n", corrected);
  std::printf("counters: %ld force-fit failures, %ld constraint relaxations, "
              "%ld iteration-capped solves, %ld reparameterizations\n",
              counters.grf_failures, counters.torque_relaxations,
              counters.qp_max_iterations, counters.reparameterizations);
  std::printf("timing: mean %.2f ms, p95 %.2f ms per frame\n", mean_ms,
              percentile95(times));
  std::printf("wrote %s\n", options.output.c_str());
  return 0;
}

// ----------------------------------------------------- label-contacts ---

struct LabelOptions {
  std::string input;
  std::string output;
};

int run_label_contacts(const GlobalOptions& global,
                       const LabelOptions& options) {
  Context ctx = make_context(global);
  const MotionSequence motion =
      load_motion_checked(options.input, ctx.model, global.strict);
  const FootTracks tracks =
      reference_foot_tracks(ctx.model, motion.poses(), motion.fps);
  const std::vector<ContactState> contacts =
      label_contacts(tracks, ctx.model.model().floor, ctx.config.thresholds);

  long stationary = 0;
  double contact_sum = 0.0;
  for (const ContactState& c : contacts) {
    stationary += c.stationary ? 1 : 0;
    contact_sum += c.contact_count();
  }
  save_contact_csv_file(contacts, options.output);
  std::printf("labeled %zu frames: %.1f%% stationary, mean %.2f contacts\n",
              contacts.size(),
              100.0 * static_cast<double>(stationary) /
                  static_cast<double>(contacts.size()),
              contact_sum / static_cast<double>(contacts.size()));
  std::printf("wrote %s\n", options.output.c_str());
  return 0;
}

// ----------------------------------------------------------- evaluate ---

struct EvaluateOptions {
  std::string reference;
  std::string estimate;
  std::string contacts;  // optional label CSV for penetration
  std::string camera;    // optional camera name from the character
  std::string csv;       // optional table output
};

int run_evaluate(const GlobalOptions& global, const EvaluateOptions& options) {
  Context ctx = make_context(global);
  const MotionSequence reference =
      load_motion_checked(options.reference, ctx.model, global.strict);
  const MotionSequence estimate =
      load_motion_checked(options.estimate, ctx.model, global.strict);
  if (reference.frame_count() != estimate.frame_count())
    throw ValidationError("reference has " +
                          std::to_string(reference.frame_count()) +
                          " frames, estimate " +
                          std::to_string(estimate.frame_count()));

  const std::vector<VecX> ref_poses = reference.poses();
  const std::vector<VecX> est_poses = estimate.poses();
  const JointTracks ref_tracks = tracks_from_poses(ctx.model, ref_poses);
  const JointTracks est_tracks = tracks_from_poses(ctx.model, est_poses);

  std::vector<std::pair<std::string, double>> rows;
  for (const AlignmentMode mode :
       {AlignmentMode::Raw, AlignmentMode::GlobalRoot,
        AlignmentMode::Procrustes}) {
    const PositionMetrics position =
        position_metrics(ref_tracks, est_tracks, mode);
    const std::string suffix = to_string(mode);
    rows.emplace_back("mpjpe_" + suffix + "_mm", position.mpjpe_mm);
    rows.emplace_back("pck150_" + suffix + "_pct", position.pck_150);
    rows.emplace_back("auc_" + suffix + "_pct", position.auc);
  }

  const MetricStat smooth = smoothness_error(ref_tracks, est_tracks);
  rows.emplace_back("smoothness_mm", smooth.mean);

  std::vector<ContactState> labels;
  if (options.contacts.empty()) {
    const FootTracks tracks =
        reference_foot_tracks(ctx.model, ref_poses, reference.fps);
    labels =
        label_contacts(tracks, ctx.model.model().floor, ctx.config.thresholds);
  } else {
    labels = load_contact_csv_file(options.contacts);
    if (labels.size() != est_poses.size())
      throw ValidationError(options.contacts + ": " +
                            std::to_string(labels.size()) +
                            " contact rows for " +
                            std::to_string(est_poses.size()) + " frames");
  }
  const PenetrationMetrics penetration = penetration_metrics(
      foot_sole_heights(ctx.model, est_poses), labels);
  rows.emplace_back("penetration_mm", penetration.mean_penetration_mm);
  rows.emplace_back("non_penetrating_pct", penetration.percent_non_penetrating);

  if (!options.camera.empty()) {
    const CameraModel* camera = nullptr;
    for (const CameraModel& c : ctx.model.model().cameras)
      if (c.name == options.camera) camera = &c;
    if (camera == nullptr)
      throw ValidationError("character has no camera named '" +
                            options.camera + "'");
    const ReprojectionMetrics reprojection =
        reprojection_error(*camera, ref_tracks, est_tracks, camera);
    print_warnings(reprojection.warnings);
    rows.emplace_back("reprojection_px", reprojection.mean_px);
    rows.emplace_back("behind_camera_samples",
                      static_cast<double>(reprojection.behind_camera));
  }

  size_t width = 0;
  for (const auto& [name, value] : rows) width = std::max(width, name.size());
  for (const auto& [name, value] : rows)
    std::printf("%-*s %12.4f\n", static_cast<int>(width), name.c_str(), value);

  if (!options.csv.empty()) {
    std::ofstream out(options.csv);
    if (!out) throw ValidationError(options.csv + ": cannot open for writing");
    out << "metric,value\n";
    char buffer[64];
    for (const auto& [name, value] : rows) {
      std::snprintf(buffer, sizeof(buffer), "%.10g", value);
      out << name << ',' << buffer << '\n';
    }
    std::printf("wrote %s\n", options.csv.c_str());
  }
  return 0;
}

// ----------------------------------------------------------- simulate ---

struct SimulateOptions {
  std::string input;
  std::string output;
  std::string torques = "zero";
  int steps = 0;
  int frame = 0;
};

std::vector<VecX> load_torque_csv(const std::string& path, int dof) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open");
  std::vector<VecX> rows;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    // An optional header row ("step,tau_0,...") is skipped; a leading step
    // column is detected from the column count.
    if (line_number == 1 && line.rfind("step,", 0) == 0) continue;
    std::vector<double> values;
    std::stringstream stream(line);
    std::string cell;
    while (std::getline(stream, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError(path + ": line " + std::to_string(line_number) +
                              ": '" + cell + "' is not a number");
      }
    }
    int offset = 0;
    if (static_cast<int>(values.size()) == dof + 1) offset = 1;
    else if (static_cast<int>(values.size()) != dof)
      throw ValidationError(path + ": line " + std::to_string(line_number) +
                            " has " + std::to_string(values.size()) +
                            " columns, expected " + std::to_string(dof));
    VecX tau(dof);
    for (int c = 0; c < dof; ++c) tau[c] = values[offset + c];
    rows.push_back(std::move(tau));
  }
  if (rows.empty()) throw ValidationError(path + ": no torque rows");
  return rows;
}

int run_simulate(const GlobalOptions& global, const SimulateOptions& options) {
  Context ctx = make_context(global);
  const MotionSequence motion =
      load_motion_checked(options.input, ctx.model, global.strict);
  if (options.frame < 0 || options.frame >= motion.frame_count())
    throw ValidationError("initial frame " + std::to_string(options.frame) +
                          " outside 0.." +
                          std::to_string(motion.frame_count() - 1));

  std::vector<VecX> torques;
  if (options.torques == "zero") {
    if (options.steps <= 0)
      throw ValidationError("--steps must be positive with zero torques");
    torques.assign(options.steps,
                   VecX::Zero(ctx.model.dof_count()));
  } else {
    torques = load_torque_csv(options.torques, ctx.model.dof_count());
    if (options.steps > 0 &&
        options.steps != static_cast<int>(torques.size()))
      throw ValidationError("--steps disagrees with the torque file length");
  }

  const Vec3 gravity =
      -ctx.config.gravity * ctx.model.model().floor.normal;
  PoseState state;
  state.q = motion.frames[options.frame].q;
  state.qdot = VecX::Zero(ctx.model.dof_count());

  std::vector<VecX> poses;
  poses.push_back(state.q);
  long reparameterizations = 0;
  for (const VecX& tau : torques) {
    const VecX qddot = ctx.model.mass_matrix(state.q).llt().solve(
        tau - ctx.model.bias_forces(state.q, state.qdot, gravity));
    const IntegrationResult result =
        ctx.model.integrate(state, qddot, ctx.config.phi);
    state = result.state;
    reparameterizations += result.reparameterized ? 1 : 0;
    poses.push_back(state.q);
  }

  const double fps = 1.0 / ctx.config.phi;
  save_motion_file(motion_from_poses(ctx.model, motion.name + " (simulated)",
                                     fps, poses, false),
                   options.output);
  std::printf("simulated %zu steps of %g s (%ld reparameterizations)\n",
              torques.size(), ctx.config.phi, reparameterizations);
  std::printf("final root position: %.4f %.4f %.4f\n", state.q[0], state.q[1],
              state.q[2]);
  std::printf("wrote %s\n", options.output.c_str());
  return 0;
}

// ---------------------------------------------------------------- gen ---

struct GenOptions {
  std::string kind = "stand";
  std::string output;
  std::string corrupted_output;
  std::string contacts_output;
  int frames = 100;
  double fps = 25.0;
  double noise_std = 0.02;
  double lean_angle = 0.3;
  double squat_depth = 0.25;
  double walk_speed = 0.3;
  double drop_depth = 0.03;
};

int run_gen(const GlobalOptions& global, const GenOptions& options) {
  Context ctx = make_context(global);
  SyntheticOptions synthetic;
  synthetic.frames = options.frames;
  synthetic.fps = options.fps;
  synthetic.seed = global.seed;
  synthetic.noise_std = options.noise_std;
  synthetic.lean_angle = options.lean_angle;
  synthetic.squat_depth = options.squat_depth;
  synthetic.walk_speed = options.walk_speed;
  synthetic.drop_depth = options.drop_depth;

  const SyntheticMotion motion = generate(ctx.model, options.kind, synthetic);
  save_motion_file(motion_from_poses(ctx.model, options.kind, motion.fps,
                                     motion.poses, false),
                   options.output);
  std::printf("generated %zu %s frames at %g fps\n", motion.poses.size(),
              options.kind.c_str(), motion.fps);
  std::printf("wrote %s\n", options.output.c_str());
  if (!options.corrupted_output.empty()) {
    save_motion_file(
        motion_from_poses(ctx.model, options.kind + " (corrupted)", motion.fps,
                          motion.corrupted, false),
        options.corrupted_output);
    std::printf("wrote %s\n", options.corrupted_output.c_str());
  }
  if (!options.contacts_output.empty()) {
    save_contact_csv_file(motion.contacts, options.contacts_output);
    std::printf("wrote %s\n", options.contacts_output.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physically plausible motion filtering"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path,
                 "pipeline configuration JSON file");
  app.add_option("--character", global.character_path,
                 "character JSON file (default: built-in reference humanoid)");
  app.add_option("--seed", global.seed, "random seed for generated noise");
  app.add_flag("--strict", global.strict,
               "reject unknown fields in JSON inputs");
  app.add_option("--diagnostics", global.diagnostics_path,
                 "write per-frame solver diagnostics CSV (filter only)");

  FilterOptions filter;
  CLI::App* filter_cmd =
      app.add_subcommand("filter", "track a motion through the physics pipeline");
  filter_cmd->add_option("--input,-i", filter.input, "input motion JSON")
      ->required();
  filter_cmd->add_option("--output,-o", filter.output, "output motion JSON")
      ->required();
  filter_cmd->add_option("--contacts", filter.contacts,
                         "'auto' or a contact label CSV file");
  filter_cmd->add_flag("--no-balance-correction",
                       filter.no_balance_correction,
                       "disable the reference balance corrector");

  LabelOptions label;
  CLI::App* label_cmd = app.add_subcommand(
      "label-contacts", "label foot contacts from a kinematic motion");
  label_cmd->add_option("--input,-i", label.input, "input motion JSON")
      ->required();
  label_cmd->add_option("--output,-o", label.output, "output contact CSV")
      ->required();

  EvaluateOptions evaluate;
  CLI::App* evaluate_cmd = app.add_subcommand(
      "evaluate", "compare an estimated motion against a reference");
  evaluate_cmd
      ->add_option("--reference,-r", evaluate.reference, "reference motion JSON")
      ->required();
  evaluate_cmd
      ->add_option("--estimate,-e", evaluate.estimate, "estimated motion JSON")
      ->required();
  evaluate_cmd->add_option("--contacts", evaluate.contacts,
                           "contact label CSV (default: labeled from the "
                           "reference)");
  evaluate_cmd->add_option("--camera", evaluate.camera,
                           "character camera name for reprojection error");
  evaluate_cmd->add_option("--csv", evaluate.csv, "also write the table as CSV");

  SimulateOptions simulate;
  CLI::App* simulate_cmd = app.add_subcommand(
      "simulate", "forward-simulate the character under given torques");
  simulate_cmd->add_option("--input,-i", simulate.input,
                           "motion JSON providing the initial pose")
      ->required();
  simulate_cmd->add_option("--output,-o", simulate.output,
                           "output motion JSON (one frame per step)")
      ->required();
  simulate_cmd->add_option("--torques", simulate.torques,
                           "'zero' or a CSV of per-step torque rows");
  simulate_cmd->add_option("--steps", simulate.steps,
                           "step count (required for zero torques)");
  simulate_cmd->add_option("--frame", simulate.frame,
                           "index of the initial pose in the input motion");

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand(
      "gen", "generate a synthetic motion with exact contact ground truth");
  gen_cmd->add_option("--kind,-k", gen.kind,
                      "stand, lean, squat, walk, drop, or jitter");
  gen_cmd->add_option("--output,-o", gen.output, "output motion JSON")
      ->required();
  gen_cmd->add_option("--corrupted-output", gen.corrupted_output,
                      "also write the corrupted track (jitter)");
  gen_cmd->add_option("--contacts-output", gen.contacts_output,
                      "also write ground-truth contact labels CSV");
  gen_cmd->add_option("--frames,-n", gen.frames, "frame count");
  gen_cmd->add_option("--fps", gen.fps, "frame rate");
  gen_cmd->add_option("--noise", gen.noise_std, "jitter noise level [rad]");
  gen_cmd->add_option("--lean-angle", gen.lean_angle, "initial lean [rad]");
  gen_cmd->add_option("--squat-depth", gen.squat_depth, "pelvis drop [m]");
  gen_cmd->add_option("--walk-speed", gen.walk_speed, "gait speed [m/s]");
  gen_cmd->add_option("--drop-depth", gen.drop_depth, "root sink depth [m]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (filter_cmd->parsed()) return run_filter(global, filter);
    if (label_cmd->parsed()) return run_label_contacts(global, label);
    if (evaluate_cmd->parsed()) return run_evaluate(global, evaluate);
    if (simulate_cmd->parsed()) return run_simulate(global, simulate);
    if (gen_cmd->parsed()) return run_gen(global, gen);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
