#pragma once

#include <string>
#include <vector>

#include "physmo/balance.hpp"
#include "physmo/contact.hpp"
#include "physmo/dynamics.hpp"
#include "physmo/optimizer.hpp"
#include "physmo/pd_control.hpp"
#include "physmo/qp.hpp"
#include "physmo/types.hpp"

namespace physmo {

struct PipelineConfig {
  double phi = 0.01;   // integrator step [s]
  int iterations = 4;  // physics iterations per input frame
  PDGains gains;
  ContactThresholds thresholds;
  BalanceOptions balance;
  double slip_tolerance = 0.02;  // tangential contact speed bound [m/s]
  double tau_weight = 1e-3;      // torque magnitude penalty
  double gravity = 9.81;         // magnitude, directed along -floor normal
  bool balance_correction = true;
  double accel_clamp = 500.0;  // reference acceleration cap per coordinate
  bool allow_frame_rate_mismatch = false;
  QPSolver::Options qp;
};

// Parses a pipeline configuration document; missing fields keep their
// defaults. `strict` rejects unknown fields.
PipelineConfig load_pipeline_config(const std::string& json_text,
                                    bool strict = false);
PipelineConfig load_pipeline_config_file(const std::string& path,
                                         bool strict = false);
std::string save_pipeline_config(const PipelineConfig& config);

struct IterationDiagnostics {
  QPStatus grf_status = QPStatus::Optimal;
  QPDiagnostics grf;
  QPStatus torque_status = QPStatus::Optimal;
  QPDiagnostics torque;
  int relaxation_level = 0;
  int contact_count = 0;
};

struct FrameResult {
  PoseState state;        // simulated state after this frame
  VecX reference;         // position target actually tracked (post correction)
  ContactState contacts;  // refined labels driving this frame
  CorrectionMode correction_mode = CorrectionMode::Inactive;
  double lean_angle = 0.0;
  std::vector<int> grf_links;  // active links, last iteration
  VecX grf;                    // cone-coordinate forces, last iteration
  VecX tau;                    // generalized forces, last iteration
  std::vector<IterationDiagnostics> iterations;
  double compute_ms = 0.0;  // wall time spent in this frame's step
};

struct PipelineCounters {
  long grf_failures = 0;        // force fit ended in a non-optimal status
  long torque_relaxations = 0;  // contact rows had to be dropped
  long qp_max_iterations = 0;   // either solve hit the iteration cap
  long reparameterizations = 0; // root orientation re-extracted mid-run
};

// Frame-by-frame tracking simulator. Feed kinematic reference poses in
// order; each call advances the simulated state through
// config.iterations physics steps of length config.phi:
//   refine contact labels on the simulated pose, correct the reference for
//   balance, then repeatedly fit PD accelerations, contact forces, and
//   torques, integrating after each fit.
// Reference velocities come from a one-frame-lagged central difference of
// the raw reference stream (backward at the second frame), so each output
// frame depends only on inputs already seen while keeping the noise
// rejection of a centered kernel.
class Pipeline {
 public:
  // The model must outlive the pipeline. fps is the reference stream rate;
  // unless config.allow_frame_rate_mismatch is set, iterations * phi must
  // cover exactly one frame interval.
  Pipeline(const CompiledModel& model, PipelineConfig config, double fps);

  // Non-fatal configuration findings (overdamped gains, tolerated frame
  // rate mismatch).
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Starts (or restarts) from a reference pose at rest.
  void reset(const VecX& initial_pose);

  FrameResult step(const VecX& reference_pose, const ContactState& labeled);

  const PoseState& state() const { return state_; }
  const PipelineCounters& counters() const { return counters_; }
  const PipelineConfig& config() const { return config_; }

 private:
  const CompiledModel& model_;
  PipelineConfig config_;
  double fps_;
  Vec3 gravity_;
  FrictionCone cone_;
  QPSolver solver_;
  std::vector<std::string> warnings_;

  PoseState state_;
  BalanceCorrector corrector_;
  int frame_index_ = 0;
  VecX prev_ref_q_, prev_prev_ref_q_, prev_ref_qdot_;
  VecX grf_warm_;
  std::vector<int> grf_warm_links_;
  PipelineCounters counters_;
};

// Runs a whole sequence with caller-supplied contact labels, one per frame,
// stepping the pipeline through every frame starting from the first pose at
// rest.
std::vector<FrameResult> process_sequence(
    const CompiledModel& model, const PipelineConfig& config,
    const std::vector<VecX>& references,
    const std::vector<ContactState>& contacts, double fps);

// Same, but labels contacts from the reference motion's foot trajectories
// first.
std::vector<FrameResult> process_sequence(const CompiledModel& model,
                                          const PipelineConfig& config,
                                          const std::vector<VecX>& references,
                                          double fps);

// The labeling half of process_sequence, reusable on its own: foot and root
// world tracks from forward kinematics of the reference poses.
FootTracks reference_foot_tracks(const CompiledModel& model,
                                 const std::vector<VecX>& references,
                                 double fps);

}  // namespace physmo
