#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "armlab/feedback.hpp"
#include "armlab/rne_dynamics.hpp"
#include "armlab/robot_model.hpp"

namespace armlab {

/// Samples the reference trajectory at an absolute episode time.
using RefFn = std::function<void(double t, Vec& ref_q, Vec& ref_qd)>;

/// Candidate-search MPC settings: the feedback torque is scaled by each
/// selection scalar, expanded over the horizon by the temporal weights,
/// rolled out through the dynamics and scored.
struct MpcConfig {
  std::vector<double> selection;        ///< strictly increasing scalars
  int horizon = 5;
  std::vector<double> temporal_weights; ///< per-step scalar, all joints alike
  // Diagonal error weight, uniform within each feature block.
  double w1_pos = 100.0;
  double w1_vel = 1.0;
  double w1_xi = 0.0;
  double w1_slide = 0.0;
  double w1_dhat = 0.0;
  double w2 = 1e-4;                     ///< torque effort weight
  Vec q_min, q_max, qd_min, qd_max;     ///< rollout state box
  Vec torque_bounds;
  double dt = 0.005;                    ///< shared plant/preview period [s]
};

MpcConfig default_mpc_config(int n = 6);
void validate_mpc_config(const MpcConfig& cfg, int n);
MpcConfig load_mpc_config(const std::string& path, int n = 6);
void save_mpc_config(const MpcConfig& cfg, const std::string& path);

struct CandidateRollout {
  double scalar = 1.0;
  std::vector<Vec> torques;        ///< applied sequence, length horizon
  std::vector<JointState> states;  ///< predicted states after each step
  std::vector<double> step_costs;
  double cost = 0.0;               ///< +inf when infeasible
  bool feasible = true;
  int violation_step = -1;         ///< first step violating the state box
};

struct HmpcDiagnostics {
  std::vector<double> candidate_costs;
  std::vector<char> candidate_feasible;
  double chosen_scalar = 1.0;
  bool fallback = false;  ///< every rollout infeasible; raw feedback applied
};

/// Feedback torque scaled by each selection scalar, saturated.
std::vector<Vec> candidate_torques(const Vec& tau_fb, const MpcConfig& cfg);

/// Expands one candidate into the previewed torque sequence (re-saturated).
std::vector<Vec> preview_sequence(const Vec& candidate, const MpcConfig& cfg);

/// Rolls the dynamics forward under `seq` from (state, t0), accumulating the
/// weighted error/effort cost against the reference. fb_state is frozen: the
/// predicted error features reuse the controller's current internal state.
CandidateRollout rollout_cost(const RobotModel& model, const JointState& state,
                              const RefFn& ref, double t0, const std::vector<Vec>& seq,
                              const MpcConfig& cfg, FeedbackLaw law,
                              const FeedbackGains& gains, const FeedbackState& fb_state);

/// Index of the cheapest feasible rollout; ties prefer the scalar closest to
/// 1.0, then the smaller scalar. -1 when all rollouts are infeasible.
int select_optimal_index(const std::vector<CandidateRollout>& rollouts);

/// First-step torque of the winning rollout, or the saturated raw feedback
/// torque when everything is infeasible (fallback flagged).
Vec select_optimal(const std::vector<CandidateRollout>& rollouts, const Vec& tau_fb,
                   const MpcConfig& cfg, HmpcDiagnostics* diag = nullptr);

/// The MPC layer alone: candidates -> previews -> rollouts -> selection.
Vec hmpc_select(const RobotModel& model, const JointState& state, const RefFn& ref,
                double t, const Vec& tau_fb, const MpcConfig& cfg, FeedbackLaw law,
                const FeedbackGains& gains, const FeedbackState& fb_state,
                HmpcDiagnostics* diag = nullptr);

/// Full control step: error features, feedback law (stateful), MPC layer.
std::pair<Vec, HmpcDiagnostics> hmpc_step(const RobotModel& model, const JointState& state,
                                          const RefFn& ref, double t, FeedbackLaw law,
                                          const FeedbackGains& gains, FeedbackState& fb_state,
                                          const MpcConfig& cfg);

}  // namespace armlab
