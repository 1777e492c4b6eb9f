#pragma once

#include <string>

#include "armlab/rne_dynamics.hpp"
#include "armlab/types.hpp"

namespace armlab {

enum class FeedbackLaw { kPd, kPid, kAdrc, kHinf, kSmc, kMrac };

FeedbackLaw parse_law(const std::string& name);
std::string law_name(FeedbackLaw law);

/// Parameters of all six laws plus the shared torque saturation limits.
struct FeedbackGains {
  // PD / PID (diagonal gains stored as vectors)
  Vec kp, kd, ki;
  // ADRC: per-joint nominal input gain and the two bandwidths. The extended
  // state observer gains are tied to the observer bandwidth:
  // beta1 = 3 w_o, beta2 = 3 w_o^2, beta3 = w_o^3.
  Vec b0;
  double omega_o = 50.0;
  double omega_c = 20.0;
  // SMC: sliding surface gains, switching gains, equivalent-control gain and
  // boundary layer width.
  Vec smc_lambda, smc_k, smc_k_eq;
  double smc_eps_bl = 0.02;
  // MRAC
  Vec mrac_alpha, mrac_gamma, mrac_Lambda;
  // Static loop-shaped law: per-joint weight times (k_s e + k_u ed). The two
  // scalars are fixed offline from the documented weighting corner
  // frequencies (k_s = DC-gain ratio of the sensitivity and control weights,
  // k_u = k_s over the control weight's high-frequency corner).
  Vec hinf_alpha;
  double hinf_ks = 100.0;
  double hinf_ku = 10.0;

  Vec torque_bounds;

  double eso_beta1() const { return 3.0 * omega_o; }
  double eso_beta2() const { return 3.0 * omega_o * omega_o; }
  double eso_beta3() const { return omega_o * omega_o * omega_o; }
};

/// Stock gain set. For n = 6 these are the tuned values the experiments use;
/// other sizes get the joint-1 value replicated.
FeedbackGains default_gains(int n = 6);

/// Throws std::invalid_argument naming the violated gain invariant.
void validate_gains(const FeedbackGains& gains, int n);

FeedbackGains load_gains(const std::string& path, int n = 6);
void save_gains(const FeedbackGains& gains, const std::string& path);

/// Error features a law may consume. Fields a law does not maintain are zero.
struct ErrorVector {
  Vec e;      ///< position error [rad]
  Vec ed;     ///< velocity error [rad/s]
  Vec xi;     ///< integral error state [rad s]
  Vec slide;  ///< composite sliding variable
  Vec dhat;   ///< estimated disturbance [N m]
};

/// Per-episode controller memory. reset() zeroes everything. The harness owns
/// prev_tau: it must be set to the torque actually applied to the plant after
/// each control step (the observer's input channel).
struct FeedbackState {
  Vec xi;          // PID integral
  Vec prev_e;      // PID trapezoid memory
  Vec eso_z1, eso_z2, eso_z3;
  Vec theta_hat;   // MRAC adaptive parameters
  Vec phi_reg;     // MRAC regressor, rebuilt each step
  Vec prev_tau;    // applied torque at the previous step
  Vec ref_qd_cur, ref_qd_prev;
  bool has_ref_history = false;

  explicit FeedbackState(int n = 0) { reset(n); }
  void reset(int n);
};

/// Builds the generalized error features for the active law and records the
/// step's reference context into fb_state (the stateful laws read it back).
ErrorVector error_vector(const JointState& state, const Vec& ref_q, const Vec& ref_qd,
                         const FeedbackGains& gains, FeedbackState& fb_state,
                         FeedbackLaw law);

/// Same features without the reference bookkeeping; safe to call at predicted
/// states (the MPC rollouts use it with the controller state frozen).
ErrorVector error_features(const JointState& state, const Vec& ref_q, const Vec& ref_qd,
                           const FeedbackGains& gains, const FeedbackState& fb_state,
                           FeedbackLaw law);

/// Element-wise clamp to [-bounds, bounds]; bounds must be positive.
Vec saturate(const Vec& tau, const Vec& bounds);

Vec pd_torque(const ErrorVector& err, const FeedbackGains& gains);
Vec pid_torque(const ErrorVector& err, const FeedbackGains& gains, FeedbackState& fb_state,
               double dt);
Vec adrc_torque(const ErrorVector& err, const JointState& state, const FeedbackGains& gains,
                FeedbackState& fb_state, double dt);
Vec smc_torque(const ErrorVector& err, const FeedbackGains& gains);
Vec mrac_torque(const ErrorVector& err, const FeedbackGains& gains, FeedbackState& fb_state,
                double dt);
Vec hinf_torque(const ErrorVector& err, const FeedbackGains& gains);

/// One control step of the chosen law: advances fb_state and returns the
/// saturated torque.
Vec feedback_torque(FeedbackLaw law, const ErrorVector& err, const JointState& state,
                    const FeedbackGains& gains, FeedbackState& fb_state, double dt);

/// The law's instantaneous pre-saturation mapping with the internal state
/// frozen: tau = phi(E) at fixed (xi, z3, theta_hat, phi_reg). This is the
/// smooth map the stability analysis differentiates.
Vec eval_feedback(FeedbackLaw law, const ErrorVector& err, const FeedbackGains& gains,
                  const FeedbackState& fb_state);

/// Advances the extended state observer of one control period from the
/// measured positions and the previously applied torque.
void eso_update(FeedbackState& fb_state, const FeedbackGains& gains, const Vec& q_meas,
                double dt);

}  // namespace armlab
