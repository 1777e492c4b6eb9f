#pragma once

#include <string>
#include <utility>

#include "armlab/feedback.hpp"
#include "armlab/robot_model.hpp"
#include "armlab/types.hpp"

namespace armlab {

/// Design parameters of the quadratic certificate
///   V = 1/2 ed' M ed + 1/2 e' P e + beta e' M ed.
struct StabilityConfig {
  Mat P;
  double beta = 1e-6;
  double eps = 1e-3;      ///< margin added to both eigenvalue conditions
  double fd_step = 1e-6;  ///< finite-difference step for law Jacobians
};

StabilityConfig default_stability_config(int n = 6);

/// State box the dynamics bounds are sampled over.
struct RegionBox {
  Vec q_lo, q_hi, qd_lo, qd_hi;
};

RegionBox symmetric_region(int n, double q_range, double qd_range);

/// Monte-Carlo maxima of the dynamics terms entering the gain conditions.
struct DynamicsBounds {
  double lambda_max_m = 0.0;  ///< max eigenvalue of M(q)
  double c_max = 0.0;         ///< induced inf-norm of C(q, qd)
  double gq_max = 0.0;        ///< induced inf-norm of dG/dq
  int samples = 0;
};

/// Outcome of the three sufficient gain conditions at an operating region.
/// Subscripted norms are induced inf-norms; the unsubscripted norms of P and
/// beta*Fe - P are spectral.
struct StabilityReport {
  double lambda_min_fd = 0.0;
  double lambda_min_fe = 0.0;
  double rhs1 = 0.0;  ///< damping threshold: beta lmax(M) + |C| + eps
  double rhs2 = 0.0;  ///< stiffness threshold: |dG/dq| + (|P| + beta |C|)/beta + eps
  double lhs3 = 0.0;  ///< |beta Fe - P|
  double rhs3 = 0.0;
  bool cond1 = false, cond2 = false, cond3 = false, overall = false;
  DynamicsBounds bounds;
  double p_norm = 0.0;
};

/// V(e, ed) for a given configuration's inertia matrix.
double lyapunov_value(const Vec& e, const Vec& ed, const Mat& m, const StabilityConfig& cfg);

/// Central finite-difference Jacobians (Fe, Fd) of the law's pre-saturation
/// instantaneous mapping around err0, holding the internal state frozen.
/// Throws on non-finite law output.
std::pair<Mat, Mat> numeric_jacobians(FeedbackLaw law, const FeedbackGains& gains,
                                      const FeedbackState& fb_state, const ErrorVector& err0,
                                      const StabilityConfig& cfg);

/// Samples the region (deterministic in the seed) and records the maxima.
/// C(q, qd) is probed column-wise through zero-gravity bias calls.
DynamicsBounds dynamics_bounds(const RobotModel& model, const RegionBox& region, int samples,
                               std::uint64_t seed = 1, double fd_step = 1e-6);

StabilityReport check_theorem1(const Mat& fe, const Mat& fd, const DynamicsBounds& bounds,
                               const StabilityConfig& cfg);

std::string report_text(const StabilityReport& report);
std::string report_json(const StabilityReport& report);

}  // namespace armlab
