#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "armlab/feedback.hpp"
#include "armlab/hybrid_mpc.hpp"
#include "armlab/mlp.hpp"
#include "armlab/robot_model.hpp"

namespace armlab {

/// One operating condition: sinusoidal joint references
///   q_ref(t) = Q/2 * (1 + sin(2 pi f (t - T/2)))
/// plus a single-period torque impulse at the trigger time.
struct Condition {
  std::string id;
  Vec amplitude;    ///< Q [rad]
  Vec frequency;    ///< f [Hz]
  double duration = 5.0;
  Vec disturbance;  ///< [N m]
  double trigger = 2.0;
};

void reference(const Condition& cond, double t, Vec& ref_q, Vec& ref_qd);
RefFn make_ref(const Condition& cond);

/// The five evaluation conditions (distinct from sampling conditions).
std::vector<Condition> builtin_conditions();

/// Seeded sinusoidal conditions for data collection: per-joint amplitudes up
/// to pi/2, a shared frequency in [0.05, 0.15] Hz, the standard disturbance.
std::vector<Condition> random_conditions(int count, int n, std::uint64_t seed);

struct SimConfig {
  double dt = 0.005;
  Vec q_min, q_max, qd_min, qd_max;
  double init_jitter = 0.0;  ///< seeded uniform initial position offset [rad]
};

SimConfig default_sim_config(int n = 6);

enum class ControlMode { kFb, kHmpc, kLmpc };
ControlMode parse_mode(const std::string& name);
std::string mode_name(ControlMode mode);

/// One plant step: forward dynamics, semi-implicit Euler, then a hard clamp
/// onto the state box (clamp events flagged, the run continues — the joint
/// stop is physical, not an integration failure).
JointState step(const RobotModel& model, const JointState& state, const Vec& tau, double dt,
                const SimConfig& cfg, bool* clamped = nullptr);

/// The impulse: the full disturbance vector during the one control period
/// containing the trigger, zero elsewhere. Applied to the plant after
/// actuator saturation.
Vec inject_disturbance(const Condition& cond, double t, double dt);

struct EpisodeTrace {
  ControlMode mode = ControlMode::kFb;
  FeedbackLaw law = FeedbackLaw::kPd;
  std::string condition_id;
  std::uint64_t seed = 0;
  double dt = 0.005;
  double duration = 5.0;
  double trigger = 2.0;
  std::vector<double> t;
  std::vector<Vec> q, qd, ref_q, ref_qd, e, tau;
  std::vector<double> latency;  ///< controller wall time per step [s]
  int clamp_events = 0;
  int first_clamp_step = -1;
  bool truncated = false;  ///< non-finite dynamics aborted the run

  int steps() const { return static_cast<int>(t.size()); }
  /// Mean controller latency over the actual control cycles [s].
  double mean_latency() const;
};

/// Closed loop from t = 0 to T. The initial state sits on the reference plus
/// a seeded position jitter. LMPC requires a trained net.
EpisodeTrace run_episode(const RobotModel& model, ControlMode mode, FeedbackLaw law,
                         const Condition& cond, const FeedbackGains& gains,
                         const MpcConfig& mpc_cfg, const SimConfig& sim_cfg,
                         std::uint64_t seed, const EmulatorNet* net = nullptr);

/// Smaller-is-better tracking metrics over the joint-averaged absolute error.
struct MetricSet {
  double rmse = 0.0;
  double mae = 0.0;
  double p95 = 0.0;
  double peak = 0.0;
  double settle = 0.0;  ///< time after the trigger until the error stays < 1 deg
  double dedt_rms = 0.0;
  bool settle_censored = false;
};

inline constexpr std::array<double, 6> kMetricWeights = {0.1, 0.1, 0.1, 0.1, 0.3, 0.3};
inline constexpr double kSettleThreshold = 0.017453;  // 1 degree in rad

MetricSet compute_metrics(const EpisodeTrace& trace, double settle_threshold = kSettleThreshold);

/// Min-max normalizes each metric across the compared set (degenerate
/// metrics map to zero) and returns the weighted sums. Needs >= 2 entries.
std::map<std::string, double> composite_score(const std::map<std::string, MetricSet>& metrics,
                                              const std::array<double, 6>& weights = kMetricWeights);

void save_trace_csv(const EpisodeTrace& trace, const std::string& path);
EpisodeTrace load_trace_csv(const std::string& path);

struct CampaignSpec {
  std::vector<FeedbackLaw> laws;
  std::vector<ControlMode> modes;
  std::vector<int> condition_indices;  ///< 1-based indices into builtin_conditions
  std::vector<Condition> custom_conditions;  ///< overrides indices when non-empty
  std::vector<std::uint64_t> seeds = {1};
  double dt = 0.005;
  double init_jitter = 0.02;
  std::string outdir = "campaign_out";
  std::string net_path;  ///< required when modes include lmpc
  bool write_traces = true;
};

CampaignSpec load_campaign(const std::string& path);

struct CampaignRow {
  FeedbackLaw law;
  ControlMode mode;
  MetricSet metrics;      ///< cell-averaged
  double score = 0.0;     ///< composite across the campaign's rows
  double latency_ms = 0.0;
  int cells = 0;
  int clamped_cells = 0;
};

struct CampaignResult {
  std::vector<CampaignRow> rows;
  /// Per law: FB score, improvement percentages and mean cycle times.
  struct LawSummary {
    double fb_score = 0.0;
    std::optional<double> eta_h, eta_l;
    std::optional<double> t_h_ms, t_l_ms;
  };
  std::map<std::string, LawSummary> per_law;
  std::vector<std::string> failures;  ///< per-cell error messages

  const CampaignRow* find(FeedbackLaw law, ControlMode mode) const;
};

/// Runs every (law, mode, condition, seed) cell concurrently, aggregates
/// metrics, scores across all rows, and writes trace CSVs, summary.json and
/// table1.csv into spec.outdir.
CampaignResult run_campaign(const RobotModel& model, const CampaignSpec& spec,
                            const FeedbackGains& gains, const MpcConfig& mpc_cfg);

}  // namespace armlab
