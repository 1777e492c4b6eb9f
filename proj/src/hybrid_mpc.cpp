#include "armlab/hybrid_mpc.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "armlab/util.hpp"

namespace armlab {
namespace {

constexpr double kInfeasibleCost = std::numeric_limits<double>::infinity();

bool inside_box(const Vec& v, const Vec& lo, const Vec& hi) {
  return (v.array() >= lo.array()).all() && (v.array() <= hi.array()).all();
}

double feature_cost(const ErrorVector& err, const MpcConfig& cfg) {
  return cfg.w1_pos * err.e.squaredNorm() + cfg.w1_vel * err.ed.squaredNorm() +
         cfg.w1_xi * err.xi.squaredNorm() + cfg.w1_slide * err.slide.squaredNorm() +
         cfg.w1_dhat * err.dhat.squaredNorm();
}

}  // namespace

MpcConfig default_mpc_config(int n) {
  MpcConfig cfg;
  for (int i = 0; i <= 10; ++i) cfg.selection.push_back(0.5 + 0.1 * i);
  cfg.horizon = 5;
  for (int k = 1; k <= cfg.horizon; ++k) cfg.temporal_weights.push_back(1.0 - 0.05 * (k - 1));
  if (n == 6) {
    cfg.q_max = (Vec(6) << M_PI, 0.8 * M_PI, 0.8 * M_PI, M_PI, M_PI, M_PI).finished();
    cfg.torque_bounds = (Vec(6) << 102, 102, 66, 34, 34, 34).finished();
  } else {
    cfg.q_max = Vec::Constant(n, M_PI);
    cfg.torque_bounds = Vec::Constant(n, 102.0);
  }
  cfg.q_min = -cfg.q_max;
  cfg.qd_max = Vec::Constant(n, 0.81 * M_PI);
  cfg.qd_min = -cfg.qd_max;
  return cfg;
}

void validate_mpc_config(const MpcConfig& cfg, int n) {
  if (cfg.selection.empty()) throw std::invalid_argument("mpc: selection must be non-empty");
  for (size_t i = 1; i < cfg.selection.size(); ++i)
    if (cfg.selection[i] <= cfg.selection[i - 1])
      throw std::invalid_argument("mpc: selection must be strictly increasing");
  if (cfg.horizon < 1) throw std::invalid_argument("mpc: horizon must be >= 1");
  if (static_cast<int>(cfg.temporal_weights.size()) != cfg.horizon)
    throw std::invalid_argument("mpc: temporal_weights length must equal horizon");
  for (double w : {cfg.w1_pos, cfg.w1_vel, cfg.w1_xi, cfg.w1_slide, cfg.w1_dhat, cfg.w2})
    if (w < 0.0) throw std::invalid_argument("mpc: cost weights must be >= 0");
  if (cfg.dt <= 0.0) throw std::invalid_argument("mpc: dt must be positive");
  for (const Vec* v : {&cfg.q_min, &cfg.q_max, &cfg.qd_min, &cfg.qd_max, &cfg.torque_bounds})
    if (v->size() != n || !v->allFinite())
      throw std::invalid_argument("mpc: bound vectors must be finite with length n");
  if (((cfg.q_max - cfg.q_min).array() <= 0.0).any() ||
      ((cfg.qd_max - cfg.qd_min).array() <= 0.0).any())
    throw std::invalid_argument("mpc: state bounds need min < max");
  if ((cfg.torque_bounds.array() <= 0.0).any())
    throw std::invalid_argument("mpc: torque bounds must be positive");
}

MpcConfig load_mpc_config(const std::string& path, int n) {
  MpcConfig cfg = default_mpc_config(n);
  bool selection_explicit = false;
  double sel_min = 0.5, sel_max = 1.5, sel_step = 0.1;
  bool sel_range_given = false;
  bool weights_given = false;
  for (const KvEntry& e : parse_kv_file(path)) {
    const std::string& key = e.key;
    if (key == "horizon") cfg.horizon = static_cast<int>(kv_double(e));
    else if (key == "dt") cfg.dt = kv_double(e);
    else if (key == "selection") {
      const Vec sel = kv_vec(e);
      cfg.selection.assign(sel.begin(), sel.end());
      selection_explicit = true;
    } else if (key == "selection_min") { sel_min = kv_double(e); sel_range_given = true; }
    else if (key == "selection_max") { sel_max = kv_double(e); sel_range_given = true; }
    else if (key == "selection_step") { sel_step = kv_double(e); sel_range_given = true; }
    else if (key == "temporal_weights") {
      const Vec w = kv_vec(e);
      cfg.temporal_weights.assign(w.begin(), w.end());
      weights_given = true;
    } else if (key == "w1_pos") cfg.w1_pos = kv_double(e);
    else if (key == "w1_vel") cfg.w1_vel = kv_double(e);
    else if (key == "w1_xi") cfg.w1_xi = kv_double(e);
    else if (key == "w1_slide") cfg.w1_slide = kv_double(e);
    else if (key == "w1_dhat") cfg.w1_dhat = kv_double(e);
    else if (key == "w2") cfg.w2 = kv_double(e);
    else if (key == "q_min") cfg.q_min = kv_vec(e);
    else if (key == "q_max") cfg.q_max = kv_vec(e);
    else if (key == "qd_min") cfg.qd_min = kv_vec(e);
    else if (key == "qd_max") cfg.qd_max = kv_vec(e);
    else if (key == "torque_bounds") cfg.torque_bounds = kv_vec(e);
    else
      throw std::runtime_error(path + ":" + std::to_string(e.line) + ": unknown mpc field '" +
                               key + "'");
  }
  if (sel_range_given && !selection_explicit) {
    cfg.selection.clear();
    const int count = static_cast<int>(std::floor((sel_max - sel_min) / sel_step + 0.5));
    for (int i = 0; i <= count; ++i) cfg.selection.push_back(sel_min + sel_step * i);
  }
  if (!weights_given) {
    cfg.temporal_weights.clear();
    for (int k = 1; k <= cfg.horizon; ++k)
      cfg.temporal_weights.push_back(1.0 - 0.05 * (k - 1));
  }
  validate_mpc_config(cfg, n);
  return cfg;
}

void save_mpc_config(const MpcConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mpc config: " + path);
  out << std::setprecision(17);
  auto put = [&out](const char* key, const Vec& v) {
    out << key;
    for (int i = 0; i < v.size(); ++i) out << ' ' << v[i];
    out << '\n';
  };
  out << "horizon " << cfg.horizon << "\ndt " << cfg.dt << '\n';
  out << "selection";
  for (double w : cfg.selection) out << ' ' << w;
  out << "\ntemporal_weights";
  for (double w : cfg.temporal_weights) out << ' ' << w;
  out << '\n';
  out << "w1_pos " << cfg.w1_pos << "\nw1_vel " << cfg.w1_vel << "\nw1_xi " << cfg.w1_xi
      << "\nw1_slide " << cfg.w1_slide << "\nw1_dhat " << cfg.w1_dhat << "\nw2 " << cfg.w2
      << '\n';
  put("q_min", cfg.q_min);
  put("q_max", cfg.q_max);
  put("qd_min", cfg.qd_min);
  put("qd_max", cfg.qd_max);
  put("torque_bounds", cfg.torque_bounds);
}

std::vector<Vec> candidate_torques(const Vec& tau_fb, const MpcConfig& cfg) {
  std::vector<Vec> candidates;
  candidates.reserve(cfg.selection.size());
  for (double w : cfg.selection) candidates.push_back(saturate(w * tau_fb, cfg.torque_bounds));
  return candidates;
}

std::vector<Vec> preview_sequence(const Vec& candidate, const MpcConfig& cfg) {
  std::vector<Vec> seq;
  seq.reserve(cfg.horizon);
  for (int k = 0; k < cfg.horizon; ++k)
    seq.push_back(saturate(cfg.temporal_weights[k] * candidate, cfg.torque_bounds));
  return seq;
}

CandidateRollout rollout_cost(const RobotModel& model, const JointState& state,
                              const RefFn& ref, double t0, const std::vector<Vec>& seq,
                              const MpcConfig& cfg, FeedbackLaw law,
                              const FeedbackGains& gains, const FeedbackState& fb_state) {
  if (static_cast<int>(seq.size()) != cfg.horizon)
    throw std::invalid_argument("rollout_cost: sequence length must equal horizon");
  CandidateRollout rollout;
  rollout.torques = seq;
  JointState x = state;
  Vec ref_q, ref_qd;
  double total = 0.0;
  for (int j = 0; j < cfg.horizon; ++j) {
    x = semi_implicit_step(model, x, seq[j], cfg.dt);
    rollout.states.push_back(x);
    if (!inside_box(x.q, cfg.q_min, cfg.q_max) || !inside_box(x.qd, cfg.qd_min, cfg.qd_max)) {
      rollout.feasible = false;
      rollout.violation_step = j;
      rollout.cost = kInfeasibleCost;
      return rollout;
    }
    ref(t0 + (j + 1) * cfg.dt, ref_q, ref_qd);
    const ErrorVector err = error_features(x, ref_q, ref_qd, gains, fb_state, law);
    const double step_cost = feature_cost(err, cfg) + cfg.w2 * seq[j].squaredNorm();
    rollout.step_costs.push_back(step_cost);
    total += step_cost;
  }
  rollout.cost = total;
  return rollout;
}

int select_optimal_index(const std::vector<CandidateRollout>& rollouts) {
  if (rollouts.empty()) throw std::invalid_argument("select_optimal: empty rollout list");
  int best = -1;
  for (size_t i = 0; i < rollouts.size(); ++i) {
    if (!rollouts[i].feasible) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const CandidateRollout& a = rollouts[i];
    const CandidateRollout& b = rollouts[best];
    if (a.cost < b.cost) {
      best = static_cast<int>(i);
    } else if (a.cost == b.cost) {
      const double da = std::abs(a.scalar - 1.0);
      const double db = std::abs(b.scalar - 1.0);
      if (da < db || (da == db && a.scalar < b.scalar)) best = static_cast<int>(i);
    }
  }
  return best;
}

Vec select_optimal(const std::vector<CandidateRollout>& rollouts, const Vec& tau_fb,
                   const MpcConfig& cfg, HmpcDiagnostics* diag) {
  const int best = select_optimal_index(rollouts);
  if (diag) {
    diag->candidate_costs.clear();
    diag->candidate_feasible.clear();
    for (const CandidateRollout& r : rollouts) {
      diag->candidate_costs.push_back(r.cost);
      diag->candidate_feasible.push_back(r.feasible ? 1 : 0);
    }
    diag->fallback = best < 0;
    diag->chosen_scalar = best < 0 ? 1.0 : rollouts[best].scalar;
  }
  if (best < 0) return saturate(tau_fb, cfg.torque_bounds);
  return rollouts[best].torques.front();
}

Vec hmpc_select(const RobotModel& model, const JointState& state, const RefFn& ref,
                double t, const Vec& tau_fb, const MpcConfig& cfg, FeedbackLaw law,
                const FeedbackGains& gains, const FeedbackState& fb_state,
                HmpcDiagnostics* diag) {
  const std::vector<Vec> candidates = candidate_torques(tau_fb, cfg);
  std::vector<CandidateRollout> rollouts;
  rollouts.reserve(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    CandidateRollout r = rollout_cost(model, state, ref, t, preview_sequence(candidates[i], cfg),
                                      cfg, law, gains, fb_state);
    r.scalar = cfg.selection[i];
    rollouts.push_back(std::move(r));
  }
  return select_optimal(rollouts, tau_fb, cfg, diag);
}

std::pair<Vec, HmpcDiagnostics> hmpc_step(const RobotModel& model, const JointState& state,
                                          const RefFn& ref, double t, FeedbackLaw law,
                                          const FeedbackGains& gains, FeedbackState& fb_state,
                                          const MpcConfig& cfg) {
  Vec ref_q, ref_qd;
  ref(t, ref_q, ref_qd);
  const ErrorVector err = error_vector(state, ref_q, ref_qd, gains, fb_state, law);
  const Vec tau_fb = feedback_torque(law, err, state, gains, fb_state, cfg.dt);
  HmpcDiagnostics diag;
  const Vec tau = hmpc_select(model, state, ref, t, tau_fb, cfg, law, gains, fb_state, &diag);
  return {tau, diag};
}

}  // namespace armlab
