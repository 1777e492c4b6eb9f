#include "armlab/feedback.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "armlab/util.hpp"

namespace armlab {
namespace {

Vec constant(int n, double v) { return Vec::Constant(n, v); }

Vec from_list(std::initializer_list<double> values) {
  Vec v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

void require_nonneg(const Vec& v, const char* what) {
  if ((v.array() < 0.0).any())
    throw std::invalid_argument(std::string(what) + ": diagonal entries must be >= 0");
}

double unit_sat(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

FeedbackLaw parse_law(const std::string& name) {
  if (name == "pd") return FeedbackLaw::kPd;
  if (name == "pid") return FeedbackLaw::kPid;
  if (name == "adrc") return FeedbackLaw::kAdrc;
  if (name == "hinf") return FeedbackLaw::kHinf;
  if (name == "smc") return FeedbackLaw::kSmc;
  if (name == "mrac") return FeedbackLaw::kMrac;
  throw std::invalid_argument("unknown feedback law: " + name);
}

std::string law_name(FeedbackLaw law) {
  switch (law) {
    case FeedbackLaw::kPd: return "pd";
    case FeedbackLaw::kPid: return "pid";
    case FeedbackLaw::kAdrc: return "adrc";
    case FeedbackLaw::kHinf: return "hinf";
    case FeedbackLaw::kSmc: return "smc";
    case FeedbackLaw::kMrac: return "mrac";
  }
  return "?";
}

FeedbackGains default_gains(int n) {
  FeedbackGains g;
  if (n == 6) {
    g.kp = from_list({25, 150, 65, 25, 2, 1});
    g.kd = from_list({1, 5, 2, 0.6, 0.1, 0.05});
    g.ki = from_list({0.3, 0.4, 0.3, 0.1, 0.03, 0.03});
    g.b0 = from_list({0.015, 0.125, 0.070, 0.025, 0.008, 0.0001});
    g.smc_lambda = from_list({5, 3, 3, 5, 2, 0.05});
    g.smc_k = from_list({0.05, 0.10, 0.10, 0.15, 0.20, 0.005});
    g.smc_k_eq = from_list({10, 20, 15, 8, 3, 1});
    g.mrac_alpha = from_list({0.5, 0.5, 0.5, 0.5, 0.2, 0.2});
    g.mrac_gamma = from_list({5, 5, 4, 3, 1, 0.2});
    g.mrac_Lambda = from_list({20, 20, 15, 10, 6, 2});
    g.hinf_alpha = constant(6, 0.2);
    g.torque_bounds = from_list({102, 102, 66, 34, 34, 34});
  } else {
    g.kp = constant(n, 25.0);
    g.kd = constant(n, 1.0);
    g.ki = constant(n, 0.3);
    g.b0 = constant(n, 0.015);
    g.smc_lambda = constant(n, 5.0);
    g.smc_k = constant(n, 0.05);
    g.smc_k_eq = constant(n, 10.0);
    g.mrac_alpha = constant(n, 0.5);
    g.mrac_gamma = constant(n, 5.0);
    g.mrac_Lambda = constant(n, 20.0);
    g.hinf_alpha = constant(n, 0.2);
    g.torque_bounds = constant(n, 102.0);
  }
  return g;
}

void validate_gains(const FeedbackGains& g, int n) {
  for (const Vec* v : {&g.kp, &g.kd, &g.ki, &g.b0, &g.smc_lambda, &g.smc_k, &g.smc_k_eq,
                       &g.mrac_alpha, &g.mrac_gamma, &g.mrac_Lambda, &g.hinf_alpha,
                       &g.torque_bounds})
    if (v->size() != n) throw std::invalid_argument("gains: vector length mismatch");
  require_nonneg(g.kp, "kp");
  require_nonneg(g.kd, "kd");
  require_nonneg(g.ki, "ki");
  require_nonneg(g.smc_lambda, "smc lambda");
  require_nonneg(g.smc_k, "smc k");
  require_nonneg(g.smc_k_eq, "smc k_eq");
  require_nonneg(g.mrac_Lambda, "mrac Lambda");
  if ((g.b0.array() == 0.0).any()) throw std::invalid_argument("adrc b0 must be nonzero");
  if (g.omega_o <= 0.0 || g.omega_c <= 0.0)
    throw std::invalid_argument("adrc bandwidths must be positive");
  if (g.smc_eps_bl <= 0.0) throw std::invalid_argument("smc boundary layer must be positive");
  if ((g.torque_bounds.array() <= 0.0).any())
    throw std::invalid_argument("torque bounds must be positive");
}

FeedbackGains load_gains(const std::string& path, int n) {
  FeedbackGains g = default_gains(n);
  for (const KvEntry& e : parse_kv_file(path)) {
    const std::string id = e.section.empty() ? e.key : e.section + "." + e.key;
    if (id == "torque_bounds") g.torque_bounds = kv_vec(e);
    else if (id == "pd.kp") g.kp = kv_vec(e);
    else if (id == "pd.kd") g.kd = kv_vec(e);
    else if (id == "pid.ki") g.ki = kv_vec(e);
    else if (id == "adrc.b0") g.b0 = kv_vec(e);
    else if (id == "adrc.omega_o") g.omega_o = kv_double(e);
    else if (id == "adrc.omega_c") g.omega_c = kv_double(e);
    else if (id == "smc.lambda") g.smc_lambda = kv_vec(e);
    else if (id == "smc.k") g.smc_k = kv_vec(e);
    else if (id == "smc.k_eq") g.smc_k_eq = kv_vec(e);
    else if (id == "smc.eps_bl") g.smc_eps_bl = kv_double(e);
    else if (id == "mrac.alpha") g.mrac_alpha = kv_vec(e);
    else if (id == "mrac.gamma") g.mrac_gamma = kv_vec(e);
    else if (id == "mrac.Lambda") g.mrac_Lambda = kv_vec(e);
    else if (id == "hinf.alpha") g.hinf_alpha = kv_vec(e);
    else if (id == "hinf.k_s") g.hinf_ks = kv_double(e);
    else if (id == "hinf.k_u") g.hinf_ku = kv_double(e);
    else
      throw std::runtime_error(path + ":" + std::to_string(e.line) + ": unknown gain field '" +
                               id + "'");
  }
  validate_gains(g, n);
  return g;
}

void save_gains(const FeedbackGains& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gains file: " + path);
  out << std::setprecision(17);
  auto put = [&out](const char* key, const Vec& v) {
    out << key;
    for (int i = 0; i < v.size(); ++i) out << ' ' << v[i];
    out << '\n';
  };
  put("torque_bounds", g.torque_bounds);
  out << "[pd]\n";
  put("kp", g.kp);
  put("kd", g.kd);
  out << "[pid]\n";
  put("ki", g.ki);
  out << "[adrc]\n";
  put("b0", g.b0);
  out << "omega_o " << g.omega_o << "\nomega_c " << g.omega_c << '\n';
  out << "[smc]\n";
  put("lambda", g.smc_lambda);
  put("k", g.smc_k);
  put("k_eq", g.smc_k_eq);
  out << "eps_bl " << g.smc_eps_bl << '\n';
  out << "[mrac]\n";
  put("alpha", g.mrac_alpha);
  put("gamma", g.mrac_gamma);
  put("Lambda", g.mrac_Lambda);
  out << "[hinf]\n";
  put("alpha", g.hinf_alpha);
  out << "k_s " << g.hinf_ks << "\nk_u " << g.hinf_ku << '\n';
}

void FeedbackState::reset(int n) {
  xi = Vec::Zero(n);
  prev_e = Vec::Zero(n);
  eso_z1 = Vec::Zero(n);
  eso_z2 = Vec::Zero(n);
  eso_z3 = Vec::Zero(n);
  theta_hat = Vec::Zero(n);
  phi_reg = Vec::Zero(n);
  prev_tau = Vec::Zero(n);
  ref_qd_cur = Vec::Zero(n);
  ref_qd_prev = Vec::Zero(n);
  has_ref_history = false;
}

ErrorVector error_features(const JointState& state, const Vec& ref_q, const Vec& ref_qd,
                           const FeedbackGains& gains, const FeedbackState& fb_state,
                           FeedbackLaw law) {
  const int n = static_cast<int>(state.q.size());
  if (ref_q.size() != n || ref_qd.size() != n)
    throw std::invalid_argument("error_vector: reference length mismatch");

  ErrorVector err;
  err.e = ref_q - state.q;
  err.ed = ref_qd - state.qd;
  err.xi = (law == FeedbackLaw::kPid) ? fb_state.xi : Vec::Zero(n);
  err.slide = (law == FeedbackLaw::kSmc)
                  ? Vec(err.ed + gains.smc_lambda.cwiseProduct(err.e))
                  : Vec(Vec::Zero(n));
  err.dhat = (law == FeedbackLaw::kAdrc) ? fb_state.eso_z3 : Vec::Zero(n);
  return err;
}

ErrorVector error_vector(const JointState& state, const Vec& ref_q, const Vec& ref_qd,
                         const FeedbackGains& gains, FeedbackState& fb_state,
                         FeedbackLaw law) {
  ErrorVector err = error_features(state, ref_q, ref_qd, gains, fb_state, law);
  // Reference context for the stateful laws.
  fb_state.ref_qd_prev = fb_state.has_ref_history ? fb_state.ref_qd_cur : ref_qd;
  fb_state.ref_qd_cur = ref_qd;
  fb_state.has_ref_history = true;
  return err;
}

Vec saturate(const Vec& tau, const Vec& bounds) {
  if ((bounds.array() <= 0.0).any())
    throw std::invalid_argument("saturate: bounds must be positive");
  return tau.cwiseMax(-bounds).cwiseMin(bounds);
}

Vec eval_feedback(FeedbackLaw law, const ErrorVector& err, const FeedbackGains& gains,
                  const FeedbackState& fb_state) {
  switch (law) {
    case FeedbackLaw::kPd:
      return gains.kp.cwiseProduct(err.e) + gains.kd.cwiseProduct(err.ed);
    case FeedbackLaw::kPid:
      return gains.kp.cwiseProduct(err.e) + gains.ki.cwiseProduct(fb_state.xi) +
             gains.kd.cwiseProduct(err.ed);
    case FeedbackLaw::kAdrc: {
      const double wc = gains.omega_c;
      const Vec u0 = wc * wc * err.e + 2.0 * wc * err.ed - fb_state.eso_z3;
      return u0.cwiseQuotient(gains.b0);
    }
    case FeedbackLaw::kSmc: {
      const Vec s = err.ed + gains.smc_lambda.cwiseProduct(err.e);
      Vec tau = gains.smc_k_eq.cwiseProduct(s);
      for (int i = 0; i < s.size(); ++i)
        tau[i] += gains.smc_k[i] * unit_sat(s[i] / gains.smc_eps_bl);
      return tau;
    }
    case FeedbackLaw::kMrac: {
      const Vec s = err.ed + gains.mrac_alpha.cwiseProduct(err.e);
      return gains.mrac_Lambda.cwiseProduct(s) + fb_state.theta_hat.cwiseProduct(fb_state.phi_reg);
    }
    case FeedbackLaw::kHinf:
      return gains.hinf_alpha.cwiseProduct(gains.hinf_ks * err.e + gains.hinf_ku * err.ed);
  }
  throw std::logic_error("eval_feedback: unreachable");
}

Vec pd_torque(const ErrorVector& err, const FeedbackGains& gains) {
  FeedbackState unused(static_cast<int>(err.e.size()));
  return saturate(eval_feedback(FeedbackLaw::kPd, err, gains, unused), gains.torque_bounds);
}

Vec pid_torque(const ErrorVector& err, const FeedbackGains& gains, FeedbackState& fb_state,
               double dt) {
  if (dt <= 0.0) throw std::invalid_argument("pid_torque: dt must be positive");
  const int n = static_cast<int>(err.e.size());
  const Vec xi_old = fb_state.xi;
  fb_state.xi += 0.5 * dt * (fb_state.prev_e + err.e);  // trapezoidal
  Vec tau = eval_feedback(FeedbackLaw::kPid, err, gains, fb_state);
  // Conditional anti-windup: a joint whose raw output exceeds its bound with
  // the same sign as the error stops integrating this step.
  bool frozen = false;
  for (int i = 0; i < n; ++i) {
    if (std::abs(tau[i]) > gains.torque_bounds[i] && tau[i] * err.e[i] > 0.0) {
      fb_state.xi[i] = xi_old[i];
      frozen = true;
    }
  }
  if (frozen) tau = eval_feedback(FeedbackLaw::kPid, err, gains, fb_state);
  fb_state.prev_e = err.e;
  return saturate(tau, gains.torque_bounds);
}

void eso_update(FeedbackState& fb_state, const FeedbackGains& gains, const Vec& q_meas,
                double dt) {
  const double b1 = gains.eso_beta1();
  const double b2 = gains.eso_beta2();
  const double b3 = gains.eso_beta3();
  for (int i = 0; i < q_meas.size(); ++i) {
    const double innov = fb_state.eso_z1[i] - q_meas[i];
    const double z1 = fb_state.eso_z1[i];
    const double z2 = fb_state.eso_z2[i];
    const double z3 = fb_state.eso_z3[i];
    fb_state.eso_z1[i] = z1 + dt * (z2 - b1 * innov);
    fb_state.eso_z2[i] = z2 + dt * (z3 + gains.b0[i] * fb_state.prev_tau[i] - b2 * innov);
    fb_state.eso_z3[i] = z3 + dt * (-b3 * innov);
  }
}

Vec adrc_torque(const ErrorVector& err, const JointState& state, const FeedbackGains& gains,
                FeedbackState& fb_state, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("adrc_torque: dt must be positive");
  eso_update(fb_state, gains, state.q, dt);
  return saturate(eval_feedback(FeedbackLaw::kAdrc, err, gains, fb_state), gains.torque_bounds);
}

Vec smc_torque(const ErrorVector& err, const FeedbackGains& gains) {
  FeedbackState unused(static_cast<int>(err.e.size()));
  return saturate(eval_feedback(FeedbackLaw::kSmc, err, gains, unused), gains.torque_bounds);
}

Vec mrac_torque(const ErrorVector& err, const FeedbackGains& gains, FeedbackState& fb_state,
                double dt) {
  if (dt <= 0.0) throw std::invalid_argument("mrac_torque: dt must be positive");
  // Regressor: desired-acceleration proxy from the finite-differenced
  // reference velocity recorded by error_vector.
  fb_state.phi_reg = fb_state.has_ref_history
                         ? Vec((fb_state.ref_qd_cur - fb_state.ref_qd_prev) / dt)
                         : Vec(Vec::Zero(err.e.size()));
  const Vec s = err.ed + gains.mrac_alpha.cwiseProduct(err.e);
  fb_state.theta_hat += dt * gains.mrac_gamma.cwiseProduct(s).cwiseProduct(fb_state.phi_reg);
  return saturate(eval_feedback(FeedbackLaw::kMrac, err, gains, fb_state), gains.torque_bounds);
}

Vec hinf_torque(const ErrorVector& err, const FeedbackGains& gains) {
  FeedbackState unused(static_cast<int>(err.e.size()));
  return saturate(eval_feedback(FeedbackLaw::kHinf, err, gains, unused), gains.torque_bounds);
}

Vec feedback_torque(FeedbackLaw law, const ErrorVector& err, const JointState& state,
                    const FeedbackGains& gains, FeedbackState& fb_state, double dt) {
  switch (law) {
    case FeedbackLaw::kPd: return pd_torque(err, gains);
    case FeedbackLaw::kPid: return pid_torque(err, gains, fb_state, dt);
    case FeedbackLaw::kAdrc: return adrc_torque(err, state, gains, fb_state, dt);
    case FeedbackLaw::kSmc: return smc_torque(err, gains);
    case FeedbackLaw::kMrac: return mrac_torque(err, gains, fb_state, dt);
    case FeedbackLaw::kHinf: return hinf_torque(err, gains);
  }
  throw std::logic_error("feedback_torque: unreachable");
}

}  // namespace armlab
