#include "armlab/stability.hpp"

#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "armlab/rne_dynamics.hpp"

namespace armlab {
namespace {

double min_eigenvalue_sym(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  return es.eigenvalues().minCoeff();
}

double spectral_norm(const Mat& a) {
  return a.jacobiSvd().singularValues()(0);
}

double induced_inf_norm(const Mat& a) {
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

Vec sample_box(std::mt19937_64& rng, const Vec& lo, const Vec& hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec v(lo.size());
  for (int i = 0; i < lo.size(); ++i) v[i] = lo[i] + u(rng) * (hi[i] - lo[i]);
  return v;
}

}  // namespace

StabilityConfig default_stability_config(int n) {
  StabilityConfig cfg;
  if (n == 6) {
    cfg.P = (Vec(6) << 25, 150, 65, 25, 2, 1).finished().asDiagonal();
  } else {
    cfg.P = 25.0 * Mat::Identity(n, n);
  }
  return cfg;
}

RegionBox symmetric_region(int n, double q_range, double qd_range) {
  RegionBox box;
  box.q_hi = Vec::Constant(n, q_range);
  box.q_lo = -box.q_hi;
  box.qd_hi = Vec::Constant(n, qd_range);
  box.qd_lo = -box.qd_hi;
  return box;
}

double lyapunov_value(const Vec& e, const Vec& ed, const Mat& m, const StabilityConfig& cfg) {
  return 0.5 * ed.dot(m * ed) + 0.5 * e.dot(cfg.P * e) + cfg.beta * e.dot(m * ed);
}

std::pair<Mat, Mat> numeric_jacobians(FeedbackLaw law, const FeedbackGains& gains,
                                      const FeedbackState& fb_state, const ErrorVector& err0,
                                      const StabilityConfig& cfg) {
  const int n = static_cast<int>(err0.e.size());
  if (cfg.fd_step <= 0.0) throw std::invalid_argument("numeric_jacobians: fd_step must be > 0");
  Mat fe(n, n), fd(n, n);
  const double h = cfg.fd_step;

  auto law_at = [&](const Vec& e, const Vec& ed) {
    ErrorVector err = err0;
    err.e = e;
    err.ed = ed;
    if (law == FeedbackLaw::kSmc) err.slide = ed + gains.smc_lambda.cwiseProduct(e);
    const Vec tau = eval_feedback(law, err, gains, fb_state);
    if (!tau.allFinite()) throw std::runtime_error("numeric_jacobians: non-finite law output");
    return tau;
  };

  for (int j = 0; j < n; ++j) {
    Vec e_plus = err0.e, e_minus = err0.e;
    e_plus[j] += h;
    e_minus[j] -= h;
    fe.col(j) = (law_at(e_plus, err0.ed) - law_at(e_minus, err0.ed)) / (2.0 * h);

    Vec ed_plus = err0.ed, ed_minus = err0.ed;
    ed_plus[j] += h;
    ed_minus[j] -= h;
    fd.col(j) = (law_at(err0.e, ed_plus) - law_at(err0.e, ed_minus)) / (2.0 * h);
  }
  return {fe, fd};
}

DynamicsBounds dynamics_bounds(const RobotModel& model, const RegionBox& region, int samples,
                               std::uint64_t seed, double fd_step) {
  if (samples < 1) throw std::invalid_argument("dynamics_bounds: samples must be >= 1");
  const int n = model.dof();
  RobotModel weightless = model;
  weightless.gravity.setZero();

  std::mt19937_64 rng(seed);
  DynamicsBounds out;
  out.samples = samples;

  // Bilinear Coriolis probe: column j of C(q, qd) as
  // (B(qd + e_j) - B(qd) - B(e_j)) / 2 with B the zero-gravity bias.
  Mat c(n, n);
  Mat gq(n, n);
  for (int s = 0; s < samples; ++s) {
    const Vec q = sample_box(rng, region.q_lo, region.q_hi);
    const Vec qd = sample_box(rng, region.qd_lo, region.qd_hi);

    Eigen::SelfAdjointEigenSolver<Mat> es(mass_matrix(model, q));
    out.lambda_max_m = std::max(out.lambda_max_m, es.eigenvalues().maxCoeff());

    const Vec b_qd = bias_vector(weightless, q, qd);
    for (int j = 0; j < n; ++j) {
      Vec unit = Vec::Zero(n);
      unit[j] = 1.0;
      c.col(j) = 0.5 * (bias_vector(weightless, q, qd + unit) - b_qd -
                        bias_vector(weightless, q, unit));
    }
    out.c_max = std::max(out.c_max, induced_inf_norm(c));

    for (int j = 0; j < n; ++j) {
      Vec q_plus = q, q_minus = q;
      q_plus[j] += fd_step;
      q_minus[j] -= fd_step;
      gq.col(j) =
          (gravity_vector(model, q_plus) - gravity_vector(model, q_minus)) / (2.0 * fd_step);
    }
    out.gq_max = std::max(out.gq_max, induced_inf_norm(gq));
  }
  return out;
}

StabilityReport check_theorem1(const Mat& fe, const Mat& fd, const DynamicsBounds& bounds,
                               const StabilityConfig& cfg) {
  if (!fe.allFinite() || !fd.allFinite())
    throw std::invalid_argument("check_theorem1: non-finite Jacobians");
  StabilityReport report;
  report.bounds = bounds;
  report.lambda_min_fd = min_eigenvalue_sym(fd);
  report.lambda_min_fe = min_eigenvalue_sym(fe);
  report.p_norm = spectral_norm(cfg.P);

  const double beta = cfg.beta;
  report.rhs1 = beta * bounds.lambda_max_m + bounds.c_max + cfg.eps;
  report.cond1 = report.lambda_min_fd > report.rhs1;

  report.rhs2 =
      bounds.gq_max + (report.p_norm + beta * bounds.c_max) / beta + cfg.eps;
  report.cond2 = report.lambda_min_fe > report.rhs2;

  report.lhs3 = spectral_norm(beta * fe - cfg.P);
  report.rhs3 = (2.0 / beta) *
                (report.lambda_min_fd - beta * bounds.lambda_max_m - bounds.c_max) *
                (beta * report.lambda_min_fd - beta * beta * bounds.gq_max);
  report.cond3 = report.lhs3 < report.rhs3;

  report.overall = report.cond1 && report.cond2 && report.cond3;
  return report;
}

std::string report_text(const StabilityReport& r) {
  std::ostringstream out;
  out << "damping condition:   lambda_min(Fd) = " << r.lambda_min_fd << (r.cond1 ? " > " : " <= ")
      << r.rhs1 << (r.cond1 ? "  [ok]" : "  [violated]") << '\n';
  out << "stiffness condition: lambda_min(Fe) = " << r.lambda_min_fe << (r.cond2 ? " > " : " <= ")
      << r.rhs2 << (r.cond2 ? "  [ok]" : "  [violated]") << '\n';
  out << "coupling condition:  |beta Fe - P| = " << r.lhs3 << (r.cond3 ? " < " : " >= ") << r.rhs3
      << (r.cond3 ? "  [ok]" : "  [violated]") << '\n';
  out << "bounds: lambda_max(M) = " << r.bounds.lambda_max_m << ", |C|_max = " << r.bounds.c_max
      << ", |dG/dq|_max = " << r.bounds.gq_max << ", |P| = " << r.p_norm << " ("
      << r.bounds.samples << " samples)\n";
  out << "overall: " << (r.overall ? "all conditions hold" : "not certified") << '\n';
  return out.str();
}

std::string report_json(const StabilityReport& r) {
  nlohmann::json j;
  j["lambda_min_Fd"] = r.lambda_min_fd;
  j["lambda_min_Fe"] = r.lambda_min_fe;
  j["rhs1"] = r.rhs1;
  j["rhs2"] = r.rhs2;
  j["lhs3"] = r.lhs3;
  j["rhs3"] = r.rhs3;
  j["cond1"] = r.cond1;
  j["cond2"] = r.cond2;
  j["cond3"] = r.cond3;
  j["overall"] = r.overall;
  j["context"] = {{"lambda_max_M", r.bounds.lambda_max_m},
                  {"C_max", r.bounds.c_max},
                  {"Gq_max", r.bounds.gq_max},
                  {"P_norm", r.p_norm},
                  {"samples", r.bounds.samples}};
  return j.dump(2);
}

}  // namespace armlab
