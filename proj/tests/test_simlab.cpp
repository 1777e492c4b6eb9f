#include "armlab/simlab.hpp"

#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "oracles/planar_oracle.hpp"

namespace armlab {
namespace {

EpisodeTrace synthetic_trace(const std::vector<double>& ebar, double dt, double duration,
                             double trigger) {
  EpisodeTrace trace;
  trace.dt = dt;
  trace.duration = duration;
  trace.trigger = trigger;
  for (size_t k = 0; k < ebar.size(); ++k) {
    trace.t.push_back(k * dt);
    trace.e.push_back(Vec::Constant(6, ebar[k]));
    trace.q.push_back(Vec::Zero(6));
    trace.qd.push_back(Vec::Zero(6));
    trace.ref_q.push_back(Vec::Zero(6));
    trace.ref_qd.push_back(Vec::Zero(6));
    trace.tau.push_back(Vec::Zero(6));
    trace.latency.push_back(0.0);
  }
  return trace;
}

TEST(Reference, AnchorsAreExact) {
  const std::vector<Condition> conds = builtin_conditions();
  const Condition& c1 = conds[0];
  Vec ref_q, ref_qd;

  reference(c1, c1.duration / 2.0, ref_q, ref_qd);
  EXPECT_TRUE(ref_q == Vec(0.5 * c1.amplitude));  // sin(0) = 0, exactly Q/2
  EXPECT_DOUBLE_EQ(ref_q[0], -M_PI / 8.0);        // Q1 = -pi/4

  reference(c1, 0.0, ref_q, ref_qd);
  EXPECT_TRUE(ref_q.isZero(0.0));  // quarter-period alignment at f = 0.1

  // Velocity is the analytic derivative.
  const double h = 1e-7;
  Vec qa, qb, unused;
  reference(c1, 1.3 - h, qa, unused);
  reference(c1, 1.3 + h, qb, unused);
  reference(c1, 1.3, ref_q, ref_qd);
  EXPECT_LT((ref_qd - (qb - qa) / (2.0 * h)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Reference, BuiltinConditionFamily) {
  const std::vector<Condition> conds = builtin_conditions();
  ASSERT_EQ(conds.size(), 5u);
  for (const Condition& c : conds) {
    EXPECT_DOUBLE_EQ(c.duration, 5.0);
    EXPECT_DOUBLE_EQ(c.trigger, 2.0);
    EXPECT_TRUE(c.disturbance == (Vec(6) << 1, 1, 5, 5, 10, 10).finished());
  }
  EXPECT_TRUE(conds[1].amplitude == Vec(-conds[0].amplitude));
  EXPECT_TRUE(conds[4].amplitude == Vec(-conds[3].amplitude));
  EXPECT_TRUE(conds[3].frequency == Vec(Vec::Constant(6, 0.05)));
  EXPECT_DOUBLE_EQ(conds[2].frequency[0], 0.1);
}

TEST(Disturbance, SinglePeriodImpulse) {
  const Condition cond = builtin_conditions()[0];
  const double dt = 0.005;
  EXPECT_TRUE(inject_disturbance(cond, 2.0, dt) == cond.disturbance);
  EXPECT_TRUE(inject_disturbance(cond, 1.0, dt).isZero());
  EXPECT_TRUE(inject_disturbance(cond, 2.01, dt).isZero());

  // Integrated over the episode grid the impulse is exactly dt * vector.
  Vec integral = Vec::Zero(6);
  for (int k = 0; k <= 1000; ++k) integral += dt * inject_disturbance(cond, k * dt, dt);
  EXPECT_TRUE(integral.isApprox(dt * cond.disturbance, 1e-12));
}

TEST(PlantStep, FirstOrderConvergence) {
  // Free fall of the pendulum for 1 s: halving the step roughly halves the
  // endpoint error against a dense reference.
  const oracle::PendulumParams p;
  const RobotModel model = oracle::pendulum_model(p);
  const Vec zero = Vec::Zero(1);
  auto endpoint = [&](double dt) {
    JointState s{Vec::Zero(1), Vec::Zero(1)};
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    for (int k = 0; k < steps; ++k) s = semi_implicit_step(model, s, zero, dt);
    return s.q[0];
  };
  const double dense = endpoint(1e-6);
  const double err_a = std::abs(endpoint(1e-4) - dense);
  const double err_b = std::abs(endpoint(5e-5) - dense);
  EXPECT_GT(err_a, 0.0);
  const double ratio = err_a / err_b;
  EXPECT_GT(ratio, 1.5);
  EXPECT_LT(ratio, 2.5);
}

TEST(PlantStep, PendulumEnergyDrift) {
  const oracle::PendulumParams p;
  const RobotModel model = oracle::pendulum_model(p);
  JointState s{Vec::Constant(1, 1.0), Vec::Zero(1)};
  const double e0 = oracle::pendulum_energy(p, s.q[0], s.qd[0]);
  const double scale = p.mass * p.g * p.com;  // energy scale of the swing
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    s = semi_implicit_step(model, s, Vec::Zero(1), 0.005);
    worst = std::max(worst, std::abs(oracle::pendulum_energy(p, s.q[0], s.qd[0]) - e0));
  }
  EXPECT_LT(worst / scale, 0.01);
}

TEST(PlantStep, KineticEnergyConservedWithoutGravity) {
  RobotModel model = ur5_default();
  model.gravity.setZero();
  JointState s{Vec::Zero(6), Vec::Constant(6, 0.4)};
  auto kinetic = [&](const JointState& state) {
    return 0.5 * state.qd.dot(mass_matrix(model, state.q) * state.qd);
  };
  const double e0 = kinetic(s);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    s = semi_implicit_step(model, s, Vec::Zero(6), 0.005);
    worst = std::max(worst, std::abs(kinetic(s) - e0));
  }
  EXPECT_LT(worst / e0, 0.01);
}

TEST(PlantStep, ClampsToStateBox) {
  const oracle::PendulumParams p;
  const RobotModel model = oracle::pendulum_model(p);
  SimConfig cfg = default_sim_config(1);
  cfg.qd_max = Vec::Constant(1, 0.5);
  cfg.qd_min = -cfg.qd_max;
  bool clamped = false;
  const JointState next =
      step(model, JointState{Vec::Zero(1), Vec::Zero(1)}, Vec::Constant(1, 500.0), 0.005, cfg,
           &clamped);
  EXPECT_TRUE(clamped);
  EXPECT_DOUBLE_EQ(next.qd[0], 0.5);
}

TEST(Episode, TraceLengthAndSharedPlumbing) {
  const RobotModel model = ur5_default();
  const FeedbackGains gains = default_gains(6);
  const MpcConfig mpc = default_mpc_config(6);
  SimConfig sim = default_sim_config(6);
  Condition cond = builtin_conditions()[0];
  cond.duration = 0.5;
  cond.trigger = 0.2;

  const EpisodeTrace fb =
      run_episode(model, ControlMode::kFb, FeedbackLaw::kPd, cond, gains, mpc, sim, 1);
  EXPECT_EQ(fb.steps(), static_cast<int>(std::lround(cond.duration / sim.dt)) + 1);

  const EpisodeTrace hm =
      run_episode(model, ControlMode::kHmpc, FeedbackLaw::kPd, cond, gains, mpc, sim, 1);
  ASSERT_EQ(hm.steps(), fb.steps());
  for (int k = 0; k < fb.steps(); ++k) {
    EXPECT_EQ(fb.t[k], hm.t[k]);
    EXPECT_TRUE(fb.ref_q[k] == hm.ref_q[k]);  // only the torque path differs
  }
}

TEST(Episode, PdHoldsEquilibriumWithoutGravity) {
  RobotModel model = ur5_default();
  model.gravity.setZero();
  const FeedbackGains gains = default_gains(6);
  const MpcConfig mpc = default_mpc_config(6);
  SimConfig sim = default_sim_config(6);
  sim.init_jitter = 0.0;
  Condition still;
  still.id = "still";
  still.amplitude = Vec::Zero(6);
  still.frequency = Vec::Constant(6, 0.1);
  still.duration = 1.0;
  still.disturbance = Vec::Zero(6);
  still.trigger = 0.5;
  const EpisodeTrace trace =
      run_episode(model, ControlMode::kFb, FeedbackLaw::kPd, still, gains, mpc, sim, 3);
  double worst = 0.0;
  for (const Vec& e : trace.e) worst = std::max(worst, e.cwiseAbs().maxCoeff());
  EXPECT_LT(worst, 1e-12);
}

TEST(Episode, DeterministicPerSeedAndJittered) {
  const RobotModel model = ur5_default();
  const FeedbackGains gains = default_gains(6);
  const MpcConfig mpc = default_mpc_config(6);
  SimConfig sim = default_sim_config(6);
  sim.init_jitter = 0.02;
  Condition cond = builtin_conditions()[2];
  cond.duration = 0.3;

  const EpisodeTrace a =
      run_episode(model, ControlMode::kFb, FeedbackLaw::kSmc, cond, gains, mpc, sim, 11);
  const EpisodeTrace b =
      run_episode(model, ControlMode::kFb, FeedbackLaw::kSmc, cond, gains, mpc, sim, 11);
  ASSERT_EQ(a.steps(), b.steps());
  for (int k = 0; k < a.steps(); ++k) {
    EXPECT_TRUE(a.q[k] == b.q[k]);
    EXPECT_TRUE(a.tau[k] == b.tau[k]);
  }
  const EpisodeTrace c =
      run_episode(model, ControlMode::kFb, FeedbackLaw::kSmc, cond, gains, mpc, sim, 12);
  EXPECT_FALSE(a.q[0] == c.q[0]);  // different jitter draw
}

TEST(Episode, DisturbanceClampIsSurvivable) {
  // The standard impulse kicks the light wrist joints past the velocity box;
  // the joint stop clamps and the episode keeps running to full length.
  const RobotModel model = ur5_default();
  const FeedbackGains gains = default_gains(6);
  const MpcConfig mpc = default_mpc_config(6);
  SimConfig sim = default_sim_config(6);
  Condition cond = builtin_conditions()[0];
  cond.duration = 2.5;  // past the 2 s trigger
  const EpisodeTrace trace =
      run_episode(model, ControlMode::kFb, FeedbackLaw::kPd, cond, gains, mpc, sim, 1);
  EXPECT_FALSE(trace.truncated);
  EXPECT_EQ(trace.steps(), static_cast<int>(std::lround(cond.duration / sim.dt)) + 1);
  EXPECT_GT(trace.clamp_events, 0);
  EXPECT_GE(trace.first_clamp_step, static_cast<int>(std::lround(2.0 / sim.dt)));
}

TEST(Metrics, ConstantErrorProfile) {
  const double c = 0.2;
  const std::vector<double> ebar(501, c);
  const EpisodeTrace trace = synthetic_trace(ebar, 0.01, 5.0, 2.0);
  const MetricSet m = compute_metrics(trace);
  EXPECT_NEAR(m.rmse, c, 1e-12);
  EXPECT_NEAR(m.mae, c, 1e-12);
  EXPECT_NEAR(m.p95, c, 1e-12);
  EXPECT_NEAR(m.peak, c, 1e-12);
  EXPECT_DOUBLE_EQ(m.dedt_rms, 0.0);
  EXPECT_TRUE(m.settle_censored);
  EXPECT_DOUBLE_EQ(m.settle, 3.0);  // duration - trigger

  // Zero error settles immediately.
  const MetricSet zero = compute_metrics(synthetic_trace(std::vector<double>(501, 0.0), 0.01, 5.0, 2.0));
  EXPECT_DOUBLE_EQ(zero.settle, 0.0);
  EXPECT_FALSE(zero.settle_censored);
}

TEST(Metrics, ExponentialDecaySettlingTime) {
  const double dt = 0.001;
  std::vector<double> ebar;
  for (int k = 0; k <= 5000; ++k) {
    const double t = k * dt;
    ebar.push_back(t < 2.0 ? 0.1 : 0.1 * std::exp(-3.0 * (t - 2.0)));
  }
  const MetricSet m = compute_metrics(synthetic_trace(ebar, dt, 5.0, 2.0));
  // Analytic threshold crossing: ln(0.1 / threshold) / 3 after the trigger.
  const double expected = std::log(0.1 / kSettleThreshold) / 3.0;
  EXPECT_NEAR(m.settle, expected, 2.0 * dt);
  EXPECT_FALSE(m.settle_censored);
}

TEST(Metrics, ScaleLinearly) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> ebar(301);
  for (double& v : ebar) v = u(rng);
  const double c = 2.7;
  std::vector<double> scaled = ebar;
  for (double& v : scaled) v *= c;
  const MetricSet a = compute_metrics(synthetic_trace(ebar, 0.01, 3.0, 1.0));
  const MetricSet b = compute_metrics(synthetic_trace(scaled, 0.01, 3.0, 1.0));
  EXPECT_NEAR(b.rmse, c * a.rmse, 1e-12);
  EXPECT_NEAR(b.mae, c * a.mae, 1e-12);
  EXPECT_NEAR(b.p95, c * a.p95, 1e-12);
  EXPECT_NEAR(b.peak, c * a.peak, 1e-12);
  EXPECT_NEAR(b.dedt_rms, c * a.dedt_rms, 1e-9);
}

TEST(Composite, MinMaxNormalization) {
  MetricSet good, bad;
  good.rmse = good.mae = good.p95 = good.peak = 0.1;
  good.settle = 0.5;
  good.dedt_rms = 0.05;
  bad.rmse = bad.mae = bad.p95 = bad.peak = 0.4;
  bad.settle = 2.0;
  bad.dedt_rms = 0.2;
  const auto scores = composite_score({{"good", good}, {"bad", bad}});
  EXPECT_DOUBLE_EQ(scores.at("good"), 0.0);
  EXPECT_DOUBLE_EQ(scores.at("bad"), 1.0);  // weights sum to one

  const auto equal = composite_score({{"a", good}, {"b", good}});
  EXPECT_DOUBLE_EQ(equal.at("a"), 0.0);
  EXPECT_DOUBLE_EQ(equal.at("b"), 0.0);

  EXPECT_THROW(composite_score({{"only", good}}), std::invalid_argument);
}

TEST(Composite, ShiftInvariant) {
  MetricSet a, b, c;
  a.rmse = 0.1; b.rmse = 0.2; c.rmse = 0.35;
  a.settle = 1.0; b.settle = 0.5; c.settle = 2.0;
  auto shifted = [](MetricSet m, double offset) {
    m.rmse += offset;
    return m;
  };
  const auto base = composite_score({{"a", a}, {"b", b}, {"c", c}});
  const auto moved = composite_score(
      {{"a", shifted(a, 5.0)}, {"b", shifted(b, 5.0)}, {"c", shifted(c, 5.0)}});
  for (const auto& [name, score] : base) EXPECT_NEAR(moved.at(name), score, 1e-12);
}

TEST(TraceIo, CsvRoundTrip) {
  const RobotModel model = ur5_default();
  const FeedbackGains gains = default_gains(6);
  const MpcConfig mpc = default_mpc_config(6);
  SimConfig sim = default_sim_config(6);
  Condition cond = builtin_conditions()[0];
  cond.duration = 0.1;
  cond.trigger = 0.05;
  const EpisodeTrace trace =
      run_episode(model, ControlMode::kFb, FeedbackLaw::kPid, cond, gains, mpc, sim, 5);
  const std::string path = std::string(::testing::TempDir()) + "/trace.csv";
  save_trace_csv(trace, path);
  const EpisodeTrace loaded = load_trace_csv(path);
  ASSERT_EQ(loaded.steps(), trace.steps());
  EXPECT_EQ(loaded.condition_id, trace.condition_id);
  EXPECT_EQ(loaded.seed, trace.seed);
  EXPECT_EQ(mode_name(loaded.mode), "fb");
  for (int k = 0; k < trace.steps(); ++k) {
    EXPECT_TRUE(loaded.q[k] == trace.q[k]);
    EXPECT_TRUE(loaded.e[k] == trace.e[k]);
    EXPECT_TRUE(loaded.tau[k] == trace.tau[k]);
  }
  // Metrics agree when recomputed from the file.
  const MetricSet m1 = compute_metrics(trace);
  const MetricSet m2 = compute_metrics(loaded);
  EXPECT_DOUBLE_EQ(m1.rmse, m2.rmse);
  EXPECT_DOUBLE_EQ(m1.settle, m2.settle);
}

TEST(Campaign, SmokeRunWritesOutputs) {
  namespace fs = std::filesystem;
  const RobotModel model = ur5_default();
  const FeedbackGains gains = default_gains(6);
  const MpcConfig mpc = default_mpc_config(6);

  CampaignSpec spec;
  spec.laws = {FeedbackLaw::kPd};
  spec.modes = {ControlMode::kFb, ControlMode::kHmpc};
  Condition cond = builtin_conditions()[0];
  cond.duration = 0.5;
  cond.trigger = 0.2;
  spec.custom_conditions = {cond};
  spec.seeds = {1};
  spec.outdir = std::string(::testing::TempDir()) + "/campaign";
  const CampaignResult result = run_campaign(model, spec, gains, mpc);

  ASSERT_EQ(result.rows.size(), 2u);
  EXPECT_TRUE(result.failures.empty());
  const auto& summary = result.per_law.at("pd");
  EXPECT_TRUE(summary.eta_h.has_value());
  EXPECT_TRUE(summary.t_h_ms.has_value());
  EXPECT_TRUE(fs::exists(fs::path(spec.outdir) / "summary.json"));
  EXPECT_TRUE(fs::exists(fs::path(spec.outdir) / "table1.csv"));
  EXPECT_TRUE(fs::exists(fs::path(spec.outdir) / "trace_pd_fb_c1_s1.csv"));
  EXPECT_TRUE(fs::exists(fs::path(spec.outdir) / "trace_pd_hmpc_c1_s1.csv"));
}

}  // namespace
}  // namespace armlab
