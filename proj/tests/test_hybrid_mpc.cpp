#include "armlab/hybrid_mpc.hpp"

#include <random>

#include <gtest/gtest.h>

#include "oracles/planar_oracle.hpp"

namespace armlab {
namespace {

RefFn hold_reference(const Vec& q_ref) {
  return [q_ref](double, Vec& rq, Vec& rqd) {
    rq = q_ref;
    rqd = Vec::Zero(q_ref.size());
  };
}

TEST(Candidates, DefaultSelectionProducesEleven) {
  const MpcConfig cfg = default_mpc_config(6);
  ASSERT_EQ(cfg.selection.size(), 11u);
  EXPECT_DOUBLE_EQ(cfg.selection.front(), 0.5);
  EXPECT_DOUBLE_EQ(cfg.selection.back(), 1.5);
  EXPECT_DOUBLE_EQ(cfg.selection[5], 1.0);

  Vec tau = Vec::Zero(6);
  tau[0] = 10.0;
  const std::vector<Vec> cands = candidate_torques(tau, cfg);
  ASSERT_EQ(cands.size(), 11u);
  EXPECT_DOUBLE_EQ(cands[0][0], 5.0);
  EXPECT_TRUE(cands[0].tail(5).isZero());

  const std::vector<Vec> zeros = candidate_torques(Vec::Zero(6), cfg);
  for (const Vec& c : zeros) EXPECT_TRUE(c.isZero());
}

TEST(Candidates, SaturatedAtTorqueBounds) {
  const MpcConfig cfg = default_mpc_config(6);
  const Vec tau = Vec::Constant(6, 100.0);
  for (const Vec& c : candidate_torques(tau, cfg))
    EXPECT_TRUE((c.array().abs() <= cfg.torque_bounds.array()).all());
}

TEST(Preview, LinearlyDecreasingWeights) {
  const MpcConfig cfg = default_mpc_config(6);
  ASSERT_EQ(cfg.temporal_weights.size(), 5u);
  const double expected[5] = {1.00, 0.95, 0.90, 0.85, 0.80};
  for (int k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(cfg.temporal_weights[k], expected[k]);

  Vec cand = Vec::Constant(6, 2.0);
  const std::vector<Vec> seq = preview_sequence(cand, cfg);
  ASSERT_EQ(seq.size(), 5u);
  for (int k = 0; k < 5; ++k)
    EXPECT_TRUE(seq[k] == Vec(Vec::Constant(6, 2.0 * expected[k]))) << k;

  for (const Vec& s : preview_sequence(Vec::Zero(6), cfg)) EXPECT_TRUE(s.isZero());
}

TEST(Rollout, ZeroErrorPreservingTorqueHasZeroCost) {
  // Holding a weightless pendulum at its reference with zero torque keeps the
  // error identically zero; with w2 = 0 the whole rollout costs nothing.
  oracle::PendulumParams p;
  p.g = 0.0;
  const RobotModel model = oracle::pendulum_model(p);
  MpcConfig cfg = default_mpc_config(1);
  cfg.w2 = 0.0;
  const FeedbackGains gains = default_gains(1);
  const FeedbackState fb(1);
  Vec q_ref(1);
  q_ref << 0.4;
  const JointState state{q_ref, Vec::Zero(1)};
  const std::vector<Vec> seq(cfg.horizon, Vec::Zero(1));
  const CandidateRollout r = rollout_cost(model, state, hold_reference(q_ref), 0.0, seq, cfg,
                                          FeedbackLaw::kPd, gains, fb);
  EXPECT_TRUE(r.feasible);
  EXPECT_DOUBLE_EQ(r.cost, 0.0);
}

TEST(Rollout, EffortCostSumsSquaredPreviewWeights) {
  // W1 = 0, W2 = I, unit torque on joint 1: J = sum_k w_k^2 over the default
  // profile = 1 + 0.95^2 + 0.90^2 + 0.85^2 + 0.80^2 = 4.075.
  RobotModel model = ur5_default();
  model.gravity.setZero();
  MpcConfig cfg = default_mpc_config(6);
  cfg.w1_pos = cfg.w1_vel = 0.0;
  cfg.w2 = 1.0;
  const FeedbackGains gains = default_gains(6);
  const FeedbackState fb(6);
  const JointState state{Vec::Zero(6), Vec::Zero(6)};
  Vec cand = Vec::Zero(6);
  cand[0] = 1.0;
  const CandidateRollout r =
      rollout_cost(model, state, hold_reference(Vec::Zero(6)), 0.0, preview_sequence(cand, cfg),
                   cfg, FeedbackLaw::kPd, gains, fb);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.cost, 4.075, 1e-12);
  // Cost accumulation is monotone in the number of steps summed.
  double running = 0.0;
  for (double c : r.step_costs) {
    EXPECT_GE(c, 0.0);
    running += c;
    EXPECT_LE(running, r.cost + 1e-15);
  }
}

TEST(Rollout, StateBoundViolationIsInfeasible) {
  oracle::PendulumParams p;
  p.g = 0.0;
  const RobotModel model = oracle::pendulum_model(p);
  MpcConfig cfg = default_mpc_config(1);
  cfg.qd_max = Vec::Constant(1, 1e-4);
  cfg.qd_min = -cfg.qd_max;
  const FeedbackGains gains = default_gains(1);
  const FeedbackState fb(1);
  const JointState state{Vec::Zero(1), Vec::Zero(1)};
  const std::vector<Vec> seq(cfg.horizon, Vec::Constant(1, 50.0));
  const CandidateRollout r = rollout_cost(model, state, hold_reference(Vec::Zero(1)), 0.0, seq,
                                          cfg, FeedbackLaw::kPd, gains, fb);
  EXPECT_FALSE(r.feasible);
  EXPECT_EQ(r.violation_step, 0);
  EXPECT_TRUE(std::isinf(r.cost));
}

TEST(Selection, PicksCheapestAndBreaksTiesTowardUnity) {
  auto make = [](double scalar, double cost, bool feasible) {
    CandidateRollout r;
    r.scalar = scalar;
    r.cost = cost;
    r.feasible = feasible;
    r.torques = {Vec::Constant(1, scalar)};
    return r;
  };
  std::vector<CandidateRollout> rollouts = {make(0.9, 2.0, true), make(1.2, 2.0, true)};
  EXPECT_EQ(select_optimal_index(rollouts), 0);  // 0.9 is closer to 1.0

  rollouts = {make(0.8, 2.0, true), make(1.2, 2.0, true)};
  EXPECT_EQ(select_optimal_index(rollouts), 0);  // equal distance: smaller scalar

  rollouts = {make(0.5, 5.0, true), make(1.5, 1.0, true)};
  EXPECT_EQ(select_optimal_index(rollouts), 1);

  rollouts = {make(0.5, 5.0, true)};
  EXPECT_EQ(select_optimal_index(rollouts), 0);

  rollouts = {make(0.5, 0.0, false), make(1.0, 0.0, false)};
  EXPECT_EQ(select_optimal_index(rollouts), -1);
  const MpcConfig cfg = default_mpc_config(1);
  HmpcDiagnostics diag;
  const Vec tau = select_optimal(rollouts, Vec::Constant(1, 200.0), cfg, &diag);
  EXPECT_TRUE(diag.fallback);
  EXPECT_DOUBLE_EQ(tau[0], cfg.torque_bounds[0]);  // saturated raw feedback

  EXPECT_THROW(select_optimal_index({}), std::invalid_argument);
}

TEST(HmpcStep, EquilibriumProducesNearZeroTorque) {
  oracle::PendulumParams p;
  p.g = 0.0;
  const RobotModel model = oracle::pendulum_model(p);
  const MpcConfig cfg = default_mpc_config(1);
  const FeedbackGains gains = default_gains(1);
  FeedbackState fb(1);
  Vec q_ref(1);
  q_ref << 0.3;
  const JointState state{q_ref, Vec::Zero(1)};
  const auto [tau, diag] = hmpc_step(model, state, hold_reference(q_ref), 0.0,
                                     FeedbackLaw::kPd, gains, fb, cfg);
  EXPECT_LT(tau.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(diag.candidate_costs.size(), 11u);
  EXPECT_GE(diag.chosen_scalar, 0.5);
  EXPECT_LE(diag.chosen_scalar, 1.5);
}

TEST(HmpcStep, SelectedCostNeverExceedsUnityCandidate) {
  const RobotModel model = ur5_default();
  const MpcConfig cfg = default_mpc_config(6);
  const FeedbackGains gains = default_gains(6);
  std::mt19937_64 rng(17);
  int unity_index = -1;
  for (size_t i = 0; i < cfg.selection.size(); ++i)
    if (cfg.selection[i] == 1.0) unity_index = static_cast<int>(i);
  ASSERT_GE(unity_index, 0);

  for (int trial = 0; trial < 20; ++trial) {
    FeedbackState fb(6);
    const Vec q_ref = oracle::random_vec(rng, 6, 0.8);
    JointState state{q_ref + oracle::random_vec(rng, 6, 0.1),
                     oracle::random_vec(rng, 6, 0.2)};
    const auto [tau, diag] =
        hmpc_step(model, state, hold_reference(q_ref), 0.0, FeedbackLaw::kPd, gains, fb, cfg);
    ASSERT_EQ(diag.candidate_costs.size(), cfg.selection.size());
    if (diag.fallback) continue;
    double chosen_cost = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < cfg.selection.size(); ++i)
      if (cfg.selection[i] == diag.chosen_scalar) chosen_cost = diag.candidate_costs[i];
    EXPECT_LE(chosen_cost, diag.candidate_costs[unity_index]);
    EXPECT_TRUE((tau.cwiseAbs().array() <= cfg.torque_bounds.array()).all());
  }
}

TEST(HmpcStep, DeterministicSelection) {
  const RobotModel model = ur5_default();
  const MpcConfig cfg = default_mpc_config(6);
  const FeedbackGains gains = default_gains(6);
  std::mt19937_64 rng(19);
  const Vec q_ref = oracle::random_vec(rng, 6, 0.5);
  const JointState state{q_ref + oracle::random_vec(rng, 6, 0.05),
                         oracle::random_vec(rng, 6, 0.1)};
  FeedbackState fb1(6), fb2(6);
  const auto [tau1, diag1] =
      hmpc_step(model, state, hold_reference(q_ref), 0.0, FeedbackLaw::kPid, gains, fb1, cfg);
  const auto [tau2, diag2] =
      hmpc_step(model, state, hold_reference(q_ref), 0.0, FeedbackLaw::kPid, gains, fb2, cfg);
  EXPECT_TRUE(tau1 == tau2);
  EXPECT_EQ(diag1.chosen_scalar, diag2.chosen_scalar);
}

TEST(HmpcStep, DegenerateConfigReproducesFeedbackBitwise) {
  // selection = [1.0], horizon 1, W2 = 0: the MPC layer must hand back the
  // feedback torque bit for bit.
  const RobotModel model = ur5_default();
  MpcConfig cfg = default_mpc_config(6);
  cfg.selection = {1.0};
  cfg.horizon = 1;
  cfg.temporal_weights = {1.0};
  cfg.w2 = 0.0;
  const FeedbackGains gains = default_gains(6);
  std::mt19937_64 rng(29);
  for (FeedbackLaw law : {FeedbackLaw::kPd, FeedbackLaw::kPid, FeedbackLaw::kSmc}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Vec q_ref = oracle::random_vec(rng, 6, 0.8);
      const JointState state{q_ref + oracle::random_vec(rng, 6, 0.3),
                             oracle::random_vec(rng, 6, 0.5)};
      FeedbackState fb_a(6), fb_b(6);
      Vec ref_q, ref_qd;
      hold_reference(q_ref)(0.0, ref_q, ref_qd);
      const ErrorVector err = error_vector(state, ref_q, ref_qd, gains, fb_a, law);
      const Vec tau_fb = feedback_torque(law, err, state, gains, fb_a, cfg.dt);
      const auto [tau_mpc, diag] =
          hmpc_step(model, state, hold_reference(q_ref), 0.0, law, gains, fb_b, cfg);
      EXPECT_TRUE(tau_fb == tau_mpc) << law_name(law);
    }
  }
}

TEST(MpcConfigIo, RoundTripAndValidation) {
  const MpcConfig cfg = default_mpc_config(6);
  const std::string path = std::string(::testing::TempDir()) + "/mpc.cfg";
  save_mpc_config(cfg, path);
  const MpcConfig loaded = load_mpc_config(path, 6);
  EXPECT_EQ(loaded.horizon, cfg.horizon);
  EXPECT_EQ(loaded.selection, cfg.selection);
  EXPECT_EQ(loaded.temporal_weights, cfg.temporal_weights);
  EXPECT_TRUE(loaded.q_max == cfg.q_max);
  EXPECT_DOUBLE_EQ(loaded.w2, cfg.w2);

  MpcConfig bad = cfg;
  bad.selection = {1.0, 0.5};
  EXPECT_THROW(validate_mpc_config(bad, 6), std::invalid_argument);
  bad = cfg;
  bad.horizon = 0;
  EXPECT_THROW(validate_mpc_config(bad, 6), std::invalid_argument);
  bad = cfg;
  bad.temporal_weights.pop_back();
  EXPECT_THROW(validate_mpc_config(bad, 6), std::invalid_argument);
}

}  // namespace
}  // namespace armlab
