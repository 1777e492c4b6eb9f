#include "armlab/emulator.hpp"

#include <random>

#include <gtest/gtest.h>

#include "oracles/planar_oracle.hpp"

namespace armlab {
namespace {

TEST(AugmentedState, LayoutIsQEQdEdTau) {
  const Vec q = Vec::Constant(6, 1.0);
  const Vec e = Vec::Constant(6, 2.0);
  const Vec qd = Vec::Constant(6, 3.0);
  const Vec ed = Vec::Constant(6, 4.0);
  const Vec tau = Vec::Constant(6, 5.0);
  const Vec s = augmented_state(q, e, qd, ed, tau);
  ASSERT_EQ(s.size(), 30);
  for (int block = 0; block < 5; ++block)
    for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(s[6 * block + i], block + 1.0);
}

TEST(RawPool, CoversRegionsAndStaysAdmissible) {
  const RobotModel model = ur5_default();
  const FeedbackGains gains = default_gains(6);
  SimConfig sim = default_sim_config(6);
  sim.init_jitter = 0.02;

  Condition cond = builtin_conditions()[0];
  cond.duration = 1.0;
  cond.trigger = 0.4;
  const std::vector<RegionSpec> regions =
      build_regions(1.0, {{{0.4, 0.7}}, {{0.0, 0.4}}, {{0.7, 1.0}}}, {0.05, 0.15, 0.30}, 0.01,
                    1.0, {0, 0, 0});

  const std::vector<PoolSample> pool = build_raw_pool(
      model, {cond}, {FeedbackLaw::kPd, FeedbackLaw::kSmc}, gains, sim, regions, 5);
  // Two laws, 200 control steps each.
  EXPECT_EQ(pool.size(), 2u * 200u);
  int per_region[3] = {0, 0, 0};
  for (const PoolSample& sample : pool) {
    ASSERT_GE(sample.region, 0);
    ASSERT_LT(sample.region, 3);
    ++per_region[sample.region];
    EXPECT_TRUE((sample.tau_fb.cwiseAbs().array() <= gains.torque_bounds.array()).all());
  }
  EXPECT_EQ(per_region[0], 2 * 60);   // 0.4-0.7 s
  EXPECT_EQ(per_region[1], 2 * 80);   // 0.0-0.4 s
  EXPECT_EQ(per_region[2], 2 * 60);   // 0.7-1.0 s
}

TEST(Labeling, EquilibriumLabelsAreZeroAndBounded) {
  RobotModel model = ur5_default();
  model.gravity.setZero();
  const FeedbackGains gains = default_gains(6);
  const MpcConfig mpc = default_mpc_config(6);

  Condition still;
  still.id = "still";
  still.amplitude = Vec::Zero(6);
  still.frequency = Vec::Constant(6, 0.1);
  still.duration = 1.0;
  still.disturbance = Vec::Zero(6);
  still.trigger = 0.5;

  PoolSample rest;
  rest.q = Vec::Zero(6);
  rest.qd = Vec::Zero(6);
  rest.e = Vec::Zero(6);
  rest.ed = Vec::Zero(6);
  rest.tau_fb = Vec::Zero(6);
  rest.t = 0.25;
  rest.condition_index = 0;
  rest.region = 0;
  rest.law = FeedbackLaw::kPd;

  const ExpertDataset dataset = label_with_expert(model, {rest}, {still}, mpc, gains);
  ASSERT_EQ(dataset.samples.size(), 1u);
  EXPECT_EQ(dataset.dropped, 0);
  EXPECT_LT(dataset.samples[0].tau_star.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Labeling, DropsInadmissibleSamplesAndCounts) {
  const RobotModel model = ur5_default();
  const FeedbackGains gains = default_gains(6);
  const MpcConfig mpc = default_mpc_config(6);
  const Condition cond = builtin_conditions()[0];

  PoolSample good;
  good.q = Vec::Constant(6, 0.1);
  good.qd = Vec::Zero(6);
  good.e = Vec::Constant(6, 0.01);
  good.ed = Vec::Zero(6);
  good.tau_fb = Vec::Constant(6, 1.0);
  good.t = 1.0;
  good.condition_index = 0;
  good.law = FeedbackLaw::kPd;

  PoolSample out_of_range = good;
  out_of_range.q = Vec::Constant(6, 10.0);  // outside the position box

  PoolSample overdriven = good;
  overdriven.tau_fb = Vec::Constant(6, 500.0);  // beyond the torque bounds

  const ExpertDataset dataset =
      label_with_expert(model, {good, out_of_range, overdriven}, {cond}, mpc, gains);
  EXPECT_EQ(dataset.samples.size(), 1u);
  EXPECT_EQ(dataset.dropped, 2);
  EXPECT_TRUE(
      (dataset.samples[0].tau_star.cwiseAbs().array() <= mpc.torque_bounds.array()).all());
}

TEST(Labeling, MatchesDirectExpertCall) {
  const RobotModel model = ur5_default();
  const FeedbackGains gains = default_gains(6);
  const MpcConfig mpc = default_mpc_config(6);
  const Condition cond = builtin_conditions()[1];
  std::mt19937_64 rng(9);

  std::vector<PoolSample> pool;
  for (int i = 0; i < 8; ++i) {
    PoolSample s;
    s.q = oracle::random_vec(rng, 6, 0.5);
    s.qd = oracle::random_vec(rng, 6, 0.3);
    Vec ref_q, ref_qd;
    s.t = 0.3 * i;
    reference(cond, s.t, ref_q, ref_qd);
    s.e = ref_q - s.q;
    s.ed = ref_qd - s.qd;
    s.tau_fb = saturate(oracle::random_vec(rng, 6, 20.0), gains.torque_bounds);
    s.condition_index = 0;
    s.law = FeedbackLaw::kPd;
    pool.push_back(std::move(s));
  }

  const ExpertDataset dataset = label_with_expert(model, pool, {cond}, mpc, gains, 2);
  ASSERT_EQ(dataset.samples.size(), pool.size());
  const FeedbackState frozen(6);
  for (size_t i = 0; i < pool.size(); ++i) {
    const Vec direct = hmpc_select(model, JointState{pool[i].q, pool[i].qd}, make_ref(cond),
                                   pool[i].t, pool[i].tau_fb, mpc, FeedbackLaw::kPd, gains,
                                   frozen);
    EXPECT_TRUE(dataset.samples[i].tau_star == direct) << i;
  }
}

TEST(DatasetIo, RoundTripWithRegions) {
  std::mt19937_64 rng(21);
  ExpertDataset dataset;
  for (int i = 0; i < 10; ++i) {
    ExpertSample s;
    s.input = oracle::random_vec(rng, 30, 2.0);
    s.tau_star = oracle::random_vec(rng, 6, 30.0);
    s.region = i % 3;
    dataset.samples.push_back(std::move(s));
  }
  const std::string path = std::string(::testing::TempDir()) + "/dataset.csv";
  save_dataset(dataset, path);
  const ExpertDataset loaded = load_dataset(path);
  ASSERT_EQ(loaded.samples.size(), dataset.samples.size());
  for (size_t i = 0; i < dataset.samples.size(); ++i) {
    EXPECT_TRUE(loaded.samples[i].input == dataset.samples[i].input);
    EXPECT_TRUE(loaded.samples[i].tau_star == dataset.samples[i].tau_star);
    EXPECT_EQ(loaded.samples[i].region, dataset.samples[i].region);
  }

  const std::string junk = std::string(::testing::TempDir()) + "/junk.csv";
  {
    std::ofstream out(junk);
    out << "1,2,3\n";
  }
  EXPECT_THROW(load_dataset(junk), std::runtime_error);
}

TEST(LmpcStep, DeterministicAndBounded) {
  const RobotModel model = ur5_default();
  const FeedbackGains gains = default_gains(6);
  EmulatorNet net = make_net({30, 32, 6}, 31);
  std::mt19937_64 rng(33);
  const Condition cond = builtin_conditions()[0];
  Vec ref_q, ref_qd;
  reference(cond, 1.0, ref_q, ref_qd);
  const JointState state{ref_q + oracle::random_vec(rng, 6, 0.1),
                         oracle::random_vec(rng, 6, 0.2)};
  FeedbackState fb_a(6), fb_b(6);
  const Vec tau_a = lmpc_step(net, state, ref_q, ref_qd, FeedbackLaw::kPd, gains, fb_a, 0.005);
  const Vec tau_b = lmpc_step(net, state, ref_q, ref_qd, FeedbackLaw::kPd, gains, fb_b, 0.005);
  EXPECT_TRUE(tau_a == tau_b);
  EXPECT_TRUE((tau_a.cwiseAbs().array() <= net.torque_bounds.array()).all());
}

TEST(LmpcStep, RunsInsideEpisode) {
  const RobotModel model = ur5_default();
  const FeedbackGains gains = default_gains(6);
  const MpcConfig mpc = default_mpc_config(6);
  SimConfig sim = default_sim_config(6);
  EmulatorNet net = make_net({30, 32, 6}, 37);
  Condition cond = builtin_conditions()[0];
  cond.duration = 0.2;
  cond.trigger = 0.1;
  const EpisodeTrace trace = run_episode(model, ControlMode::kLmpc, FeedbackLaw::kPd, cond,
                                         gains, mpc, sim, 3, &net);
  EXPECT_EQ(trace.steps(), static_cast<int>(std::lround(cond.duration / sim.dt)) + 1);
  EXPECT_THROW(
      run_episode(model, ControlMode::kLmpc, FeedbackLaw::kPd, cond, gains, mpc, sim, 3, nullptr),
      std::invalid_argument);
}

}  // namespace
}  // namespace armlab
