#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "armlab/hybrid_mpc.hpp"
#include "armlab/mlp.hpp"
#include "armlab/sampling.hpp"
#include "armlab/simlab.hpp"

namespace armlab {

/// One closed-loop instant recorded while a feedback law ran: everything
/// needed to rebuild the expert's input and reference context at that state.
struct PoolSample {
  Vec q, qd, e, ed, tau_fb;
  double t = 0.0;
  int condition_index = -1;
  int region = -1;
  FeedbackLaw law = FeedbackLaw::kPd;
};

/// Closed-loop states of every law under every condition, tagged by region.
/// Each (law, condition) episode runs feedback-only at the given seed base.
std::vector<PoolSample> build_raw_pool(const RobotModel& model,
                                       const std::vector<Condition>& conditions,
                                       const std::vector<FeedbackLaw>& laws,
                                       const FeedbackGains& gains, const SimConfig& sim_cfg,
                                       const std::vector<RegionSpec>& regions,
                                       std::uint64_t seed);

/// The 30-dimensional emulator input (q, e, qd, ed, tau_fb).
Vec augmented_state(const Vec& q, const Vec& e, const Vec& qd, const Vec& ed,
                    const Vec& tau_fb);

struct ExpertSample {
  Vec input;     ///< augmented state
  Vec tau_star;  ///< expert torque label
  int region = -1;
};

struct ExpertDataset {
  std::vector<ExpertSample> samples;
  long dropped = 0;  ///< labeler failures or admissibility violations

  Mat inputs() const;   ///< 5n x N column-per-sample view
  Mat targets() const;  ///< n x N
};

/// Runs the candidate-search expert at each pooled state against its recorded
/// reference context (concurrently; deterministic by index). Samples outside
/// the admissible ranges or failing the expert are dropped and counted.
ExpertDataset label_with_expert(const RobotModel& model, const std::vector<PoolSample>& pool,
                                const std::vector<Condition>& conditions,
                                const MpcConfig& mpc_cfg, const FeedbackGains& gains,
                                int threads = 0);

/// CSV persistence: 36 numbers per row (30 inputs, 6 labels) with a layout
/// and normalization header. The region tag rides along as a trailing
/// comment-style column description in the header only; rows carry data only.
void save_dataset(const ExpertDataset& dataset, const std::string& path);
ExpertDataset load_dataset(const std::string& path);

/// Emulator inference step: run the feedback law (stateful), assemble the
/// augmented state and return the saturated network torque.
Vec lmpc_step(const EmulatorNet& net, const JointState& state, const Vec& ref_q,
              const Vec& ref_qd, FeedbackLaw law, const FeedbackGains& gains,
              FeedbackState& fb_state, double dt);

}  // namespace armlab
