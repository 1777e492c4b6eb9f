#include "armlab/emulator.hpp"

#include <atomic>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "armlab/util.hpp"

namespace armlab {
namespace {

bool admissible(const PoolSample& sample, const MpcConfig& cfg) {
  return (sample.q.array() >= cfg.q_min.array()).all() &&
         (sample.q.array() <= cfg.q_max.array()).all() &&
         (sample.qd.array() >= cfg.qd_min.array()).all() &&
         (sample.qd.array() <= cfg.qd_max.array()).all() &&
         (sample.tau_fb.cwiseAbs().array() <= cfg.torque_bounds.array() * (1.0 + 1e-12)).all() &&
         sample.e.allFinite() && sample.ed.allFinite();
}

}  // namespace

std::vector<PoolSample> build_raw_pool(const RobotModel& model,
                                       const std::vector<Condition>& conditions,
                                       const std::vector<FeedbackLaw>& laws,
                                       const FeedbackGains& gains, const SimConfig& sim_cfg,
                                       const std::vector<RegionSpec>& regions,
                                       std::uint64_t seed) {
  const MpcConfig mpc = default_mpc_config(model.dof());
  std::vector<PoolSample> pool;
  std::uint64_t episode_seed = seed;
  for (size_t c = 0; c < conditions.size(); ++c) {
    for (FeedbackLaw law : laws) {
      const EpisodeTrace trace = run_episode(model, ControlMode::kFb, law, conditions[c], gains,
                                             mpc, sim_cfg, episode_seed++);
      // The terminal row has no control action attached.
      for (int k = 0; k + 1 < trace.steps(); ++k) {
        PoolSample sample;
        sample.q = trace.q[k];
        sample.qd = trace.qd[k];
        sample.e = trace.e[k];
        sample.ed = trace.ref_qd[k] - trace.qd[k];
        sample.tau_fb = trace.tau[k];
        sample.t = trace.t[k];
        sample.condition_index = static_cast<int>(c);
        sample.region = region_of(regions, trace.t[k]);
        sample.law = law;
        pool.push_back(std::move(sample));
      }
    }
  }
  return pool;
}

Vec augmented_state(const Vec& q, const Vec& e, const Vec& qd, const Vec& ed,
                    const Vec& tau_fb) {
  Vec s(q.size() * 5);
  s << q, e, qd, ed, tau_fb;
  return s;
}

Mat ExpertDataset::inputs() const {
  if (samples.empty()) return Mat();
  Mat x(samples.front().input.size(), samples.size());
  for (size_t i = 0; i < samples.size(); ++i) x.col(i) = samples[i].input;
  return x;
}

Mat ExpertDataset::targets() const {
  if (samples.empty()) return Mat();
  Mat y(samples.front().tau_star.size(), samples.size());
  for (size_t i = 0; i < samples.size(); ++i) y.col(i) = samples[i].tau_star;
  return y;
}

ExpertDataset label_with_expert(const RobotModel& model, const std::vector<PoolSample>& pool,
                                const std::vector<Condition>& conditions,
                                const MpcConfig& mpc_cfg, const FeedbackGains& gains,
                                int threads) {
  const int count = static_cast<int>(pool.size());
  std::vector<ExpertSample> labeled(count);
  std::vector<char> ok(count, 0);
  const FeedbackState frozen(model.dof());

  parallel_for(
      count,
      [&](int i) {
        const PoolSample& sample = pool[i];
        if (!admissible(sample, mpc_cfg)) return;
        if (sample.condition_index < 0 ||
            sample.condition_index >= static_cast<int>(conditions.size()))
          return;
        try {
          const RefFn ref = make_ref(conditions[sample.condition_index]);
          const JointState state{sample.q, sample.qd};
          const Vec tau = hmpc_select(model, state, ref, sample.t, sample.tau_fb, mpc_cfg,
                                      sample.law, gains, frozen);
          if (!tau.allFinite()) return;
          labeled[i].input = augmented_state(sample.q, sample.e, sample.qd, sample.ed,
                                             sample.tau_fb);
          labeled[i].tau_star = tau;
          labeled[i].region = sample.region;
          ok[i] = 1;
        } catch (const std::exception&) {
          // dropped; counted below
        }
      },
      threads);

  ExpertDataset dataset;
  dataset.samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (ok[i]) dataset.samples.push_back(std::move(labeled[i]));
    else ++dataset.dropped;
  }
  return dataset;
}

void save_dataset(const ExpertDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  out << std::setprecision(17);
  const int n_in = dataset.samples.empty() ? 30 : static_cast<int>(dataset.samples[0].input.size());
  const int n_out =
      dataset.samples.empty() ? 6 : static_cast<int>(dataset.samples[0].tau_star.size());
  const int n = n_out;
  out << "# armlab expert dataset v1\n";
  out << "# layout: q(" << n << ") e(" << n << ") qd(" << n << ") ed(" << n << ") tau_fb(" << n
      << ") | tau_star(" << n << ")\n";
  if (!dataset.samples.empty()) {
    const Mat x = dataset.inputs();
    const Mat y = dataset.targets();
    const NormStats in_stats = fit_normalization(x);
    const NormStats out_stats = fit_normalization(y);
    auto put = [&out](const char* key, const Vec& v) {
      out << "# " << key;
      for (int i = 0; i < v.size(); ++i) out << ' ' << v[i];
      out << '\n';
    };
    put("input_mean", in_stats.mean);
    put("input_std", in_stats.std);
    put("output_mean", out_stats.mean);
    put("output_std", out_stats.std);
  }
  out << "# region tags:";
  for (const ExpertSample& s : dataset.samples) out << ' ' << s.region;
  out << '\n';
  for (const ExpertSample& s : dataset.samples) {
    for (int i = 0; i < n_in; ++i) out << s.input[i] << ',';
    for (int i = 0; i < n_out; ++i) out << s.tau_star[i] << (i + 1 < n_out ? ',' : '\n');
  }
}

ExpertDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  ExpertDataset dataset;
  std::vector<int> regions;
  std::string line;
  bool checked_magic = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!checked_magic) {
        if (line.find("armlab expert dataset v1") == std::string::npos)
          throw std::runtime_error(path + ": not an armlab expert dataset v1 file");
        checked_magic = true;
      }
      if (line.rfind("# region tags:", 0) == 0) {
        std::istringstream ss(line.substr(14));
        for (int r; ss >> r;) regions.push_back(r);
      }
      continue;
    }
    std::istringstream ss(line);
    std::vector<double> row;
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() % 6 != 0 || row.size() < 12)
      throw std::runtime_error(path + ": row must hold 6k numbers (inputs then labels)");
    const int n = static_cast<int>(row.size()) / 6;  // 5n inputs + n labels
    ExpertSample sample;
    sample.input.resize(5 * n);
    sample.tau_star.resize(n);
    for (int i = 0; i < 5 * n; ++i) sample.input[i] = row[i];
    for (int i = 0; i < n; ++i) sample.tau_star[i] = row[5 * n + i];
    dataset.samples.push_back(std::move(sample));
  }
  if (!checked_magic) throw std::runtime_error(path + ": missing dataset header");
  for (size_t i = 0; i < dataset.samples.size() && i < regions.size(); ++i)
    dataset.samples[i].region = regions[i];
  return dataset;
}

Vec lmpc_step(const EmulatorNet& net, const JointState& state, const Vec& ref_q,
              const Vec& ref_qd, FeedbackLaw law, const FeedbackGains& gains,
              FeedbackState& fb_state, double dt) {
  const ErrorVector err = error_vector(state, ref_q, ref_qd, gains, fb_state, law);
  const Vec tau_fb = feedback_torque(law, err, state, gains, fb_state, dt);
  const Vec s = augmented_state(state.q, err.e, state.qd, err.ed, tau_fb);
  return mlp_forward(net, s);  // saturates internally
}

}  // namespace armlab
