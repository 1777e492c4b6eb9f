#include "armlab/simlab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

#include "armlab/emulator.hpp"
#include "armlab/util.hpp"

namespace armlab {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

Vec metric_array(const MetricSet& m) {
  return (Vec(6) << m.rmse, m.mae, m.p95, m.peak, m.settle, m.dedt_rms).finished();
}

}  // namespace

void reference(const Condition& cond, double t, Vec& ref_q, Vec& ref_qd) {
  const int n = static_cast<int>(cond.amplitude.size());
  ref_q.resize(n);
  ref_qd.resize(n);
  for (int i = 0; i < n; ++i) {
    const double phase = 2.0 * M_PI * cond.frequency[i] * (t - cond.duration / 2.0);
    ref_q[i] = 0.5 * cond.amplitude[i] * (1.0 + std::sin(phase));
    ref_qd[i] = M_PI * cond.amplitude[i] * cond.frequency[i] * std::cos(phase);
  }
}

RefFn make_ref(const Condition& cond) {
  return [cond](double t, Vec& ref_q, Vec& ref_qd) { reference(cond, t, ref_q, ref_qd); };
}

std::vector<Condition> builtin_conditions() {
  const Vec dist = (Vec(6) << 1, 1, 5, 5, 10, 10).finished();
  auto make = [&dist](const std::string& id, const Vec& amp, double freq) {
    Condition c;
    c.id = id;
    c.amplitude = amp;
    c.frequency = Vec::Constant(6, freq);
    c.duration = 5.0;
    c.disturbance = dist;
    c.trigger = 2.0;
    return c;
  };
  const Vec q1 =
      (Vec(6) << -M_PI / 4, M_PI / 6, -M_PI / 6, -M_PI / 4, M_PI / 2, M_PI / 2).finished();
  const Vec q3 =
      (Vec(6) << -M_PI / 3, M_PI / 4, -M_PI / 6, -M_PI / 6, M_PI / 3, M_PI / 2).finished();
  const Vec q4 = Vec::Constant(6, M_PI / 2);
  return {make("c1", q1, 0.1), make("c2", -q1, 0.1), make("c3", q3, 0.1),
          make("c4", q4, 0.05), make("c5", -q4, 0.05)};
}

std::vector<Condition> random_conditions(int count, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-M_PI / 2.0, M_PI / 2.0);
  std::uniform_real_distribution<double> freq(0.05, 0.15);
  Vec dist = Vec::Zero(n);
  if (n == 6) dist = (Vec(6) << 1, 1, 5, 5, 10, 10).finished();
  std::vector<Condition> conds;
  for (int k = 0; k < count; ++k) {
    Condition c;
    c.id = "r" + std::to_string(k + 1);
    c.amplitude.resize(n);
    for (int i = 0; i < n; ++i) c.amplitude[i] = amp(rng);
    c.frequency = Vec::Constant(n, freq(rng));
    c.duration = 5.0;
    c.disturbance = dist;
    c.trigger = 2.0;
    conds.push_back(std::move(c));
  }
  return conds;
}

SimConfig default_sim_config(int n) {
  SimConfig cfg;
  const MpcConfig mpc = default_mpc_config(n);
  cfg.q_min = mpc.q_min;
  cfg.q_max = mpc.q_max;
  cfg.qd_min = mpc.qd_min;
  cfg.qd_max = mpc.qd_max;
  return cfg;
}

ControlMode parse_mode(const std::string& name) {
  if (name == "fb") return ControlMode::kFb;
  if (name == "hmpc") return ControlMode::kHmpc;
  if (name == "lmpc") return ControlMode::kLmpc;
  throw std::invalid_argument("unknown control mode: " + name);
}

std::string mode_name(ControlMode mode) {
  switch (mode) {
    case ControlMode::kFb: return "fb";
    case ControlMode::kHmpc: return "hmpc";
    case ControlMode::kLmpc: return "lmpc";
  }
  return "?";
}

JointState step(const RobotModel& model, const JointState& state, const Vec& tau, double dt,
                const SimConfig& cfg, bool* clamped) {
  if (dt <= 0.0) throw std::invalid_argument("step: dt must be positive");
  JointState next = semi_implicit_step(model, state, tau, dt);
  bool hit = false;
  for (int i = 0; i < next.q.size(); ++i) {
    if (next.q[i] < cfg.q_min[i] || next.q[i] > cfg.q_max[i]) {
      next.q[i] = std::clamp(next.q[i], cfg.q_min[i], cfg.q_max[i]);
      next.qd[i] = 0.0;  // joint stop absorbs the motion
      hit = true;
    }
    if (next.qd[i] < cfg.qd_min[i] || next.qd[i] > cfg.qd_max[i]) {
      next.qd[i] = std::clamp(next.qd[i], cfg.qd_min[i], cfg.qd_max[i]);
      hit = true;
    }
  }
  if (clamped) *clamped = hit;
  return next;
}

Vec inject_disturbance(const Condition& cond, double t, double dt) {
  // Exactly the one control period whose sample time is nearest the trigger.
  if (t >= cond.trigger - 0.5 * dt && t < cond.trigger + 0.5 * dt) return cond.disturbance;
  return Vec::Zero(cond.disturbance.size());
}

double EpisodeTrace::mean_latency() const {
  // The terminal row records no controller call.
  const int cycles = std::max(0, steps() - 1);
  if (cycles == 0) return 0.0;
  double sum = 0.0;
  for (int k = 0; k < cycles; ++k) sum += latency[k];
  return sum / cycles;
}

EpisodeTrace run_episode(const RobotModel& model, ControlMode mode, FeedbackLaw law,
                         const Condition& cond, const FeedbackGains& gains,
                         const MpcConfig& mpc_cfg, const SimConfig& sim_cfg,
                         std::uint64_t seed, const EmulatorNet* net) {
  const int n = model.dof();
  if (cond.amplitude.size() != n) throw std::invalid_argument("run_episode: condition size mismatch");
  if (mode == ControlMode::kLmpc && net == nullptr)
    throw std::invalid_argument("run_episode: lmpc mode requires a trained net");

  EpisodeTrace trace;
  trace.mode = mode;
  trace.law = law;
  trace.condition_id = cond.id;
  trace.seed = seed;
  trace.dt = sim_cfg.dt;
  trace.duration = cond.duration;
  trace.trigger = cond.trigger;

  const int steps_total = static_cast<int>(std::lround(cond.duration / sim_cfg.dt));
  const RefFn ref = make_ref(cond);

  Vec ref_q, ref_qd;
  ref(0.0, ref_q, ref_qd);
  JointState state{ref_q, ref_qd};
  if (sim_cfg.init_jitter > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-sim_cfg.init_jitter, sim_cfg.init_jitter);
    for (int i = 0; i < n; ++i) state.q[i] += u(rng);
  }

  FeedbackState fb_state(n);
  auto record = [&trace](double t, const JointState& s, const Vec& rq, const Vec& rqd,
                         const Vec& tau, double latency) {
    trace.t.push_back(t);
    trace.q.push_back(s.q);
    trace.qd.push_back(s.qd);
    trace.ref_q.push_back(rq);
    trace.ref_qd.push_back(rqd);
    trace.e.push_back(rq - s.q);
    trace.tau.push_back(tau);
    trace.latency.push_back(latency);
  };

  for (int k = 0; k < steps_total; ++k) {
    const double t = k * sim_cfg.dt;
    ref(t, ref_q, ref_qd);

    const auto started = Clock::now();
    Vec tau_cmd(n);
    switch (mode) {
      case ControlMode::kFb: {
        const ErrorVector err = error_vector(state, ref_q, ref_qd, gains, fb_state, law);
        tau_cmd = feedback_torque(law, err, state, gains, fb_state, sim_cfg.dt);
        break;
      }
      case ControlMode::kHmpc: {
        const ErrorVector err = error_vector(state, ref_q, ref_qd, gains, fb_state, law);
        const Vec tau_fb = feedback_torque(law, err, state, gains, fb_state, sim_cfg.dt);
        tau_cmd = hmpc_select(model, state, ref, t, tau_fb, mpc_cfg, law, gains, fb_state);
        break;
      }
      case ControlMode::kLmpc:
        tau_cmd = lmpc_step(*net, state, ref_q, ref_qd, law, gains, fb_state, sim_cfg.dt);
        break;
    }
    const double latency = std::chrono::duration<double>(Clock::now() - started).count();

    fb_state.prev_tau = tau_cmd;
    record(t, state, ref_q, ref_qd, tau_cmd, latency);

    const Vec tau_plant = tau_cmd + inject_disturbance(cond, t, sim_cfg.dt);
    bool clamped = false;
    JointState next = step(model, state, tau_plant, sim_cfg.dt, sim_cfg, &clamped);
    if (clamped) {
      ++trace.clamp_events;
      if (trace.first_clamp_step < 0) trace.first_clamp_step = k;
    }
    if (!next.q.allFinite() || !next.qd.allFinite()) {
      trace.truncated = true;
      break;
    }
    state = std::move(next);
  }

  if (!trace.truncated) {
    const double t_end = steps_total * sim_cfg.dt;
    ref(t_end, ref_q, ref_qd);
    record(t_end, state, ref_q, ref_qd, Vec::Zero(n), 0.0);
  }
  return trace;
}

MetricSet compute_metrics(const EpisodeTrace& trace, double settle_threshold) {
  const int count = trace.steps();
  if (count == 0) throw std::invalid_argument("compute_metrics: empty trace");
  std::vector<double> ebar(count);
  for (int k = 0; k < count; ++k) ebar[k] = trace.e[k].cwiseAbs().mean();

  MetricSet m;
  double sum = 0.0, sum_sq = 0.0;
  for (double v : ebar) {
    sum += v;
    sum_sq += v * v;
    m.peak = std::max(m.peak, v);
  }
  m.mae = sum / count;
  m.rmse = std::sqrt(sum_sq / count);

  std::vector<double> sorted = ebar;
  std::sort(sorted.begin(), sorted.end());
  const int rank = std::max(0, static_cast<int>(std::ceil(0.95 * count)) - 1);
  m.p95 = sorted[rank];

  if (count > 1) {
    double acc = 0.0;
    for (int k = 0; k + 1 < count; ++k) {
      const double d = (ebar[k + 1] - ebar[k]) / trace.dt;
      acc += d * d;
    }
    m.dedt_rms = std::sqrt(acc / (count - 1));
  }

  // Settling: first time at/after the trigger from which the averaged error
  // stays below the threshold through the episode end.
  int last_violation = -1;
  for (int k = 0; k < count; ++k)
    if (ebar[k] >= settle_threshold) last_violation = k;
  const double horizon = trace.duration - trace.trigger;
  if (last_violation == count - 1) {
    m.settle = horizon;
    m.settle_censored = true;
  } else {
    const double cross = (last_violation < 0) ? trace.trigger : trace.t[last_violation + 1];
    m.settle = std::max(0.0, cross - trace.trigger);
  }
  return m;
}

std::map<std::string, double> composite_score(const std::map<std::string, MetricSet>& metrics,
                                              const std::array<double, 6>& weights) {
  if (metrics.size() < 2)
    throw std::invalid_argument("composite_score: need at least two controllers to normalize");
  Vec lo = Vec::Constant(6, std::numeric_limits<double>::infinity());
  Vec hi = Vec::Constant(6, -std::numeric_limits<double>::infinity());
  for (const auto& [name, m] : metrics) {
    const Vec v = metric_array(m);
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  std::map<std::string, double> scores;
  for (const auto& [name, m] : metrics) {
    const Vec v = metric_array(m);
    double score = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double range = hi[i] - lo[i];
      const double normalized = range > 0.0 ? (v[i] - lo[i]) / range : 0.0;
      score += weights[i] * normalized;
    }
    scores[name] = score;
  }
  return scores;
}

void save_trace_csv(const EpisodeTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  out << std::setprecision(17);
  const int n = trace.q.empty() ? 0 : static_cast<int>(trace.q.front().size());
  out << "# mode=" << mode_name(trace.mode) << " law=" << law_name(trace.law)
      << " condition=" << trace.condition_id << " seed=" << trace.seed << " dt=" << trace.dt
      << " duration=" << trace.duration << " trigger=" << trace.trigger
      << " clamp_events=" << trace.clamp_events << " truncated=" << (trace.truncated ? 1 : 0)
      << '\n';
  out << "t";
  for (const char* base : {"q", "ref", "e", "tau"})
    for (int i = 1; i <= n; ++i) out << ',' << base << i;
  out << ",latency\n";
  for (int k = 0; k < trace.steps(); ++k) {
    out << trace.t[k];
    for (int i = 0; i < n; ++i) out << ',' << trace.q[k][i];
    for (int i = 0; i < n; ++i) out << ',' << trace.ref_q[k][i];
    for (int i = 0; i < n; ++i) out << ',' << trace.e[k][i];
    for (int i = 0; i < n; ++i) out << ',' << trace.tau[k][i];
    out << ',' << trace.latency[k] << '\n';
  }
}

EpisodeTrace load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace: " + path);
  EpisodeTrace trace;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error(path + ": missing trace metadata header");
  {
    std::istringstream ss(line.substr(2));
    std::string kv;
    while (ss >> kv) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = kv.substr(0, eq);
      const std::string value = kv.substr(eq + 1);
      if (key == "mode") trace.mode = parse_mode(value);
      else if (key == "law") trace.law = parse_law(value);
      else if (key == "condition") trace.condition_id = value;
      else if (key == "seed") trace.seed = std::stoull(value);
      else if (key == "dt") trace.dt = std::stod(value);
      else if (key == "duration") trace.duration = std::stod(value);
      else if (key == "trigger") trace.trigger = std::stod(value);
      else if (key == "clamp_events") trace.clamp_events = std::stoi(value);
      else if (key == "truncated") trace.truncated = value == "1";
    }
  }
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing column header");
  const int columns = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  if ((columns - 2) % 4 != 0) throw std::runtime_error(path + ": unexpected column count");
  const int n = (columns - 2) / 4;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<double> row;
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != columns)
      throw std::runtime_error(path + ": ragged row");
    trace.t.push_back(row[0]);
    auto grab = [&row, n](int offset) {
      Vec v(n);
      for (int i = 0; i < n; ++i) v[i] = row[offset + i];
      return v;
    };
    trace.q.push_back(grab(1));
    trace.ref_q.push_back(grab(1 + n));
    trace.e.push_back(grab(1 + 2 * n));
    trace.tau.push_back(grab(1 + 3 * n));
    trace.qd.push_back(Vec::Zero(n));
    trace.ref_qd.push_back(Vec::Zero(n));
    trace.latency.push_back(row[columns - 1]);
  }
  return trace;
}

CampaignSpec load_campaign(const std::string& path) {
  CampaignSpec spec;
  spec.seeds.clear();
  for (const KvEntry& e : parse_kv_file(path)) {
    if (e.key == "laws") {
      spec.laws.clear();
      for (const std::string& tok : e.tokens) spec.laws.push_back(parse_law(tok));
    } else if (e.key == "modes") {
      spec.modes.clear();
      for (const std::string& tok : e.tokens) spec.modes.push_back(parse_mode(tok));
    } else if (e.key == "conditions") {
      const Vec v = kv_vec(e);
      spec.condition_indices.assign(v.begin(), v.end());
    } else if (e.key == "seeds") {
      const Vec v = kv_vec(e);
      for (double s : v) spec.seeds.push_back(static_cast<std::uint64_t>(s));
    } else if (e.key == "dt") {
      spec.dt = kv_double(e);
    } else if (e.key == "init_jitter") {
      spec.init_jitter = kv_double(e);
    } else if (e.key == "outdir") {
      spec.outdir = e.tokens.at(0);
    } else if (e.key == "net") {
      spec.net_path = e.tokens.at(0);
    } else if (e.key == "write_traces") {
      spec.write_traces = kv_double(e) != 0.0;
    } else {
      throw std::runtime_error(path + ":" + std::to_string(e.line) + ": unknown campaign field '" +
                               e.key + "'");
    }
  }
  if (spec.seeds.empty()) spec.seeds = {1};
  return spec;
}

const CampaignRow* CampaignResult::find(FeedbackLaw law, ControlMode mode) const {
  for (const CampaignRow& row : rows)
    if (row.law == law && row.mode == mode) return &row;
  return nullptr;
}

CampaignResult run_campaign(const RobotModel& model, const CampaignSpec& spec,
                            const FeedbackGains& gains, const MpcConfig& mpc_cfg) {
  if (spec.laws.empty() || spec.modes.empty())
    throw std::invalid_argument("campaign: needs at least one law and one mode");

  std::vector<Condition> conditions = spec.custom_conditions;
  if (conditions.empty()) {
    const std::vector<Condition> builtin = builtin_conditions();
    std::vector<int> indices = spec.condition_indices;
    if (indices.empty()) indices = {1, 2, 3, 4, 5};
    for (int idx : indices) {
      if (idx < 1 || idx > static_cast<int>(builtin.size()))
        throw std::invalid_argument("campaign: condition index out of range");
      conditions.push_back(builtin[idx - 1]);
    }
  }

  SimConfig sim_cfg = default_sim_config(model.dof());
  sim_cfg.dt = spec.dt;
  sim_cfg.init_jitter = spec.init_jitter;
  MpcConfig mpc = mpc_cfg;
  mpc.dt = spec.dt;

  EmulatorNet net;
  bool has_net = false;
  for (ControlMode mode : spec.modes) {
    if (mode == ControlMode::kLmpc) {
      if (spec.net_path.empty())
        throw std::invalid_argument("campaign: lmpc mode needs a net path");
      net = load_net(spec.net_path);
      has_net = true;
    }
  }

  struct Cell {
    FeedbackLaw law;
    ControlMode mode;
    int condition;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (FeedbackLaw law : spec.laws)
    for (ControlMode mode : spec.modes)
      for (size_t c = 0; c < conditions.size(); ++c)
        for (std::uint64_t seed : spec.seeds)
          cells.push_back({law, mode, static_cast<int>(c), seed});

  std::vector<EpisodeTrace> traces(cells.size());
  std::vector<std::string> errors(cells.size());
  parallel_for(static_cast<int>(cells.size()), [&](int i) {
    const Cell& cell = cells[i];
    try {
      traces[i] = run_episode(model, cell.mode, cell.law, conditions[cell.condition], gains, mpc,
                              sim_cfg, cell.seed, has_net ? &net : nullptr);
      if (traces[i].truncated) errors[i] = "episode truncated (non-finite dynamics)";
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  });

  CampaignResult result;
  if (!spec.outdir.empty()) fs::create_directories(spec.outdir);

  // Aggregate per (law, mode).
  for (FeedbackLaw law : spec.laws) {
    for (ControlMode mode : spec.modes) {
      CampaignRow row;
      row.law = law;
      row.mode = mode;
      Vec metric_sum = Vec::Zero(6);
      double latency_sum = 0.0;
      bool censored_any = false;
      for (size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].law != law || cells[i].mode != mode) continue;
        if (!errors[i].empty()) {
          result.failures.push_back("cell " + law_name(law) + "/" + mode_name(mode) + "/" +
                                    conditions[cells[i].condition].id + "/seed" +
                                    std::to_string(cells[i].seed) + ": " + errors[i]);
          continue;
        }
        const MetricSet m = compute_metrics(traces[i]);
        metric_sum += metric_array(m);
        censored_any = censored_any || m.settle_censored;
        latency_sum += traces[i].mean_latency();
        ++row.cells;
        if (traces[i].clamp_events > 0) ++row.clamped_cells;
        if (spec.write_traces && !spec.outdir.empty()) {
          const std::string name = "trace_" + law_name(law) + "_" + mode_name(mode) + "_" +
                                   conditions[cells[i].condition].id + "_s" +
                                   std::to_string(cells[i].seed) + ".csv";
          save_trace_csv(traces[i], (fs::path(spec.outdir) / name).string());
        }
      }
      if (row.cells > 0) {
        const Vec mean = metric_sum / row.cells;
        row.metrics.rmse = mean[0];
        row.metrics.mae = mean[1];
        row.metrics.p95 = mean[2];
        row.metrics.peak = mean[3];
        row.metrics.settle = mean[4];
        row.metrics.dedt_rms = mean[5];
        row.metrics.settle_censored = censored_any;
        row.latency_ms = 1000.0 * latency_sum / row.cells;
      }
      result.rows.push_back(row);
    }
  }

  // Composite scores across every aggregated row of the campaign.
  std::map<std::string, MetricSet> by_name;
  for (const CampaignRow& row : result.rows)
    if (row.cells > 0) by_name[law_name(row.law) + "/" + mode_name(row.mode)] = row.metrics;
  if (by_name.size() >= 2) {
    const std::map<std::string, double> scores = composite_score(by_name);
    for (CampaignRow& row : result.rows) {
      const auto it = scores.find(law_name(row.law) + "/" + mode_name(row.mode));
      if (it != scores.end()) row.score = it->second;
    }
  }

  for (FeedbackLaw law : spec.laws) {
    CampaignResult::LawSummary summary;
    const CampaignRow* fb = result.find(law, ControlMode::kFb);
    const CampaignRow* hm = result.find(law, ControlMode::kHmpc);
    const CampaignRow* lm = result.find(law, ControlMode::kLmpc);
    if (fb && fb->cells > 0) summary.fb_score = fb->score;
    if (fb && hm && hm->cells > 0 && fb->score > 0.0)
      summary.eta_h = 100.0 * (fb->score - hm->score) / fb->score;
    if (fb && lm && lm->cells > 0 && fb->score > 0.0)
      summary.eta_l = 100.0 * (fb->score - lm->score) / fb->score;
    if (hm && hm->cells > 0) summary.t_h_ms = hm->latency_ms;
    if (lm && lm->cells > 0) summary.t_l_ms = lm->latency_ms;
    result.per_law[law_name(law)] = summary;
  }

  if (!spec.outdir.empty()) {
    nlohmann::json j;
    for (const CampaignRow& row : result.rows) {
      nlohmann::json r;
      r["law"] = law_name(row.law);
      r["mode"] = mode_name(row.mode);
      r["cells"] = row.cells;
      r["clamped_cells"] = row.clamped_cells;
      r["score"] = row.score;
      r["latency_ms"] = row.latency_ms;
      r["metrics"] = {{"rmse", row.metrics.rmse},   {"mae", row.metrics.mae},
                      {"p95", row.metrics.p95},     {"peak", row.metrics.peak},
                      {"settle", row.metrics.settle}, {"dedt_rms", row.metrics.dedt_rms},
                      {"settle_censored", row.metrics.settle_censored}};
      j["rows"].push_back(r);
    }
    for (const auto& [law, summary] : result.per_law) {
      nlohmann::json s;
      s["fb_score"] = summary.fb_score;
      if (summary.eta_h) s["eta_h_percent"] = *summary.eta_h;
      if (summary.eta_l) s["eta_l_percent"] = *summary.eta_l;
      if (summary.t_h_ms) s["t_h_ms"] = *summary.t_h_ms;
      if (summary.t_l_ms) s["t_l_ms"] = *summary.t_l_ms;
      j["per_law"][law] = s;
    }
    j["failures"] = result.failures;
    std::ofstream out(fs::path(spec.outdir) / "summary.json");
    out << j.dump(2) << '\n';

    std::ofstream table(fs::path(spec.outdir) / "table1.csv");
    table << "controller,fb_score,eta_h_percent,eta_l_percent,t_h_ms,t_l_ms\n";
    table << std::setprecision(6);
    for (FeedbackLaw law : spec.laws) {
      const CampaignResult::LawSummary& s = result.per_law[law_name(law)];
      table << law_name(law) << ',' << s.fb_score << ',';
      if (s.eta_h) table << *s.eta_h;
      table << ',';
      if (s.eta_l) table << *s.eta_l;
      table << ',';
      if (s.t_h_ms) table << *s.t_h_ms;
      table << ',';
      if (s.t_l_ms) table << *s.t_l_ms;
      table << '\n';
    }
  }
  return result;
}

}  // namespace armlab
