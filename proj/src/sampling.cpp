#include "armlab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace armlab {

double difficulty(const RegionSpec& region) {
  const double margin = region.delta - region.l_times_delta + region.eps_num;
  if (margin <= 0.0)
    throw std::domain_error("difficulty: delta - L*Delta + eps must be positive");
  return std::pow(margin, -region.p);
}

std::vector<RegionSpec> build_regions(double total_t,
                                      const std::vector<std::array<double, 2>>& intervals,
                                      const std::vector<double>& deltas, double eps_num,
                                      double p, const std::vector<double>& l_times_delta) {
  const size_t k = intervals.size();
  if (k == 0) throw std::invalid_argument("build_regions: need at least one interval");
  if (deltas.size() != k || l_times_delta.size() != k)
    throw std::invalid_argument("build_regions: per-region parameter count mismatch");
  if (total_t <= 0.0) throw std::invalid_argument("build_regions: total duration must be > 0");

  // The given order is kept for indexing; a sorted copy checks the partition.
  std::vector<std::array<double, 2>> sorted = intervals;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  constexpr double tol = 1e-9;
  double cursor = 0.0;
  for (const auto& iv : sorted) {
    if (iv[1] <= iv[0]) throw std::invalid_argument("build_regions: empty or reversed interval");
    if (std::abs(iv[0] - cursor) > tol)
      throw std::invalid_argument(iv[0] > cursor + tol ? "build_regions: gap between intervals"
                                                       : "build_regions: overlapping intervals");
    cursor = iv[1];
  }
  if (std::abs(cursor - total_t) > tol)
    throw std::invalid_argument("build_regions: intervals do not cover the episode");

  std::vector<RegionSpec> regions(k);
  for (size_t i = 0; i < k; ++i) {
    regions[i].t_start = intervals[i][0];
    regions[i].t_end = intervals[i][1];
    regions[i].delta = deltas[i];
    regions[i].l_times_delta = l_times_delta[i];
    regions[i].eps_num = eps_num;
    regions[i].p = p;
    regions[i].temporal_proportion = regions[i].length() / total_t;
    difficulty(regions[i]);  // validates the margin
  }
  return regions;
}

std::vector<RegionSpec> paper_regions() {
  return build_regions(5.0, {{{2.0, 3.0}}, {{0.0, 2.0}}, {{3.0, 5.0}}}, {0.05, 0.15, 0.30},
                       0.01, 1.0, {0.0, 0.0, 0.0});
}

Vec optimal_weights(const Vec& rhos) {
  if (rhos.size() == 0) throw std::invalid_argument("optimal_weights: empty rho");
  if ((rhos.array() <= 0.0).any())
    throw std::invalid_argument("optimal_weights: rho entries must be positive");
  const Vec powered = rhos.array().pow(2.0 / 3.0);
  return powered / powered.sum();
}

Vec brute_force_weights(const Vec& rhos, double grid_step) {
  const int k = static_cast<int>(rhos.size());
  if (k < 1 || k > 4) throw std::invalid_argument("brute_force_weights: 1 <= K <= 4");
  if (grid_step <= 0.0 || grid_step > 0.1)
    throw std::invalid_argument("brute_force_weights: grid_step must be in (0, 0.1]");
  if ((rhos.array() <= 0.0).any())
    throw std::invalid_argument("brute_force_weights: rho entries must be positive");
  if (k == 1) return Vec::Ones(1);

  const int m = static_cast<int>(std::lround(1.0 / grid_step));
  const auto objective = [&](const Vec& w) {
    return (rhos.array() / w.array().sqrt()).sum();
  };

  Vec best = Vec::Constant(k, 1.0 / k);
  double best_f = std::numeric_limits<double>::infinity();
  Vec w(k);
  // Integer compositions n_1 + ... + n_k = m with n_i >= 1.
  std::vector<int> n(k, 1);
  const std::function<void(int, int)> enumerate = [&](int index, int remaining) {
    if (index == k - 1) {
      n[index] = remaining;
      for (int i = 0; i < k; ++i) w[i] = static_cast<double>(n[i]) / m;
      const double f = objective(w);
      if (f < best_f) {
        best_f = f;
        best = w;
      }
      return;
    }
    for (int v = 1; v <= remaining - (k - 1 - index); ++v) {
      n[index] = v;
      enumerate(index + 1, remaining - v);
    }
  };
  enumerate(0, m);
  return best;
}

int region_of(const std::vector<RegionSpec>& regions, double t) {
  double episode_end = 0.0;
  for (const RegionSpec& r : regions) episode_end = std::max(episode_end, r.t_end);
  for (size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].contains(t)) return static_cast<int>(i);
    // The episode's final instant belongs to the last interval.
    if (t == episode_end && regions[i].t_end == episode_end) return static_cast<int>(i);
  }
  return -1;
}

std::vector<long> allocate_counts(const Vec& weights, long budget) {
  const int k = static_cast<int>(weights.size());
  if (k == 0) throw std::invalid_argument("allocate_counts: empty weights");
  if (budget < 0) throw std::invalid_argument("allocate_counts: negative budget");
  std::vector<long> counts(k);
  long total = 0;
  for (int i = 0; i < k; ++i) {
    counts[i] = std::lround(weights[i] * static_cast<double>(budget));
    total += counts[i];
  }
  // Largest-remainder correction toward the exact budget.
  while (total != budget) {
    const int direction = total < budget ? 1 : -1;
    int pick = -1;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      if (direction < 0 && counts[i] == 0) continue;
      const double gain = direction * (weights[i] * budget - counts[i]);
      if (gain > best_gain) {
        best_gain = gain;
        pick = i;
      }
    }
    counts[pick] += direction;
    total += direction;
  }
  return counts;
}

SamplingPlan make_plan(const std::vector<RegionSpec>& regions, long budget, PlanKind kind) {
  const int k = static_cast<int>(regions.size());
  SamplingPlan plan;
  plan.budget = budget;
  plan.gamma.resize(k);
  plan.rho.resize(k);
  Vec proportions(k);
  for (int i = 0; i < k; ++i) {
    plan.gamma[i] = difficulty(regions[i]);
    proportions[i] = regions[i].temporal_proportion;
    plan.rho[i] = plan.gamma[i] * proportions[i];
  }
  plan.weights = (kind == PlanKind::kOptimal) ? optimal_weights(plan.rho)
                                              : Vec(proportions / proportions.sum());
  plan.counts = allocate_counts(plan.weights, budget);
  return plan;
}

std::vector<long> allocate_samples(const std::vector<std::vector<long>>& pool_by_region,
                                   const SamplingPlan& plan, std::uint64_t seed) {
  if (pool_by_region.size() != plan.counts.size())
    throw std::invalid_argument("allocate_samples: region count mismatch");
  std::mt19937_64 rng(seed);
  std::vector<long> picked;
  picked.reserve(plan.budget);
  for (size_t r = 0; r < pool_by_region.size(); ++r) {
    const long want = plan.counts[r];
    const std::vector<long>& pool = pool_by_region[r];
    if (want > static_cast<long>(pool.size()))
      throw std::runtime_error("allocate_samples: region " + std::to_string(r) + " pool has " +
                               std::to_string(pool.size()) + " states, needs " +
                               std::to_string(want));
    std::vector<long> shuffled = pool;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    picked.insert(picked.end(), shuffled.begin(), shuffled.begin() + want);
  }
  return picked;
}

}  // namespace armlab
