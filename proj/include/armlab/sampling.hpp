#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "armlab/types.hpp"

namespace armlab {

/// One temporal region of the episode with its approximation-difficulty
/// inputs. A_i is the region's share of the episode duration.
struct RegionSpec {
  double t_start = 0.0;
  double t_end = 0.0;
  double delta = 0.1;           ///< admissible error tolerance
  double l_times_delta = 0.0;   ///< Lipschitz constant times region diameter
  double eps_num = 0.01;        ///< numerical-stability constant
  double p = 1.0;               ///< difficulty shaping exponent
  double temporal_proportion = 0.0;  ///< A_i, set by build_regions

  double length() const { return t_end - t_start; }
  bool contains(double t) const { return t >= t_start && t < t_end; }
};

/// Difficulty coefficient gamma = (delta - L*Delta + eps)^(-p). Throws
/// std::domain_error when the margin is non-positive.
double difficulty(const RegionSpec& region);

/// Validates that the intervals partition [0, total_t] (in any order) and
/// fills per-region tolerances and temporal proportions.
std::vector<RegionSpec> build_regions(double total_t,
                                      const std::vector<std::array<double, 2>>& intervals,
                                      const std::vector<double>& deltas, double eps_num,
                                      double p, const std::vector<double>& l_times_delta);

/// The three-region split used throughout the experiments: a tight
/// post-disturbance window (2-3 s, delta 0.05), the start-up phase
/// (0-2 s, delta 0.15) and steady-state recovery (3-5 s, delta 0.30).
std::vector<RegionSpec> paper_regions();

/// Closed-form minimizer of sum_i rho_i / sqrt(w_i) over the simplex:
/// w_i = rho_i^(2/3) / sum_j rho_j^(2/3). Throws on non-positive rho.
Vec optimal_weights(const Vec& rhos);

/// Exhaustive grid search over the probability simplex (step in (0, 0.1],
/// at most 4 regions). Independent check of the closed form.
Vec brute_force_weights(const Vec& rhos, double grid_step);

/// Region index containing time t, or -1.
int region_of(const std::vector<RegionSpec>& regions, double t);

enum class PlanKind { kOptimal, kUniform };

struct SamplingPlan {
  Vec gamma;                 ///< per-region difficulty
  Vec rho;                   ///< gamma_i * A_i
  Vec weights;               ///< allocation weights, sum to 1
  std::vector<long> counts;  ///< per-region sample counts, sum to budget
  long budget = 0;
};

/// Rounded counts with largest-remainder correction so they sum to budget.
std::vector<long> allocate_counts(const Vec& weights, long budget);

/// kOptimal applies the closed-form weights; kUniform samples in proportion
/// to the regions' temporal shares.
SamplingPlan make_plan(const std::vector<RegionSpec>& regions, long budget, PlanKind kind);

/// Draws plan.counts[r] distinct indices from each region's pool (seeded,
/// deterministic). pool_by_region[r] lists candidate indices of region r.
/// Throws when a region's pool is too small.
std::vector<long> allocate_samples(const std::vector<std::vector<long>>& pool_by_region,
                                   const SamplingPlan& plan, std::uint64_t seed);

}  // namespace armlab
