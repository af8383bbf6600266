#pragma once

#include "dfp/core.hpp"

namespace dfp {

struct SolveOutcome {
  Schedule schedule;
  double objective = 0.0;  // realized benefit of `schedule` under the input price
  double lp_bound = 0.0;   // objective of the relaxation with binaries continuous
  long node_count = 0;
};

struct SolveOptions {
  /// When multiple optimal schedules exist, refine to the lexicographically
  /// smallest (p_ch, p_dis) vector. Detection is cheap; the refinement runs
  /// only when a tie is plausible.
  bool lexicographic_ties = true;
};

/// Benefit of operating `s` under `price`: sum_t price_t * p_net_t * delta_t.
double benefit_of(const Schedule& s, const PriceCurve& price,
                  const EssParams& p);

/// Exact solution of the storage arbitrage problem for an arbitrary (possibly
/// negative) price curve. Branch-and-bound over the LP relaxation, branching
/// on the hour with the largest simultaneous charge*discharge product,
/// best-bound node order. Absolute optimality gap at most 1e-7.
SolveOutcome solve_arbitrage(const PriceCurve& price, const EssParams& p,
                             const SolveOptions& opts = {});

double optimal_benefit(const PriceCurve& price, const EssParams& p);

/// Exhaustive grid search over per-hour actions
///   {charge at k*grid_step} + {charge at p_ch_max} + {idle}
///   + {discharge at k*grid_step} + {discharge at p_dis_max},
/// pruning energy-infeasible prefixes. Never charges and discharges in the
/// same hour by construction. Independent of the LP path; only defined for
/// t_periods <= 5.
SolveOutcome brute_force_arbitrage(const PriceCurve& price, const EssParams& p,
                                   double grid_step);

}  // namespace dfp
