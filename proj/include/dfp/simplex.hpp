#pragma once

#include <vector>

#include "dfp/core.hpp"

namespace dfp {

// Dense bounded-variable primal simplex, maximizing c'x subject to
// a*x <= rhs and lower <= x <= upper. Small instances only: the tableau is
// carried in full. Pivot selection is Dantzig pricing with a switch to
// Bland's rule after a degeneracy stall, so identical inputs take identical
// pivot sequences on every platform.

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

enum class VarStatus : unsigned char { basic, at_lower, at_upper };

struct LpProblem {
  Mat a;
  Vec rhs;
  Vec c;
  Vec lower;
  Vec upper;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Vec x;
  double objective = 0.0;
  Vec reduced_costs;                  // structural variables, at termination
  std::vector<VarStatus> var_status;  // structural variables
  long iterations = 0;
};

/// Snapshot of a solved basis. A subsequent solve over the same rows with
/// different bounds or objective can restart from it: bound changes shift
/// only basic values, which a bound-shift phase 1 repairs in a handful of
/// pivots.
struct WarmState {
  Mat tab;  // B^gen-1 [A I]
  Vec xb;
  std::vector<int> basic;
  std::vector<VarStatus> stat;  // all structural + slack variables
  bool valid = false;
};

struct LpOptions {
  bool refine = true;       // recompute basic values by LU at optimality
  WarmState* warm = nullptr;  // in: restart point if valid; out: final basis
};

LpSolution solve_lp(const LpProblem& lp, double feas_tol = 1e-9,
                    const LpOptions& opts = {});

}  // namespace dfp
