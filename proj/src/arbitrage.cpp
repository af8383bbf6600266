#include "dfp/arbitrage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "dfp/simplex.hpp"

namespace dfp {

namespace {

constexpr double kIntTol = 1e-9;    // complementarity threshold
constexpr double kPruneTol = 1e-9;  // absolute bound gap accepted as closed

// LP relaxation of the arbitrage problem with the binary indicators
// eliminated: for any (p_ch, p_dis) with p_ch + p_dis <= M there is a
// feasible fractional indicator pair, so the row p_ch_t + p_dis_t <= M is
// the exact projection of the big-M rows. Integrality of the original
// problem becomes per-hour complementarity p_ch_t * p_dis_t = 0, which is
// what the search branches on.
//
// Variables: x[t] = p_ch_t, x[T+t] = p_dis_t.
LpProblem build_relaxation(const PriceCurve& price, const EssParams& p) {
  const int t_n = p.t_periods;
  const double a_ch = p.eta_ch * p.delta_t;
  const double a_dis = p.delta_t / p.eta_dis;
  const double room_up = p.e_max - p.e_init;
  const double room_dn = p.e_init - p.e_min;

  LpProblem lp;
  lp.a = Mat::Zero(5 * t_n, 2 * t_n);
  lp.rhs.resize(5 * t_n);
  for (int t = 0; t < t_n; ++t) {
    // Stored energy stays within [e_min, e_max] after hour t.
    for (int s = 0; s <= t; ++s) {
      lp.a(t, s) = a_ch;
      lp.a(t, t_n + s) = -a_dis;
      lp.a(t_n + t, s) = -a_ch;
      lp.a(t_n + t, t_n + s) = a_dis;
    }
    lp.rhs[t] = room_up;
    lp.rhs[t_n + t] = room_dn;

    // Energy-coupled power bounds: the discharge (charge) of hour t alone
    // must fit within the energy available (headroom) at the start of the
    // hour. Redundant with the rows above at complementary points, kept as
    // stated.
    lp.a(2 * t_n + t, t_n + t) = a_dis;
    for (int s = 0; s < t; ++s) {
      lp.a(2 * t_n + t, s) = -a_ch;
      lp.a(2 * t_n + t, t_n + s) = a_dis;
    }
    lp.rhs[2 * t_n + t] = room_dn;

    lp.a(3 * t_n + t, t) = a_ch;
    for (int s = 0; s < t; ++s) {
      lp.a(3 * t_n + t, s) = a_ch;
      lp.a(3 * t_n + t, t_n + s) = -a_dis;
    }
    lp.rhs[3 * t_n + t] = room_up;

    // Projection of the big-M indicator rows.
    lp.a(4 * t_n + t, t) = 1.0;
    lp.a(4 * t_n + t, t_n + t) = 1.0;
    lp.rhs[4 * t_n + t] = p.big_m;
  }

  lp.c.resize(2 * t_n);
  lp.c.head(t_n) = -price * p.delta_t;
  lp.c.tail(t_n) = price * p.delta_t;
  lp.lower = Vec::Zero(2 * t_n);
  lp.upper.resize(2 * t_n);
  lp.upper.head(t_n).setConstant(p.p_ch_max);
  lp.upper.tail(t_n).setConstant(p.p_dis_max);
  return lp;
}

struct Node {
  double bound = 0.0;  // LP bound once solved, inherited parent bound before
  long id = 0;
  Vec upper;  // variable upper bounds encoding the branching decisions
  Vec x;      // LP solution at this node (once solved)
  bool alt_optima = false;
  bool solved = false;
  std::shared_ptr<const WarmState> seed;  // parent basis for a lazy solve
  WarmState state;
};

// Max-heap on bound, older nodes first among equals.
bool node_less(const Node& a, const Node& b) {
  if (a.bound != b.bound) return a.bound < b.bound;
  return a.id > b.id;
}

struct MilpResult {
  bool feasible = false;
  Vec x;
  double objective = 0.0;
  double root_bound = 0.0;
  long nodes = 0;
  bool tie_possible = false;
};

int most_fractional_hour(const Vec& x, int t_n) {
  int hour = -1;
  double best = kIntTol;
  for (int t = 0; t < t_n; ++t) {
    const double prod = x[t] * x[t_n + t];
    if (std::min(x[t], x[t_n + t]) > kIntTol && prod > best) {
      best = prod;
      hour = t;
    }
  }
  return hour;
}

// Branch-and-bound over per-hour complementarity. `base.c` and the bound
// vectors are whatever the caller needs (the lexicographic polish reuses
// this with a different objective and extra fixings). Child subproblems
// restart the simplex from the parent basis; only one variable bound
// changes between the two.
MilpResult branch_and_bound(const LpProblem& base, int t_n) {
  MilpResult res;
  LpProblem work = base;  // bounds mutate per node, rows never do
  long next_id = 0;

  auto has_alt_optima = [&](const LpSolution& sol) {
    for (int j = 0; j < sol.reduced_costs.size(); ++j)
      if (sol.var_status[j] != VarStatus::basic &&
          work.upper[j] - work.lower[j] > 0.0 &&
          std::abs(sol.reduced_costs[j]) <= 1e-11)
        return true;
    return false;
  };

  // Solves the relaxation at `node` (seeded by its own or its parent's
  // basis). Returns false when the subproblem is infeasible.
  auto solve_node = [&](Node& node, bool refine) -> bool {
    WarmState local = node.seed ? *node.seed : std::move(node.state);
    node.seed.reset();
    work.upper = node.upper;
    LpOptions o;
    o.refine = refine;
    o.warm = &local;
    const LpSolution sol = solve_lp(work, 1e-9, o);
    ++res.nodes;
    if (sol.status == LpStatus::infeasible) return false;
    if (sol.status != LpStatus::optimal)
      throw SolverError("LP subsolver failed (status " +
                            std::to_string(static_cast<int>(sol.status)) + ")",
                        res.nodes - 1);
    node.state = std::move(local);
    node.bound = sol.objective;
    node.x = sol.x;
    node.alt_optima = has_alt_optima(sol);
    node.solved = true;
    return true;
  };

  auto make_node = [&](Vec upper) {
    Node node;
    node.id = next_id++;
    node.upper = std::move(upper);
    return node;
  };

  struct Incumbent {
    double value = -std::numeric_limits<double>::infinity();
    Vec x;
    bool have = false;
    bool alt_optima = false;
  } inc;

  // Equal bounds only indicate a tie when the points actually differ; the
  // same vertex is routinely reached from more than one subtree.
  auto differs = [&](const Vec& x) {
    return !inc.have || (x - inc.x).cwiseAbs().maxCoeff() > 1e-9;
  };

  auto offer_incumbent = [&](const Node& node) {
    if (!inc.have || node.bound > inc.value + 1e-12) {
      if (inc.have && std::abs(node.bound - inc.value) <= kPruneTol &&
          differs(node.x))
        res.tie_possible = true;
      inc.value = node.bound;
      inc.x = node.x;
      inc.have = true;
      inc.alt_optima = node.alt_optima;
    } else if (std::abs(node.bound - inc.value) <= kPruneTol &&
               differs(node.x)) {
      res.tie_possible = true;
    }
  };

  // Refine pass at an incumbent candidate: one warm restart plus an LU of
  // the final basis, so the accepted value carries no tableau drift.
  auto refine_and_offer = [&](Node& node) {
    if (inc.have && node.bound <= inc.value - kPruneTol) return;
    if (solve_node(node, true)) offer_incumbent(node);
  };

  std::vector<Node> heap;
  {
    Node root = make_node(base.upper);
    if (!solve_node(root, true)) return res;  // infeasible relaxation
    res.root_bound = root.bound;

    const int hour = most_fractional_hour(root.x, t_n);
    if (hour >= 0) {
      // Rounding heuristic: keep the dominant side of every hour. The
      // result is complementary by construction, so it seeds the incumbent
      // and lets pruning start with the first pop.
      Vec fixed = root.upper;
      for (int t = 0; t < t_n; ++t) {
        if (root.x[t] >= root.x[t_n + t])
          fixed[t_n + t] = 0.0;
        else
          fixed[t] = 0.0;
      }
      Node guess = make_node(std::move(fixed));
      guess.seed = std::make_shared<const WarmState>(root.state);
      if (solve_node(guess, true)) offer_incumbent(guess);
      heap.push_back(std::move(root));
    } else {
      offer_incumbent(root);
    }
  }

  // Children are queued unsolved under their parent's bound (a valid upper
  // bound) and share the parent basis; the LP runs only when a node is
  // actually popped.
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), node_less);
    Node node = std::move(heap.back());
    heap.pop_back();

    if (inc.have && node.bound <= inc.value + kPruneTol) {
      // Everything left is no better. Settle the tie question for this one
      // node before stopping.
      if (node.bound >= inc.value - kPruneTol) {
        if (!node.solved) solve_node(node, false);
        if (node.solved && node.bound >= inc.value - kPruneTol &&
            differs(node.x))
          res.tie_possible = true;
      }
      break;
    }
    if (!node.solved) {
      if (!solve_node(node, false)) continue;
      if (inc.have && node.bound <= inc.value + kPruneTol) {
        if (node.bound >= inc.value - kPruneTol && differs(node.x))
          res.tie_possible = true;
        continue;
      }
    }

    const int hour = most_fractional_hour(node.x, t_n);
    if (hour < 0) {
      refine_and_offer(node);
      continue;
    }

    const auto shared = std::make_shared<const WarmState>(std::move(node.state));
    for (int side = 0; side < 2; ++side) {
      Node child = make_node(node.upper);
      child.upper[side == 0 ? t_n + hour : hour] = 0.0;  // charge side first
      child.bound = node.bound;
      child.seed = shared;
      heap.push_back(std::move(child));
      std::push_heap(heap.begin(), heap.end(), node_less);
    }
    if (res.nodes > 200000)
      throw SolverError("branch-and-bound node limit exceeded", res.nodes);
  }

  if (inc.have) {
    res.feasible = true;
    res.x = inc.x;
    res.objective = inc.value;
    res.tie_possible = res.tie_possible || inc.alt_optima;
  }
  return res;
}

// Sequentially minimizes each component of (p_ch, p_dis) over the optimal
// set, which pins the lexicographically smallest optimal schedule. Only runs
// when the main search flagged a plausible tie.
Vec lexicographic_polish(const LpProblem& base, int t_n, const Vec& start,
                         double z_star, long& nodes) {
  const int n = 2 * t_n;
  LpProblem lp = base;

  // Optimal-set membership; the slack is kept at arithmetic-noise scale so
  // the minimization cannot trade objective for smaller components.
  lp.a.conservativeResize(lp.a.rows() + 1, Eigen::NoChange);
  lp.a.row(lp.a.rows() - 1) = -base.c.transpose();
  lp.rhs.conservativeResize(lp.rhs.size() + 1);
  lp.rhs[lp.rhs.size() - 1] = -(z_star - 1e-12);

  Vec current = start;
  for (int k = 0; k < n; ++k) {
    if (current[k] > 1e-11) {
      lp.c = Vec::Zero(n);
      lp.c[k] = -1.0;  // minimize component k
      const MilpResult r = branch_and_bound(lp, t_n);
      nodes += r.nodes;
      if (!r.feasible) break;  // numerical dead end: keep what we have
      current = r.x;
    }
    const double v = std::max(0.0, current[k]);
    lp.lower[k] = std::max(0.0, v - 1e-11);
    lp.upper[k] = v + 1e-11;
  }
  return current;
}

Schedule schedule_from_powers(Vec x, const EssParams& p) {
  const int t_n = p.t_periods;
  for (int j = 0; j < 2 * t_n; ++j)
    if (x[j] < kIntTol) x[j] = 0.0;
  return make_schedule(x.head(t_n), x.tail(t_n), p);
}

void require_valid_inputs(const PriceCurve& price, const EssParams& p) {
  const auto violations = validate_ess_params(p);
  if (!violations.empty())
    throw std::invalid_argument("invalid storage parameters: " +
                                violations.front().field + " (" +
                                violations.front().message + ")");
  if (price.size() != p.t_periods)
    throw std::invalid_argument("price curve length != t_periods");
  if (!price.allFinite())
    throw std::invalid_argument("price curve has non-finite entries");
}

}  // namespace

double benefit_of(const Schedule& s, const PriceCurve& price,
                  const EssParams& p) {
  if (s.p_net.size() != price.size() || price.size() != p.t_periods)
    throw std::invalid_argument("benefit_of: length mismatch");
  return price.dot(s.p_net) * p.delta_t;
}

SolveOutcome solve_arbitrage(const PriceCurve& price, const EssParams& p,
                             const SolveOptions& opts) {
  require_valid_inputs(price, p);
  const int t_n = p.t_periods;
  const LpProblem base = build_relaxation(price, p);

  MilpResult main = branch_and_bound(base, t_n);
  if (!main.feasible) throw SolverError("arbitrage relaxation infeasible", 0);

  Vec x = main.x;
  long nodes = main.nodes;
  if (opts.lexicographic_ties && main.tie_possible)
    x = lexicographic_polish(base, t_n, x, main.objective, nodes);

  SolveOutcome out;
  out.schedule = schedule_from_powers(std::move(x), p);
  out.objective = benefit_of(out.schedule, price, p);
  out.lp_bound = main.root_bound;
  out.node_count = nodes;

  const auto violations = validate_schedule(out.schedule, p, 1e-7);
  if (!violations.empty())
    throw SolverError("solver produced an invalid schedule: " +
                          violations.front().message,
                      nodes);
  return out;
}

double optimal_benefit(const PriceCurve& price, const EssParams& p) {
  return solve_arbitrage(price, p).objective;
}

SolveOutcome brute_force_arbitrage(const PriceCurve& price, const EssParams& p,
                                   double grid_step) {
  require_valid_inputs(price, p);
  if (p.t_periods > 5)
    throw std::invalid_argument(
        "brute_force_arbitrage: refusing t_periods > 5");
  if (!(grid_step > 0.0))
    throw std::invalid_argument("brute_force_arbitrage: grid_step must be > 0");

  const int t_n = p.t_periods;
  const double a_ch = p.eta_ch * p.delta_t;
  const double a_dis = p.delta_t / p.eta_dis;
  const double feas_eps = 1e-12;

  // Per-hour action menu: idle, charge at grid multiples plus the cap,
  // discharge at grid multiples plus the cap. Charge entries are negative.
  std::vector<double> actions;
  actions.push_back(0.0);
  auto push_grid = [&](double cap, double sign) {
    for (int k = 1; k * grid_step < cap - feas_eps; ++k)
      actions.push_back(sign * k * grid_step);
    actions.push_back(sign * cap);
  };
  push_grid(p.p_ch_max, -1.0);
  push_grid(p.p_dis_max, +1.0);

  double best_obj = -std::numeric_limits<double>::infinity();
  Vec best_action(t_n);
  Vec action(t_n);
  long leaves = 0;

  // Final hour admits a closed-form choice: benefit is monotone in power at
  // fixed sign, so the best action is the largest feasible move in the
  // profitable direction (idle when the price is zero).
  auto best_last = [&](double energy) -> std::pair<double, double> {
    const double lambda = price[t_n - 1];
    if (lambda > 0.0) {
      const double cap = std::min(p.p_dis_max, (energy - p.e_min) / a_dis);
      if (cap <= 0.0) return {0.0, 0.0};
      double act = std::floor(cap / grid_step + feas_eps) * grid_step;
      if (p.p_dis_max <= cap + feas_eps) act = std::max(act, p.p_dis_max);
      return {lambda * act * p.delta_t, act};
    }
    if (lambda < 0.0) {
      const double cap = std::min(p.p_ch_max, (p.e_max - energy) / a_ch);
      if (cap <= 0.0) return {0.0, 0.0};
      double act = std::floor(cap / grid_step + feas_eps) * grid_step;
      if (p.p_ch_max <= cap + feas_eps) act = std::max(act, p.p_ch_max);
      return {-lambda * act * p.delta_t, -act};
    }
    return {0.0, 0.0};
  };

  auto dfs = [&](auto&& self, int t, double energy, double value) -> void {
    if (t == t_n - 1) {
      const auto [gain, act] = best_last(energy);
      ++leaves;
      if (value + gain > best_obj) {
        best_obj = value + gain;
        action[t] = act;
        best_action = action;
      }
      return;
    }
    for (double a : actions) {
      double e_next;
      if (a >= 0.0) {
        e_next = energy - a * a_dis;
        if (e_next < p.e_min - feas_eps) continue;
      } else {
        e_next = energy - a * a_ch;
        if (e_next > p.e_max + feas_eps) continue;
      }
      action[t] = a;
      self(self, t + 1, e_next, value + price[t] * a * p.delta_t);
    }
  };
  dfs(dfs, 0, p.e_init, 0.0);

  Vec p_ch = (-best_action).cwiseMax(0.0);
  Vec p_dis = best_action.cwiseMax(0.0);
  SolveOutcome out;
  out.schedule = make_schedule(p_ch, p_dis, p);
  out.objective = benefit_of(out.schedule, price, p);
  out.lp_bound = out.objective;  // no relaxation in the enumeration
  out.node_count = leaves;
  return out;
}

}  // namespace dfp
