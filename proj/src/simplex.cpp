#include "dfp/simplex.hpp"

#include <cmath>
#include <limits>

namespace dfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRcTol = 1e-9;    // reduced-cost threshold for entering
constexpr double kPivTol = 1e-10;  // smallest column entry used in ratios
constexpr double kTieTol = 1e-12;

struct Tableau {
  const Mat& a;
  const Vec& rhs;
  int m, n, total;

  Mat tab;     // m x total, current B^-1 [A I]
  Vec xb;      // basic values
  Vec zrow;    // reduced costs under the active cost vector
  Vec cost;    // active cost vector (phase dependent)
  Vec lb, ub;  // bounds, slacks included
  std::vector<int> basic;
  std::vector<VarStatus> stat;
  long iterations = 0;

  Tableau(const LpProblem& lp, WarmState* warm)
      : a(lp.a),
        rhs(lp.rhs),
        m(static_cast<int>(lp.a.rows())),
        n(static_cast<int>(lp.a.cols())),
        total(m + n) {
    lb.resize(total);
    ub.resize(total);
    lb.head(n) = lp.lower;
    ub.head(n) = lp.upper;
    lb.tail(m).setZero();
    ub.tail(m).setConstant(kInf);
    cost = Vec::Zero(total);
    zrow = Vec::Zero(total);

    if (warm && warm->valid && static_cast<int>(warm->stat.size()) == total) {
      tab = warm->tab;
      basic = warm->basic;
      stat = warm->stat;
      // Nonbasic variables sit on the (possibly new) bounds; recompute the
      // basic values through the inherited inverse, which occupies the slack
      // columns of the tableau.
      xb.noalias() = tab.rightCols(m) * rhs;
      for (int j = 0; j < total; ++j) {
        if (stat[j] == VarStatus::basic) continue;
        const double v = nonbasic_value(j);
        if (v != 0.0) xb.noalias() -= tab.col(j) * v;
      }
    } else {
      tab.resize(m, total);
      tab.leftCols(n) = a;
      tab.rightCols(m) = Mat::Identity(m, m);
      stat.assign(total, VarStatus::at_lower);
      basic.resize(m);
      for (int i = 0; i < m; ++i) {
        basic[i] = n + i;
        stat[n + i] = VarStatus::basic;
      }
      xb = rhs - a * lp.lower;
    }
  }

  double nonbasic_value(int j) const {
    return stat[j] == VarStatus::at_upper ? ub[j] : lb[j];
  }

  double value_of(int j) const {
    if (stat[j] != VarStatus::basic) return nonbasic_value(j);
    for (int i = 0; i < m; ++i)
      if (basic[i] == j) return xb[i];
    return 0.0;
  }

  void refresh_zrow() {
    Vec cb(m);
    for (int i = 0; i < m; ++i) cb[i] = cost[basic[i]];
    zrow = cost - tab.transpose() * cb;
    for (int i = 0; i < m; ++i) zrow[basic[i]] = 0.0;
  }

  // One run of the pivot loop under the active cost vector.
  LpStatus iterate(long max_iters) {
    long stalled = 0;
    bool bland = false;
    for (; iterations < max_iters; ++iterations) {
      int enter = -1;
      double best_score = kRcTol;
      for (int j = 0; j < total; ++j) {
        if (stat[j] == VarStatus::basic || ub[j] - lb[j] <= 0.0) continue;
        const double rc = zrow[j];
        double score = 0.0;
        if (stat[j] == VarStatus::at_lower && rc > kRcTol)
          score = rc;
        else if (stat[j] == VarStatus::at_upper && rc < -kRcTol)
          score = -rc;
        else
          continue;
        if (bland) {
          enter = j;
          break;
        }
        if (score > best_score) {
          best_score = score;
          enter = j;
        }
      }
      if (enter < 0) return LpStatus::optimal;

      const double dir = stat[enter] == VarStatus::at_lower ? 1.0 : -1.0;
      const Vec colv = tab.col(enter);

      double theta = ub[enter] - lb[enter];  // bound-flip distance
      int leave_row = -1;
      VarStatus leave_to = VarStatus::at_lower;
      double leave_piv = 0.0;
      for (int i = 0; i < m; ++i) {
        const double d = dir * colv[i];
        double lim;
        VarStatus to;
        if (d > kPivTol) {
          if (lb[basic[i]] == -kInf) continue;
          lim = (xb[i] - lb[basic[i]]) / d;
          to = VarStatus::at_lower;
        } else if (d < -kPivTol) {
          if (ub[basic[i]] == kInf) continue;
          lim = (ub[basic[i]] - xb[i]) / (-d);
          to = VarStatus::at_upper;
        } else {
          continue;
        }
        if (lim < 0.0) lim = 0.0;  // drifted basics pivot degenerately
        bool take = false;
        if (lim < theta - kTieTol) {
          take = true;
        } else if (lim < theta + kTieTol && leave_row >= 0) {
          // Tie: Bland keeps the smallest variable index; otherwise prefer
          // the larger pivot magnitude, then the smaller row index.
          if (bland)
            take = basic[i] < basic[leave_row];
          else
            take = std::abs(colv[i]) > std::abs(leave_piv) + kTieTol;
        } else if (lim < theta && leave_row < 0) {
          take = true;
        }
        if (take) {
          theta = lim;
          leave_row = i;
          leave_to = to;
          leave_piv = colv[i];
        }
      }

      if (theta == kInf) return LpStatus::unbounded;
      if (theta < 0.0) theta = 0.0;

      if (theta <= kTieTol) {
        if (++stalled > 2 * (total + m) && !bland) bland = true;
      } else {
        stalled = 0;
      }

      if (leave_row < 0) {
        stat[enter] = dir > 0 ? VarStatus::at_upper : VarStatus::at_lower;
        xb -= (theta * dir) * colv;
        continue;
      }

      const int leave = basic[leave_row];
      const double enter_val = (dir > 0 ? lb[enter] : ub[enter]) + dir * theta;
      for (int i = 0; i < m; ++i)
        if (i != leave_row) xb[i] -= theta * dir * colv[i];
      xb[leave_row] = enter_val;

      const double piv = tab(leave_row, enter);
      const Vec prow = tab.row(leave_row) / piv;
      Vec colz = colv;
      colz[leave_row] = 0.0;
      tab.noalias() -= colz * prow.transpose();
      tab.row(leave_row) = prow;
      const double rc_enter = zrow[enter];
      zrow.noalias() -= rc_enter * prow;
      zrow[enter] = 0.0;

      stat[leave] = leave_to;
      stat[enter] = VarStatus::basic;
      basic[leave_row] = enter;
    }
    return LpStatus::iteration_limit;
  }

  // Feasibility restoration by bound shifting: every basic variable outside
  // its bounds gets a temporary bound at its current value and a unit cost
  // pushing it back; the model is feasible iff all of them make it home.
  LpStatus restore_feasibility(double feas_tol, long max_iters) {
    struct Shift {
      int var;
      double lo, hi;
    };
    std::vector<Shift> shifts;
    cost.setZero();
    for (int i = 0; i < m; ++i) {
      const int v = basic[i];
      if (xb[i] < lb[v] - feas_tol) {
        shifts.push_back({v, lb[v], ub[v]});
        ub[v] = lb[v];  // target
        lb[v] = xb[i];
        cost[v] = 1.0;
      } else if (xb[i] > ub[v] + feas_tol) {
        shifts.push_back({v, lb[v], ub[v]});
        lb[v] = ub[v];  // target
        ub[v] = xb[i];
        cost[v] = -1.0;
      }
    }
    if (shifts.empty()) return LpStatus::optimal;
    refresh_zrow();
    const LpStatus st = iterate(max_iters);
    if (st != LpStatus::optimal) return st;

    bool feasible = true;
    for (const Shift& s : shifts) {
      const double v = value_of(s.var);
      if (v < s.lo - feas_tol || v > s.hi + feas_tol) feasible = false;
      lb[s.var] = s.lo;
      ub[s.var] = s.hi;
      if (stat[s.var] != VarStatus::basic) {
        const double dl = std::abs(v - s.lo);
        const double dh = std::abs(v - s.hi);
        stat[s.var] = dl <= dh ? VarStatus::at_lower : VarStatus::at_upper;
      }
    }
    return feasible ? LpStatus::optimal : LpStatus::infeasible;
  }

  // Recomputes basic values from the basis by LU, clearing the drift a long
  // pivot sequence leaves in the tableau.
  void refine() {
    Mat b(m, m);
    Vec shifted = rhs;
    for (int j = 0; j < total; ++j) {
      if (stat[j] == VarStatus::basic) continue;
      const double v = nonbasic_value(j);
      if (v == 0.0) continue;
      if (j < n)
        shifted -= a.col(j) * v;
      else
        shifted[j - n] -= v;
    }
    for (int i = 0; i < m; ++i) {
      const int k = basic[i];
      if (k < n)
        b.col(i) = a.col(k);
      else
        b.col(i) = Vec::Unit(m, k - n);
    }
    Eigen::PartialPivLU<Mat> lu(b);
    const Vec solved = lu.solve(shifted);
    if ((b * solved - shifted).cwiseAbs().maxCoeff() < 1e-6) xb = solved;
  }

  Vec structural_x() const {
    Vec x(n);
    for (int j = 0; j < n; ++j) x[j] = nonbasic_value(j);
    for (int i = 0; i < m; ++i)
      if (basic[i] < n) x[basic[i]] = xb[i];
    return x;
  }
};

}  // namespace

LpSolution solve_lp(const LpProblem& lp, double feas_tol,
                    const LpOptions& opts) {
  Tableau t(lp, opts.warm);
  const long max_iters = 200L * (t.total + t.m) + 10000;
  LpSolution out;

  {
    const LpStatus st = t.restore_feasibility(feas_tol, max_iters);
    if (st != LpStatus::optimal) {
      out.status = st == LpStatus::unbounded ? LpStatus::iteration_limit : st;
      out.iterations = t.iterations;
      return out;
    }
  }

  t.cost.setZero();
  t.cost.head(t.n) = lp.c;
  t.refresh_zrow();
  const LpStatus st = t.iterate(max_iters);
  out.status = st;
  out.iterations = t.iterations;
  if (st != LpStatus::optimal) return out;

  if (opts.refine) t.refine();
  out.x = t.structural_x();
  out.objective = lp.c.dot(out.x);
  out.reduced_costs = t.zrow.head(t.n);
  out.var_status.assign(t.stat.begin(), t.stat.begin() + t.n);

  if (opts.warm) {
    opts.warm->tab = std::move(t.tab);
    opts.warm->xb = std::move(t.xb);
    opts.warm->basic = std::move(t.basic);
    opts.warm->stat = std::move(t.stat);
    opts.warm->valid = true;
  }
  return out;
}

}  // namespace dfp
