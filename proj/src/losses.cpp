#include "dfp/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace dfp {

namespace {

void check_lengths(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("loss inputs: length mismatch");
}

Vec log_curve(const PriceCurve& c, const char* which) {
  if ((c.array() <= 0.0).any())
    throw std::invalid_argument(std::string("log-space loss needs positive ") +
                                which + " prices");
  return c.array().log();
}

}  // namespace

double mse(const Vec& pred, const Vec& truth) {
  check_lengths(pred, truth);
  const double t = static_cast<double>(pred.size());
  return (pred - truth).squaredNorm() / (2.0 * t);
}

Vec mse_grad(const Vec& pred, const Vec& truth) {
  check_lengths(pred, truth);
  return (pred - truth) / static_cast<double>(pred.size());
}

double regret(const PriceCurve& pred, const PriceCurve& truth,
              const EssParams& p) {
  return regret(pred, truth, p, solve_arbitrage(truth, p));
}

double regret(const PriceCurve& pred, const PriceCurve& truth,
              const EssParams& p, const SolveOutcome& truth_solve) {
  check_lengths(pred, truth);
  const SolveOutcome actual = solve_arbitrage(pred, p);
  return truth_solve.objective - benefit_of(actual.schedule, truth, p);
}

double surrogate_regret(const PriceCurve& pred, const PriceCurve& truth,
                        const EssParams& p, SurrogateConvention convention) {
  return surrogate_regret(pred, truth, p, solve_arbitrage(truth, p),
                          convention);
}

double surrogate_regret(const PriceCurve& pred, const PriceCurve& truth,
                        const EssParams& p, const SolveOutcome& truth_solve,
                        SurrogateConvention convention) {
  check_lengths(pred, truth);
  const PriceCurve inner_curve = convention == SurrogateConvention::paper
                                     ? PriceCurve(truth - 2.0 * pred)
                                     : PriceCurve(2.0 * pred - truth);
  const double max_term = optimal_benefit(inner_curve, p);
  const double cross = 2.0 * pred.dot(truth_solve.schedule.p_net) * p.delta_t;
  return max_term - cross + truth_solve.objective;
}

Vec surrogate_regret_grad(const PriceCurve& pred, const PriceCurve& truth,
                          const EssParams& p, SurrogateConvention convention) {
  return surrogate_regret_grad(pred, truth, p, solve_arbitrage(truth, p),
                               convention);
}

Vec surrogate_regret_grad(const PriceCurve& pred, const PriceCurve& truth,
                          const EssParams& p, const SolveOutcome& truth_solve,
                          SurrogateConvention convention) {
  check_lengths(pred, truth);
  if (convention == SurrogateConvention::paper) {
    const SolveOutcome adv = solve_arbitrage(truth - 2.0 * pred, p);
    return -2.0 * p.delta_t * (truth_solve.schedule.p_net + adv.schedule.p_net);
  }
  const SolveOutcome adv = solve_arbitrage(2.0 * pred - truth, p);
  return 2.0 * p.delta_t * (adv.schedule.p_net - truth_solve.schedule.p_net);
}

double hybrid_loss(const PriceCurve& pred, const PriceCurve& truth,
                   const EssParams& p, const LossConfig& cfg) {
  return hybrid_loss(pred, truth, p, cfg, solve_arbitrage(truth, p));
}

double hybrid_loss(const PriceCurve& pred, const PriceCurve& truth,
                   const EssParams& p, const LossConfig& cfg,
                   const SolveOutcome& truth_solve) {
  return hybrid_eval(pred, truth, p, cfg, truth_solve).loss;
}

Vec hybrid_grad(const PriceCurve& pred, const PriceCurve& truth,
                const EssParams& p, const LossConfig& cfg) {
  return hybrid_grad(pred, truth, p, cfg, solve_arbitrage(truth, p));
}

Vec hybrid_grad(const PriceCurve& pred, const PriceCurve& truth,
                const EssParams& p, const LossConfig& cfg,
                const SolveOutcome& truth_solve) {
  const HybridEval ev = hybrid_eval(pred, truth, p, cfg, truth_solve);
  return cfg.epsilon * ev.error_grad + ev.surrogate_grad;
}

HybridEval hybrid_eval(const PriceCurve& pred, const PriceCurve& truth,
                       const EssParams& p, const LossConfig& cfg,
                       const SolveOutcome& truth_solve) {
  check_lengths(pred, truth);
  const bool log_out = cfg.output_space == OutputSpace::log_price;
  HybridEval ev;

  // Squared-error term and its gradient w.r.t. the raw predictor output.
  if (cfg.mse_space == MseSpace::log_price) {
    const Vec lp = log_curve(pred, "predicted");
    const Vec lt = log_curve(truth, "true");
    ev.error = mse(lp, lt);
    const Vec g = mse_grad(lp, lt);
    // d log(price)/d output is 1 for a log-space output, 1/price otherwise.
    ev.error_grad = log_out ? g : Vec(g.array() / pred.array());
  } else {
    ev.error = mse(pred, truth);
    const Vec g = mse_grad(pred, truth);
    ev.error_grad = log_out ? Vec(g.array() * pred.array()) : g;
  }

  // Surrogate term: a single solve on the convention's inner curve serves
  // both the value and the Danskin subgradient.
  const bool paper = cfg.convention == SurrogateConvention::paper;
  const PriceCurve inner_curve =
      paper ? PriceCurve(truth - 2.0 * pred) : PriceCurve(2.0 * pred - truth);
  const SolveOutcome adv = solve_arbitrage(inner_curve, p);
  const double cross = 2.0 * pred.dot(truth_solve.schedule.p_net) * p.delta_t;
  ev.surrogate = adv.objective - cross + truth_solve.objective;
  if (paper)
    ev.surrogate_grad = -2.0 * p.delta_t *
                        (truth_solve.schedule.p_net + adv.schedule.p_net);
  else
    ev.surrogate_grad =
        2.0 * p.delta_t * (adv.schedule.p_net - truth_solve.schedule.p_net);
  if (log_out) ev.surrogate_grad.array() *= pred.array();  // chain through exp

  ev.loss = ev.surrogate + cfg.epsilon * ev.error;
  return ev;
}

}  // namespace dfp
