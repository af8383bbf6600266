#pragma once

#include "dfp/arbitrage.hpp"
#include "dfp/core.hpp"

namespace dfp {

/// Sign convention of the surrogate max-term. `paper` evaluates the inner
/// maximization on the curve (true - 2*pred); `standard_spo` on
/// (2*pred - true). Both are convex upper bounds on regret paired with their
/// own Danskin subgradient; all acceptance checks run against `paper`.
enum class SurrogateConvention { paper, standard_spo };

/// Price space in which the squared-error term is computed.
enum class MseSpace { log_price, raw };

/// What the predictor's raw output means: log price (price = exp(output))
/// or the price itself.
enum class OutputSpace { log_price, identity };

struct LossConfig {
  double epsilon = 25.0;  // weight on the squared-error term
  SurrogateConvention convention = SurrogateConvention::paper;
  MseSpace mse_space = MseSpace::log_price;
  OutputSpace output_space = OutputSpace::log_price;
};

/// (1/T) * sum_t (pred_t - true_t)^2 / 2.
double mse(const Vec& pred, const Vec& truth);

/// Componentwise gradient of mse in pred: (1/T)(pred_t - true_t).
Vec mse_grad(const Vec& pred, const Vec& truth);

/// Benefit gap between acting on the true curve and acting on the predicted
/// one, both evaluated at the true price. Nonnegative up to solver tolerance.
double regret(const PriceCurve& pred, const PriceCurve& truth,
              const EssParams& p);
double regret(const PriceCurve& pred, const PriceCurve& truth,
              const EssParams& p, const SolveOutcome& truth_solve);

/// Convex upper bound on regret; two arbitrage solves per evaluation.
/// Not zero at pred == truth in general under the `paper` convention.
double surrogate_regret(const PriceCurve& pred, const PriceCurve& truth,
                        const EssParams& p,
                        SurrogateConvention convention = SurrogateConvention::paper);
double surrogate_regret(const PriceCurve& pred, const PriceCurve& truth,
                        const EssParams& p, const SolveOutcome& truth_solve,
                        SurrogateConvention convention = SurrogateConvention::paper);

/// Subgradient of surrogate_regret in the predicted price:
/// -2 (P*(truth) + P*(truth - 2 pred)) * delta_t under the `paper`
/// convention, +2 (P*(2 pred - truth) - P*(truth)) * delta_t under
/// `standard_spo`.
Vec surrogate_regret_grad(const PriceCurve& pred, const PriceCurve& truth,
                          const EssParams& p,
                          SurrogateConvention convention = SurrogateConvention::paper);
Vec surrogate_regret_grad(const PriceCurve& pred, const PriceCurve& truth,
                          const EssParams& p, const SolveOutcome& truth_solve,
                          SurrogateConvention convention = SurrogateConvention::paper);

/// surrogate_regret + epsilon * mse, with the squared error computed in
/// cfg.mse_space (log curves are the natural logs of the price curves).
double hybrid_loss(const PriceCurve& pred, const PriceCurve& truth,
                   const EssParams& p, const LossConfig& cfg);
double hybrid_loss(const PriceCurve& pred, const PriceCurve& truth,
                   const EssParams& p, const LossConfig& cfg,
                   const SolveOutcome& truth_solve);

/// Gradient of hybrid_loss with respect to the predictor's raw output. With
/// cfg.output_space == log_price the predictor emits y with price = exp(y),
/// so the regret term is chained through the exponential (multiplied
/// componentwise by the price) and the squared-error term differentiates in
/// whichever space cfg.mse_space selects.
Vec hybrid_grad(const PriceCurve& pred, const PriceCurve& truth,
                const EssParams& p, const LossConfig& cfg);
Vec hybrid_grad(const PriceCurve& pred, const PriceCurve& truth,
                const EssParams& p, const LossConfig& cfg,
                const SolveOutcome& truth_solve);

/// Everything the training loop needs from one prediction, with a single
/// embedded arbitrage solve. The gradients are in output space and carry no
/// epsilon weighting; hybrid_grad = epsilon * error_grad + surrogate_grad.
struct HybridEval {
  double surrogate = 0.0;
  double error = 0.0;  // squared-error term in cfg.mse_space
  double loss = 0.0;   // surrogate + epsilon * error
  Vec surrogate_grad;
  Vec error_grad;
};
HybridEval hybrid_eval(const PriceCurve& pred, const PriceCurve& truth,
                       const EssParams& p, const LossConfig& cfg,
                       const SolveOutcome& truth_solve);

}  // namespace dfp
