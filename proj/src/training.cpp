#include "dfp/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dfp/arbitrage.hpp"
#include "dfp/json_io.hpp"
#include "dfp/rng.hpp"

namespace dfp {

SplitResult split_dataset(const std::vector<DaySample>& days,
                          std::uint64_t seed) {
  const std::size_t n = days.size();
  if (n < 5) throw DataError("split_dataset: need at least 5 days");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x5417));
  shuffle(order, rng);

  const std::size_t n_test = std::max<std::size_t>(1, n / 5);
  const std::size_t rest = n - n_test;
  const std::size_t n_val = std::max<std::size_t>(1, rest / 5);

  std::vector<std::size_t> test_idx(order.begin(), order.begin() + n_test);
  std::vector<std::size_t> val_idx(order.begin() + n_test,
                                   order.begin() + n_test + n_val);
  std::vector<std::size_t> train_idx(order.begin() + n_test + n_val,
                                     order.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  SplitResult out;
  for (auto i : train_idx) out.train.push_back(days[i]);
  for (auto i : val_idx) out.validation.push_back(days[i]);
  for (auto i : test_idx) out.test.push_back(days[i]);
  return out;
}

void adam_step(Vec& params, AdamState& state, const Vec& grads, double lr,
               double beta1, double beta2, double eps) {
  if (params.size() != grads.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  if (state.step == 0) {
    state.m = Vec::Zero(params.size());
    state.v = Vec::Zero(params.size());
  }
  if (state.m.size() != params.size())
    throw std::invalid_argument("adam_step: state shape mismatch");
  ++state.step;
  state.m = beta1 * state.m + (1.0 - beta1) * grads;
  state.v = beta2 * state.v + (1.0 - beta2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  const Vec m_hat = state.m / bc1;
  const Vec v_hat = state.v / bc2;
  params.array() -= lr * m_hat.array() / (v_hat.array().sqrt() + eps);
}

std::string history_csv(const TrainHistory& h) {
  std::string out =
      "epoch,train_mse,train_sreg,val_mse,val_regret,test_mse,test_regret\n";
  for (const auto& r : h.epochs) {
    out += std::to_string(r.epoch);
    for (double v : {r.train_mse, r.train_sreg, r.val_mse, r.val_regret,
                     r.test_mse, r.test_regret}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

void write_history_csv(const TrainHistory& h, const std::string& path) {
  write_text_file(path, history_csv(h));
}

namespace {

struct PreparedDay {
  Vec features;  // standardized
  SolveOutcome oracle;
};

std::vector<PreparedDay> prepare(const std::vector<DaySample>& days,
                                 const PredictorParams& params,
                                 const EssParams& ess) {
  std::vector<PreparedDay> out;
  out.reserve(days.size());
  for (const auto& d : days) {
    PreparedDay p;
    p.features = params.standardizer.apply(d.features);
    try {
      p.oracle = solve_arbitrage(d.price, ess);
    } catch (const SolverError& e) {
      throw SolverError(std::string("oracle solve failed on day ") +
                            to_string(d.date) + ": " + e.what(),
                        e.node_id);
    }
    out.push_back(std::move(p));
  }
  return out;
}

PriceCurve to_price(const Vec& output, OutputSpace space) {
  return space == OutputSpace::log_price ? PriceCurve(output.array().exp())
                                         : PriceCurve(output);
}

// Squared-error value in the configured space, from an output-space
// prediction and the day's targets.
double error_term(const Vec& output, const DaySample& day,
                  const LossConfig& cfg) {
  const PriceCurve pred = to_price(output, cfg.output_space);
  if (cfg.mse_space == MseSpace::log_price)
    return mse(Vec(pred.array().log()), day.log_price);
  return mse(pred, day.price);
}

void zero_frozen_skips(PredictorGrads& g) {
  for (std::size_t l = 1; l < g.layers.size(); ++l)
    g.layers[l].theta_x.setZero();
}

struct EvalMetrics {
  double mse_mean = 0.0;
  double regret_mean = 0.0;
  double sreg_mean = 0.0;
};

EvalMetrics eval_split(const std::vector<DaySample>& days,
                       const std::vector<PreparedDay>& prep,
                       const PredictorParams& params, const TrainConfig& cfg,
                       const EssParams& ess, bool want_sreg) {
  EvalMetrics m;
  if (days.empty()) return m;
  for (std::size_t i = 0; i < days.size(); ++i) {
    const Vec out = forward(params, prep[i].features, RunMode::eval).output;
    m.mse_mean += error_term(out, days[i], cfg.loss);
    const PriceCurve pred = to_price(out, cfg.loss.output_space);
    const SolveOutcome dec = solve_arbitrage(pred, ess);
    m.regret_mean +=
        prep[i].oracle.objective - benefit_of(dec.schedule, days[i].price, ess);
    if (want_sreg)
      m.sreg_mean +=
          surrogate_regret(pred, days[i].price, ess, prep[i].oracle,
                           cfg.loss.convention);
  }
  const double n = static_cast<double>(days.size());
  m.mse_mean /= n;
  m.regret_mean /= n;
  m.sreg_mean /= n;
  return m;
}

}  // namespace

TrainResult train_model(const SplitResult& data, const PredictorParams& init,
                        const TrainConfig& cfg, const EssParams& ess) {
  if (data.train.empty()) throw DataError("train_model: empty training split");
  if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0))
    throw std::invalid_argument("train_model: bad epochs/batch/learning_rate");

  PredictorParams params = init;
  const auto train_prep = prepare(data.train, params, ess);
  const auto val_prep = prepare(data.validation, params, ess);
  const auto test_prep = prepare(data.test, params, ess);

  Vec theta = flatten_params(params);
  AdamState adam;
  Rng shuffle_rng(mix_seed(cfg.seed, 0xB00B));

  const bool use_err = cfg.mode != TrainMode::regret_only;
  const bool use_reg = cfg.mode != TrainMode::mse_only;
  const double err_weight =
      cfg.mode == TrainMode::hybrid ? cfg.loss.epsilon : 1.0;

  TrainResult res;
  res.params = params;
  double best_metric = std::numeric_limits<double>::infinity();
  int wait = 0;

  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, shuffle_rng);
    double run_mse = 0.0, run_sreg = 0.0;
    long updates = 0;

    for (std::size_t pos = 0; pos < order.size();
         pos += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), pos + static_cast<std::size_t>(cfg.batch_size));
      Vec acc = Vec::Zero(theta.size());

      for (std::size_t b = pos; b < end; ++b) {
        const std::size_t i = order[b];
        const DaySample& day = data.train[i];
        const std::uint64_t sample_seed =
            mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch), i);
        const ForwardResult fw =
            forward(params, train_prep[i].features, RunMode::train, sample_seed);
        const PriceCurve pred = to_price(fw.output, cfg.loss.output_space);
        if (!pred.allFinite())
          throw std::runtime_error("train_model: non-finite prediction on day " +
                                   to_string(day.date));

        HybridEval ev;
        try {
          ev = hybrid_eval(pred, day.price, ess, cfg.loss, train_prep[i].oracle);
        } catch (const SolverError& e) {
          throw SolverError(std::string("loss solve failed on day ") +
                                to_string(day.date) + ": " + e.what(),
                            e.node_id);
        }
        if (!std::isfinite(ev.loss))
          throw std::runtime_error("train_model: non-finite loss on day " +
                                   to_string(day.date));
        run_mse += ev.error;
        run_sreg += ev.surrogate;

        // Twice back-propagating, once updating: the weighted squared-error
        // gradient first, then the chained surrogate-regret gradient.
        if (use_err) {
          PredictorGrads g = backward(params, *fw.trace,
                                      Vec(err_weight * ev.error_grad));
          if (params.input_skips_frozen) zero_frozen_skips(g);
          acc += flatten_grads(g, params);
        }
        if (use_reg) {
          PredictorGrads g = backward(params, *fw.trace, ev.surrogate_grad);
          if (params.input_skips_frozen) zero_frozen_skips(g);
          acc += flatten_grads(g, params);
        }
      }

      if (cfg.optimizer == Optimizer::adam)
        adam_step(theta, adam, acc, cfg.learning_rate, cfg.adam_beta1,
                  cfg.adam_beta2, cfg.adam_eps);
      else
        theta -= cfg.learning_rate * acc;
      unflatten_params(params, theta);
      ++updates;
    }

    const bool stop_on_sreg = cfg.mode != TrainMode::mse_only;
    const EvalMetrics val =
        eval_split(data.validation, val_prep, params, cfg, ess, stop_on_sreg);
    const EvalMetrics test =
        eval_split(data.test, test_prep, params, cfg, ess, false);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = run_mse / static_cast<double>(data.train.size());
    rec.train_sreg = run_sreg / static_cast<double>(data.train.size());
    rec.val_mse = val.mse_mean;
    rec.val_regret = val.regret_mean;
    rec.test_mse = test.mse_mean;
    rec.test_regret = test.regret_mean;
    rec.n_updates = updates;
    res.history.epochs.push_back(rec);

    const double metric = stop_on_sreg ? val.sreg_mean : val.mse_mean;
    if (metric < best_metric) {
      best_metric = metric;
      res.params = params;
      res.best_epoch = epoch;
      wait = 0;
    } else if (++wait >= cfg.early_stop_patience) {
      break;
    }
  }
  return res;
}

MetricsReport evaluate_model(const PredictorParams& params,
                             const std::vector<DaySample>& days,
                             const EssParams& ess, double capacity_mwh) {
  if (days.empty()) throw DataError("evaluate_model: no days");
  const long n = static_cast<long>(days.size());
  const int t_n = ess.t_periods;

  Mat pred_log(n, t_n), true_log(n, t_n), pred_raw(n, t_n), true_raw(n, t_n);
  double benefit_sum = 0.0, oracle_sum = 0.0;
  std::map<int, double> month_sum;
  std::map<int, long> month_n;

  for (long i = 0; i < n; ++i) {
    const DaySample& day = days[i];
    const PriceCurve pred = predict_price(params, day.features);
    pred_raw.row(i) = pred.transpose();
    true_raw.row(i) = day.price.transpose();
    pred_log.row(i) = pred.array().log().transpose();
    true_log.row(i) = day.log_price.transpose();

    const SolveOutcome dec = solve_arbitrage(pred, ess);
    const double benefit =
        benefit_of(dec.schedule, day.price, ess) * capacity_mwh;
    const double oracle = optimal_benefit(day.price, ess) * capacity_mwh;
    benefit_sum += benefit;
    oracle_sum += oracle;
    month_sum[day.date.month] += benefit;
    month_n[day.date.month] += 1;
  }

  MetricsReport r;
  r.rmse_log = rmse(pred_log, true_log);
  r.mape_log = mape(pred_log, true_log);
  r.rmse_raw = rmse(pred_raw, true_raw);
  r.mape_raw = mape(pred_raw, true_raw);
  r.mean_daily_benefit = benefit_sum / static_cast<double>(n);
  r.mean_oracle_benefit = oracle_sum / static_cast<double>(n);
  r.mean_daily_regret = r.mean_oracle_benefit - r.mean_daily_benefit;
  r.per_hour_rmse = per_hour_rmse(pred_log, true_log);
  for (const auto& [month, sum] : month_sum)
    r.monthly_benefit[month] = sum / static_cast<double>(month_n[month]);
  r.n_days = n;
  r.capacity_mwh = capacity_mwh;
  return r;
}

}  // namespace dfp
