#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "dfp/arbitrage.hpp"
#include "dfp/json_io.hpp"
#include "dfp/training.hpp"
#include "test_util.hpp"

using namespace dfp;
using namespace dfp::testing;

namespace {

std::vector<DaySample> synth_days(int days, std::uint64_t seed,
                                  NoiseProfile profile = NoiseProfile::uniform,
                                  double noise_scale = 1.0) {
  const auto series = generate_synthetic(days, seed, profile, noise_scale);
  return build_day_samples(series, FeatureLayout{}, {});
}

// Shared pipeline glue: fit the standardizer on the train split, initialize
// a linear predictor on standardized samples, carry the statistics.
PredictorParams linear_init_for(const SplitResult& split) {
  const Standardizer stdzr = fit_standardizer(split.train);
  const auto std_train = apply_standardizer(split.train, stdzr);
  return init_linear(static_cast<int>(split.train.front().features.size()), 24,
                     std_train, stdzr);
}

}  // namespace

TEST_CASE("split arithmetic and determinism") {
  SUBCASE("100 days -> 20 test, 16 validation, 64 train") {
    const auto days = synth_days(101, 1);  // 100 samples
    REQUIRE(days.size() == 100);
    const SplitResult s = split_dataset(days, 7);
    CHECK(s.test.size() == 20);
    CHECK(s.validation.size() == 16);
    CHECK(s.train.size() == 64);
  }

  SUBCASE("5 days -> 1 test, 1 validation, 3 train") {
    const auto days = synth_days(6, 2);
    REQUIRE(days.size() == 5);
    const SplitResult s = split_dataset(days, 7);
    CHECK(s.test.size() == 1);
    CHECK(s.validation.size() == 1);
    CHECK(s.train.size() == 3);
  }

  SUBCASE("disjoint, exhaustive, seed-reproducible") {
    const auto days = synth_days(40, 3);
    const SplitResult a = split_dataset(days, 11);
    const SplitResult b = split_dataset(days, 11);
    const SplitResult c = split_dataset(days, 12);

    auto dates = [](const std::vector<DaySample>& v) {
      std::set<Date> out;
      for (const auto& d : v) out.insert(d.date);
      return out;
    };
    CHECK(dates(a.train) == dates(b.train));
    CHECK(dates(a.test) == dates(b.test));
    CHECK(dates(a.test) != dates(c.test));

    std::set<Date> all = dates(a.train);
    const auto val = dates(a.validation), test = dates(a.test);
    for (const auto& d : val) CHECK(all.insert(d).second);
    for (const auto& d : test) CHECK(all.insert(d).second);
    CHECK(all.size() == days.size());
  }

  SUBCASE("too few days") {
    const auto days = synth_days(5, 4);  // only 4 samples
    CHECK_THROWS_AS(split_dataset(days, 1), DataError);
  }
}

TEST_CASE("adam steps") {
  Vec params = Vec::Constant(3, 1.0);
  AdamState st;

  SUBCASE("zero gradient leaves parameters unchanged") {
    adam_step(params, st, Vec::Zero(3), 0.1, 0.9, 0.999, 1e-8);
    CHECK((params.array() == 1.0).all());
  }

  SUBCASE("first step is approximately -lr * sign(g)") {
    Vec g(3);
    g << 5.0, -2.0, 0.001;
    adam_step(params, st, g, 0.01, 0.9, 0.999, 1e-8);
    CHECK(params[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
    CHECK(params[1] == doctest::Approx(1.0 + 0.01).epsilon(1e-6));
    CHECK(params[2] == doctest::Approx(1.0 - 0.01).epsilon(1e-4));
  }

  SUBCASE("identical states produce identical updates") {
    Vec a = params, b = params;
    AdamState sa, sb;
    Vec g(3);
    g << 1.0, 2.0, 3.0;
    for (int i = 0; i < 5; ++i) {
      adam_step(a, sa, g, 0.01, 0.9, 0.999, 1e-8);
      adam_step(b, sb, g, 0.01, 0.9, 0.999, 1e-8);
    }
    CHECK(a == b);
  }

  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(adam_step(params, st, Vec::Zero(4), 0.1, 0.9, 0.999, 1e-8),
                    std::invalid_argument);
  }
}

TEST_CASE("noiseless linear data trains to near-zero error, mse-only") {
  const auto days = synth_days(300, 5, NoiseProfile::uniform, 0.0);
  const SplitResult split = split_dataset(days, 5);
  const PredictorParams init = linear_init_for(split);

  TrainConfig cfg;
  cfg.mode = TrainMode::mse_only;
  cfg.optimizer = Optimizer::sgd;
  cfg.learning_rate = 1e-2;
  cfg.epochs = 20;
  cfg.batch_size = 100;
  cfg.seed = 5;
  EssParams ess;

  const TrainResult res = train_model(split, init, cfg, ess);
  const MetricsReport report = evaluate_model(res.params, split.test, ess);
  CHECK(report.rmse_log < 1e-3);
  CHECK(res.history.epochs.size() <= 20);
}

TEST_CASE("full-batch run equals one hand-assembled gradient-descent step") {
  const auto days = synth_days(30, 6);
  SplitResult split = split_dataset(days, 6);
  const PredictorParams init = linear_init_for(split);
  EssParams ess;

  TrainConfig cfg;
  cfg.mode = TrainMode::hybrid;
  cfg.loss.epsilon = 25.0;
  cfg.optimizer = Optimizer::sgd;
  cfg.learning_rate = 1e-4;
  cfg.epochs = 1;
  cfg.batch_size = static_cast<int>(split.train.size());
  cfg.seed = 99;

  const TrainResult res = train_model(split, init, cfg, ess);
  REQUIRE(res.history.epochs.size() == 1);
  CHECK(res.history.epochs[0].n_updates == 1);

  // Assemble the same batch gradient by hand: epsilon-weighted squared-error
  // part plus the chained surrogate part, summed over the batch.
  Vec acc = Vec::Zero(param_count(init));
  for (const auto& day : split.train) {
    const Vec z = init.standardizer.apply(day.features);
    const ForwardResult fw = forward(init, z, RunMode::train);
    const PriceCurve pred = fw.output.array().exp();
    const SolveOutcome oracle = solve_arbitrage(day.price, ess);
    const HybridEval ev = hybrid_eval(pred, day.price, ess, cfg.loss, oracle);
    acc += cfg.loss.epsilon *
           flatten_grads(backward(init, *fw.trace, ev.error_grad), init);
    acc += flatten_grads(backward(init, *fw.trace, ev.surrogate_grad), init);
  }
  const Vec expect = flatten_params(init) - cfg.learning_rate * acc;
  const Vec got = flatten_params(res.params);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("batch count per epoch is ceil(train / batch_size)") {
  const auto days = synth_days(30, 7);  // 29 samples
  SplitResult split = split_dataset(days, 7);
  REQUIRE(split.train.size() == 19);
  const PredictorParams init = linear_init_for(split);

  TrainConfig cfg;
  cfg.mode = TrainMode::mse_only;
  cfg.optimizer = Optimizer::sgd;
  cfg.learning_rate = 1e-5;
  cfg.epochs = 2;
  cfg.batch_size = 7;
  EssParams ess;
  const TrainResult res = train_model(split, init, cfg, ess);
  for (const auto& rec : res.history.epochs)
    CHECK(rec.n_updates == 3);  // ceil(19/7)
}

TEST_CASE("regret-only training settles: regret column non-increasing late") {
  const auto days = synth_days(60, 8, NoiseProfile::uniform, 0.5);
  SplitResult split = split_dataset(days, 8);
  const PredictorParams init = linear_init_for(split);

  TrainConfig cfg;
  cfg.mode = TrainMode::regret_only;
  cfg.optimizer = Optimizer::adam;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 15;
  cfg.batch_size = 100;
  cfg.seed = 8;
  cfg.early_stop_patience = 15;
  EssParams ess;

  const TrainResult res = train_model(split, init, cfg, ess);
  const auto& h = res.history.epochs;
  REQUIRE(h.size() >= 10);
  for (std::size_t i = h.size() - 10; i + 1 < h.size(); ++i)
    CHECK(h[i + 1].val_regret <= h[i].val_regret * 1.05 + 1e-9);
}

TEST_CASE("early stopping returns the best-validation checkpoint") {
  const auto days = synth_days(50, 9, NoiseProfile::uniform, 1.0);
  SplitResult split = split_dataset(days, 9);
  const PredictorParams init = linear_init_for(split);

  TrainConfig cfg;
  cfg.mode = TrainMode::mse_only;
  cfg.optimizer = Optimizer::adam;
  cfg.learning_rate = 5e-3;
  cfg.epochs = 30;
  cfg.batch_size = 16;
  cfg.seed = 9;
  cfg.early_stop_patience = 5;
  EssParams ess;

  const TrainResult res = train_model(split, init, cfg, ess);
  const auto& h = res.history.epochs;
  REQUIRE(!h.empty());

  double best = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  for (const auto& r : h)
    if (r.val_mse < best) {
      best = r.val_mse;
      best_epoch = r.epoch;
    }
  CHECK(res.best_epoch == best_epoch);

  // The returned parameters reproduce the best recorded validation MSE.
  double val = 0.0;
  for (const auto& day : split.validation) {
    const Vec z = res.params.standardizer.apply(day.features);
    const Vec out = forward(res.params, z, RunMode::eval).output;
    val += mse(out, day.log_price);
  }
  val /= static_cast<double>(split.validation.size());
  CHECK(val == doctest::Approx(best).epsilon(1e-12));

  // Stopped after patience ran out, not at the epoch cap.
  if (h.size() < 30u)
    CHECK(static_cast<int>(h.size()) == best_epoch + cfg.early_stop_patience);
}

TEST_CASE("training is bit-for-bit reproducible") {
  const auto days = synth_days(25, 10);
  SplitResult split = split_dataset(days, 10);
  const auto std_train = apply_standardizer(split.train,
                                            fit_standardizer(split.train));
  const Standardizer stdzr = fit_standardizer(split.train);
  const PredictorParams init =
      init_resnet(147, {8}, 24, apply_standardizer(split.train, stdzr), 42,
                  0.2, stdzr);

  TrainConfig cfg;
  cfg.mode = TrainMode::hybrid;
  cfg.loss.epsilon = 25.0;
  cfg.learning_rate = 1e-4;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.seed = 10;
  EssParams ess;

  const TrainResult a = train_model(split, init, cfg, ess);
  const TrainResult b = train_model(split, init, cfg, ess);
  CHECK(history_csv(a.history) == history_csv(b.history));
  CHECK(checkpoint_to_json(a.params, FeatureLayout{}) ==
        checkpoint_to_json(b.params, FeatureLayout{}));
}

TEST_CASE("evaluate_model fundamentals") {
  const auto days = synth_days(20, 11);
  SplitResult split = split_dataset(days, 11);
  const PredictorParams init = linear_init_for(split);
  EssParams ess;

  SUBCASE("report identity and oracle column") {
    const MetricsReport r = evaluate_model(init, split.test, ess);
    CHECK(r.mean_daily_regret ==
          doctest::Approx(r.mean_oracle_benefit - r.mean_daily_benefit)
              .epsilon(1e-12));
    double oracle = 0.0;
    for (const auto& d : split.test) oracle += optimal_benefit(d.price, ess);
    oracle /= static_cast<double>(split.test.size());
    CHECK(r.mean_oracle_benefit == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(r.n_days == static_cast<long>(split.test.size()));
  }

  SUBCASE("a perfect predictor has zero regret") {
    // The least-squares fit is exact on noise-free data once the training
    // split has more days than features.
    const auto clean_days = synth_days(300, 12, NoiseProfile::uniform, 0.0);
    SplitResult cs = split_dataset(clean_days, 12);
    const PredictorParams perfect = linear_init_for(cs);
    const MetricsReport r = evaluate_model(perfect, cs.test, ess);
    CHECK(r.rmse_log < 1e-6);
    CHECK(r.mean_daily_regret < 1e-4);
    CHECK(r.mean_daily_benefit ==
          doctest::Approx(r.mean_oracle_benefit).epsilon(1e-6));
  }

  SUBCASE("capacity scales the monetary columns only") {
    const MetricsReport full = evaluate_model(init, split.test, ess, 1.0);
    const MetricsReport half = evaluate_model(init, split.test, ess, 0.5);
    CHECK(half.mean_daily_benefit ==
          doctest::Approx(0.5 * full.mean_daily_benefit));
    CHECK(half.mean_oracle_benefit ==
          doctest::Approx(0.5 * full.mean_oracle_benefit));
    CHECK(half.rmse_log == full.rmse_log);
  }
}

TEST_CASE("history csv format") {
  TrainHistory h;
  h.epochs.push_back({1, 0.5, 2.5, 0.25, 1.25, 0.75, 1.5, 3});
  const std::string csv = history_csv(h);
  CHECK(csv.substr(0, csv.find('\n')) ==
        "epoch,train_mse,train_sreg,val_mse,val_regret,test_mse,test_regret");
  CHECK(csv.find("\n1,0.5,2.5,0.25,1.25,0.75,1.5\n") != std::string::npos);
}
