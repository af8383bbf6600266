#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfp/core.hpp"
#include "dfp/losses.hpp"
#include "dfp/metrics.hpp"
#include "dfp/predictors.hpp"

namespace dfp {

enum class Optimizer { adam, sgd };
enum class TrainMode { hybrid, mse_only, regret_only };

struct TrainConfig {
  int epochs = 50;
  int batch_size = 100;
  double learning_rate = 1e-6;
  LossConfig loss{};
  Optimizer optimizer = Optimizer::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int early_stop_patience = 10;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::hybrid;
};

struct SplitResult {
  std::vector<DaySample> train;
  std::vector<DaySample> validation;
  std::vector<DaySample> test;
};

/// Whole-day split: 20% of days to test (floored, at least 1), 20% of the
/// remainder to validation (same rounding), the rest to train. Membership is
/// drawn by a seeded shuffle; each split keeps chronological order.
SplitResult split_dataset(const std::vector<DaySample>& days,
                          std::uint64_t seed);

struct AdamState {
  Vec m;
  Vec v;
  long step = 0;
};

/// Standard Adam update with bias correction, in place.
void adam_step(Vec& params, AdamState& state, const Vec& grads, double lr,
               double beta1, double beta2, double eps);

/// One row per completed epoch. train_* are running means accumulated over
/// the epoch's train-mode passes; val/test columns are eval-mode metrics
/// computed after the epoch.
struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double train_sreg = 0.0;
  double val_mse = 0.0;
  double val_regret = 0.0;
  double test_mse = 0.0;
  double test_regret = 0.0;
  long n_updates = 0;  // parameter updates performed this epoch
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

std::string history_csv(const TrainHistory& h);
void write_history_csv(const TrainHistory& h, const std::string& path);

struct TrainResult {
  PredictorParams params;  // best-validation checkpoint
  TrainHistory history;
  int best_epoch = 0;
};

/// The hybrid SGD loop: per sample, back-propagate the weighted squared
/// error, then the chained surrogate-regret gradient, accumulate over the
/// batch (sum), and update once per batch. Early stopping watches validation
/// surrogate regret (hybrid/regret_only) or validation MSE (mse_only) with
/// the configured patience and returns the best-validation parameters.
/// Samples carry raw features; params.standardizer is applied internally.
TrainResult train_model(const SplitResult& data, const PredictorParams& init,
                        const TrainConfig& cfg, const EssParams& ess);

/// Per-day curves via predict_price; accuracy in log space (raw-space
/// variants included), decision metrics from two arbitrage solves per day.
/// Monetary fields scale with capacity_mwh.
MetricsReport evaluate_model(const PredictorParams& params,
                             const std::vector<DaySample>& days,
                             const EssParams& ess, double capacity_mwh = 1.0);

}  // namespace dfp
