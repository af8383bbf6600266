#pragma once

#include <map>
#include <string>

#include "dfp/core.hpp"

namespace dfp {

/// Evaluation summary for a set of days. Accuracy metrics are computed in
/// log-price space (raw-space variants carried under their own names);
/// monetary fields are scaled by capacity_mwh.
/// Identity: mean_daily_regret == mean_oracle_benefit - mean_daily_benefit.
struct MetricsReport {
  double rmse_log = 0.0;
  double mape_log = 0.0;
  double rmse_raw = 0.0;
  double mape_raw = 0.0;
  double mean_daily_regret = 0.0;
  double mean_daily_benefit = 0.0;
  double mean_oracle_benefit = 0.0;
  Vec per_hour_rmse;                      // log space, one entry per hour
  std::map<int, double> monthly_benefit;  // calendar month -> mean daily benefit
  long n_days = 0;
  double capacity_mwh = 1.0;
};

/// Root mean squared error over all entries of two equally-shaped matrices
/// (rows are days, columns hours).
double rmse(const Mat& preds, const Mat& trues);

/// Mean of |pred - true| / |true| over all entries; throws on a zero truth.
double mape(const Mat& preds, const Mat& trues);

/// RMSE computed separately per hour of day (column-wise).
Vec per_hour_rmse(const Mat& preds, const Mat& trues);

std::string report_to_json(const MetricsReport& r);
MetricsReport report_from_json(const std::string& text);
/// Plot-ready companion file: "hour,rmse_log" rows.
std::string per_hour_csv(const MetricsReport& r);

}  // namespace dfp
