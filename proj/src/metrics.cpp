#include "dfp/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "dfp/json_io.hpp"
#include "json.hpp"

namespace dfp {

namespace {
void check_shapes(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("metrics: shape mismatch");
  if (a.size() == 0) throw std::invalid_argument("metrics: empty input");
}
}  // namespace

double rmse(const Mat& preds, const Mat& trues) {
  check_shapes(preds, trues);
  return std::sqrt((preds - trues).squaredNorm() /
                   static_cast<double>(preds.size()));
}

double mape(const Mat& preds, const Mat& trues) {
  check_shapes(preds, trues);
  if ((trues.array() == 0.0).any())
    throw std::invalid_argument("mape: zero true value");
  return ((preds - trues).array().abs() / trues.array().abs()).mean();
}

Vec per_hour_rmse(const Mat& preds, const Mat& trues) {
  check_shapes(preds, trues);
  Vec out(preds.cols());
  for (Eigen::Index h = 0; h < preds.cols(); ++h)
    out[h] = std::sqrt((preds.col(h) - trues.col(h)).squaredNorm() /
                       static_cast<double>(preds.rows()));
  return out;
}

std::string report_to_json(const MetricsReport& r) {
  JsonWriter w;
  w.begin_object();
  w.field("rmse_log", r.rmse_log);
  w.field("mape_log", r.mape_log);
  w.field("rmse_raw", r.rmse_raw);
  w.field("mape_raw", r.mape_raw);
  w.field("mean_daily_regret", r.mean_daily_regret);
  w.field("mean_daily_benefit", r.mean_daily_benefit);
  w.field("mean_oracle_benefit", r.mean_oracle_benefit);
  w.field("per_hour_rmse", r.per_hour_rmse);
  w.key("monthly_benefit");
  w.begin_object();
  for (const auto& [month, value] : r.monthly_benefit)
    w.field(std::to_string(month), value);
  w.end_object();
  w.field("n_days", r.n_days);
  w.field("capacity_mwh", r.capacity_mwh);
  w.end_object();
  return w.take();
}

MetricsReport report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("report: malformed JSON");
  MetricsReport r;
  r.rmse_log = j.at("rmse_log").get<double>();
  r.mape_log = j.at("mape_log").get<double>();
  r.rmse_raw = j.at("rmse_raw").get<double>();
  r.mape_raw = j.at("mape_raw").get<double>();
  r.mean_daily_regret = j.at("mean_daily_regret").get<double>();
  r.mean_daily_benefit = j.at("mean_daily_benefit").get<double>();
  r.mean_oracle_benefit = j.at("mean_oracle_benefit").get<double>();
  const auto& ph = j.at("per_hour_rmse");
  r.per_hour_rmse.resize(ph.size());
  for (std::size_t i = 0; i < ph.size(); ++i)
    r.per_hour_rmse[static_cast<Eigen::Index>(i)] = ph[i].get<double>();
  for (const auto& [key, value] : j.at("monthly_benefit").items())
    r.monthly_benefit[std::stoi(key)] = value.get<double>();
  r.n_days = j.at("n_days").get<long>();
  r.capacity_mwh = j.at("capacity_mwh").get<double>();
  return r;
}

std::string per_hour_csv(const MetricsReport& r) {
  std::string out = "hour,rmse_log\n";
  for (Eigen::Index h = 0; h < r.per_hour_rmse.size(); ++h) {
    out += std::to_string(h);
    out += ',';
    out += format_double(r.per_hour_rmse[h]);
    out += '\n';
  }
  return out;
}

}  // namespace dfp
