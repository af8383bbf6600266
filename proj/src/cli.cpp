#include "dfp/cli.hpp"

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dfp/arbitrage.hpp"
#include "dfp/json_io.hpp"
#include "dfp/metrics.hpp"
#include "dfp/predictors.hpp"

namespace dfp {

namespace {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

TrainMode mode_from_string(const std::string& s) {
  if (s == "hybrid") return TrainMode::hybrid;
  if (s == "mse-only") return TrainMode::mse_only;
  if (s == "regret-only") return TrainMode::regret_only;
  throw DataError("config: unknown mode '" + s + "'");
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("config: malformed JSON");
  RunConfig cfg;

  if (j.contains("train")) {
    const auto& t = j.at("train");
    maybe(t, "epochs", cfg.train.epochs);
    maybe(t, "batch_size", cfg.train.batch_size);
    maybe(t, "learning_rate", cfg.train.learning_rate);
    maybe(t, "adam_eps", cfg.train.adam_eps);
    maybe(t, "early_stop_patience", cfg.train.early_stop_patience);
    maybe(t, "seed", cfg.train.seed);
    if (t.contains("adam_betas")) {
      const auto& betas = t.at("adam_betas");
      if (!betas.is_array() || betas.size() != 2)
        throw DataError("config: adam_betas must be a pair");
      cfg.train.adam_beta1 = betas[0].get<double>();
      cfg.train.adam_beta2 = betas[1].get<double>();
    }
    if (t.contains("optimizer")) {
      const std::string o = t.at("optimizer").get<std::string>();
      if (o == "adam")
        cfg.train.optimizer = Optimizer::adam;
      else if (o == "sgd")
        cfg.train.optimizer = Optimizer::sgd;
      else
        throw DataError("config: unknown optimizer '" + o + "'");
    }
    if (t.contains("mode"))
      cfg.train.mode = mode_from_string(t.at("mode").get<std::string>());
  }

  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    maybe(l, "epsilon", cfg.train.loss.epsilon);
    if (l.contains("convention")) {
      const std::string c = l.at("convention").get<std::string>();
      if (c == "paper")
        cfg.train.loss.convention = SurrogateConvention::paper;
      else if (c == "standard-spo")
        cfg.train.loss.convention = SurrogateConvention::standard_spo;
      else
        throw DataError("config: unknown convention '" + c + "'");
    }
    if (l.contains("mse_space")) {
      const std::string s = l.at("mse_space").get<std::string>();
      if (s == "log")
        cfg.train.loss.mse_space = MseSpace::log_price;
      else if (s == "raw")
        cfg.train.loss.mse_space = MseSpace::raw;
      else
        throw DataError("config: unknown mse_space '" + s + "'");
    }
    if (l.contains("output_space")) {
      const std::string s = l.at("output_space").get<std::string>();
      if (s == "log")
        cfg.train.loss.output_space = OutputSpace::log_price;
      else if (s == "identity")
        cfg.train.loss.output_space = OutputSpace::identity;
      else
        throw DataError("config: unknown output_space '" + s + "'");
    }
  }

  if (j.contains("ess")) {
    const auto& e = j.at("ess");
    maybe(e, "t_periods", cfg.ess.t_periods);
    maybe(e, "delta_t", cfg.ess.delta_t);
    maybe(e, "e_min", cfg.ess.e_min);
    maybe(e, "e_max", cfg.ess.e_max);
    maybe(e, "e_init", cfg.ess.e_init);
    maybe(e, "eta_ch", cfg.ess.eta_ch);
    maybe(e, "eta_dis", cfg.ess.eta_dis);
    maybe(e, "p_ch_max", cfg.ess.p_ch_max);
    maybe(e, "p_dis_max", cfg.ess.p_dis_max);
    cfg.ess.big_m = std::max(cfg.ess.p_ch_max, cfg.ess.p_dis_max);
    maybe(e, "big_m", cfg.ess.big_m);
  }

  if (j.contains("features"))
    maybe(j.at("features"), "include_past_price",
          cfg.features.include_past_price);

  if (j.contains("predictor")) {
    const auto& p = j.at("predictor");
    if (p.contains("kind")) {
      const std::string k = p.at("kind").get<std::string>();
      if (k == "linear")
        cfg.predictor.kind = PredictorKind::linear;
      else if (k == "resnet")
        cfg.predictor.kind = PredictorKind::resnet;
      else
        throw DataError("config: unknown predictor kind '" + k + "'");
    }
    if (p.contains("hidden_widths"))
      cfg.predictor.hidden_widths =
          p.at("hidden_widths").get<std::vector<int>>();
    maybe(p, "dropout_rate", cfg.predictor.dropout_rate);
    maybe(p, "init_seed", cfg.predictor.init_seed);
  }

  maybe(j, "capacity_mwh", cfg.capacity_mwh);
  maybe(j, "max_gap_hours", cfg.max_gap_hours);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(read_text_file(path));
}

namespace {

std::vector<DaySample> samples_from_csv(const std::string& data_path,
                                        const std::string& holidays_path,
                                        const FeatureLayout& layout,
                                        int max_gap) {
  const RawHourlySeries raw = load_hourly_csv(data_path);
  const RawHourlySeries clean = clean_series(raw, max_gap);
  std::set<Date> holidays;
  if (!holidays_path.empty()) holidays = load_holiday_file(holidays_path);
  return build_day_samples(clean, layout, holidays);
}

int run_synth(const std::string& out, int days, std::uint64_t seed,
              const std::string& profile, double noise_scale) {
  NoiseProfile np;
  if (profile == "uniform")
    np = NoiseProfile::uniform;
  else if (profile == "afternoon-heavy")
    np = NoiseProfile::afternoon_heavy;
  else
    throw DataError("unknown profile '" + profile + "'");
  write_hourly_csv(generate_synthetic(days, seed, np, noise_scale), out);
  return 0;
}

int run_train(const std::string& data_path, const std::string& config_path,
              const std::string& holidays_path, const std::string& out_ckpt,
              const std::string& out_history) {
  const RunConfig cfg = config_path.empty() ? RunConfig{}
                                            : load_run_config(config_path);
  auto samples = samples_from_csv(data_path, holidays_path, cfg.features,
                                  cfg.max_gap_hours);
  SplitResult split = split_dataset(samples, cfg.train.seed);

  const Standardizer stdzr = fit_standardizer(split.train);
  const auto std_train = apply_standardizer(split.train, stdzr);

  PredictorParams params;
  if (cfg.predictor.kind == PredictorKind::linear)
    params = init_linear(cfg.features.dim(), cfg.ess.t_periods, std_train,
                         stdzr);
  else
    params = init_resnet(cfg.features.dim(), cfg.predictor.hidden_widths,
                         cfg.ess.t_periods, std_train, cfg.predictor.init_seed,
                         cfg.predictor.dropout_rate, stdzr);

  const TrainResult result = train_model(split, params, cfg.train, cfg.ess);
  save_checkpoint(result.params, cfg.features, out_ckpt);
  write_history_csv(result.history, out_history);
  std::printf("trained %zu days, best epoch %d of %zu\n", split.train.size(),
              result.best_epoch, result.history.epochs.size());
  return 0;
}

int run_evaluate(const std::string& data_path, const std::string& ckpt_path,
                 const std::string& config_path,
                 const std::string& holidays_path, const std::string& split_sel,
                 const std::string& out_report, const std::string& out_hours) {
  const RunConfig cfg = config_path.empty() ? RunConfig{}
                                            : load_run_config(config_path);
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  auto samples = samples_from_csv(data_path, holidays_path, ckpt.layout,
                                  cfg.max_gap_hours);

  std::vector<DaySample> days;
  if (split_sel == "all") {
    days = std::move(samples);
  } else {
    SplitResult split = split_dataset(samples, cfg.train.seed);
    if (split_sel == "train")
      days = std::move(split.train);
    else if (split_sel == "validation")
      days = std::move(split.validation);
    else if (split_sel == "test")
      days = std::move(split.test);
    else
      throw DataError("unknown split '" + split_sel + "'");
  }

  const MetricsReport report =
      evaluate_model(ckpt.params, days, cfg.ess, cfg.capacity_mwh);
  write_text_file(out_report, report_to_json(report));
  const std::string hours_path =
      out_hours.empty() ? out_report + ".hours.csv" : out_hours;
  write_text_file(hours_path, per_hour_csv(report));
  std::printf("evaluated %ld days: rmse_log %.6g, mean regret %.6g\n",
              report.n_days, report.rmse_log, report.mean_daily_regret);
  return 0;
}

int run_solve(const std::string& prices_path, const std::string& params_path) {
  const PriceCurve price = price_curve_from_json(read_text_file(prices_path));
  EssParams ess;
  if (!params_path.empty())
    ess = ess_params_from_json(read_text_file(params_path));
  ess.t_periods = static_cast<int>(price.size());
  const SolveOutcome sol = solve_arbitrage(price, ess);
  std::printf("%s\n", to_json(sol.schedule).c_str());
  std::printf("objective %s\n", format_double(sol.objective).c_str());
  std::printf("lp_bound %s\n", format_double(sol.lp_bound).c_str());
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"decision-focused electricity price prediction for storage arbitrage"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "write a synthetic hourly CSV");
  int days = 30;
  std::uint64_t seed = 0;
  std::string profile = "uniform";
  double noise_scale = 1.0;
  std::string out_csv;
  synth->add_option("--days", days, "number of days");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--profile", profile, "uniform | afternoon-heavy");
  synth->add_option("--noise-scale", noise_scale, "price-noise multiplier");
  synth->add_option("--out", out_csv, "output CSV path")->required();

  auto* train = app.add_subcommand("train", "split, train, write artifacts");
  std::string data_path, config_path, holidays_path, out_ckpt, out_history;
  train->add_option("--data", data_path, "hourly CSV")->required();
  train->add_option("--config", config_path, "JSON run config");
  train->add_option("--holidays", holidays_path, "holiday date file");
  train->add_option("--out-checkpoint", out_ckpt, "checkpoint path")->required();
  train->add_option("--out-history", out_history, "history CSV path")->required();

  auto* evaluate = app.add_subcommand("evaluate", "metrics report for a checkpoint");
  std::string eval_data, eval_ckpt, eval_config, eval_holidays;
  std::string split_sel = "all", out_report, out_hours;
  evaluate->add_option("--data", eval_data, "hourly CSV")->required();
  evaluate->add_option("--checkpoint", eval_ckpt, "checkpoint path")->required();
  evaluate->add_option("--config", eval_config, "JSON run config");
  evaluate->add_option("--holidays", eval_holidays, "holiday date file");
  evaluate->add_option("--split", split_sel, "all | train | validation | test");
  evaluate->add_option("--out-report", out_report, "report JSON path")->required();
  evaluate->add_option("--out-hours", out_hours, "per-hour CSV path");

  auto* solve = app.add_subcommand("solve", "optimal schedule for a price curve");
  std::string prices_path, params_path;
  solve->add_option("--prices", prices_path, "price curve JSON")->required();
  solve->add_option("--params", params_path, "storage parameters JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message / help text
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed())
      return run_synth(out_csv, days, seed, profile, noise_scale);
    if (train->parsed())
      return run_train(data_path, config_path, holidays_path, out_ckpt,
                       out_history);
    if (evaluate->parsed())
      return run_evaluate(eval_data, eval_ckpt, eval_config, eval_holidays,
                          split_sel, out_report, out_hours);
    if (solve->parsed()) return run_solve(prices_path, params_path);
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 1;
}

}  // namespace dfp
