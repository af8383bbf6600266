#pragma once

#include <string>
#include <vector>

#include "dfp/core.hpp"
#include "dfp/data.hpp"
#include "dfp/losses.hpp"
#include "dfp/training.hpp"

namespace dfp {

/// Everything a run needs, parsed from one JSON config file whose sections
/// mirror the structs field by field: "train", "loss", "ess", "features",
/// "predictor", plus a top-level "capacity_mwh". Every field is optional;
/// defaults match the struct initializers.
struct RunConfig {
  TrainConfig train;
  EssParams ess;
  FeatureLayout features;
  struct Predictor {
    PredictorKind kind = PredictorKind::linear;
    std::vector<int> hidden_widths = {50, 50};
    double dropout_rate = 0.2;
    std::uint64_t init_seed = 0;
  } predictor;
  double capacity_mwh = 1.0;
  int max_gap_hours = 6;
};

RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Entry point behind the `dfp` binary. Subcommands: synth, train, evaluate,
/// solve. Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical or
/// solver error.
int cli_main(int argc, const char* const* argv);

}  // namespace dfp
