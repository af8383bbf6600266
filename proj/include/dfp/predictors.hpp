#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dfp/core.hpp"
#include "dfp/data.hpp"

namespace dfp {

enum class PredictorKind { linear, resnet };
enum class RunMode { train, eval };

/// One layer of the residual stack: state map theta_y (absent in the first
/// layer), input map theta_x, bias theta_b. Hidden layers apply ReLU; the
/// output layer is affine.
struct LayerParams {
  Mat theta_y;  // 0x0 when the layer has no state input
  Mat theta_x;
  Vec theta_b;
};

struct PredictorParams {
  PredictorKind kind = PredictorKind::linear;
  int feature_dim = 0;
  int output_dim = 0;
  std::vector<LayerParams> layers;  // hidden layers then the output layer
  Standardizer standardizer;        // applied by predict_price
  double dropout_rate = 0.0;
  bool input_skips_frozen = false;  // theta_x of layers past the first stays fixed
};

/// Retained by a train-mode forward pass for the backward pass.
struct ForwardTrace {
  Vec input;
  std::vector<Vec> pre_acts;  // hidden z_l
  std::vector<Vec> acts;      // hidden activations after dropout
  std::vector<Vec> masks;     // inverted-scaling dropout masks
  Vec output;
};

struct ForwardResult {
  Vec output;  // log price
  std::optional<ForwardTrace> trace;  // present in train mode only
};

struct PredictorGrads {
  std::vector<LayerParams> layers;
};

/// Ridge least-squares fit (delta = 1e-6) of log price on the samples'
/// feature vectors. Expects standardized features.
PredictorParams init_linear(int feature_dim, int output_dim,
                            const std::vector<DaySample>& train_set,
                            const std::optional<Standardizer>& standardizer = {});

/// Hidden weights from scaled uniform init (+-1/sqrt(fan_in), seeded); the
/// output layer's input-skip map comes from the same least-squares fit as
/// the linear predictor.
PredictorParams init_resnet(int feature_dim, const std::vector<int>& hidden_widths,
                            int output_dim, const std::vector<DaySample>& train_set,
                            std::uint64_t seed, double dropout_rate = 0.2,
                            const std::optional<Standardizer>& standardizer = {});

/// Deterministic in eval mode; in train mode dropout masks are a pure
/// function of (seed, shapes), so a fixed seed freezes them.
ForwardResult forward(const PredictorParams& params, const Vec& features,
                      RunMode mode, std::uint64_t seed = 0);

/// Exact reverse-mode gradients of output . output_grad with respect to
/// every parameter, honoring the dropout masks recorded in the trace.
PredictorGrads backward(const PredictorParams& params, const ForwardTrace& trace,
                        const Vec& output_grad);

/// Standardizes raw features with the stored statistics, runs an eval-mode
/// forward pass, exponentiates.
PriceCurve predict_price(const PredictorParams& params, const Vec& raw_features);

long param_count(const PredictorParams& params);
Vec flatten_params(const PredictorParams& params);
Vec flatten_grads(const PredictorGrads& grads, const PredictorParams& shape);
void unflatten_params(PredictorParams& params, const Vec& flat);

/// Versioned checkpoint document; parsers reject unknown versions.
std::string checkpoint_to_json(const PredictorParams& params,
                               const FeatureLayout& layout);
struct Checkpoint {
  PredictorParams params;
  FeatureLayout layout;
};
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const PredictorParams& params, const FeatureLayout& layout,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dfp
