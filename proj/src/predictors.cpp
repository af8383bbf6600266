#include "dfp/predictors.hpp"

#include <cmath>
#include <stdexcept>

#include "dfp/json_io.hpp"
#include "dfp/rng.hpp"
#include "json.hpp"

namespace dfp {

namespace {

Standardizer identity_standardizer(int dim) {
  Standardizer s;
  s.mean = Vec::Zero(dim);
  s.stddev = Vec::Ones(dim);
  return s;
}

// Ridge least squares of log price on features, intercept included:
// minimizes |[X 1] W - Y|^2 + delta |W|^2 via QR on the stacked system.
// Returns W as (out x F) weights plus the out-vector intercept.
std::pair<Mat, Vec> ridge_fit(int feature_dim, int output_dim,
                              const std::vector<DaySample>& train_set) {
  if (train_set.empty())
    throw std::invalid_argument("predictor init: empty training set");
  const int n = static_cast<int>(train_set.size());
  const int cols = feature_dim + 1;
  const double delta = 1e-6;

  Mat stacked(n + cols, cols);
  Mat rhs = Mat::Zero(n + cols, output_dim);
  for (int i = 0; i < n; ++i) {
    if (train_set[i].features.size() != feature_dim ||
        train_set[i].log_price.size() != output_dim)
      throw std::invalid_argument("predictor init: sample shape mismatch");
    stacked.row(i).head(feature_dim) = train_set[i].features.transpose();
    stacked(i, feature_dim) = 1.0;
    rhs.row(i) = train_set[i].log_price.transpose();
  }
  stacked.bottomRows(cols) = std::sqrt(delta) * Mat::Identity(cols, cols);

  Eigen::ColPivHouseholderQR<Mat> qr(stacked);
  if (qr.rank() < cols)
    throw std::runtime_error("predictor init: rank-deficient least squares");
  const Mat w = qr.solve(rhs);  // cols x out
  return {w.topRows(feature_dim).transpose(), w.row(feature_dim).transpose()};
}

Mat uniform_matrix(Rng& rng, int rows, int cols, int fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, fan_in)));
  Mat m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = uniform_range(rng, -bound, bound);
  return m;
}

Vec uniform_vector(Rng& rng, int n, int fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, fan_in)));
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform_range(rng, -bound, bound);
  return v;
}

void check_features(const PredictorParams& p, const Vec& features) {
  if (features.size() != p.feature_dim)
    throw std::invalid_argument("forward: feature length mismatch");
}

}  // namespace

PredictorParams init_linear(int feature_dim, int output_dim,
                            const std::vector<DaySample>& train_set,
                            const std::optional<Standardizer>& standardizer) {
  auto [w, b] = ridge_fit(feature_dim, output_dim, train_set);
  PredictorParams p;
  p.kind = PredictorKind::linear;
  p.feature_dim = feature_dim;
  p.output_dim = output_dim;
  p.layers.push_back({Mat(0, 0), std::move(w), std::move(b)});
  p.standardizer = standardizer.value_or(identity_standardizer(feature_dim));
  return p;
}

PredictorParams init_resnet(int feature_dim, const std::vector<int>& hidden_widths,
                            int output_dim, const std::vector<DaySample>& train_set,
                            std::uint64_t seed, double dropout_rate,
                            const std::optional<Standardizer>& standardizer) {
  PredictorParams p;
  p.kind = PredictorKind::resnet;
  p.feature_dim = feature_dim;
  p.output_dim = output_dim;
  p.dropout_rate = dropout_rate;
  p.standardizer = standardizer.value_or(identity_standardizer(feature_dim));

  Rng rng(mix_seed(seed, 0x1A17));
  int prev = 0;
  for (std::size_t l = 0; l < hidden_widths.size(); ++l) {
    const int width = hidden_widths[l];
    LayerParams layer;
    if (l > 0) layer.theta_y = uniform_matrix(rng, width, prev, prev);
    layer.theta_x = uniform_matrix(rng, width, feature_dim, feature_dim);
    layer.theta_b =
        uniform_vector(rng, width, l > 0 ? prev + feature_dim : feature_dim);
    p.layers.push_back(std::move(layer));
    prev = width;
  }

  LayerParams out;
  if (!hidden_widths.empty())
    out.theta_y = uniform_matrix(rng, output_dim, prev, prev);
  else
    out.theta_y = Mat(0, 0);
  auto [w, b] = ridge_fit(feature_dim, output_dim, train_set);
  out.theta_x = std::move(w);
  out.theta_b = std::move(b);
  p.layers.push_back(std::move(out));
  return p;
}

ForwardResult forward(const PredictorParams& params, const Vec& features,
                      RunMode mode, std::uint64_t seed) {
  check_features(params, features);
  if (params.layers.empty()) throw std::invalid_argument("forward: no layers");

  ForwardResult res;
  const bool training = mode == RunMode::train;
  ForwardTrace trace;
  if (training) trace.input = features;

  if (params.kind == PredictorKind::linear) {
    const LayerParams& l = params.layers.front();
    res.output = l.theta_x * features + l.theta_b;
    if (training) {
      trace.output = res.output;
      res.trace = std::move(trace);
    }
    return res;
  }

  const std::size_t n_hidden = params.layers.size() - 1;
  Rng mask_rng(mix_seed(seed, 0xD209));
  const double rate = params.dropout_rate;
  Vec act;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    const LayerParams& layer = params.layers[l];
    Vec z = layer.theta_x * features + layer.theta_b;
    if (l > 0) z += layer.theta_y * act;
    Vec a = z.cwiseMax(0.0);
    Vec mask = Vec::Ones(a.size());
    if (training && rate > 0.0) {
      for (Eigen::Index i = 0; i < mask.size(); ++i)
        mask[i] = uniform_unit(mask_rng) < rate ? 0.0 : 1.0 / (1.0 - rate);
      a = a.cwiseProduct(mask);
    }
    if (training) {
      trace.pre_acts.push_back(std::move(z));
      trace.acts.push_back(a);
      trace.masks.push_back(std::move(mask));
    }
    act = std::move(a);
  }

  const LayerParams& out = params.layers.back();
  res.output = out.theta_x * features + out.theta_b;
  if (n_hidden > 0) res.output += out.theta_y * act;
  if (training) {
    trace.output = res.output;
    res.trace = std::move(trace);
  }
  return res;
}

PredictorGrads backward(const PredictorParams& params, const ForwardTrace& trace,
                        const Vec& output_grad) {
  if (trace.input.size() != params.feature_dim ||
      output_grad.size() != params.output_dim)
    throw std::invalid_argument("backward: trace/params mismatch");

  PredictorGrads g;
  g.layers.resize(params.layers.size());

  if (params.kind == PredictorKind::linear) {
    g.layers[0].theta_y = Mat(0, 0);
    g.layers[0].theta_x = output_grad * trace.input.transpose();
    g.layers[0].theta_b = output_grad;
    return g;
  }

  const std::size_t n_hidden = params.layers.size() - 1;
  if (trace.acts.size() != n_hidden || trace.masks.size() != n_hidden)
    throw std::invalid_argument("backward: trace/params mismatch");

  const LayerParams& out = params.layers.back();
  g.layers.back().theta_x = output_grad * trace.input.transpose();
  g.layers.back().theta_b = output_grad;
  Vec da;
  if (n_hidden > 0) {
    g.layers.back().theta_y = output_grad * trace.acts.back().transpose();
    da = out.theta_y.transpose() * output_grad;
  } else {
    g.layers.back().theta_y = Mat(0, 0);
  }

  for (std::size_t l = n_hidden; l-- > 0;) {
    // a = mask .* relu(z): the mask and the ReLU gate both scale dz.
    Vec dz = da.cwiseProduct(trace.masks[l]);
    for (Eigen::Index i = 0; i < dz.size(); ++i)
      if (trace.pre_acts[l][i] <= 0.0) dz[i] = 0.0;
    g.layers[l].theta_x = dz * trace.input.transpose();
    g.layers[l].theta_b = dz;
    if (l > 0) {
      g.layers[l].theta_y = dz * trace.acts[l - 1].transpose();
      da = params.layers[l].theta_y.transpose() * dz;
    } else {
      g.layers[l].theta_y = Mat(0, 0);
    }
  }
  return g;
}

PriceCurve predict_price(const PredictorParams& params, const Vec& raw_features) {
  const Vec z = params.standardizer.apply(raw_features);
  const ForwardResult res = forward(params, z, RunMode::eval);
  if (!res.output.allFinite())
    throw std::runtime_error("predict_price: non-finite output");
  return res.output.array().exp();
}

long param_count(const PredictorParams& params) {
  long n = 0;
  for (const auto& l : params.layers)
    n += l.theta_y.size() + l.theta_x.size() + l.theta_b.size();
  return n;
}

Vec flatten_params(const PredictorParams& params) {
  Vec flat(param_count(params));
  Eigen::Index k = 0;
  for (const auto& l : params.layers) {
    flat.segment(k, l.theta_y.size()) =
        Eigen::Map<const Vec>(l.theta_y.data(), l.theta_y.size());
    k += l.theta_y.size();
    flat.segment(k, l.theta_x.size()) =
        Eigen::Map<const Vec>(l.theta_x.data(), l.theta_x.size());
    k += l.theta_x.size();
    flat.segment(k, l.theta_b.size()) = l.theta_b;
    k += l.theta_b.size();
  }
  return flat;
}

Vec flatten_grads(const PredictorGrads& grads, const PredictorParams& shape) {
  Vec flat(param_count(shape));
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < shape.layers.size(); ++i) {
    const auto& l = grads.layers[i];
    flat.segment(k, l.theta_y.size()) =
        Eigen::Map<const Vec>(l.theta_y.data(), l.theta_y.size());
    k += l.theta_y.size();
    flat.segment(k, l.theta_x.size()) =
        Eigen::Map<const Vec>(l.theta_x.data(), l.theta_x.size());
    k += l.theta_x.size();
    flat.segment(k, l.theta_b.size()) = l.theta_b;
    k += l.theta_b.size();
  }
  return flat;
}

void unflatten_params(PredictorParams& params, const Vec& flat) {
  if (flat.size() != param_count(params))
    throw std::invalid_argument("unflatten_params: size mismatch");
  Eigen::Index k = 0;
  for (auto& l : params.layers) {
    Eigen::Map<Vec>(l.theta_y.data(), l.theta_y.size()) =
        flat.segment(k, l.theta_y.size());
    k += l.theta_y.size();
    Eigen::Map<Vec>(l.theta_x.data(), l.theta_x.size()) =
        flat.segment(k, l.theta_x.size());
    k += l.theta_x.size();
    l.theta_b = flat.segment(k, l.theta_b.size());
    k += l.theta_b.size();
  }
}

namespace {

void write_matrix(JsonWriter& w, const char* name, const Mat& m) {
  w.key(name);
  w.begin_object();
  w.field("rows", static_cast<long>(m.rows()));
  w.field("cols", static_cast<long>(m.cols()));
  w.key("data");
  w.begin_array();
  for (Eigen::Index i = 0; i < m.size(); ++i) w.value(m.data()[i]);
  w.end_array();
  w.end_object();
}

Mat read_matrix(const nlohmann::json& j) {
  const long rows = j.at("rows").get<long>();
  const long cols = j.at("cols").get<long>();
  const auto& data = j.at("data");
  if (static_cast<long>(data.size()) != rows * cols)
    throw DataError("checkpoint: matrix size mismatch");
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = data[static_cast<std::size_t>(i)].get<double>();
  return m;
}

Vec read_vec(const nlohmann::json& j) {
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

std::string checkpoint_to_json(const PredictorParams& params,
                               const FeatureLayout& layout) {
  JsonWriter w;
  w.begin_object();
  w.field("version", 1L);
  w.field("kind", params.kind == PredictorKind::linear ? "linear" : "resnet");
  w.field("feature_dim", params.feature_dim);
  w.field("output_dim", params.output_dim);
  w.field("dropout_rate", params.dropout_rate);
  w.field("input_skips_frozen", params.input_skips_frozen);
  w.key("feature_layout");
  w.begin_object();
  w.field("include_past_price", layout.include_past_price);
  w.end_object();
  w.key("standardizer");
  w.begin_object();
  w.field("mean", params.standardizer.mean);
  w.field("stddev", params.standardizer.stddev);
  w.end_object();
  w.key("layers");
  w.begin_array();
  for (const auto& l : params.layers) {
    w.begin_object();
    write_matrix(w, "theta_y", l.theta_y);
    write_matrix(w, "theta_x", l.theta_x);
    w.field("theta_b", l.theta_b);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

Checkpoint checkpoint_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("checkpoint: malformed JSON");
  if (j.at("version").get<long>() != 1)
    throw DataError("checkpoint: unsupported version " +
                    j.at("version").dump());

  Checkpoint ck;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear")
    ck.params.kind = PredictorKind::linear;
  else if (kind == "resnet")
    ck.params.kind = PredictorKind::resnet;
  else
    throw DataError("checkpoint: unknown kind '" + kind + "'");
  ck.params.feature_dim = j.at("feature_dim").get<int>();
  ck.params.output_dim = j.at("output_dim").get<int>();
  ck.params.dropout_rate = j.at("dropout_rate").get<double>();
  ck.params.input_skips_frozen = j.value("input_skips_frozen", false);
  ck.layout.include_past_price =
      j.at("feature_layout").at("include_past_price").get<bool>();
  ck.params.standardizer.mean = read_vec(j.at("standardizer").at("mean"));
  ck.params.standardizer.stddev = read_vec(j.at("standardizer").at("stddev"));
  for (const auto& jl : j.at("layers")) {
    LayerParams l;
    l.theta_y = read_matrix(jl.at("theta_y"));
    l.theta_x = read_matrix(jl.at("theta_x"));
    l.theta_b = read_vec(jl.at("theta_b"));
    ck.params.layers.push_back(std::move(l));
  }
  if (ck.params.layers.empty()) throw DataError("checkpoint: no layers");
  return ck;
}

void save_checkpoint(const PredictorParams& params, const FeatureLayout& layout,
                     const std::string& path) {
  write_text_file(path, checkpoint_to_json(params, layout));
}

Checkpoint load_checkpoint(const std::string& path) {
  return checkpoint_from_json(read_text_file(path));
}

}  // namespace dfp
