#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dfp/predictors.hpp"
#include "test_util.hpp"

using namespace dfp;
using namespace dfp::testing;

namespace {

// Seeded samples with standardized-looking features and a log price around
// log(40). When `exact_weight` is set, log price is exactly weight * x0.
std::vector<DaySample> synth_samples(int n, int feature_dim, int output_dim,
                                     std::uint64_t seed,
                                     double exact_weight = 0.0) {
  Rng rng(seed);
  std::vector<DaySample> out;
  for (int i = 0; i < n; ++i) {
    DaySample s;
    s.date = civil_from_days(18628 + i);
    s.features.resize(feature_dim);
    for (int j = 0; j < feature_dim; ++j)
      s.features[j] = normal_unit(rng);
    s.log_price.resize(output_dim);
    for (int t = 0; t < output_dim; ++t)
      s.log_price[t] = exact_weight != 0.0
                           ? exact_weight * s.features[0]
                           : std::log(40.0) + 0.3 * normal_unit(rng);
    s.price = s.log_price.array().exp();
    out.push_back(std::move(s));
  }
  return out;
}

PredictorParams small_resnet(std::uint64_t seed, double dropout = 0.0) {
  const auto train = synth_samples(30, 8, 4, seed + 100);
  return init_resnet(8, {6, 5}, 4, train, seed, dropout);
}

}  // namespace

TEST_CASE("linear forward is exactly affine") {
  const auto train = synth_samples(40, 6, 3, 1);
  PredictorParams p = init_linear(6, 3, train);
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    Vec x(6);
    for (int j = 0; j < 6; ++j) x[j] = normal_unit(rng);
    const Vec out = forward(p, x, RunMode::eval).output;
    const Vec expect = p.layers[0].theta_x * x + p.layers[0].theta_b;
    CHECK((out - expect).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("zero weights leave only the output bias") {
  PredictorParams p = small_resnet(3);
  for (auto& l : p.layers) {
    l.theta_y.setZero();
    l.theta_x.setZero();
    l.theta_b.setZero();
  }
  p.layers.back().theta_b << 1.0, -2.0, 0.5, 3.0;
  const Vec out = forward(p, Vec::Zero(8), RunMode::eval).output;
  CHECK((out - p.layers.back().theta_b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eval mode ignores the seed; train-mode dropout does not") {
  PredictorParams p = small_resnet(4, 0.2);
  Rng rng(5);
  Vec x(8);
  for (int j = 0; j < 8; ++j) x[j] = normal_unit(rng);

  const Vec e1 = forward(p, x, RunMode::eval, 1).output;
  const Vec e2 = forward(p, x, RunMode::eval, 999).output;
  CHECK(e1 == e2);

  const Vec t1 = forward(p, x, RunMode::train, 1).output;
  const Vec t1b = forward(p, x, RunMode::train, 1).output;
  const Vec t2 = forward(p, x, RunMode::train, 2).output;
  CHECK(t1 == t1b);
  CHECK((t1 - t2).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("linear backward is the outer-product rule") {
  const auto train = synth_samples(40, 5, 3, 6);
  PredictorParams p = init_linear(5, 3, train);
  Rng rng(7);
  Vec x(5), g(3);
  for (int j = 0; j < 5; ++j) x[j] = normal_unit(rng);
  for (int j = 0; j < 3; ++j) g[j] = normal_unit(rng);

  const ForwardResult fw = forward(p, x, RunMode::train);
  const PredictorGrads grads = backward(p, *fw.trace, g);
  CHECK((grads.layers[0].theta_x - g * x.transpose()).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((grads.layers[0].theta_b - g).cwiseAbs().maxCoeff() == 0.0);

  const PredictorGrads zero = backward(p, *fw.trace, Vec::Zero(3));
  CHECK(flatten_grads(zero, p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("resnet backward matches finite differences with frozen masks") {
  for (std::uint64_t seed : {10u, 11u, 12u, 13u, 14u}) {
    PredictorParams p = small_resnet(seed, seed % 2 == 0 ? 0.2 : 0.0);
    Rng rng(seed * 31 + 1);
    Vec x(8), g(4);
    for (int j = 0; j < 8; ++j) x[j] = normal_unit(rng);
    for (int j = 0; j < 4; ++j) g[j] = normal_unit(rng);
    const std::uint64_t mask_seed = seed * 7 + 3;

    const ForwardResult fw = forward(p, x, RunMode::train, mask_seed);
    const Vec got = flatten_grads(backward(p, *fw.trace, g), p);

    Vec theta = flatten_params(p);
    auto f = [&](const Vec& th) {
      PredictorParams q = p;
      unflatten_params(q, th);
      return g.dot(forward(q, x, RunMode::train, mask_seed).output);
    };
    const Vec fd = central_diff(f, theta, 1e-6);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      if (std::abs(fd[i]) < 1e-10) {
        CHECK(std::abs(got[i]) < 1e-7);
      } else {
        CHECK(rel_err(got[i], fd[i]) < 1e-5);
      }
    }
  }
}

TEST_CASE("least-squares init recovers an exact linear target") {
  const auto train = synth_samples(60, 4, 2, 20, 2.0);
  PredictorParams p = init_linear(4, 2, train);
  CHECK(p.layers[0].theta_x(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(p.layers[0].theta_x(1, 0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(p.layers[0].theta_x(0, 1)) < 1e-6);
  CHECK(std::abs(p.layers[0].theta_b[0]) < 1e-6);
}

TEST_CASE("least-squares init of a constant target is the bias") {
  auto train = synth_samples(30, 4, 2, 21);
  for (auto& s : train) {
    s.log_price.setConstant(3.25);
    s.price = s.log_price.array().exp();
  }
  PredictorParams p = init_linear(4, 2, train);
  CHECK(p.layers[0].theta_x.cwiseAbs().maxCoeff() < 1e-5);
  CHECK(p.layers[0].theta_b[0] == doctest::Approx(3.25).epsilon(1e-6));
}

TEST_CASE("least-squares init agrees with a normal-equations oracle") {
  const int n = 50, f = 7, out = 3;
  const auto train = synth_samples(n, f, out, 22);
  PredictorParams p = init_linear(f, out, train);

  // Independent route: (X'X + delta I) W = X'Y on the intercept-augmented X.
  Mat x(n, f + 1);
  Mat y(n, out);
  for (int i = 0; i < n; ++i) {
    x.row(i).head(f) = train[i].features.transpose();
    x(i, f) = 1.0;
    y.row(i) = train[i].log_price.transpose();
  }
  const Mat gram = x.transpose() * x + 1e-6 * Mat::Identity(f + 1, f + 1);
  const Mat w = gram.ldlt().solve(x.transpose() * y);

  const double fit_residual =
      (x * w - y).norm();
  Mat w_impl(f + 1, out);
  w_impl.topRows(f) = p.layers[0].theta_x.transpose();
  w_impl.row(f) = p.layers[0].theta_b.transpose();
  CHECK((x * w_impl - y).norm() ==
        doctest::Approx(fit_residual).epsilon(1e-8));
  CHECK((w - w_impl).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("resnet init is seed-deterministic and shaped as declared") {
  const auto train = synth_samples(40, 147, 24, 23);
  PredictorParams a = init_resnet(147, {50, 50}, 24, train, 77);
  PredictorParams b = init_resnet(147, {50, 50}, 24, train, 77);
  CHECK(flatten_params(a) == flatten_params(b));

  // Shape arithmetic: (50x147 + 50) + (50x50 + 50x147 + 50)
  //                 + (24x50 + 24x147 + 24).
  CHECK(param_count(a) == 7400 + 9900 + 4752);

  PredictorParams c = init_resnet(147, {50, 50}, 24, train, 78);
  CHECK((flatten_params(a) - flatten_params(c)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("silencing the hidden stack leaves the least-squares path") {
  const auto train = synth_samples(40, 8, 4, 24);
  PredictorParams net = init_resnet(8, {6, 5}, 4, train, 5);
  for (auto& l : net.layers) l.theta_y = Mat::Zero(l.theta_y.rows(), l.theta_y.cols());
  for (std::size_t i = 0; i + 1 < net.layers.size(); ++i)
    net.layers[i].theta_x.setZero();
  PredictorParams lin = init_linear(8, 4, train);

  Rng rng(25);
  for (int trial = 0; trial < 5; ++trial) {
    Vec x(8);
    for (int j = 0; j < 8; ++j) x[j] = normal_unit(rng);
    const Vec a = forward(net, x, RunMode::eval).output;
    const Vec b = forward(lin, x, RunMode::eval).output;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("predict_price standardizes, runs eval, exponentiates") {
  const auto train = synth_samples(30, 3, 2, 26);
  PredictorParams p = init_linear(3, 2, train);
  p.layers[0].theta_x.setZero();
  p.layers[0].theta_b.setConstant(std::log(40.0));
  Vec raw(3);
  raw << 100.0, -4.0, 7.0;
  const PriceCurve c = predict_price(p, raw);
  CHECK(c[0] == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(c[1] == doctest::Approx(40.0).epsilon(1e-12));

  p.standardizer.mean << 100.0, 0.0, 0.0;
  p.standardizer.stddev << 10.0, 1.0, 1.0;
  p.layers[0].theta_x(0, 0) = 1.0;
  const PriceCurve d = predict_price(p, raw);
  CHECK(d[0] == doctest::Approx(40.0 * std::exp((100.0 - 100.0) / 10.0)));

  CHECK_THROWS_AS(predict_price(p, Vec::Zero(5)), DataError);
}

TEST_CASE("checkpoints round-trip bit for bit and reject unknown versions") {
  PredictorParams p = small_resnet(30, 0.2);
  p.standardizer.mean = Vec::LinSpaced(8, -1.0, 1.0);
  p.standardizer.stddev = Vec::LinSpaced(8, 0.5, 2.0);
  p.input_skips_frozen = true;
  FeatureLayout layout;
  layout.include_past_price = false;

  const std::string doc = checkpoint_to_json(p, layout);
  const Checkpoint ck = checkpoint_from_json(doc);
  CHECK(flatten_params(ck.params) == flatten_params(p));
  CHECK(ck.params.standardizer.mean == p.standardizer.mean);
  CHECK(ck.params.standardizer.stddev == p.standardizer.stddev);
  CHECK(ck.params.dropout_rate == p.dropout_rate);
  CHECK(ck.params.input_skips_frozen == true);
  CHECK(ck.layout.include_past_price == false);
  CHECK(checkpoint_to_json(ck.params, ck.layout) == doc);

  // predict_price is preserved through persistence.
  Rng rng(31);
  Vec raw(8);
  for (int j = 0; j < 8; ++j) raw[j] = normal_unit(rng);
  CHECK(predict_price(ck.params, raw) == predict_price(p, raw));

  std::string v2 = doc;
  const auto pos = v2.find("\"version\":1");
  v2.replace(pos, 11, "\"version\":2");
  CHECK_THROWS_AS(checkpoint_from_json(v2), DataError);
}
