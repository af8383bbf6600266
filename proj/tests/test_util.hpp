#pragma once

#include <functional>

#include "dfp/core.hpp"
#include "dfp/rng.hpp"

namespace dfp::testing {

/// Central finite difference of a scalar function of a vector.
inline Vec central_diff(const std::function<double(const Vec&)>& f, const Vec& x,
                        double step) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec hi = x, lo = x;
    hi[i] += step;
    lo[i] -= step;
    g[i] = (f(hi) - f(lo)) / (2.0 * step);
  }
  return g;
}

inline PriceCurve random_uniform_curve(Rng& rng, int t, double lo, double hi) {
  PriceCurve c(t);
  for (int i = 0; i < t; ++i) c[i] = uniform_range(rng, lo, hi);
  return c;
}

/// Lognormal prices centered on `level` $/MWh.
inline PriceCurve random_lognormal_curve(Rng& rng, int t, double level,
                                         double sigma) {
  PriceCurve c(t);
  for (int i = 0; i < t; ++i)
    c[i] = level * std::exp(sigma * normal_unit(rng));
  return c;
}

inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-12, std::abs(want));
}

}  // namespace dfp::testing
