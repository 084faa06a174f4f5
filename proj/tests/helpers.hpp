#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "fedstyle/nn.hpp"

namespace testutil {

using fedstyle::ModelDims;
using fedstyle::ModelParams;
using fedstyle::Rng;
using fedstyle::Vector;

inline Vector rand_vec(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline ModelParams rand_params(const ModelDims& dims, Rng& rng) {
  ModelParams p = fedstyle::init_params(dims, rng);
  for (auto& b : p.b1) b = rng.uniform(-0.1, 0.1);
  for (auto& b : p.b2) b = rng.uniform(-0.1, 0.1);
  for (auto& b : p.b3) b = rng.uniform(-0.1, 0.1);
  return p;
}

// Relative error with a floor so that near-zero pairs compare absolutely.
inline double rel_err(double analytic, double numeric) {
  double scale = std::max(std::fabs(analytic), std::fabs(numeric));
  if (scale < 1e-8) return 0.0;
  return std::fabs(analytic - numeric) / scale;
}

// Central finite differences of a scalar loss over every parameter
// entry, compared against the analytic gradient set. Returns the max
// relative error.
inline double fd_check_params(const std::function<double(const ModelParams&)>& loss,
                              const ModelParams& params,
                              const fedstyle::GradientSet& analytic,
                              double step = 1e-5) {
  double worst = 0.0;
  ModelParams probe = params;
  const fedstyle::GradientSet* grad = &analytic;

  auto check_tensor = [&](std::vector<double>& tensor,
                          const std::vector<double>& g) {
    for (size_t i = 0; i < tensor.size(); ++i) {
      double keep = tensor[i];
      tensor[i] = keep + step;
      double up = loss(probe);
      tensor[i] = keep - step;
      double down = loss(probe);
      tensor[i] = keep;
      double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, rel_err(g[i], numeric));
    }
  };
  check_tensor(probe.W1.data, grad->W1.data);
  check_tensor(probe.b1, grad->b1);
  check_tensor(probe.W2.data, grad->W2.data);
  check_tensor(probe.b2, grad->b2);
  check_tensor(probe.W3.data, grad->W3.data);
  check_tensor(probe.b3, grad->b3);
  return worst;
}

// Same, for a loss of a single vector argument.
inline double fd_check_vector(const std::function<double(const Vector&)>& loss,
                              const Vector& at, const Vector& analytic,
                              double step = 1e-5) {
  double worst = 0.0;
  Vector probe = at;
  for (size_t i = 0; i < probe.size(); ++i) {
    double keep = probe[i];
    probe[i] = keep + step;
    double up = loss(probe);
    probe[i] = keep - step;
    double down = loss(probe);
    probe[i] = keep;
    double numeric = (up - down) / (2.0 * step);
    worst = std::max(worst, rel_err(analytic[i], numeric));
  }
  return worst;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::fabs(a[i] - b[i]));
  return worst;
}

inline double params_max_diff(const ModelParams& a, const ModelParams& b) {
  double worst = 0.0;
  worst = std::max(worst, max_abs_diff(a.W1.data, b.W1.data));
  worst = std::max(worst, max_abs_diff(a.b1, b.b1));
  worst = std::max(worst, max_abs_diff(a.W2.data, b.W2.data));
  worst = std::max(worst, max_abs_diff(a.b2, b.b2));
  worst = std::max(worst, max_abs_diff(a.W3.data, b.W3.data));
  worst = std::max(worst, max_abs_diff(a.b3, b.b3));
  return worst;
}

inline bool params_identical(const ModelParams& a, const ModelParams& b) {
  return a.W1.data == b.W1.data && a.b1 == b.b1 && a.W2.data == b.W2.data &&
         a.b2 == b.b2 && a.W3.data == b.W3.data && a.b3 == b.b3;
}

}  // namespace testutil
