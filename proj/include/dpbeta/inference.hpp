//
// Copyright 2026 The dpbeta Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPBETA_INFERENCE_HPP_
#define DPBETA_INFERENCE_HPP_

#include <Eigen/Dense>
#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpbeta/estimator.hpp"
#include "dpbeta/logistic.hpp"
#include "dpbeta/network.hpp"

namespace dpbeta {

// Standard normal quantile. Acklam's rational approximation followed by one
// Halley step against std::erfc, which brings it to full double accuracy.
inline double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw std::domain_error("normal_quantile: probability must lie in (0, 1)");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (prob < p_low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - p_low) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - prob;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

// Two-sided critical value for a central interval at `level`.
inline double critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("confidence level must lie in (0, 1)");
  }
  return normal_quantile(0.5 + 0.5 * level);
}

struct Interval {
  std::string label;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;

  double length() const { return upper - lower; }
  bool contains(double x) const { return lower <= x && x <= upper; }
};

// Which covariance to report for gamma_hat.
enum class GammaVariance {
  kInverseH,   // Cov(gamma_hat) = H^{-1}
  kHbarOverN,  // Cov(gamma_hat) = Hbar / N with Hbar = H / N
};

// Which analytical bias correction to apply to gamma_hat.
enum class BiasCorrection {
  // gamma_hat - N^{-1/2} H^{-1} B_hat
  kFirstOrder,
  // gamma_hat + (1/2) N^{1/2} H^{-1} B_hat, the leading second-order term of
  // the profiled residual at the truth.
  kSecondOrder,
};

inline std::string_view to_string(BiasCorrection b) {
  return b == BiasCorrection::kFirstOrder ? "first_order" : "second_order";
}

struct InferenceOptions {
  double level = 0.95;
  GammaVariance variance = GammaVariance::kInverseH;
  BiasCorrection correction = BiasCorrection::kSecondOrder;
};

namespace internal {

inline void require_exists(const FitResult& fit) {
  if (!fit.exists) {
    throw std::invalid_argument("inference requires an existing estimate");
  }
}

inline Matrix invert_H(const Matrix& H) {
  Eigen::FullPivLU<Matrix> lu(H);
  if (!lu.isInvertible()) throw std::domain_error("H is singular");
  return lu.inverse();
}

}  // namespace internal

// v_ii = sum_{j != i} mu'(pi_ij), the diagonal of V at the estimate.
inline Vector v_diag(const FitResult& fit) {
  internal::require_exists(fit);
  return fit.V.diagonal();
}

// (beta_i - beta_j) +/- z (1/v_ii + 1/v_jj)^{1/2}.
inline Interval beta_contrast_ci(const FitResult& fit, int i, int j,
                                 double level = 0.95) {
  internal::require_exists(fit);
  const int n = static_cast<int>(fit.beta_hat.size());
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw std::out_of_range("beta_contrast_ci: node index out of range");
  }
  if (i == j) throw std::invalid_argument("beta_contrast_ci: requires i != j");
  const double se = std::sqrt(1.0 / fit.V(i, i) + 1.0 / fit.V(j, j));
  const double est = fit.beta_hat[i] - fit.beta_hat[j];
  const double half = critical_value(level) * se;
  return {"beta[" + std::to_string(i + 1) + "]-beta[" + std::to_string(j + 1) + "]",
          est, est - half, est + half, level};
}

// Standardized contrast [b_i - b_j - (true_i - true_j)] / (1/v_ii + 1/v_jj)^{1/2}.
inline double beta_contrast_pivot(const FitResult& fit, int i, int j,
                                  double true_difference) {
  internal::require_exists(fit);
  const double se = std::sqrt(1.0 / fit.V(i, i) + 1.0 / fit.V(j, j));
  return (fit.beta_hat[i] - fit.beta_hat[j] - true_difference) / se;
}

// B = N^{-1/2} sum_k [sum_{j != k} z_kj mu''(pi_kj)] / [sum_{j != k} mu'(pi_kj)].
inline Vector bias_B(const ModelParams& params, const PairCovariates& cov) {
  internal::check_dims(params, cov);
  const int n = cov.n();
  const int p = cov.p();
  Matrix num = Matrix::Zero(p, n);
  Vector den = Vector::Zero(n);
  for_each_pair(n, [&](int i, int j, std::size_t idx) {
    const auto md = mu_derivs(params.beta[i] + params.beta[j] +
                              cov.dot_index(idx, params.gamma));
    den[i] += md.d1;
    den[j] += md.d1;
    const auto z = cov.at_index(idx);
    for (int t = 0; t < p; ++t) {
      num(t, i) += z[static_cast<std::size_t>(t)] * md.d2;
      num(t, j) += z[static_cast<std::size_t>(t)] * md.d2;
    }
  });
  Vector B = Vector::Zero(p);
  for (int k = 0; k < n; ++k) B += num.col(k) / den[k];
  return B / std::sqrt(static_cast<double>(num_pairs(n)));
}

inline Vector bias_correct(const FitResult& fit, const PairCovariates& cov,
                           BiasCorrection form = BiasCorrection::kSecondOrder) {
  internal::require_exists(fit);
  if (fit.gamma_hat.size() == 0) return fit.gamma_hat;
  const Vector B = bias_B(fit.params(), cov);
  const Vector HinvB = internal::invert_H(fit.H) * B;
  const double rootN = std::sqrt(static_cast<double>(num_pairs(cov.n())));
  if (form == BiasCorrection::kFirstOrder) return fit.gamma_hat - HinvB / rootN;
  return fit.gamma_hat + 0.5 * rootN * HinvB;
}

inline Matrix gamma_covariance(const FitResult& fit, GammaVariance form) {
  internal::require_exists(fit);
  if (fit.H.rows() == 0) return Matrix(0, 0);
  if (form == GammaVariance::kInverseH) return internal::invert_H(fit.H);
  const double N = static_cast<double>(num_pairs(static_cast<int>(fit.beta_hat.size())));
  return fit.H / (N * N);
}

// Per-component Wald intervals for gamma, centered at gamma_hat or at the
// bias-corrected estimate.
inline std::vector<Interval> gamma_ci(const FitResult& fit,
                                      const PairCovariates& cov,
                                      bool bias_corrected,
                                      const InferenceOptions& opts = {}) {
  internal::require_exists(fit);
  const auto p = fit.gamma_hat.size();
  std::vector<Interval> out;
  if (p == 0) return out;
  const Matrix cov_g = gamma_covariance(fit, opts.variance);
  const Vector center =
      bias_corrected ? bias_correct(fit, cov, opts.correction) : fit.gamma_hat;
  const double z = critical_value(opts.level);
  for (Eigen::Index t = 0; t < p; ++t) {
    const double half = z * std::sqrt(cov_g(t, t));
    out.push_back({std::string(bias_corrected ? "gamma_bc[" : "gamma[") +
                       std::to_string(t + 1) + "]",
                   center[t], center[t] - half, center[t] + half, opts.level});
  }
  return out;
}

struct InferenceReport {
  Vector v_diag;
  Matrix gamma_cov;
  Vector B_hat;
  Vector gamma_bc;
  std::vector<Interval> intervals;
};

// Everything inference produces for one fit. pairs are 0-based node pairs
// for which beta contrasts are reported.
inline InferenceReport infer(const FitResult& fit, const PairCovariates& cov,
                             const std::vector<std::pair<int, int>>& pairs,
                             const InferenceOptions& opts = {}) {
  internal::require_exists(fit);
  InferenceReport r;
  r.v_diag = v_diag(fit);
  r.gamma_cov = gamma_covariance(fit, opts.variance);
  r.B_hat = bias_B(fit.params(), cov);
  r.gamma_bc = bias_correct(fit, cov, opts.correction);
  for (auto [i, j] : pairs) {
    r.intervals.push_back(beta_contrast_ci(fit, i, j, opts.level));
  }
  for (auto& iv : gamma_ci(fit, cov, false, opts)) r.intervals.push_back(iv);
  for (auto& iv : gamma_ci(fit, cov, true, opts)) r.intervals.push_back(iv);
  return r;
}

}  // namespace dpbeta

#endif  // DPBETA_INFERENCE_HPP_
