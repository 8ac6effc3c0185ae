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

#ifndef DPBETA_RELEASE_HPP_
#define DPBETA_RELEASE_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dpbeta/network.hpp"
#include "dpbeta/random.hpp"

namespace dpbeta {

// (k, epsilon) pair for k-edge differential privacy.
struct PrivacyBudget {
  double epsilon = 1.0;
  int k = 1;

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw std::invalid_argument("privacy budget: epsilon must be finite and > 0");
    }
    if (k < 1) throw std::invalid_argument("privacy budget: k must be >= 1");
  }

  bool operator==(const PrivacyBudget&) const = default;
};

// Noisy sufficient statistics. A release without a budget is the exact,
// non-private statistic (lambda1 = lambda2 = 0).
struct ReleasedStats {
  int n = 0;
  int p = 0;
  std::vector<std::int64_t> d_tilde;
  Vector y_tilde;
  std::optional<PrivacyBudget> budget;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::optional<std::uint64_t> seed;

  bool operator==(const ReleasedStats& o) const {
    return n == o.n && p == o.p && d_tilde == o.d_tilde &&
           y_tilde.size() == o.y_tilde.size() && y_tilde == o.y_tilde &&
           budget == o.budget && lambda1 == o.lambda1 &&
           lambda2 == o.lambda2 && seed == o.seed;
  }
};

// L1 sensitivity of the degree sequence: toggling k edges moves 2k endpoints.
inline std::int64_t sensitivity_degree(const PrivacyBudget& budget) {
  budget.validate();
  return 2 * static_cast<std::int64_t>(budget.k);
}

// L1 sensitivity of sum_{i<j} a_ij z_ij: each toggled edge moves every one of
// the p coordinates by at most z*.
inline double sensitivity_covariate(const PrivacyBudget& budget, int p,
                                    double z_star) {
  budget.validate();
  if (p < 0) throw std::invalid_argument("sensitivity_covariate: p < 0");
  if (!(z_star >= 0.0)) {
    throw std::invalid_argument("sensitivity_covariate: z* < 0");
  }
  return static_cast<double>(p) * budget.k * z_star;
}

// Discrete Laplace ratio for the degree channel at budget epsilon/2:
// lambda1 = exp(-(epsilon/2) / (2k)).
inline double degree_noise_ratio(const PrivacyBudget& budget) {
  budget.validate();
  return std::exp(-budget.epsilon / (4.0 * budget.k));
}

// Laplace scale for the covariate channel at budget epsilon/2:
// lambda2 = p k z* / (epsilon/2).
inline double covariate_noise_scale(const PrivacyBudget& budget, int p,
                                    double z_star) {
  return 2.0 * sensitivity_covariate(budget, p, z_star) / budget.epsilon;
}

// P(X = x) = (1 - lambda)/(1 + lambda) lambda^|x|, sampled as the difference
// of two i.i.d. geometric counts with failure ratio lambda.
inline std::int64_t sample_discrete_laplace(double lambda, Rng& rng) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("discrete Laplace: lambda must lie in (0, 1)");
  }
  const std::int64_t a = rng.geometric_failures(lambda);
  const std::int64_t b = rng.geometric_failures(lambda);
  return a - b;
}

// Laplace(0, scale) by inverse CDF.
inline double sample_laplace(double scale, Rng& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("Laplace: scale must be finite and > 0");
  }
  const double u = rng.uniform_open() - 0.5;
  return u < 0.0 ? scale * std::log1p(2.0 * u)
                 : -scale * std::log1p(-2.0 * u);
}

// Exact statistics wrapped as a release, for non-private fitting.
inline ReleasedStats noiseless_release(const SufficientStats& stats) {
  ReleasedStats r;
  r.n = static_cast<int>(stats.degrees.size());
  r.p = static_cast<int>(stats.y.size());
  r.d_tilde = stats.degrees;
  r.y_tilde = stats.y;
  return r;
}

// Joint mechanism: discrete Laplace noise on d and continuous Laplace noise
// on y, each channel spending epsilon/2. Negative released degrees are kept
// as-is. With p = 0 only the degrees are released.
inline ReleasedStats release(const SufficientStats& stats,
                             const PrivacyBudget& budget, double z_star, int p,
                             Rng& rng) {
  budget.validate();
  if (p != stats.y.size()) {
    throw std::invalid_argument("release: p does not match the statistic");
  }
  ReleasedStats r = noiseless_release(stats);
  r.budget = budget;
  r.lambda1 = degree_noise_ratio(budget);
  r.lambda2 = covariate_noise_scale(budget, p, z_star);
  // lambda1 underflows to 0 for enormous epsilon: the noise is then a.s. 0.
  if (r.lambda1 > 0.0) {
    for (auto& d : r.d_tilde) d += sample_discrete_laplace(r.lambda1, rng);
  }
  if (r.lambda2 > 0.0) {
    for (int t = 0; t < p; ++t) r.y_tilde[t] += sample_laplace(r.lambda2, rng);
  }
  return r;
}

inline ReleasedStats release(const Network& net, const PrivacyBudget& budget,
                             Rng& rng) {
  return release(sufficient_stats(net), budget, net.z_star(), net.p(), rng);
}

}  // namespace dpbeta

#endif  // DPBETA_RELEASE_HPP_
