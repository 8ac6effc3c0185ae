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

#ifndef DPBETA_SIMULATION_HPP_
#define DPBETA_SIMULATION_HPP_

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dpbeta/estimator.hpp"
#include "dpbeta/inference.hpp"
#include "dpbeta/network.hpp"
#include "dpbeta/random.hpp"
#include "dpbeta/release.hpp"

namespace dpbeta {

// How the privacy parameter scales with n.
struct EpsilonRule {
  enum class Kind { kLogNOverN16, kLogNOverN14, kCustom, kNoPrivacy };
  Kind kind = Kind::kLogNOverN16;
  double value = 0.0;  // only for kCustom

  static EpsilonRule logn_n16() { return {Kind::kLogNOverN16, 0.0}; }
  static EpsilonRule logn_n14() { return {Kind::kLogNOverN14, 0.0}; }
  static EpsilonRule custom(double eps) { return {Kind::kCustom, eps}; }
  static EpsilonRule none() { return {Kind::kNoPrivacy, 0.0}; }

  bool is_private() const { return kind != Kind::kNoPrivacy; }
  bool operator==(const EpsilonRule&) const = default;
};

inline std::string to_string(const EpsilonRule& r) {
  switch (r.kind) {
    case EpsilonRule::Kind::kLogNOverN16: return "logn_n16";
    case EpsilonRule::Kind::kLogNOverN14: return "logn_n14";
    case EpsilonRule::Kind::kNoPrivacy: return "none";
    case EpsilonRule::Kind::kCustom: break;
  }
  return "custom";
}

// log n / n^{1/6}, log n / n^{1/4}, or a fixed value.
inline double epsilon_of(const EpsilonRule& rule, int n) {
  if (n < 2) throw std::invalid_argument("epsilon_of: n must be >= 2");
  const double logn = std::log(static_cast<double>(n));
  switch (rule.kind) {
    case EpsilonRule::Kind::kLogNOverN16: return logn / std::pow(n, 1.0 / 6.0);
    case EpsilonRule::Kind::kLogNOverN14: return logn / std::pow(n, 0.25);
    case EpsilonRule::Kind::kCustom: return rule.value;
    case EpsilonRule::Kind::kNoPrivacy: break;
  }
  throw std::invalid_argument("epsilon_of: rule has no epsilon");
}

// beta*_i = (i - 1) c log n / (n - 1), i = 1..n.
inline Vector make_beta_star(int n, double c) {
  if (n < 2) throw std::invalid_argument("make_beta_star: n must be >= 2");
  if (!(c >= 0.0)) throw std::invalid_argument("make_beta_star: c must be >= 0");
  Vector b(n);
  const double step = c * std::log(static_cast<double>(n)) / (n - 1);
  for (int i = 0; i < n; ++i) b[i] = i * step;
  return b;
}

// Two +/-1 node attributes per node, P(x1 = 1) = prob1 and P(x2 = 1) = prob2.
inline std::vector<std::array<int, 2>> draw_sim_attributes(int n, Rng& rng,
                                                           double prob1 = 0.4,
                                                           double prob2 = 0.5) {
  std::vector<std::array<int, 2>> x(static_cast<std::size_t>(n));
  for (auto& xi : x) {
    xi[0] = rng.rademacher(prob1);
    xi[1] = rng.rademacher(prob2);
  }
  return x;
}

// z_ij = (x_i1 x_j1, x_i2 x_j2) over attributes from draw_sim_attributes.
inline PairCovariates make_sim_covariates(int n, Rng& rng,
                                          double prob1 = 0.4,
                                          double prob2 = 0.5) {
  if (n < 2) throw std::invalid_argument("make_sim_covariates: n must be >= 2");
  const auto x = draw_sim_attributes(n, rng, prob1, prob2);
  return PairCovariates::from_function(n, 2, [&](int i, int j) {
    const auto& a = x[static_cast<std::size_t>(i)];
    const auto& b = x[static_cast<std::size_t>(j)];
    return std::array<double, 2>{static_cast<double>(a[0] * b[0]),
                                 static_cast<double>(a[1] * b[1])};
  });
}

// The five reported pairs (1,2), (n/2,n/2+1), (n-1,n), (1,n/2), (1,n),
// returned 0-based.
inline std::vector<std::pair<int, int>> default_pairs(int n) {
  const int h = n / 2;
  return {{0, 1}, {h - 1, h}, {n - 2, n - 1}, {0, h - 1}, {0, n - 1}};
}

struct SimDesign {
  int n = 100;
  double c = 0.05;
  EpsilonRule epsilon_rule = EpsilonRule::logn_n16();
  int k = 1;
  Vector gamma_star = (Vector(2) << 0.5, -0.5).finished();
  int replications = 500;
  std::uint64_t seed = 1;
  std::vector<std::pair<int, int>> pairs;  // 0-based; empty means default_pairs
  // Draw covariates once per design instead of once per replication.
  bool fixed_covariates = false;
  int threads = 0;  // 0: hardware concurrency
  FitConfig fit;
  InferenceOptions inference;

  std::vector<std::pair<int, int>> resolved_pairs() const {
    return pairs.empty() ? default_pairs(n) : pairs;
  }

  void validate() const {
    if (n < 3) throw std::invalid_argument("SimDesign: n must be >= 3");
    if (!(c >= 0.0)) throw std::invalid_argument("SimDesign: c must be >= 0");
    if (replications < 1) {
      throw std::invalid_argument("SimDesign: replications must be >= 1");
    }
    if (k < 1) throw std::invalid_argument("SimDesign: k must be >= 1");
    if (gamma_star.size() != 2) {
      throw std::invalid_argument("SimDesign: gamma_star must have length 2");
    }
    for (auto [i, j] : resolved_pairs()) {
      if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
        throw std::invalid_argument("SimDesign: invalid node pair");
      }
    }
    fit.validate();
  }
};

// Outcome of one replication.
struct ReplicationRecord {
  FitStatus status = FitStatus::kConverged;
  bool exists = false;
  std::vector<double> pair_xi;  // standardized contrasts
  std::vector<double> pair_length;
  std::vector<bool> pair_covered;
  Vector gamma_hat;
  Vector gamma_bc;
  std::vector<bool> gamma_covered;
  std::vector<bool> gamma_bc_covered;
  std::vector<double> gamma_length;
};

struct PairCell {
  int i = 0;  // 0-based
  int j = 0;
  double coverage_pct = 0.0;
  double mean_length = 0.0;
  std::vector<double> xi;  // in replication order, existing fits only
};

struct GammaCell {
  int index = 0;  // 0-based
  double coverage_bc_pct = 0.0;
  double coverage_pct = 0.0;
  double mean_bias = 0.0;     // mean of gamma_hat - gamma*
  double mean_bias_bc = 0.0;  // mean of gamma_bc - gamma*
  double median_estimate = 0.0;
  double median_estimate_bc = 0.0;
  double mean_length = 0.0;
};

struct SimTable {
  int n = 0;
  double c = 0.0;
  std::string epsilon_rule;
  double epsilon = 0.0;  // 0 when non-private
  int k = 1;
  int replications = 0;
  int existing = 0;
  double nonexistence_pct = 0.0;
  std::map<std::string, int> status_counts;
  std::vector<PairCell> pairs;
  std::vector<GammaCell> gamma;
};

namespace internal {

inline ReplicationRecord run_replication(const SimDesign& d,
                                         const PairCovariates* fixed_cov,
                                         const Vector& beta_star,
                                         std::uint64_t rep) {
  Rng rng(derive_seed(d.seed, rep));
  const PairCovariates cov = fixed_cov ? *fixed_cov : make_sim_covariates(d.n, rng);
  const ModelParams truth{beta_star, d.gamma_star};
  const Network net = sample_network(truth, cov, rng);
  const SufficientStats stats = sufficient_stats(net);
  const ReleasedStats released =
      d.epsilon_rule.is_private()
          ? release(stats, PrivacyBudget{epsilon_of(d.epsilon_rule, d.n), d.k},
                    cov.z_star(), cov.p(), rng)
          : noiseless_release(stats);
  const FitResult f = fit(released, cov, d.fit);

  ReplicationRecord rec;
  rec.status = f.status;
  rec.exists = f.exists;
  if (!f.exists) return rec;
  for (auto [i, j] : d.resolved_pairs()) {
    const double truth_diff = beta_star[i] - beta_star[j];
    const Interval iv = beta_contrast_ci(f, i, j, d.inference.level);
    rec.pair_xi.push_back(beta_contrast_pivot(f, i, j, truth_diff));
    rec.pair_length.push_back(iv.length());
    rec.pair_covered.push_back(iv.contains(truth_diff));
  }
  const auto plain = gamma_ci(f, cov, false, d.inference);
  const auto corrected = gamma_ci(f, cov, true, d.inference);
  rec.gamma_hat = f.gamma_hat;
  rec.gamma_bc = bias_correct(f, cov, d.inference.correction);
  for (std::size_t t = 0; t < plain.size(); ++t) {
    const double g = d.gamma_star[static_cast<Eigen::Index>(t)];
    rec.gamma_covered.push_back(plain[t].contains(g));
    rec.gamma_bc_covered.push_back(corrected[t].contains(g));
    rec.gamma_length.push_back(plain[t].length());
  }
  return rec;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline double pct(int count, int total) {
  return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : 100.0 * count / total;
}

}  // namespace internal

// Runs every replication of the design. Replication r always uses the seed
// derive_seed(design.seed, r) and records are reduced in replication order,
// so the table does not depend on the thread count.
inline std::vector<ReplicationRecord> run_replications(const SimDesign& design) {
  design.validate();
  const Vector beta_star = make_beta_star(design.n, design.c);
  std::optional<PairCovariates> fixed_cov;
  if (design.fixed_covariates) {
    Rng rng(derive_seed(design.seed, ~std::uint64_t{0}));
    fixed_cov = make_sim_covariates(design.n, rng);
  }
  const auto reps = static_cast<std::size_t>(design.replications);
  std::vector<ReplicationRecord> records(reps);
  unsigned threads = design.threads > 0 ? static_cast<unsigned>(design.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      records[r] = internal::run_replication(
          design, fixed_cov ? &*fixed_cov : nullptr, beta_star, r);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return records;
}

inline SimTable summarize(const SimDesign& design,
                          const std::vector<ReplicationRecord>& records) {
  SimTable tab;
  tab.n = design.n;
  tab.c = design.c;
  tab.epsilon_rule = to_string(design.epsilon_rule);
  tab.epsilon = design.epsilon_rule.is_private()
                    ? epsilon_of(design.epsilon_rule, design.n)
                    : 0.0;
  tab.k = design.k;
  tab.replications = static_cast<int>(records.size());

  const auto pairs = design.resolved_pairs();
  const auto p = static_cast<std::size_t>(design.gamma_star.size());
  std::vector<int> pair_cov(pairs.size(), 0);
  std::vector<double> pair_len(pairs.size(), 0.0);
  std::vector<std::vector<double>> pair_xi(pairs.size());
  std::vector<int> g_cov(p, 0), g_bc_cov(p, 0);
  std::vector<double> g_bias(p, 0.0), g_bias_bc(p, 0.0), g_len(p, 0.0);
  std::vector<std::vector<double>> g_est(p), g_est_bc(p);

  for (const auto& rec : records) {
    ++tab.status_counts[std::string(to_string(rec.status))];
    if (!rec.exists) continue;
    ++tab.existing;
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      pair_cov[q] += rec.pair_covered[q] ? 1 : 0;
      pair_len[q] += rec.pair_length[q];
      pair_xi[q].push_back(rec.pair_xi[q]);
    }
    for (std::size_t t = 0; t < p; ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      g_cov[t] += rec.gamma_covered[t] ? 1 : 0;
      g_bc_cov[t] += rec.gamma_bc_covered[t] ? 1 : 0;
      g_bias[t] += rec.gamma_hat[ti] - design.gamma_star[ti];
      g_bias_bc[t] += rec.gamma_bc[ti] - design.gamma_star[ti];
      g_len[t] += rec.gamma_length[t];
      g_est[t].push_back(rec.gamma_hat[ti]);
      g_est_bc[t].push_back(rec.gamma_bc[ti]);
    }
  }
  const int m = tab.existing;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  tab.nonexistence_pct = internal::pct(tab.replications - m, tab.replications);
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    tab.pairs.push_back({pairs[q].first, pairs[q].second,
                         internal::pct(pair_cov[q], m),
                         m ? pair_len[q] / m : nan, std::move(pair_xi[q])});
  }
  for (std::size_t t = 0; t < p; ++t) {
    tab.gamma.push_back({static_cast<int>(t), internal::pct(g_bc_cov[t], m),
                         internal::pct(g_cov[t], m), m ? g_bias[t] / m : nan,
                         m ? g_bias_bc[t] / m : nan, internal::median(g_est[t]),
                         internal::median(g_est_bc[t]), m ? g_len[t] / m : nan});
  }
  return tab;
}

inline SimTable run_design(const SimDesign& design) {
  return summarize(design, run_replications(design));
}

}  // namespace dpbeta

#endif  // DPBETA_SIMULATION_HPP_
