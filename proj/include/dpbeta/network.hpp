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

#ifndef DPBETA_NETWORK_HPP_
#define DPBETA_NETWORK_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpbeta/logistic.hpp"
#include "dpbeta/random.hpp"

namespace dpbeta {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Number of unordered pairs {i, j} on n nodes.
constexpr std::size_t num_pairs(int n) {
  return n < 2 ? 0 : static_cast<std::size_t>(n) * (n - 1) / 2;
}

// Row-major index of the pair (i, j), i < j, in the strict upper triangle.
constexpr std::size_t pair_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  const auto ui = static_cast<std::size_t>(i);
  return ui * static_cast<std::size_t>(n) - ui * (ui + 1) / 2 +
         static_cast<std::size_t>(j - i - 1);
}

// Calls f(i, j, pair_index) for every i < j in index order.
template <typename F>
void for_each_pair(int n, F&& f) {
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      f(i, j, idx++);
    }
  }
}

// Dense p-vector of covariates per unordered pair, z_ij = z_ji. Immutable once
// built; z* (largest absolute entry) is computed at construction.
class PairCovariates {
 public:
  PairCovariates() = default;

  // values holds num_pairs(n) * p entries, pair-major in pair_index order.
  PairCovariates(int n, int p, std::vector<double> values)
      : n_(n), p_(p), values_(std::move(values)) {
    if (n < 0 || p < 0) {
      throw std::invalid_argument("PairCovariates: negative dimension");
    }
    if (values_.size() != num_pairs(n) * static_cast<std::size_t>(p)) {
      throw std::invalid_argument("PairCovariates: expected " +
                                  std::to_string(num_pairs(n) * p) +
                                  " values, got " +
                                  std::to_string(values_.size()));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("PairCovariates: non-finite covariate");
      }
      z_star_ = std::max(z_star_, std::fabs(v));
    }
  }

  // No covariates (p = 0).
  static PairCovariates empty(int n) { return PairCovariates(n, 0, {}); }

  // Builds z_ij = g(i, j) for i < j; g returns a range of length p.
  template <typename G>
  static PairCovariates from_function(int n, int p, G&& g) {
    std::vector<double> values(num_pairs(n) * static_cast<std::size_t>(p));
    for_each_pair(n, [&](int i, int j, std::size_t idx) {
      const auto z = g(i, j);
      if (static_cast<int>(std::size(z)) != p) {
        throw std::invalid_argument("PairCovariates: covariate length mismatch");
      }
      std::copy(std::begin(z), std::end(z),
                values.begin() + static_cast<std::ptrdiff_t>(idx * p));
    });
    return PairCovariates(n, p, std::move(values));
  }

  int n() const { return n_; }
  int p() const { return p_; }
  double z_star() const { return z_star_; }

  std::span<const double> at_index(std::size_t idx) const {
    return {values_.data() + idx * static_cast<std::size_t>(p_),
            static_cast<std::size_t>(p_)};
  }

  std::span<const double> at(int i, int j) const {
    check_pair(i, j);
    return at_index(pair_index(n_, i, j));
  }

  // z_ij . gamma for the pair at idx.
  double dot_index(std::size_t idx, const Vector& gamma) const {
    double s = 0.0;
    const double* z = values_.data() + idx * static_cast<std::size_t>(p_);
    for (int t = 0; t < p_; ++t) s += z[t] * gamma[t];
    return s;
  }

  const std::vector<double>& values() const { return values_; }

  bool operator==(const PairCovariates&) const = default;

 private:
  void check_pair(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) {
      throw std::out_of_range("node index out of range");
    }
    if (i == j) throw std::invalid_argument("pairs require i != j");
  }

  int n_ = 0;
  int p_ = 0;
  std::vector<double> values_;
  double z_star_ = 0.0;
};

// Undirected simple graph with pairwise covariates. Adjacency is the strict
// upper triangle packed as bits; self-loops cannot be represented.
class Network {
 public:
  Network() = default;

  explicit Network(PairCovariates covariates)
      : n_(covariates.n()),
        adjacency_(num_pairs(covariates.n()), false),
        covariates_(std::move(covariates)) {}

  Network(PairCovariates covariates, std::vector<bool> adjacency)
      : n_(covariates.n()),
        adjacency_(std::move(adjacency)),
        covariates_(std::move(covariates)) {
    if (adjacency_.size() != num_pairs(n_)) {
      throw std::invalid_argument("Network: adjacency size mismatch");
    }
  }

  // Edges given as 0-based node pairs. Duplicates collapse, self-loops throw.
  static Network from_edges(PairCovariates covariates,
                            std::span<const std::pair<int, int>> edges) {
    Network net(std::move(covariates));
    for (auto [u, v] : edges) net.add_edge(u, v);
    return net;
  }

  int n() const { return n_; }
  int p() const { return covariates_.p(); }
  double z_star() const { return covariates_.z_star(); }
  const PairCovariates& covariates() const { return covariates_; }
  const std::vector<bool>& adjacency() const { return adjacency_; }

  bool has_edge(int i, int j) const {
    check_pair(i, j);
    return adjacency_[pair_index(n_, i, j)];
  }

  bool edge_at_index(std::size_t idx) const { return adjacency_[idx]; }

  std::size_t num_edges() const {
    return static_cast<std::size_t>(
        std::count(adjacency_.begin(), adjacency_.end(), true));
  }

  bool operator==(const Network&) const = default;

 private:
  void add_edge(int i, int j) {
    check_pair(i, j);
    adjacency_[pair_index(n_, i, j)] = true;
  }

  void check_pair(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) {
      throw std::out_of_range("node index out of range");
    }
    if (i == j) throw std::invalid_argument("self-loops are not allowed");
  }

  int n_ = 0;
  std::vector<bool> adjacency_;
  PairCovariates covariates_;
};

struct ModelParams {
  Vector beta;   // length n
  Vector gamma;  // length p

  bool finite() const { return beta.allFinite() && gamma.allFinite(); }
};

struct SufficientStats {
  std::vector<std::int64_t> degrees;  // d
  Vector y;                           // sum_{i<j} a_ij z_ij
};

namespace internal {

inline void check_dims(const ModelParams& params, const PairCovariates& cov) {
  if (params.beta.size() != cov.n() || params.gamma.size() != cov.p()) {
    throw std::invalid_argument("parameter dimensions do not match covariates");
  }
}

}  // namespace internal

// beta_i + beta_j + z_ij . gamma.
inline double pi(const ModelParams& params, const PairCovariates& cov, int i,
                 int j) {
  internal::check_dims(params, cov);
  if (i < 0 || j < 0 || i >= cov.n() || j >= cov.n()) {
    throw std::out_of_range("node index out of range");
  }
  if (i == j) throw std::invalid_argument("pi requires i != j");
  return params.beta[i] + params.beta[j] +
         cov.dot_index(pair_index(cov.n(), i, j), params.gamma);
}

inline SufficientStats sufficient_stats(const Network& net) {
  const int n = net.n();
  const int p = net.p();
  SufficientStats s{std::vector<std::int64_t>(static_cast<std::size_t>(n), 0),
                    Vector::Zero(p)};
  const auto& cov = net.covariates();
  for_each_pair(n, [&](int i, int j, std::size_t idx) {
    if (!net.edge_at_index(idx)) return;
    ++s.degrees[static_cast<std::size_t>(i)];
    ++s.degrees[static_cast<std::size_t>(j)];
    const auto z = cov.at_index(idx);
    for (int t = 0; t < p; ++t) s.y[t] += z[static_cast<std::size_t>(t)];
  });
  return s;
}

// l(beta, gamma) = sum_i beta_i d_i + sum_{i<j} a_ij z_ij.gamma
//                  - sum_{i<j} log(1 + e^{pi_ij}).
inline double log_likelihood(const ModelParams& params, const Network& net) {
  const auto& cov = net.covariates();
  internal::check_dims(params, cov);
  double ll = 0.0;
  for_each_pair(net.n(), [&](int i, int j, std::size_t idx) {
    const double pij = params.beta[i] + params.beta[j] +
                       cov.dot_index(idx, params.gamma);
    if (net.edge_at_index(idx)) ll += pij;
    ll -= log1p_exp(pij);
  });
  return ll;
}

// Draws each edge independently with probability mu(pi_ij).
inline Network sample_network(const ModelParams& params,
                              const PairCovariates& cov, Rng& rng) {
  internal::check_dims(params, cov);
  if (!params.finite()) {
    throw std::invalid_argument("sample_network: non-finite parameters");
  }
  std::vector<bool> adjacency(num_pairs(cov.n()), false);
  for_each_pair(cov.n(), [&](int i, int j, std::size_t idx) {
    const double pij = params.beta[i] + params.beta[j] +
                       cov.dot_index(idx, params.gamma);
    adjacency[idx] = rng.bernoulli(mu(pij));
  });
  return Network(cov, std::move(adjacency));
}

}  // namespace dpbeta

#endif  // DPBETA_NETWORK_HPP_
