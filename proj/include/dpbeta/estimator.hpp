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

#ifndef DPBETA_ESTIMATOR_HPP_
#define DPBETA_ESTIMATOR_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpbeta/logistic.hpp"
#include "dpbeta/network.hpp"
#include "dpbeta/release.hpp"

namespace dpbeta {

struct FitConfig {
  double beta_tol = 1e-8;
  double gamma_tol = 1e-8;
  int max_inner_iters = 5000;
  int max_outer_iters = 100;
  double beta_divergence_bound = 30.0;
  // Replace V^{-1} by diag(1/v_ii) inside the profiled Jacobian.
  bool use_S_approx = false;

  void validate() const {
    if (!(beta_tol > 0.0) || !(gamma_tol > 0.0)) {
      throw std::invalid_argument("FitConfig: tolerances must be > 0");
    }
    if (max_inner_iters < 1 || max_outer_iters < 1) {
      throw std::invalid_argument("FitConfig: iteration caps must be >= 1");
    }
    if (!(beta_divergence_bound > 0.0)) {
      throw std::invalid_argument("FitConfig: divergence bound must be > 0");
    }
  }
};

// Why an estimate does or does not exist.
enum class FitStatus {
  kConverged,
  kDegreeOutOfRange,   // some released degree <= 0 or >= n - 1
  kBetaDiverged,       // ||beta||_inf exceeded the divergence bound
  kInnerIterationCap,  // fixed point did not reach beta_tol
  kOuterIterationCap,  // Newton on gamma did not reach gamma_tol
  kGammaDiverged,
  kSingularJacobian,
};

inline std::string_view to_string(FitStatus s) {
  switch (s) {
    case FitStatus::kConverged: return "converged";
    case FitStatus::kDegreeOutOfRange: return "degree_out_of_range";
    case FitStatus::kBetaDiverged: return "beta_diverged";
    case FitStatus::kInnerIterationCap: return "inner_iteration_cap";
    case FitStatus::kOuterIterationCap: return "outer_iteration_cap";
    case FitStatus::kGammaDiverged: return "gamma_diverged";
    case FitStatus::kSingularJacobian: return "singular_jacobian";
  }
  return "unknown";
}

inline FitStatus fit_status_from_string(std::string_view s) {
  for (auto st : {FitStatus::kConverged, FitStatus::kDegreeOutOfRange,
                  FitStatus::kBetaDiverged, FitStatus::kInnerIterationCap,
                  FitStatus::kOuterIterationCap, FitStatus::kGammaDiverged,
                  FitStatus::kSingularJacobian}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown fit status '" + std::string(s) + "'");
}

struct BetaSolve {
  Vector beta;
  FitStatus status = FitStatus::kConverged;
  int iters = 0;

  bool ok() const { return status == FitStatus::kConverged; }
};

struct FitResult {
  Vector beta_hat;
  Vector gamma_hat;
  bool exists = false;
  FitStatus status = FitStatus::kConverged;
  int inner_iters = 0;
  int outer_iters = 0;
  Matrix V;  // dF/dbeta at the estimate, n x n
  Matrix H;  // profiled Jacobian at the estimate, p x p
  double residual_F = std::numeric_limits<double>::quiet_NaN();
  double residual_Q = std::numeric_limits<double>::quiet_NaN();

  ModelParams params() const { return {beta_hat, gamma_hat}; }
};

// Derivative blocks of (F, Q) with respect to (beta, gamma).
struct Jacobians {
  Matrix V;        // dF/dbeta^T, n x n
  Matrix F_gamma;  // dF/dgamma^T, n x p
  Matrix Q_beta;   // dQ/dbeta^T, p x n (the transpose of F_gamma)
  Matrix Q_gamma;  // dQ/dgamma^T, p x p
};

namespace internal {

inline void check_release(const PairCovariates& cov,
                          std::span<const std::int64_t> d_tilde) {
  if (static_cast<int>(d_tilde.size()) != cov.n()) {
    throw std::invalid_argument("released degrees do not match node count");
  }
}

inline double sup_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Expected degrees sum_{j != i} mu(pi_ij).
inline Vector expected_degrees(const Vector& beta, const Vector& gamma,
                               const PairCovariates& cov) {
  Vector s = Vector::Zero(cov.n());
  for_each_pair(cov.n(), [&](int i, int j, std::size_t idx) {
    const double m = mu(beta[i] + beta[j] + cov.dot_index(idx, gamma));
    s[i] += m;
    s[j] += m;
  });
  return s;
}

}  // namespace internal

// F_i = sum_{j != i} mu(pi_ij) - d~_i.
inline Vector F_residual(const ModelParams& params, const PairCovariates& cov,
                         std::span<const std::int64_t> d_tilde) {
  internal::check_dims(params, cov);
  internal::check_release(cov, d_tilde);
  Vector f = internal::expected_degrees(params.beta, params.gamma, cov);
  for (int i = 0; i < cov.n(); ++i) {
    f[i] -= static_cast<double>(d_tilde[static_cast<std::size_t>(i)]);
  }
  return f;
}

// Q = sum_{i<j} z_ij mu(pi_ij) - y~.
inline Vector Q_residual(const ModelParams& params, const PairCovariates& cov,
                         const Vector& y_tilde) {
  internal::check_dims(params, cov);
  if (y_tilde.size() != cov.p()) {
    throw std::invalid_argument("released covariate statistic has wrong length");
  }
  Vector q = -y_tilde;
  const int p = cov.p();
  for_each_pair(cov.n(), [&](int i, int j, std::size_t idx) {
    const double m =
        mu(params.beta[i] + params.beta[j] + cov.dot_index(idx, params.gamma));
    const auto z = cov.at_index(idx);
    for (int t = 0; t < p; ++t) q[t] += z[static_cast<std::size_t>(t)] * m;
  });
  return q;
}

inline Vector F_residual(const ModelParams& params, const PairCovariates& cov,
                         const ReleasedStats& released) {
  return F_residual(params, cov, released.d_tilde);
}

inline Vector Q_residual(const ModelParams& params, const PairCovariates& cov,
                         const ReleasedStats& released) {
  return Q_residual(params, cov, released.y_tilde);
}

// All four derivative blocks from a single pass over the pairs.
inline Jacobians jacobians(const ModelParams& params,
                           const PairCovariates& cov) {
  internal::check_dims(params, cov);
  const int n = cov.n();
  const int p = cov.p();
  Jacobians J{Matrix::Zero(n, n), Matrix::Zero(n, p), Matrix(), Matrix::Zero(p, p)};
  for_each_pair(n, [&](int i, int j, std::size_t idx) {
    const double d1 =
        mu_derivs(params.beta[i] + params.beta[j] +
                  cov.dot_index(idx, params.gamma))
            .d1;
    J.V(i, j) = d1;
    J.V(j, i) = d1;
    J.V(i, i) += d1;
    J.V(j, j) += d1;
    const auto z = cov.at_index(idx);
    for (int s = 0; s < p; ++s) {
      const double zs = z[static_cast<std::size_t>(s)];
      J.F_gamma(i, s) += d1 * zs;
      J.F_gamma(j, s) += d1 * zs;
      for (int t = 0; t < p; ++t) {
        J.Q_gamma(s, t) += d1 * zs * z[static_cast<std::size_t>(t)];
      }
    }
  });
  J.Q_beta = J.F_gamma.transpose();
  return J;
}

// V = dF/dbeta^T: V_ij = mu'(pi_ij), V_ii = sum_{j != i} V_ij.
inline Matrix fisher_V(const ModelParams& params, const PairCovariates& cov) {
  internal::check_dims(params, cov);
  const int n = cov.n();
  Matrix V = Matrix::Zero(n, n);
  for_each_pair(n, [&](int i, int j, std::size_t idx) {
    const double d1 =
        mu_derivs(params.beta[i] + params.beta[j] +
                  cov.dot_index(idx, params.gamma))
            .d1;
    V(i, j) = d1;
    V(j, i) = d1;
    V(i, i) += d1;
    V(j, j) += d1;
  });
  return V;
}

// Diagonal surrogate S = diag(1/v_11, ..., 1/v_nn) for V^{-1}.
inline Matrix S_approx_inverse(const Matrix& V) {
  if (V.rows() != V.cols()) {
    throw std::invalid_argument("S_approx_inverse: V must be square");
  }
  Vector inv(V.rows());
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    if (!(V(i, i) > 0.0)) {
      throw std::domain_error("S_approx_inverse: non-positive diagonal entry");
    }
    inv[i] = 1.0 / V(i, i);
  }
  return inv.asDiagonal();
}

// b_n evaluated at the given parameters: max over pairs of 1/mu'(pi_ij).
inline double b_n(const ModelParams& params, const PairCovariates& cov) {
  internal::check_dims(params, cov);
  double b = 0.0;
  for_each_pair(cov.n(), [&](int i, int j, std::size_t idx) {
    const double pij =
        params.beta[i] + params.beta[j] + cov.dot_index(idx, params.gamma);
    b = std::max(b, 1.0 / mu_derivs(pij).d1);
  });
  return b;
}

// V^{-1} rhs, exactly (Cholesky; V is positive definite for n >= 3) or through
// the diagonal surrogate. Returns nullopt when V is numerically singular.
inline std::optional<Matrix> solve_V(const Matrix& V, const Matrix& rhs,
                                     bool use_S_approx) {
  if (use_S_approx) {
    Vector inv = V.diagonal().cwiseInverse();
    if (!inv.allFinite()) return std::nullopt;
    return Matrix(inv.asDiagonal() * rhs);
  }
  Eigen::LLT<Matrix> llt(V);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Matrix x = llt.solve(rhs);
  if (!x.allFinite()) return std::nullopt;
  return x;
}

// H = dQ/dgamma - dQ/dbeta V^{-1} dF/dgamma (Schur complement).
inline std::optional<Matrix> H_from_jacobians(const Jacobians& J,
                                              bool use_S_approx) {
  if (J.Q_gamma.rows() == 0) return Matrix(0, 0);
  auto VinvFg = solve_V(J.V, J.F_gamma, use_S_approx);
  if (!VinvFg) return std::nullopt;
  return Matrix(J.Q_gamma - J.Q_beta * *VinvFg);
}

inline Matrix H_matrix(const ModelParams& params, const PairCovariates& cov,
                       bool use_S_approx = false) {
  auto H = H_from_jacobians(jacobians(params, cov), use_S_approx);
  if (!H) throw std::domain_error("H_matrix: V is singular");
  return *H;
}

// Fixed-point solve of F(beta, gamma) = 0 for fixed gamma:
//   beta_i <- log d~_i - log sum_{j != i} e^{beta_j + z_ij.gamma} / (1 + e^{pi_ij})
// with every coordinate updated from the previous iterate. The right-hand
// side equals beta_i + log d~_i - log sum_{j != i} mu(pi_ij), which is the
// form evaluated here.
inline BetaSolve solve_beta_given_gamma(
    const Vector& gamma, const PairCovariates& cov,
    std::span<const std::int64_t> d_tilde, const FitConfig& config,
    const std::optional<Vector>& warm_start = std::nullopt) {
  config.validate();
  internal::check_release(cov, d_tilde);
  if (gamma.size() != cov.p()) {
    throw std::invalid_argument("gamma length does not match covariates");
  }
  const int n = cov.n();
  BetaSolve out;
  out.beta = warm_start ? *warm_start : Vector::Zero(n);
  if (out.beta.size() != n) {
    throw std::invalid_argument("warm start has wrong length");
  }
  Vector log_d(n);
  for (int i = 0; i < n; ++i) {
    const auto d = d_tilde[static_cast<std::size_t>(i)];
    if (d <= 0 || d >= n - 1) {
      out.status = FitStatus::kDegreeOutOfRange;
      return out;
    }
    log_d[i] = std::log(static_cast<double>(d));
  }
  for (int it = 1; it <= config.max_inner_iters; ++it) {
    const Vector s = internal::expected_degrees(out.beta, gamma, cov);
    const Vector next = out.beta + log_d - s.array().log().matrix();
    const double step = internal::sup_norm(next - out.beta);
    out.beta = next;
    out.iters = it;
    if (!out.beta.allFinite() ||
        internal::sup_norm(out.beta) > config.beta_divergence_bound) {
      out.status = FitStatus::kBetaDiverged;
      return out;
    }
    if (step < config.beta_tol) {
      out.status = FitStatus::kConverged;
      return out;
    }
  }
  out.status = FitStatus::kInnerIterationCap;
  return out;
}

// The profiled residual Q_c(gamma) = Q(beta_hat_gamma, gamma).
inline std::optional<Vector> profiled_Q(const Vector& gamma,
                                        const PairCovariates& cov,
                                        const ReleasedStats& released,
                                        const FitConfig& config,
                                        const std::optional<Vector>& warm = std::nullopt) {
  const auto inner = solve_beta_given_gamma(gamma, cov, released.d_tilde, config, warm);
  if (!inner.ok()) return std::nullopt;
  return Q_residual({inner.beta, gamma}, cov, released.y_tilde);
}

// Two-stage solve of the moment equations: fixed point for beta given gamma,
// then a Newton step on gamma using the profiled Jacobian H, alternating from
// gamma = 0 with beta warm-started from the previous outer iterate.
// Non-existence is reported through FitResult::exists and ::status.
inline FitResult fit(const ReleasedStats& released, const PairCovariates& cov,
                     const FitConfig& config = {}) {
  config.validate();
  const int n = cov.n();
  const int p = cov.p();
  if (n < 3) throw std::invalid_argument("fit requires at least 3 nodes");
  if (released.n != n || static_cast<int>(released.d_tilde.size()) != n) {
    throw std::invalid_argument("released statistic does not match node count");
  }
  if (released.p != p || released.y_tilde.size() != p) {
    throw std::invalid_argument("released statistic does not match covariate dimension");
  }

  FitResult res;
  res.gamma_hat = Vector::Zero(p);
  auto fail = [&](FitStatus status, const Vector& beta) {
    res.exists = false;
    res.status = status;
    res.beta_hat = beta;
    return res;
  };

  // The fixed point stops on the size of its last update, which understates
  // its error when the contraction is slow. Solving tighter than gamma_tol
  // keeps that error from putting a floor under the Newton step.
  FitConfig inner_config = config;
  inner_config.beta_tol = std::min(config.beta_tol, 1e-2 * config.gamma_tol);

  std::optional<Vector> warm;
  bool converged = (p == 0);
  for (int outer = 1; outer <= config.max_outer_iters && !converged; ++outer) {
    const auto inner = solve_beta_given_gamma(res.gamma_hat, cov, released.d_tilde,
                                              inner_config, warm);
    res.inner_iters += inner.iters;
    res.outer_iters = outer;
    if (!inner.ok()) return fail(inner.status, inner.beta);
    warm = inner.beta;

    const ModelParams cur{inner.beta, res.gamma_hat};
    const auto H = H_from_jacobians(jacobians(cur, cov), config.use_S_approx);
    if (!H) return fail(FitStatus::kSingularJacobian, inner.beta);
    Eigen::FullPivLU<Matrix> lu(*H);
    if (!lu.isInvertible()) return fail(FitStatus::kSingularJacobian, inner.beta);
    const Vector step = lu.solve(Q_residual(cur, cov, released.y_tilde));
    res.gamma_hat -= step;
    if (!res.gamma_hat.allFinite() ||
        internal::sup_norm(res.gamma_hat) > config.beta_divergence_bound) {
      return fail(FitStatus::kGammaDiverged, inner.beta);
    }
    converged = internal::sup_norm(step) < config.gamma_tol;
  }
  if (!converged) {
    return fail(FitStatus::kOuterIterationCap,
                warm ? *warm : Vector(Vector::Zero(n)));
  }

  const auto final_inner =
      solve_beta_given_gamma(res.gamma_hat, cov, released.d_tilde, config, warm);
  res.inner_iters += final_inner.iters;
  if (!final_inner.ok()) return fail(final_inner.status, final_inner.beta);
  res.beta_hat = final_inner.beta;

  const ModelParams est = res.params();
  const Jacobians J = jacobians(est, cov);
  auto H = H_from_jacobians(J, config.use_S_approx);
  if (!H) return fail(FitStatus::kSingularJacobian, res.beta_hat);
  res.V = J.V;
  res.H = *H;
  res.residual_F = internal::sup_norm(F_residual(est, cov, released.d_tilde));
  res.residual_Q = internal::sup_norm(Q_residual(est, cov, released.y_tilde));
  res.exists = true;
  res.status = FitStatus::kConverged;
  return res;
}

}  // namespace dpbeta

#endif  // DPBETA_ESTIMATOR_HPP_
