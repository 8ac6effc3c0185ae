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

#include "dpbeta/inference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dpbeta/simulation.hpp"
#include "support/oracles.hpp"

namespace dpbeta {
namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// A fit at the given parameters with V and H filled in, as if the solver had
// returned them.
FitResult fit_at(const ModelParams& params, const PairCovariates& cov) {
  FitResult f;
  f.beta_hat = params.beta;
  f.gamma_hat = params.gamma;
  f.exists = true;
  const Jacobians J = jacobians(params, cov);
  f.V = J.V;
  f.H = *H_from_jacobians(J, false);
  return f;
}

TEST(NormalQuantile, KnownValues) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile(0.025), -1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
  EXPECT_NEAR(normal_quantile(0.995), 2.5758293035489004, 1e-12);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-9);
  EXPECT_NEAR(critical_value(0.95), 1.959963984540054, 1e-12);
  EXPECT_NEAR(critical_value(0.90), 1.6448536269514722, 1e-12);
  for (double bad : {0.0, 1.0, -0.1, 1.2}) {
    EXPECT_THROW(normal_quantile(bad), std::domain_error);
    EXPECT_THROW(critical_value(bad), std::domain_error);
  }
}

TEST(NormalQuantile, InvertsTheCdf) {
  for (double p = 1e-6; p < 1.0; p += 0.0137) {
    const double q = normal_quantile(p);
    EXPECT_NEAR(normal_cdf(q), p, 1e-12 * std::max(1.0, p)) << p;
    EXPECT_NEAR(q, -normal_quantile(1.0 - p), 1e-9) << p;
  }
}

TEST(BetaContrast, Formula) {
  Rng rng(1);
  const int n = 10;
  const auto cov = testing::random_uniform_covariates(n, 2, rng);
  const ModelParams params{testing::random_vector(n, -1, 1, rng), testing::random_vector(2, -1, 1, rng)};
  const FitResult f = fit_at(params, cov);
  const Interval iv = beta_contrast_ci(f, 2, 7, 0.9);
  const double se = std::sqrt(1.0 / f.V(2, 2) + 1.0 / f.V(7, 7));
  EXPECT_DOUBLE_EQ(iv.estimate, params.beta[2] - params.beta[7]);
  EXPECT_NEAR(iv.upper - iv.estimate, 1.6448536269514722 * se, 1e-12);
  EXPECT_NEAR(iv.estimate - iv.lower, 1.6448536269514722 * se, 1e-12);
  EXPECT_EQ(iv.label, "beta[3]-beta[8]");
  EXPECT_DOUBLE_EQ(iv.level, 0.9);
  EXPECT_TRUE(iv.contains(iv.estimate));
  EXPECT_NEAR(beta_contrast_pivot(f, 2, 7, iv.estimate - se), 1.0, 1e-12);
}

TEST(BetaContrast, Errors) {
  Rng rng(2);
  const auto cov = testing::random_uniform_covariates(5, 1, rng);
  FitResult f = fit_at({Vector::Zero(5), Vector::Zero(1)}, cov);
  EXPECT_THROW(beta_contrast_ci(f, 1, 1), std::invalid_argument);
  EXPECT_THROW(beta_contrast_ci(f, 0, 5), std::out_of_range);
  f.exists = false;
  EXPECT_THROW(beta_contrast_ci(f, 0, 1), std::invalid_argument);
  EXPECT_THROW(v_diag(f), std::invalid_argument);
}

TEST(VDiag, MatchesFisherDiagonalAtEstimate) {
  Rng rng(3);
  const int n = 30;
  const auto cov = testing::random_uniform_covariates(n, 2, rng);
  const ModelParams truth{testing::random_vector(n, -0.5, 0.5, rng), testing::random_vector(2, -1, 1, rng)};
  const auto net = sample_network(truth, cov, rng);
  const FitResult f = fit(noiseless_release(sufficient_stats(net)), cov);
  ASSERT_TRUE(f.exists);
  const Vector v = v_diag(f);
  const Vector ref = fisher_V(f.params(), cov).diagonal();
  EXPECT_LT((v - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(v.minCoeff(), 0.0);
}

// Direct double loop over nodes and neighbours with a separately written
// logistic.
Vector bias_B_reference(const ModelParams& params, const PairCovariates& cov) {
  const int n = cov.n();
  const int p = cov.p();
  Vector B = Vector::Zero(p);
  for (int k = 0; k < n; ++k) {
    Vector num = Vector::Zero(p);
    double den = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      const double m = testing::plain_sigmoid(pi(params, cov, k, j));
      const double d1 = m * (1 - m);
      const double d2 = d1 * (1 - 2 * m);
      den += d1;
      for (int t = 0; t < p; ++t) num[t] += cov.at(k, j)[static_cast<std::size_t>(t)] * d2;
    }
    B += num / den;
  }
  return B / std::sqrt(n * (n - 1) / 2.0);
}

TEST(BiasTerm, HandComputedSmallInstance) {
  const PairCovariates cov(4, 1, {1.0, -1.0, 0.5, 2.0, -0.5, 1.0});
  const ModelParams params{(Vector(4) << 0.2, -0.1, 0.4, 0.0).finished(),
                           (Vector(1) << 0.7).finished()};
  const Vector B = bias_B(params, cov);
  EXPECT_NEAR(B[0], bias_B_reference(params, cov)[0], 1e-12);
}

TEST(BiasTerm, MatchesReferenceOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 40);
    const int n = 6 + 7 * static_cast<int>(seed);
    const auto cov = testing::random_uniform_covariates(n, 3, rng);
    const ModelParams params{testing::random_vector(n, -1, 1, rng), testing::random_vector(3, -1, 1, rng)};
    EXPECT_LT((bias_B(params, cov) - bias_B_reference(params, cov)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BiasTerm, VanishesAtZeroParameters) {
  Rng rng(5);
  const auto cov = testing::random_uniform_covariates(12, 2, rng);
  EXPECT_EQ(bias_B({Vector::Zero(12), Vector::Zero(2)}, cov), Vector::Zero(2));
  EXPECT_EQ(bias_B({Vector::Zero(12), Vector::Zero(0)}, PairCovariates::empty(12)).size(), 0);
}

TEST(BiasCorrection, ZeroBiasLeavesEstimateUnchanged) {
  Rng rng(6);
  const auto cov = testing::random_uniform_covariates(15, 2, rng);
  const FitResult f = fit_at({Vector::Zero(15), Vector::Zero(2)}, cov);
  EXPECT_EQ(bias_correct(f, cov), f.gamma_hat);
  EXPECT_EQ(bias_correct(f, cov, BiasCorrection::kFirstOrder), f.gamma_hat);
}

TEST(BiasCorrection, Forms) {
  Rng rng(7);
  const int n = 20;
  const auto cov = testing::random_uniform_covariates(n, 2, rng);
  const ModelParams params{testing::random_vector(n, -0.5, 0.5, rng), testing::random_vector(2, -1, 1, rng)};
  const FitResult f = fit_at(params, cov);
  const Vector B = bias_B_reference(params, cov);
  const double rootN = std::sqrt(static_cast<double>(num_pairs(n)));
  const Vector HinvB = f.H.inverse() * B;
  EXPECT_LT((bias_correct(f, cov, BiasCorrection::kFirstOrder) - (params.gamma - HinvB / rootN)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((bias_correct(f, cov, BiasCorrection::kSecondOrder) - (params.gamma + 0.5 * rootN * HinvB)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(to_string(BiasCorrection::kFirstOrder), "first_order");
  EXPECT_EQ(to_string(BiasCorrection::kSecondOrder), "second_order");
}

TEST(GammaIntervals, CovarianceForms) {
  Rng rng(8);
  const int n = 25;
  const auto cov = testing::random_uniform_covariates(n, 2, rng);
  const FitResult f = fit_at({testing::random_vector(n, -0.5, 0.5, rng), testing::random_vector(2, -1, 1, rng)}, cov);
  EXPECT_TRUE(gamma_covariance(f, GammaVariance::kInverseH).isApprox(f.H.inverse(), 1e-12));
  const double N = static_cast<double>(num_pairs(n));
  EXPECT_TRUE(gamma_covariance(f, GammaVariance::kHbarOverN).isApprox(f.H / (N * N), 1e-12));

  const auto plain = gamma_ci(f, cov, false);
  const auto corrected = gamma_ci(f, cov, true);
  ASSERT_EQ(plain.size(), 2u);
  const Vector bc = bias_correct(f, cov);
  const Matrix Hinv = f.H.inverse();
  for (int t = 0; t < 2; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    EXPECT_DOUBLE_EQ(plain[ts].estimate, f.gamma_hat[t]);
    EXPECT_DOUBLE_EQ(corrected[ts].estimate, bc[t]);
    EXPECT_NEAR(plain[ts].length(), 2 * 1.959963984540054 * std::sqrt(Hinv(t, t)), 1e-10);
    EXPECT_NEAR(corrected[ts].length(), plain[ts].length(), 1e-12);
    EXPECT_TRUE(plain[ts].contains(plain[ts].estimate));
  }
  EXPECT_EQ(plain[1].label, "gamma[2]");
  EXPECT_EQ(corrected[0].label, "gamma_bc[1]");
}

TEST(GammaIntervals, EmptyWithoutCovariates) {
  const auto cov = PairCovariates::empty(6);
  const FitResult f = fit_at({Vector::Zero(6), Vector::Zero(0)}, cov);
  EXPECT_TRUE(gamma_ci(f, cov, true).empty());
  const auto report = infer(f, cov, {{0, 1}});
  EXPECT_EQ(report.intervals.size(), 1u);
  EXPECT_EQ(report.gamma_cov.rows(), 0);
  EXPECT_EQ(report.B_hat.size(), 0);
  EXPECT_EQ(report.gamma_bc.size(), 0);
}

TEST(Report, Contents) {
  Rng rng(9);
  const int n = 18;
  const auto cov = testing::random_uniform_covariates(n, 2, rng);
  const FitResult f = fit_at({testing::random_vector(n, -0.5, 0.5, rng), testing::random_vector(2, -1, 1, rng)}, cov);
  InferenceOptions opts;
  opts.level = 0.9;
  const auto r = infer(f, cov, {{0, 1}, {3, 9}}, opts);
  EXPECT_EQ(r.intervals.size(), 6u);
  EXPECT_EQ(r.v_diag, f.V.diagonal());
  for (const auto& iv : r.intervals) {
    EXPECT_TRUE(iv.contains(iv.estimate)) << iv.label;
    EXPECT_DOUBLE_EQ(iv.level, 0.9);
  }
  EXPECT_THROW(infer(f, cov, {{2, 2}}), std::invalid_argument);
}

// --- Monte-Carlo properties of the intervals -------------------------------

SimDesign design(int n, double c, EpsilonRule rule, int reps, std::uint64_t seed) {
  SimDesign d;
  d.n = n;
  d.c = c;
  d.epsilon_rule = rule;
  d.replications = reps;
  d.seed = seed;
  return d;
}

TEST(CoverageMonteCarlo, NoiselessAtTwoHundredNodes) {
  const SimTable t = run_design(design(200, 0.05, EpsilonRule::none(), 500, 11));
  ASSERT_EQ(t.existing, 500);
  EXPECT_GE(t.pairs[0].coverage_pct, 92.0);
  EXPECT_LE(t.pairs[0].coverage_pct, 97.0);
  // Bias-corrected gamma intervals at nominal level up to Monte-Carlo error
  // (sd of a 500-replication coverage estimate is about 1 pp).
  for (const auto& g : t.gamma) {
    EXPECT_NEAR(g.coverage_bc_pct, 95.0, 3.0) << g.index;
  }
}

TEST(CoverageMonteCarlo, CorrectionDoesNotHurtAtSmallSpread) {
  for (double c : {0.05, 0.15}) {
    const SimTable t = run_design(design(100, c, EpsilonRule::logn_n16(), 500, 12));
    for (const auto& g : t.gamma) {
      EXPECT_GE(g.coverage_bc_pct, g.coverage_pct - 1.0) << "c=" << c << " gamma " << g.index;
    }
  }
}

// Beta-contrast lengths shrink like 1/sqrt(n); gamma lengths like 1/n since
// the information for gamma grows with the number of pairs.
TEST(CoverageMonteCarlo, IntervalLengthScaling) {
  const SimTable small = run_design(design(100, 0.05, EpsilonRule::logn_n16(), 100, 13));
  const SimTable large = run_design(design(200, 0.05, EpsilonRule::logn_n16(), 100, 14));
  const double beta_ratio = small.pairs[0].mean_length / large.pairs[0].mean_length;
  EXPECT_GE(beta_ratio, 1.2);
  EXPECT_LE(beta_ratio, 1.7);
  EXPECT_NEAR(large.pairs[0].mean_length, 0.84, 0.05);
  for (std::size_t t = 0; t < 2; ++t) {
    const double ratio = small.gamma[t].mean_length / large.gamma[t].mean_length;
    EXPECT_GE(ratio, 1.7) << t;
    EXPECT_LE(ratio, 2.4) << t;
  }
}

}  // namespace
}  // namespace dpbeta
