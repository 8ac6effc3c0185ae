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

#include "dpbeta/logistic.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "dpbeta/random.hpp"

namespace dpbeta {
namespace {

TEST(Logistic, KnownValues) {
  EXPECT_DOUBLE_EQ(mu(0.0), 0.5);
  EXPECT_NEAR(mu(std::log(3.0)), 0.75, 1e-15);
  EXPECT_NEAR(mu(800.0), 1.0, 1e-15);
  EXPECT_GE(mu(-800.0), 0.0);
  EXPECT_LT(mu(-800.0), 1e-300);
  EXPECT_TRUE(std::isfinite(mu(-800.0)));
}

TEST(Logistic, DerivativesAtZero) {
  const MuDerivs d = mu_derivs(0.0);
  EXPECT_DOUBLE_EQ(d.d1, 0.25);
  EXPECT_DOUBLE_EQ(d.d2, 0.0);
  EXPECT_DOUBLE_EQ(d.d3, -0.125);
}

TEST(Logistic, SymmetryAndIdentity) {
  Rng rng(11);
  for (int r = 0; r < 2000; ++r) {
    const double x = 80.0 * rng.uniform_open() - 40.0;
    EXPECT_NEAR(mu(x) + mu(-x), 1.0, 1e-15) << x;
    const double m = mu(x);
    EXPECT_NEAR(mu_derivs(x).d1, m * (1.0 - m), 1e-15) << x;
  }
}

TEST(Logistic, DerivativeBounds) {
  for (double x = -50.0; x <= 50.0; x += 0.01) {
    const MuDerivs d = mu_derivs(x);
    EXPECT_GE(d.d1, 0.0);
    EXPECT_LE(d.d1, 0.25);
    EXPECT_LE(std::fabs(d.d2), 0.25);
    EXPECT_LE(std::fabs(d.d3), 0.25);
  }
}

TEST(Logistic, DerivativesMatchFiniteDifferences) {
  const double h = 1e-5;
  for (double x : {-6.0, -2.0, -0.3, 0.0, 0.7, 1.3, 4.0}) {
    const MuDerivs d = mu_derivs(x);
    EXPECT_NEAR(d.d1, (mu(x + h) - mu(x - h)) / (2 * h), 1e-8) << x;
    EXPECT_NEAR(d.d2, (mu_derivs(x + h).d1 - mu_derivs(x - h).d1) / (2 * h), 1e-8) << x;
    EXPECT_NEAR(d.d3, (mu_derivs(x + h).d2 - mu_derivs(x - h).d2) / (2 * h), 1e-8) << x;
  }
}

TEST(Logistic, DerivativesStayFiniteInTails) {
  for (double x : {-1e4, -745.0, 745.0, 1e4}) {
    const MuDerivs d = mu_derivs(x);
    EXPECT_TRUE(std::isfinite(d.d1) && std::isfinite(d.d2) && std::isfinite(d.d3));
  }
}

TEST(Logistic, Log1pExp) {
  EXPECT_NEAR(log1p_exp(0.0), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(log1p_exp(1000.0), 1000.0);
  EXPECT_NEAR(log1p_exp(-40.0), std::exp(-40.0), 1e-30);
  for (double x = -30.0; x <= 30.0; x += 0.5) {
    EXPECT_NEAR(log1p_exp(x), std::log1p(std::exp(x)), 1e-13 * (1 + std::fabs(x)));
  }
}

}  // namespace
}  // namespace dpbeta
