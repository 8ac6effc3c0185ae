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

#ifndef DPBETA_LOGISTIC_HPP_
#define DPBETA_LOGISTIC_HPP_

#include <cmath>

namespace dpbeta {

// Logistic function e^x / (1 + e^x). Evaluated through exp(-|x|) so that
// neither branch can overflow.
inline double mu(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct MuDerivs {
  double d1;
  double d2;
  double d3;
};

// First three derivatives of mu. With t = exp(-|x|) every expression below is
// bounded, and the odd/even symmetry of the derivatives handles x < 0:
//   mu'(x)   = t / (1+t)^2
//   mu''(x)  = sign(x) * t (t - 1) / (1+t)^3
//   mu'''(x) = t (1 - 4t + t^2) / (1+t)^4
inline MuDerivs mu_derivs(double x) {
  const double t = std::exp(-std::fabs(x));
  const double s = 1.0 + t;
  const double s2 = s * s;
  const double d1 = t / s2;
  double d2 = t * (t - 1.0) / (s2 * s);
  if (x < 0.0) d2 = -d2;
  const double d3 = t * (1.0 - 4.0 * t + t * t) / (s2 * s2);
  return {d1, d2, d3};
}

// log(1 + e^x) without overflow.
inline double log1p_exp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace dpbeta

#endif  // DPBETA_LOGISTIC_HPP_
