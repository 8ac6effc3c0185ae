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

#ifndef DPBETA_RANDOM_HPP_
#define DPBETA_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace dpbeta {

// splitmix64 finalizer. Used to derive independent stream seeds from a master
// seed and a stream index, so replication r always sees the same stream no
// matter which worker runs it.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix_seed(mix_seed(master) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

// Seedable generator. Only the raw 64-bit output of std::mt19937_64 is used;
// every transform on top of it lives here so draws are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open() {
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double prob) { return uniform_open() < prob; }

  // +1 with probability prob_plus, -1 otherwise.
  int rademacher(double prob_plus) { return bernoulli(prob_plus) ? 1 : -1; }

  // Number of failures before the first success, success probability
  // 1 - ratio, i.e. P(G = g) = (1 - ratio) ratio^g. Inverse-CDF draw.
  std::int64_t geometric_failures(double ratio) {
    if (ratio <= 0.0) return 0;
    const double g = std::floor(std::log(uniform_open()) / std::log(ratio));
    return static_cast<std::int64_t>(g);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dpbeta

#endif  // DPBETA_RANDOM_HPP_
