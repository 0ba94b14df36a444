/*
 * Copyright 2026 The sdcfhe Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "sdcfhe/ring/rns_poly.hpp"

namespace sdcfhe {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed `index` of stream `master` under a domain tag.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(tag)) + index);
}

// Distributions are written out so that streams are identical on every
// standard library.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t next() { return rng_(); }

  // Uniform in [0, bound).
  std::uint64_t uniform(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = rng_();
    } while (x >= limit);
    return x % bound;
  }

  double uniform_unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::int64_t ternary() { return static_cast<std::int64_t>(uniform(3)) - 1; }

  // Rounded Gaussian, resampled beyond six standard deviations.
  std::int64_t gaussian(double sigma) {
    for (;;) {
      if (!spare_) {
        double u1;
        do {
          u1 = uniform_unit();
        } while (u1 <= 0.0);
        const double u2 = uniform_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * std::numbers::pi * u2);
        spare_ = true;
        const double z = r * std::cos(2.0 * std::numbers::pi * u2) * sigma;
        if (std::abs(z) <= 6.0 * sigma) return std::llround(z);
      } else {
        spare_ = false;
        const double z = cached_ * sigma;
        if (std::abs(z) <= 6.0 * sigma) return std::llround(z);
      }
    }
  }

  std::vector<std::int64_t> ternary_vector(std::size_t n) {
    std::vector<std::int64_t> v(n);
    for (auto& x : v) x = ternary();
    return v;
  }

  std::vector<std::int64_t> gaussian_vector(std::size_t n, double sigma) {
    std::vector<std::int64_t> v(n);
    for (auto& x : v) x = gaussian(sigma);
    return v;
  }

  RnsPoly uniform_poly(const BasisPtr& basis, Domain domain) {
    RnsPoly p(basis, domain);
    for (std::size_t i = 0; i < basis->size(); ++i) {
      const u64 q = basis->prime(i).value();
      for (auto& v : p.limb(i)) v = uniform(q);
    }
    return p;
  }

 private:
  std::mt19937_64 rng_;
  double cached_ = 0.0;
  bool spare_ = false;
};

inline RnsPoly signed_poly(const std::vector<std::int64_t>& coeffs, const BasisPtr& basis) {
  RnsPoly p(basis, Domain::Coefficient);
  p.assign_signed(coeffs);
  return p;
}

}  // namespace sdcfhe
