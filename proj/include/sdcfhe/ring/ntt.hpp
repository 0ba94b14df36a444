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

#include <span>
#include <utility>

#include "sdcfhe/ring/rns_poly.hpp"

namespace sdcfhe {

// Negacyclic NTT over one limb. Forward output is in natural order:
// A_j = a(psi^(2j+1)).
//
// A layer tap is invoked as tap(layer, data) on the working array after each
// butterfly layer whose result is an intermediate (not the final output):
// layers [0, log n - 1) for the forward transform and [0, log n) for the
// inverse, which has a separate n^{-1} scaling pass. This is the seam the
// fault injector uses to corrupt butterfly intermediates.
struct NoTap {
  void operator()(int, std::span<u64>) const {}
};

inline int forward_intermediate_layers(const PrimeModulus& pm) { return pm.log_degree() - 1; }
inline int inverse_intermediate_layers(const PrimeModulus& pm) { return pm.log_degree(); }

namespace detail {

inline void permute_bitrev(std::span<u64> a, const PrimeModulus& pm) {
  const auto& rev = pm.bitrev();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t r = rev[i];
    if (i < r) std::swap(a[i], a[r]);
  }
}

}  // namespace detail

template <class Tap = NoTap>
void ntt_forward_limb(std::span<u64> a, const PrimeModulus& pm, Tap&& tap = Tap{}) {
  const std::size_t n = pm.degree();
  const u64 q = pm.value();
  const auto& roots = pm.psi_rev();
  const int last = pm.log_degree() - 1;
  std::size_t t = n;
  int layer = 0;
  for (std::size_t m = 1; m < n; m <<= 1, ++layer) {
    t >>= 1;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j1 = 2 * i * t;
      const ShoupFactor& w = roots[m + i];
      u64* x = a.data() + j1;
      u64* y = x + t;
      for (std::size_t j = 0; j < t; ++j) {
        const u64 u = x[j];
        const u64 v = mul_shoup(y[j], w, q);
        x[j] = add_mod(u, v, q);
        y[j] = sub_mod(u, v, q);
      }
    }
    if (layer < last) tap(layer, a);
  }
  detail::permute_bitrev(a, pm);
}

template <class Tap = NoTap>
void ntt_inverse_limb(std::span<u64> a, const PrimeModulus& pm, Tap&& tap = Tap{}) {
  const std::size_t n = pm.degree();
  const u64 q = pm.value();
  const auto& roots = pm.psi_inv_rev();
  detail::permute_bitrev(a, pm);
  std::size_t t = 1;
  int layer = 0;
  for (std::size_t m = n; m > 1; m >>= 1, ++layer) {
    const std::size_t h = m >> 1;
    std::size_t j1 = 0;
    for (std::size_t i = 0; i < h; ++i) {
      const ShoupFactor& w = roots[h + i];
      u64* x = a.data() + j1;
      u64* y = x + t;
      for (std::size_t j = 0; j < t; ++j) {
        const u64 u = x[j];
        const u64 v = y[j];
        x[j] = add_mod(u, v, q);
        y[j] = mul_shoup(sub_mod(u, v, q), w, q);
      }
      j1 += 2 * t;
    }
    t <<= 1;
    tap(layer, a);
  }
  const ShoupFactor& scale = pm.n_inv_factor();
  for (auto& v : a) v = mul_shoup(v, scale, q);
}

inline RnsPoly ntt_forward(const RnsPoly& a) {
  require_domain(a, Domain::Coefficient, "ntt_forward");
  RnsPoly out = a;
  for (std::size_t i = 0; i < out.limbs(); ++i) {
    ntt_forward_limb(out.limb(i), out.basis()->prime(i));
  }
  out.set_domain(Domain::Evaluation);
  return out;
}

inline RnsPoly ntt_inverse(const RnsPoly& a) {
  require_domain(a, Domain::Evaluation, "ntt_inverse");
  RnsPoly out = a;
  for (std::size_t i = 0; i < out.limbs(); ++i) {
    ntt_inverse_limb(out.limb(i), out.basis()->prime(i));
  }
  out.set_domain(Domain::Coefficient);
  return out;
}

}  // namespace sdcfhe
