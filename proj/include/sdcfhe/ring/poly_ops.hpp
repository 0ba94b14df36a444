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

#include <stdexcept>
#include <string>

#include "sdcfhe/ring/ntt.hpp"

namespace sdcfhe {

// Limb kernels. Inputs are canonical; outputs are canonical.

inline void add_limb(std::span<const u64> a, std::span<const u64> b, std::span<u64> out, u64 q) {
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = add_mod(a[j], b[j], q);
}

inline void sub_limb(std::span<const u64> a, std::span<const u64> b, std::span<u64> out, u64 q) {
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = sub_mod(a[j], b[j], q);
}

inline void mul_limb(std::span<const u64> a, std::span<const u64> b, std::span<u64> out,
                     const Modulus& m) {
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = mul_mod(a[j], b[j], m);
}

// out = (a - b) * s
inline void sub_scale_limb(std::span<const u64> a, std::span<const u64> b, const ShoupFactor& s,
                           std::span<u64> out, u64 q) {
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = mul_shoup(sub_mod(a[j], b[j], q), s, q);
}

inline RnsPoly poly_add(const RnsPoly& a, const RnsPoly& b) {
  require_same_basis(a, b, "poly_add");
  RnsPoly out(a.basis(), a.domain());
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    add_limb(a.limb(i), b.limb(i), out.limb(i), a.basis()->prime(i).value());
  }
  return out;
}

inline RnsPoly poly_sub(const RnsPoly& a, const RnsPoly& b) {
  require_same_basis(a, b, "poly_sub");
  RnsPoly out(a.basis(), a.domain());
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    sub_limb(a.limb(i), b.limb(i), out.limb(i), a.basis()->prime(i).value());
  }
  return out;
}

inline RnsPoly poly_neg(const RnsPoly& a) {
  RnsPoly out(a.basis(), a.domain());
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    const u64 q = a.basis()->prime(i).value();
    auto src = a.limb(i);
    auto dst = out.limb(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = neg_mod(src[j], q);
  }
  return out;
}

inline RnsPoly pointwise_mul(const RnsPoly& a, const RnsPoly& b) {
  require_same_basis(a, b, "pointwise_mul");
  require_domain(a, Domain::Evaluation, "pointwise_mul");
  require_domain(b, Domain::Evaluation, "pointwise_mul");
  RnsPoly out(a.basis(), Domain::Evaluation);
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    mul_limb(a.limb(i), b.limb(i), out.limb(i), a.basis()->prime(i).modulus());
  }
  return out;
}

// Product in Z_q[X]/(X^n + 1) per limb. Both operands share a domain; the
// result is returned in that domain.
inline RnsPoly negacyclic_mul(const RnsPoly& a, const RnsPoly& b) {
  require_same_basis(a, b, "negacyclic_mul");
  if (a.domain() != b.domain()) throw ConfigError("negacyclic_mul: operand domains differ");
  if (a.domain() == Domain::Evaluation) return pointwise_mul(a, b);
  return ntt_inverse(pointwise_mul(ntt_forward(a), ntt_forward(b)));
}

// Galois element 5^r mod 2n for a left rotation of the slot vector by r.
inline u64 galois_element(std::size_t rotation, std::size_t n) {
  if (rotation >= n / 2) {
    throw std::invalid_argument("rotation step " + std::to_string(rotation) +
                                " outside [0, n/2)");
  }
  const u64 two_n = 2 * n;
  u64 g = 1;
  for (std::size_t i = 0; i < rotation; ++i) g = (g * 5) % two_n;
  return g;
}

// X -> X^g on one coefficient-domain limb.
inline void automorphism_limb(std::span<const u64> a, u64 galois, std::span<u64> out, u64 q) {
  const std::size_t n = a.size();
  const u64 two_n = 2 * n;
  const u64 mask = two_n - 1;
  u64 e = 0;
  for (std::size_t i = 0; i < n; ++i, e = (e + galois) & mask) {
    if (e < n) {
      out[e] = a[i];
    } else {
      out[e - n] = neg_mod(a[i], q);
    }
  }
}

inline RnsPoly automorphism(const RnsPoly& a, std::size_t rotation) {
  require_domain(a, Domain::Coefficient, "automorphism");
  const u64 g = galois_element(rotation, a.degree());
  RnsPoly out(a.basis(), Domain::Coefficient);
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    automorphism_limb(a.limb(i), g, out.limb(i), a.basis()->prime(i).value());
  }
  return out;
}

}  // namespace sdcfhe
