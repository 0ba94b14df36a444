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

#include <algorithm>
#include <bit>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "sdcfhe/ring/ntt.hpp"

namespace sdcfhe::abft {

// Input/output integrity flags of one checked limb.
struct ChecksumFlags {
  u64 flag_in = 0;
  u64 flag_out = 0;
  bool match() const { return flag_in == flag_out; }
};

// The row vector F with F * W = (1, ..., 1) for the negacyclic transform W of
// `pm`. Since W[j][k] = psi^{(2j+1)k}, F = n^{-1} W'(1) where W' is the same
// transform built on psi^{-1}; this applies the inverse transpose to the
// all-ones vector with one fast transform.
inline std::vector<u64> build_checksum_vector(const PrimeModulus& pm) {
  const std::size_t n = pm.degree();
  PrimeModulus conjugate(pm.value(), n, pm.psi_inv());
  std::vector<u64> ones(n, 1);
  ntt_forward_limb(ones, conjugate);
  const ShoupFactor n_inv(pm.n_inv(), pm.value());
  for (auto& v : ones) v = mul_shoup(v, n_inv, pm.value());
  return ones;
}

// Closed form of the same vector: F_j = -2 n^{-1} / (psi^{-(2j+1)} - 1).
inline std::vector<u64> build_checksum_vector_closed_form(const PrimeModulus& pm) {
  const std::size_t n = pm.degree();
  const Modulus& m = pm.modulus();
  const u64 q = m.value;
  const u64 minus_two_ninv = mul_mod(q - 2, pm.n_inv(), m);
  std::vector<u64> f(n);
  const u64 step = mul_mod(pm.psi_inv(), pm.psi_inv(), m);
  u64 x = pm.psi_inv();
  for (std::size_t j = 0; j < n; ++j) {
    f[j] = mul_mod(minus_two_ninv, inv_mod_prime(sub_mod(x, 1, q), m), m);
    x = mul_mod(x, step, m);
  }
  return f;
}

inline u64 sum_mod(std::span<const u64> a, const Modulus& m) {
  u128 acc = 0;
  for (u64 v : a) acc += v;
  return reduce_128(acc, m);
}

inline u64 weighted_sum_mod(std::span<const u64> a, std::span<const ShoupFactor> w,
                            const Modulus& m) {
  u128 acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += mul_shoup(a[i], w[i], m.value);
  return reduce_128(acc, m);
}

// Per-prime verification vectors, each validated against its defining
// property before use. Immutable once built.
class ChecksumContext {
 public:
  ChecksumContext() = default;

  void add_prime(const PrimeModulus& pm) {
    const u64 q = pm.value();
    if (vectors_.count(q)) return;
    auto f = build_checksum_vector(pm);
    Entry e;
    e.modulus = pm.modulus();
    e.weights.reserve(f.size());
    for (u64 v : f) e.weights.emplace_back(v, q);
    if (!verify(pm, e)) throw ConfigError("checksum vector failed self-verification");
    vectors_.emplace(q, std::move(e));
  }

  bool has(u64 q) const { return vectors_.count(q) != 0; }
  std::span<const ShoupFactor> weights(u64 q) const { return vectors_.at(q).weights; }
  const Modulus& modulus(u64 q) const { return vectors_.at(q).modulus; }

  // F . A for a transformed limb.
  u64 project(std::span<const u64> a, u64 q) const {
    const Entry& e = vectors_.at(q);
    return weighted_sum_mod(a, e.weights, e.modulus);
  }

 private:
  struct Entry {
    Modulus modulus;
    std::vector<ShoupFactor> weights;
  };

  static bool verify(const PrimeModulus& pm, const Entry& e) {
    std::mt19937_64 rng(pm.value());
    std::vector<u64> a(pm.degree());
    for (int t = 0; t < 3; ++t) {
      for (auto& v : a) v = rng() % pm.value();
      const u64 lhs = sum_mod(a, e.modulus);
      std::vector<u64> transformed = a;
      ntt_forward_limb(transformed, pm);
      if (weighted_sum_mod(transformed, e.weights, e.modulus) != lhs) return false;
    }
    return true;
  }

  std::map<u64, Entry> vectors_;
};

// Bit width of the random projection weights for modulus q. Weights lie in
// [1, 2^k] with 2^k < q, so none vanishes mod q.
inline int projection_weight_bits(u64 q) {
  const int w = static_cast<int>(std::bit_width(q));
  return std::max(1, std::min({16, 63 - w, w - 2}));
}

// Randomized projection check for c = a (.) b over one limb: compares
// sum r_i c_i with sum (r_i a_i) b_i for small random nonzero weights r_i
// drawn from seed. A corruption of a single entry of c is always caught.
// Sums are accumulated exactly and reduced once per block.
inline ChecksumFlags pointwise_projection(std::span<const u64> a, std::span<const u64> b,
                                          std::span<const u64> c, u64 seed, const Modulus& m) {
  const u64 q = m.value;
  const int k = projection_weight_bits(q);
  const int w = static_cast<int>(std::bit_width(q));
  const int room = 127 - k - 2 * w;
  const std::size_t block = room >= 32 ? c.size() + 1 : std::size_t{1} << room;
  u64 x = seed | 1;
  u128 lhs = 0;
  u128 rhs = 0;
  std::size_t pending = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    const u64 r = 1 + (x >> (64 - k));
    lhs += static_cast<u128>(r) * c[i];
    rhs += static_cast<u128>(r * a[i]) * b[i];
    if (++pending == block) {
      lhs = reduce_128(lhs, m);
      rhs = reduce_128(rhs, m);
      pending = 0;
    }
  }
  return {reduce_128(rhs, m), reduce_128(lhs, m)};
}

}  // namespace sdcfhe::abft
