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

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdcfhe {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// Largest supported prime width. Products of two residues then fit in 124 bits.
inline constexpr int kMaxPrimeBits = 62;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A word-sized modulus with its Barrett constant floor(2^128 / q).
struct Modulus {
  u64 value = 0;
  u64 ratio_hi = 0;
  u64 ratio_lo = 0;

  Modulus() = default;
  explicit Modulus(u64 q) : value(q) {
    if (q < 2 || q >= (u64{1} << kMaxPrimeBits)) {
      throw ConfigError("modulus out of range: " + std::to_string(q));
    }
    const u128 ratio = std::numeric_limits<u128>::max() / q;
    ratio_hi = static_cast<u64>(ratio >> 64);
    ratio_lo = static_cast<u64>(ratio);
  }
};

// Barrett reduction of an arbitrary 128-bit value. The quotient estimate is
// the exact floor(x * ratio / 2^128), which undershoots by at most one.
inline u64 reduce_128(u128 x, const Modulus& m) {
  const u64 x0 = static_cast<u64>(x);
  const u64 x1 = static_cast<u64>(x >> 64);
  const u128 p00 = static_cast<u128>(x0) * m.ratio_lo;
  const u128 p01 = static_cast<u128>(x0) * m.ratio_hi;
  const u128 p10 = static_cast<u128>(x1) * m.ratio_lo;
  const u128 mid = (p00 >> 64) + static_cast<u64>(p01) + static_cast<u64>(p10);
  const u64 qest = x1 * m.ratio_hi + static_cast<u64>(p01 >> 64) +
                   static_cast<u64>(p10 >> 64) + static_cast<u64>(mid >> 64);
  u64 r = x0 - qest * m.value;
  if (r >= m.value) r -= m.value;
  return r;
}

inline u64 reduce_64(u64 x, const Modulus& m) { return reduce_128(x, m); }

inline u64 mul_mod(u64 a, u64 b, const Modulus& m) {
  return reduce_128(static_cast<u128>(a) * b, m);
}

// add/sub/neg expect canonical inputs in [0, q).
inline u64 add_mod(u64 a, u64 b, u64 q) {
  const u64 s = a + b;
  return s >= q ? s - q : s;
}

inline u64 sub_mod(u64 a, u64 b, u64 q) { return a >= b ? a - b : a + q - b; }

inline u64 neg_mod(u64 a, u64 q) { return a == 0 ? 0 : q - a; }

// Multiplication by a fixed operand using a precomputed quotient
// floor(w * 2^64 / q). Valid for any 64-bit multiplicand.
struct ShoupFactor {
  u64 operand = 0;
  u64 quotient = 0;

  ShoupFactor() = default;
  ShoupFactor(u64 w, u64 q)
      : operand(w), quotient(static_cast<u64>((static_cast<u128>(w) << 64) / q)) {}
};

inline u64 mul_shoup(u64 a, const ShoupFactor& w, u64 q) {
  const u64 hi = static_cast<u64>((static_cast<u128>(a) * w.quotient) >> 64);
  const u64 r = a * w.operand - hi * q;
  return r >= q ? r - q : r;
}

inline u64 pow_mod(u64 base, u64 exp, const Modulus& m) {
  u64 result = 1 % m.value;
  base = reduce_64(base, m);
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

// Inverse modulo a prime via Fermat.
inline u64 inv_mod_prime(u64 a, const Modulus& m) {
  a = reduce_64(a, m);
  if (a == 0) throw std::domain_error("zero has no modular inverse");
  return pow_mod(a, m.value - 2, m);
}

namespace detail {

inline u64 mul_mod_plain(u64 a, u64 b, u64 n) {
  return static_cast<u64>(static_cast<u128>(a) * b % n);
}

inline u64 pow_mod_plain(u64 b, u64 e, u64 n) {
  u64 r = 1 % n;
  b %= n;
  while (e) {
    if (e & 1) r = mul_mod_plain(r, b, n);
    b = mul_mod_plain(b, b, n);
    e >>= 1;
  }
  return r;
}

}  // namespace detail

// Deterministic Miller-Rabin for 64-bit inputs.
inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = detail::pow_mod_plain(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = detail::mul_mod_plain(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// Smallest generator of the order-2n subgroup: psi with psi^n = -1.
// Requires q prime and q = 1 (mod 2n).
inline u64 find_primitive_root_2n(u64 q, u64 n) {
  const Modulus m(q);
  const u64 two_n = 2 * n;
  if ((q - 1) % two_n != 0) {
    throw ConfigError("prime " + std::to_string(q) + " is not 1 mod 2n");
  }
  const u64 cofactor = (q - 1) / two_n;
  for (u64 g = 2; g < q; ++g) {
    const u64 psi = pow_mod(g, cofactor, m);
    if (pow_mod(psi, n, m) == q - 1) {
      // psi generates the 2n-th roots. Prefer the minimal one for stable tables.
      u64 best = psi;
      u64 cur = psi;
      const u64 psi_sq = mul_mod(psi, psi, m);
      for (u64 k = 1; k < n; ++k) {
        cur = mul_mod(cur, psi_sq, m);
        if (cur < best) best = cur;
      }
      return best;
    }
  }
  throw ConfigError("no primitive 2n-th root found");
}

// `count` distinct primes q = 1 (mod 2n) with exactly `bits` bits, largest
// first. Primes in `exclude` are skipped.
inline std::vector<u64> generate_ntt_primes(int bits, u64 n, std::size_t count,
                                            const std::vector<u64>& exclude = {}) {
  if (bits < 4 || bits > kMaxPrimeBits) {
    throw ConfigError("prime bit width must be in [4, 62]");
  }
  const u64 step = 2 * n;
  const u64 center = u64{1} << bits;
  auto excluded = [&](u64 p) {
    for (u64 e : exclude) {
      if (e == p) return true;
    }
    return false;
  };
  std::vector<u64> primes;
  u64 cand = center + 1 - step;
  const u64 floor_value = u64{1} << (bits - 1);
  while (primes.size() < count) {
    if (cand <= floor_value) throw ConfigError("ran out of NTT-friendly primes");
    if (is_prime(cand) && !excluded(cand)) primes.push_back(cand);
    cand -= step;
  }
  return primes;
}

// Primes near 2^bits on both sides of it (widths bits and bits+1), alternating
// below/above. The chain scale then stays close to 2^bits across rescales.
inline std::vector<u64> generate_scaling_primes(int bits, u64 n, std::size_t count,
                                                const std::vector<u64>& exclude = {}) {
  if (bits < 4 || bits + 1 > kMaxPrimeBits) {
    throw ConfigError("scaling prime bit width out of range");
  }
  const u64 step = 2 * n;
  const u64 center = u64{1} << bits;
  auto excluded = [&](u64 p) {
    for (u64 e : exclude) {
      if (e == p) return true;
    }
    return false;
  };
  std::vector<u64> primes;
  u64 below = center + 1 - step;
  u64 above = center + 1 + step;
  bool take_below = true;
  while (primes.size() < count) {
    if (take_below) {
      while (!is_prime(below) || excluded(below)) below -= step;
      primes.push_back(below);
      below -= step;
    } else {
      while (!is_prime(above) || excluded(above)) above += step;
      primes.push_back(above);
      above += step;
    }
    take_below = !take_below;
  }
  return primes;
}

inline int bit_width_of(u64 v) {
  int b = 0;
  while (v) {
    ++b;
    v >>= 1;
  }
  return b;
}

}  // namespace sdcfhe
