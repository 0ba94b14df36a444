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

// Reference computations used only by tests. Deliberately naive and
// independent of the library's fast paths.
#pragma once

#include <cstdint>
#include <vector>

namespace sdcfhe::oracle {

using u64 = std::uint64_t;

inline u64 mulmod(u64 a, u64 b, u64 q) {
  return static_cast<u64>(static_cast<unsigned __int128>(a) * b % q);
}

inline u64 powmod(u64 b, u64 e, u64 q) {
  u64 r = 1 % q;
  b %= q;
  while (e) {
    if (e & 1) r = mulmod(r, b, q);
    b = mulmod(b, b, q);
    e >>= 1;
  }
  return r;
}

// A_j = sum_k a_k psi^{(2j+1) k}
inline std::vector<u64> naive_negacyclic_ntt(const std::vector<u64>& a, u64 q, u64 psi) {
  const std::size_t n = a.size();
  std::vector<u64> out(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    const u64 x = powmod(psi, 2 * j + 1, q);
    u64 acc = 0, xp = 1;
    for (std::size_t k = 0; k < n; ++k) {
      acc = (acc + mulmod(a[k] % q, xp, q)) % q;
      xp = mulmod(xp, x, q);
    }
    out[j] = acc;
  }
  return out;
}

// O(n^2) product mod X^n + 1.
inline std::vector<u64> schoolbook_negacyclic(const std::vector<u64>& a, const std::vector<u64>& b, u64 q) {
  const std::size_t n = a.size();
  std::vector<u64> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const u64 p = mulmod(a[i], b[j], q);
      const std::size_t k = i + j;
      if (k < n) {
        out[k] = (out[k] + p) % q;
      } else {
        out[k - n] = (out[k - n] + q - p) % q;
      }
    }
  }
  return out;
}

// a(X) -> a(X^g) with X^n = -1, computed from exponent quotient parity.
inline std::vector<u64> galois_map(const std::vector<u64>& a, u64 g, u64 q) {
  const std::size_t n = a.size();
  std::vector<u64> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const u64 e = i * g;
    const u64 quotient = e / n;
    const u64 idx = e % n;
    const u64 v = a[i] % q;
    out[idx] = (quotient % 2 == 0) ? v : (q - v) % q;
  }
  return out;
}

// Unique x in [0, prod) matching all residues, by scanning.
inline u64 crt_scan(const std::vector<u64>& residues, const std::vector<u64>& moduli) {
  u64 prod = 1;
  for (u64 m : moduli) prod *= m;
  for (u64 x = 0; x < prod; ++x) {
    bool ok = true;
    for (std::size_t i = 0; i < moduli.size(); ++i) ok &= (x % moduli[i] == residues[i]);
    if (ok) return x;
  }
  return prod;
}

// Every value d + e*Q with 0 <= e < k.
inline std::vector<u64> bconv_candidates(u64 d, u64 Q, u64 k) {
  std::vector<u64> out;
  for (u64 e = 0; e < k; ++e) out.push_back(d + e * Q);
  return out;
}

// Solves F W = (1, ..., 1) for the negacyclic transform matrix
// W[j][k] = psi^((2j+1)k) by Gauss-Jordan elimination mod a prime q.
inline std::vector<u64> solve_checksum_vector(std::size_t n, u64 q, u64 psi) {
  // Row k of the system: sum_j W[j][k] F_j = 1.
  std::vector<std::vector<u64>> m(n, std::vector<u64>(n + 1, 1));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) m[k][j] = powmod(psi, (2 * j + 1) * k, q);
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (m[piv][col] == 0) ++piv;
    std::swap(m[piv], m[col]);
    const u64 inv = powmod(m[col][col], q - 2, q);
    for (auto& v : m[col]) v = mulmod(v, inv, q);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || m[r][col] == 0) continue;
      const u64 f = m[r][col];
      for (std::size_t c = 0; c <= n; ++c) m[r][c] = (m[r][c] + q - mulmod(f, m[col][c], q)) % q;
    }
  }
  std::vector<u64> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = m[j][n];
  return out;
}

}  // namespace sdcfhe::oracle
