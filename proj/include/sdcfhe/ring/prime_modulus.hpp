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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdcfhe/ring/modarith.hpp"

namespace sdcfhe {

inline std::size_t reverse_bits(std::size_t v, int width) {
  std::size_t r = 0;
  for (int i = 0; i < width; ++i) {
    r = (r << 1) | ((v >> i) & 1);
  }
  return r;
}

// A word-sized NTT prime for ring degree n together with its twiddle tables.
// Immutable after construction.
class PrimeModulus {
 public:
  PrimeModulus(u64 q, std::size_t n, std::optional<u64> psi = std::nullopt)
      : mod_(q), n_(n) {
    if (n == 0 || (n & (n - 1)) != 0) throw ConfigError("ring degree must be a power of two");
    if (!is_prime(q)) throw ConfigError("modulus " + std::to_string(q) + " is not prime");
    if ((q - 1) % (2 * n) != 0) {
      throw ConfigError("prime " + std::to_string(q) + " is not 1 mod 2n");
    }
    log_n_ = 0;
    while ((std::size_t{1} << log_n_) < n) ++log_n_;

    psi_ = psi ? *psi : find_primitive_root_2n(q, n);
    if (pow_mod(psi_, n, mod_) != q - 1) {
      throw ConfigError("psi is not a primitive 2n-th root of unity");
    }
    psi_inv_ = inv_mod_prime(psi_, mod_);
    n_inv_ = ShoupFactor(inv_mod_prime(n % q, mod_), q);

    psi_rev_.resize(n);
    psi_inv_rev_.resize(n);
    bitrev_.resize(n);
    u64 pw = 1;
    u64 pw_inv = 1;
    std::vector<u64> powers(n), inv_powers(n);
    for (std::size_t i = 0; i < n; ++i) {
      powers[i] = pw;
      inv_powers[i] = pw_inv;
      pw = mul_mod(pw, psi_, mod_);
      pw_inv = mul_mod(pw_inv, psi_inv_, mod_);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = reverse_bits(i, log_n_);
      bitrev_[i] = static_cast<std::uint32_t>(r);
      psi_rev_[i] = ShoupFactor(powers[r], q);
      psi_inv_rev_[i] = ShoupFactor(inv_powers[r], q);
    }
  }

  u64 value() const { return mod_.value; }
  const Modulus& modulus() const { return mod_; }
  std::size_t degree() const { return n_; }
  int log_degree() const { return log_n_; }
  u64 psi() const { return psi_; }
  u64 psi_inv() const { return psi_inv_; }
  u64 n_inv() const { return n_inv_.operand; }
  const ShoupFactor& n_inv_factor() const { return n_inv_; }
  int bits() const { return bit_width_of(mod_.value); }

  const std::vector<ShoupFactor>& psi_rev() const { return psi_rev_; }
  const std::vector<ShoupFactor>& psi_inv_rev() const { return psi_inv_rev_; }
  const std::vector<std::uint32_t>& bitrev() const { return bitrev_; }

  bool operator==(const PrimeModulus& o) const { return mod_.value == o.mod_.value && n_ == o.n_; }

 private:
  Modulus mod_;
  std::size_t n_;
  int log_n_ = 0;
  u64 psi_ = 0;
  u64 psi_inv_ = 0;
  ShoupFactor n_inv_;
  std::vector<ShoupFactor> psi_rev_;
  std::vector<ShoupFactor> psi_inv_rev_;
  std::vector<std::uint32_t> bitrev_;
};

using PrimePtr = std::shared_ptr<const PrimeModulus>;

}  // namespace sdcfhe
