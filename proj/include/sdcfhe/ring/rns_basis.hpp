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
#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sdcfhe/ring/prime_modulus.hpp"

namespace sdcfhe {

using BigInt = boost::multiprecision::cpp_int;

inline u64 big_mod_word(const BigInt& v, u64 q) {
  BigInt r = v % q;
  if (r < 0) r += q;
  return r.convert_to<u64>();
}

// Ordered set of pairwise distinct primes sharing one ring degree, with the
// CRT constants Q, Q_i = Q / q_i and u_i = Q_i^{-1} mod q_i.
class RnsBasis {
 public:
  explicit RnsBasis(std::vector<PrimePtr> primes) : primes_(std::move(primes)) {
    if (primes_.empty()) throw ConfigError("RNS basis needs at least one prime");
    const std::size_t n = primes_.front()->degree();
    for (std::size_t i = 0; i < primes_.size(); ++i) {
      if (primes_[i]->degree() != n) throw ConfigError("RNS basis primes disagree on degree");
      for (std::size_t j = 0; j < i; ++j) {
        if (primes_[j]->value() == primes_[i]->value()) {
          throw ConfigError("RNS basis primes must be distinct");
        }
      }
    }
    product_ = 1;
    for (const auto& p : primes_) product_ *= p->value();
    half_product_ = product_ / 2;
    cofactors_.reserve(primes_.size());
    inverses_.reserve(primes_.size());
    for (const auto& p : primes_) {
      BigInt qi_hat = product_ / p->value();
      const u64 hat_mod = big_mod_word(qi_hat, p->value());
      inverses_.push_back(ShoupFactor(inv_mod_prime(hat_mod, p->modulus()), p->value()));
      cofactors_.push_back(std::move(qi_hat));
    }
  }

  static std::shared_ptr<const RnsBasis> make(std::vector<PrimePtr> primes) {
    return std::make_shared<const RnsBasis>(std::move(primes));
  }

  std::size_t size() const { return primes_.size(); }
  std::size_t degree() const { return primes_.front()->degree(); }
  const PrimeModulus& prime(std::size_t i) const { return *primes_[i]; }
  const PrimePtr& prime_ptr(std::size_t i) const { return primes_[i]; }
  const std::vector<PrimePtr>& primes() const { return primes_; }

  const BigInt& product() const { return product_; }
  const BigInt& half_product() const { return half_product_; }
  // Q_i = Q / q_i
  const BigInt& cofactor(std::size_t i) const { return cofactors_[i]; }
  // u_i = Q_i^{-1} mod q_i
  u64 cofactor_inverse(std::size_t i) const { return inverses_[i].operand; }
  const ShoupFactor& cofactor_inverse_factor(std::size_t i) const { return inverses_[i]; }

  double log2_product() const {
    double bits = 0;
    for (const auto& p : primes_) bits += std::log2(static_cast<double>(p->value()));
    return bits;
  }

  bool same_primes(const RnsBasis& o) const {
    if (o.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (prime(i).value() != o.prime(i).value()) return false;
    }
    return degree() == o.degree();
  }

  bool disjoint_from(const RnsBasis& o) const {
    for (const auto& a : primes_) {
      for (const auto& b : o.primes_) {
        if (a->value() == b->value()) return false;
      }
    }
    return true;
  }

 private:
  std::vector<PrimePtr> primes_;
  BigInt product_;
  BigInt half_product_;
  std::vector<BigInt> cofactors_;
  std::vector<ShoupFactor> inverses_;
};

using BasisPtr = std::shared_ptr<const RnsBasis>;

}  // namespace sdcfhe
