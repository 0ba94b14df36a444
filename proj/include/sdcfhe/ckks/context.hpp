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

#include <memory>
#include <numeric>
#include <vector>

#include "sdcfhe/abft/checksum.hpp"
#include "sdcfhe/ckks/params.hpp"
#include "sdcfhe/ring/bconv.hpp"

namespace sdcfhe {

// Precomputed bases, converters and constants for one parameter set.
// Immutable and shareable once built.
class CkksContext {
 public:
  explicit CkksContext(CkksParams params) : params_(std::move(params)) {
    params_.validate();
    const std::size_t n = params_.n;
    const std::size_t L = static_cast<std::size_t>(params_.depth);
    const std::size_t K = static_cast<std::size_t>(params_.resolved_special_count());

    std::vector<u64> used = generate_ntt_primes(params_.base_bits, n, 1);
    const auto scaling = generate_scaling_primes(params_.rescale_bits, n, L, used);
    used.insert(used.end(), scaling.begin(), scaling.end());
    const auto special = generate_ntt_primes(params_.special_bits, n, K, used);

    for (u64 q : used) chain_.push_back(std::make_shared<const PrimeModulus>(q, n));
    for (u64 p : special) special_.push_back(std::make_shared<const PrimeModulus>(p, n));

    special_basis_ = RnsBasis::make(special_);
    for (std::size_t l = 0; l <= L; ++l) {
      std::vector<PrimePtr> q(chain_.begin(), chain_.begin() + static_cast<std::ptrdiff_t>(l + 1));
      level_basis_.push_back(RnsBasis::make(q));
      last_basis_.push_back(RnsBasis::make({chain_[l]}));
      std::vector<PrimePtr> ext = q;
      ext.insert(ext.end(), special_.begin(), special_.end());
      ext_basis_.push_back(RnsBasis::make(ext));
      modup_.push_back(std::make_shared<const BasisConverter>(level_basis_[l], special_basis_));
      moddown_.push_back(std::make_shared<const BasisConverter>(special_basis_, level_basis_[l]));
    }

    const BigInt& P = special_basis_->product();
    for (std::size_t i = 0; i <= L; ++i) {
      const u64 qi = chain_[i]->value();
      p_inv_.emplace_back(inv_mod_prime(big_mod_word(P, qi), chain_[i]->modulus()), qi);
      p_mod_q_.push_back(big_mod_word(P, qi));
    }
    // q_l^{-1} mod q_i for i < l.
    q_last_inv_.resize(L + 1);
    for (std::size_t l = 1; l <= L; ++l) {
      for (std::size_t i = 0; i < l; ++i) {
        const u64 qi = chain_[i]->value();
        q_last_inv_[l].emplace_back(inv_mod_prime(chain_[l]->value() % qi, chain_[i]->modulus()), qi);
      }
    }

    for (const auto& p : chain_) checksums_.add_prime(*p);
    for (const auto& p : special_) checksums_.add_prime(*p);
  }

  const CkksParams& params() const { return params_; }
  std::size_t degree() const { return params_.n; }
  std::size_t slots() const { return params_.n / 2; }
  int max_level() const { return params_.depth; }
  std::size_t special_count() const { return special_.size(); }

  const std::vector<PrimePtr>& chain() const { return chain_; }
  const std::vector<PrimePtr>& special_primes() const { return special_; }
  u64 chain_prime(std::size_t i) const { return chain_[i]->value(); }

  const BasisPtr& level_basis(int level) const { return level_basis_.at(static_cast<std::size_t>(level)); }
  const BasisPtr& ext_basis(int level) const { return ext_basis_.at(static_cast<std::size_t>(level)); }
  const BasisPtr& last_basis(int level) const { return last_basis_.at(static_cast<std::size_t>(level)); }
  const BasisPtr& special_basis() const { return special_basis_; }
  const BasisConverter& modup(int level) const { return *modup_.at(static_cast<std::size_t>(level)); }
  const BasisConverter& moddown(int level) const { return *moddown_.at(static_cast<std::size_t>(level)); }

  std::span<const ShoupFactor> p_inverse(int level) const {
    return std::span<const ShoupFactor>(p_inv_).first(static_cast<std::size_t>(level) + 1);
  }
  u64 p_mod_q(std::size_t i) const { return p_mod_q_[i]; }
  std::span<const ShoupFactor> q_last_inverse(int level) const { return q_last_inv_.at(static_cast<std::size_t>(level)); }

  const abft::ChecksumContext& checksums() const { return checksums_; }

  // Positions of Q_l and P limbs inside the top-level extended basis.
  std::vector<std::size_t> ext_positions(int level) const {
    std::vector<std::size_t> pos(static_cast<std::size_t>(level) + 1);
    std::iota(pos.begin(), pos.end(), 0);
    for (std::size_t k = 0; k < special_.size(); ++k) pos.push_back(chain_.size() + k);
    return pos;
  }

  double log2_q(int level) const { return level_basis(level)->log2_product(); }

 private:
  CkksParams params_;
  std::vector<PrimePtr> chain_;
  std::vector<PrimePtr> special_;
  BasisPtr special_basis_;
  std::vector<BasisPtr> level_basis_, ext_basis_, last_basis_;
  std::vector<std::shared_ptr<const BasisConverter>> modup_, moddown_;
  std::vector<ShoupFactor> p_inv_;
  std::vector<u64> p_mod_q_;
  std::vector<std::vector<ShoupFactor>> q_last_inv_;
  abft::ChecksumContext checksums_;
};

using ContextPtr = std::shared_ptr<const CkksContext>;

inline ContextPtr make_context(const CkksParams& p) { return std::make_shared<const CkksContext>(p); }

}  // namespace sdcfhe
