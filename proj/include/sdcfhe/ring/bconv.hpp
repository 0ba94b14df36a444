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

#include <vector>

#include "sdcfhe/ring/ntt.hpp"

namespace sdcfhe {

// Fast basis conversion from B1 = {q_i} to a disjoint B2 = {p_j}:
//   out_j = sum_i [v_i * u_i]_{q_i} * (Q_i mod p_j)  mod p_j
// The result represents v + e*Q for some 0 <= e < |B1|.
class BasisConverter {
 public:
  BasisConverter(BasisPtr from, BasisPtr to) : from_(std::move(from)), to_(std::move(to)) {
    if (from_->degree() != to_->degree()) throw ConfigError("bconv: degree mismatch");
    if (!from_->disjoint_from(*to_)) throw ConfigError("bconv: bases overlap");
    table_.resize(from_->size() * to_->size());
    for (std::size_t i = 0; i < from_->size(); ++i) {
      for (std::size_t j = 0; j < to_->size(); ++j) {
        table_[i * to_->size() + j] = big_mod_word(from_->cofactor(i), to_->prime(j).value());
      }
    }
  }

  const BasisPtr& from() const { return from_; }
  const BasisPtr& to() const { return to_; }
  u64 cofactor_mod(std::size_t i, std::size_t j) const { return table_[i * to_->size() + j]; }

  // Scales every source limb by u_i in place (the first half of the
  // conversion); `scaled` has from().size() limbs.
  void scale_inputs(const RnsPoly& v, std::span<u64> scaled) const {
    const std::size_t n = v.degree();
    for (std::size_t i = 0; i < from_->size(); ++i) {
      const u64 q = from_->prime(i).value();
      const ShoupFactor& u = from_->cofactor_inverse_factor(i);
      auto src = v.limb(i);
      u64* dst = scaled.data() + i * n;
      for (std::size_t c = 0; c < n; ++c) dst[c] = mul_shoup(src[c], u, q);
    }
  }

  // Accumulates sum_i scaled_i * (Q_i mod p_j) for every target limb. Scaled
  // values may be non-canonical; the result is exact modulo p_j.
  void accumulate(std::span<const u64> scaled, RnsPoly& out) const {
    const std::size_t n = out.degree();
    const std::size_t k = from_->size();
    for (std::size_t j = 0; j < to_->size(); ++j) {
      const Modulus& p = to_->prime(j).modulus();
      auto dst = out.limb(j);
      for (std::size_t c = 0; c < n; ++c) {
        u128 acc = 0;
        std::size_t pending = 0;
        u64 partial = 0;
        for (std::size_t i = 0; i < k; ++i) {
          acc += static_cast<u128>(scaled[i * n + c]) * table_[i * to_->size() + j];
          if (++pending == 8) {
            partial = add_mod(partial, reduce_128(acc, p), p.value);
            acc = 0;
            pending = 0;
          }
        }
        dst[c] = add_mod(partial, reduce_128(acc, p), p.value);
      }
    }
  }

  template <class Tap = NoTap>
  RnsPoly convert(const RnsPoly& v, Tap&& tap = Tap{}) const {
    require_domain(v, Domain::Coefficient, "bconv");
    if (!v.basis()->same_primes(*from_)) throw ConfigError("bconv: source basis mismatch");
    std::vector<u64> scaled(from_->size() * v.degree());
    scale_inputs(v, scaled);
    tap(0, std::span<u64>(scaled));
    RnsPoly out(to_, Domain::Coefficient);
    accumulate(scaled, out);
    return out;
  }

 private:
  BasisPtr from_;
  BasisPtr to_;
  std::vector<u64> table_;
};

inline RnsPoly bconv(const RnsPoly& v, const BasisPtr& target) {
  return BasisConverter(v.basis(), target).convert(v);
}

}  // namespace sdcfhe
