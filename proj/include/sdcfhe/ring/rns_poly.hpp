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
#include <span>
#include <string>
#include <vector>

#include "sdcfhe/ring/rns_basis.hpp"

namespace sdcfhe {

enum class Domain { Coefficient, Evaluation };

inline const char* domain_name(Domain d) {
  return d == Domain::Coefficient ? "coefficient" : "evaluation";
}

// A ring element of Z_Q[X]/(X^n + 1) stored as one residue vector per prime.
// Limb-major storage: entry (limb, coeff) lives at limb * n + coeff.
class RnsPoly {
 public:
  RnsPoly() = default;
  RnsPoly(BasisPtr basis, Domain domain)
      : basis_(std::move(basis)), domain_(domain), data_(basis_->size() * basis_->degree(), 0) {}

  static RnsPoly zero(BasisPtr basis, Domain domain) { return RnsPoly(std::move(basis), domain); }

  const BasisPtr& basis() const { return basis_; }
  Domain domain() const { return domain_; }
  void set_domain(Domain d) { domain_ = d; }
  std::size_t degree() const { return basis_->degree(); }
  std::size_t limbs() const { return basis_->size(); }
  bool empty() const { return !basis_; }

  std::span<u64> limb(std::size_t i) {
    return {data_.data() + i * degree(), degree()};
  }
  std::span<const u64> limb(std::size_t i) const {
    return {data_.data() + i * degree(), degree()};
  }
  u64& at(std::size_t limb, std::size_t coeff) { return data_[limb * degree() + coeff]; }
  u64 at(std::size_t limb, std::size_t coeff) const { return data_[limb * degree() + coeff]; }

  std::span<u64> data() { return data_; }
  std::span<const u64> data() const { return data_; }

  bool operator==(const RnsPoly& o) const {
    return domain_ == o.domain_ && basis_->same_primes(*o.basis_) && data_ == o.data_;
  }

  // Canonical-form check: every residue strictly below its limb modulus.
  bool is_canonical() const {
    for (std::size_t i = 0; i < limbs(); ++i) {
      const u64 q = basis_->prime(i).value();
      for (u64 v : limb(i)) {
        if (v >= q) return false;
      }
    }
    return true;
  }

  // Sets every limb from signed small integers (e.g. sampled noise).
  void assign_signed(std::span<const std::int64_t> coeffs) {
    for (std::size_t i = 0; i < limbs(); ++i) {
      const u64 q = basis_->prime(i).value();
      auto dst = limb(i);
      for (std::size_t j = 0; j < degree(); ++j) {
        const std::int64_t c = coeffs[j];
        dst[j] = c >= 0 ? static_cast<u64>(c) % q : q - (static_cast<u64>(-c) % q);
        if (dst[j] == q) dst[j] = 0;
      }
    }
  }

 private:
  BasisPtr basis_;
  Domain domain_ = Domain::Coefficient;
  std::vector<u64> data_;
};

inline void require_same_basis(const RnsPoly& a, const RnsPoly& b, const char* what) {
  if (a.empty() || b.empty() || !a.basis()->same_primes(*b.basis())) {
    throw ConfigError(std::string(what) + ": basis mismatch");
  }
}

inline void require_domain(const RnsPoly& a, Domain d, const char* what) {
  if (a.domain() != d) {
    throw ConfigError(std::string(what) + ": operand must be in " + domain_name(d) + " domain");
  }
}

// Copies of selected limbs into a poly over `target` (whose primes must appear
// in the source basis in the given positions).
inline RnsPoly select_limbs(const RnsPoly& src, const BasisPtr& target,
                            const std::vector<std::size_t>& positions) {
  RnsPoly out(target, src.domain());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    auto s = src.limb(positions[i]);
    std::copy(s.begin(), s.end(), out.limb(i).begin());
  }
  return out;
}

}  // namespace sdcfhe
