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

#include "sdcfhe/ring/rns_poly.hpp"

namespace sdcfhe {

// Reconstructs every coefficient as D = (sum_i [v_i u_i]_{q_i} Q_i) mod Q,
// recentered into (-Q/2, Q/2].
inline std::vector<BigInt> crt_interpolate(const RnsPoly& v) {
  require_domain(v, Domain::Coefficient, "crt_interpolate");
  const RnsBasis& basis = *v.basis();
  const std::size_t n = v.degree();
  std::vector<BigInt> out(n);
  std::vector<u64> scaled(basis.size());
  for (std::size_t c = 0; c < n; ++c) {
    BigInt acc = 0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const u64 q = basis.prime(i).value();
      const u64 y = mul_shoup(reduce_64(v.at(i, c), basis.prime(i).modulus()),
                              basis.cofactor_inverse_factor(i), q);
      acc += basis.cofactor(i) * y;
    }
    acc %= basis.product();
    if (acc > basis.half_product()) acc -= basis.product();
    out[c] = std::move(acc);
  }
  return out;
}

// Residue decomposition of signed integers; inverse of crt_interpolate.
inline RnsPoly crt_decompose(const std::vector<BigInt>& values, const BasisPtr& basis) {
  RnsPoly out(basis, Domain::Coefficient);
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const u64 q = basis->prime(i).value();
    auto dst = out.limb(i);
    for (std::size_t c = 0; c < values.size(); ++c) dst[c] = big_mod_word(values[c], q);
  }
  return out;
}

}  // namespace sdcfhe
