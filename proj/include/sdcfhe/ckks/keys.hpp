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

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "sdcfhe/ckks/context.hpp"
#include "sdcfhe/ckks/random.hpp"
#include "sdcfhe/ring/ntt.hpp"
#include "sdcfhe/ring/poly_ops.hpp"

namespace sdcfhe {

struct SecretKey {
  std::vector<std::int64_t> coeffs;  // ternary
  RnsPoly eval;                       // Evaluation domain over the top extended basis
};

struct PublicKey {
  RnsPoly b, a;  // b = -a s + e over Q_L, Evaluation domain
};

// Key-switching key from s' to s: b = -a s + e + P s' over Q_L * P. Kept
// restricted to every level's Q_l u P limbs.
struct SwitchingKey {
  std::vector<RnsPoly> b, a;  // index = level
};

struct KeyMaterial {
  SecretKey sk;
  PublicKey pk;
  std::optional<SwitchingKey> relin;
  std::map<std::size_t, SwitchingKey> rotations;

  const SwitchingKey& rotation(std::size_t r) const {
    auto it = rotations.find(r);
    if (it == rotations.end()) throw ConfigError("no rotation key for step " + std::to_string(r));
    return it->second;
  }
};

inline RnsPoly restrict_secret(const CkksContext& ctx, const SecretKey& sk, int level) {
  std::vector<std::size_t> pos(static_cast<std::size_t>(level) + 1);
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
  return select_limbs(sk.eval, ctx.level_basis(level), pos);
}

class KeyGenerator {
 public:
  KeyGenerator(ContextPtr ctx, std::uint64_t seed) : ctx_(std::move(ctx)), sampler_(seed) {}

  KeyMaterial generate(const std::vector<std::size_t>& rotations = {}, bool relin = true) {
    KeyMaterial km;
    km.sk = secret_key();
    km.pk = public_key(km.sk);
    if (relin) km.relin = relin_key(km.sk);
    for (std::size_t r : rotations) {
      if (r != 0 && !km.rotations.count(r)) km.rotations.emplace(r, rotation_key(km.sk, r));
    }
    return km;
  }

  SecretKey secret_key() {
    SecretKey sk;
    sk.coeffs = sampler_.ternary_vector(ctx_->degree());
    sk.eval = ntt_forward(signed_poly(sk.coeffs, top()));
    return sk;
  }

  PublicKey public_key(const SecretKey& sk) {
    const BasisPtr& q = ctx_->level_basis(ctx_->max_level());
    const RnsPoly s = restrict_secret(*ctx_, sk, ctx_->max_level());
    RnsPoly a = sampler_.uniform_poly(q, Domain::Evaluation);
    RnsPoly e = ntt_forward(signed_poly(sampler_.gaussian_vector(ctx_->degree(), ctx_->params().noise_stddev), q));
    RnsPoly b = poly_sub(e, pointwise_mul(a, s));
    return {std::move(b), std::move(a)};
  }

  SwitchingKey relin_key(const SecretKey& sk) { return switching_key(sk, pointwise_mul(sk.eval, sk.eval)); }

  SwitchingKey rotation_key(const SecretKey& sk, std::size_t r) {
    const RnsPoly s_coeff = signed_poly(sk.coeffs, top());
    return switching_key(sk, ntt_forward(automorphism(s_coeff, r)));
  }

  // `target` is s' in the Evaluation domain over the top extended basis.
  SwitchingKey switching_key(const SecretKey& sk, const RnsPoly& target) {
    const BasisPtr& ext = top();
    RnsPoly a = sampler_.uniform_poly(ext, Domain::Evaluation);
    RnsPoly e = ntt_forward(signed_poly(sampler_.gaussian_vector(ctx_->degree(), ctx_->params().noise_stddev), ext));
    RnsPoly b = poly_sub(e, pointwise_mul(a, sk.eval));
    const std::size_t q_limbs = static_cast<std::size_t>(ctx_->max_level()) + 1;
    for (std::size_t i = 0; i < q_limbs; ++i) {
      const Modulus& m = ext->prime(i).modulus();
      const ShoupFactor p(ctx_->p_mod_q(i), m.value);
      auto bl = b.limb(i);
      auto tl = target.limb(i);
      for (std::size_t c = 0; c < bl.size(); ++c) bl[c] = add_mod(bl[c], mul_shoup(tl[c], p, m.value), m.value);
    }
    return expand_levels(*ctx_, b, a);
  }

  static SwitchingKey expand_levels(const CkksContext& ctx, const RnsPoly& b, const RnsPoly& a) {
    SwitchingKey k;
    for (int l = 0; l <= ctx.max_level(); ++l) {
      const auto pos = ctx.ext_positions(l);
      k.b.push_back(select_limbs(b, ctx.ext_basis(l), pos));
      k.a.push_back(select_limbs(a, ctx.ext_basis(l), pos));
    }
    return k;
  }

 private:
  const BasisPtr& top() const { return ctx_->ext_basis(ctx_->max_level()); }

  ContextPtr ctx_;
  Sampler sampler_;
};

// Versioned binary key container:
//   magic "SDCFHEKY", u32 version, chain fingerprint (all primes),
//   secret coefficients (i8), public key, optional relin key, rotation keys.
// All words little-endian.
namespace keyio {

inline constexpr std::array<char, 8> kMagic = {'S', 'D', 'C', 'F', 'H', 'E', 'K', 'Y'};
inline constexpr std::uint32_t kVersion = 1;

inline void put_u64(std::ostream& o, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  o.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ConfigError("key file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline void put_poly(std::ostream& o, const RnsPoly& p) {
  for (std::size_t i = 0; i < p.limbs(); ++i) {
    for (u64 v : p.limb(i)) put_u64(o, v);
  }
}

inline RnsPoly get_poly(std::istream& in, const BasisPtr& basis) {
  RnsPoly p(basis, Domain::Evaluation);
  for (std::size_t i = 0; i < p.limbs(); ++i) {
    const u64 q = basis->prime(i).value();
    for (auto& v : p.limb(i)) {
      v = get_u64(in);
      if (v >= q) throw ConfigError("key file holds a non-canonical residue");
    }
  }
  return p;
}

inline std::vector<u64> fingerprint(const CkksContext& ctx) {
  std::vector<u64> f = {ctx.degree()};
  for (const auto& p : ctx.chain()) f.push_back(p->value());
  for (const auto& p : ctx.special_primes()) f.push_back(p->value());
  return f;
}

inline std::size_t top_index(const CkksContext& ctx) { return static_cast<std::size_t>(ctx.max_level()); }

}  // namespace keyio

inline void save_keys(std::ostream& o, const CkksContext& ctx, const KeyMaterial& km) {
  using namespace keyio;
  o.write(kMagic.data(), kMagic.size());
  put_u64(o, kVersion);
  const auto fp = fingerprint(ctx);
  put_u64(o, fp.size());
  for (u64 v : fp) put_u64(o, v);
  for (std::int64_t c : km.sk.coeffs) o.put(static_cast<char>(static_cast<std::int8_t>(c)));
  put_poly(o, km.pk.b);
  put_poly(o, km.pk.a);
  put_u64(o, km.relin ? 1 : 0);
  const std::size_t top = top_index(ctx);
  if (km.relin) {
    put_poly(o, km.relin->b[top]);
    put_poly(o, km.relin->a[top]);
  }
  put_u64(o, km.rotations.size());
  for (const auto& [r, k] : km.rotations) {
    put_u64(o, r);
    put_poly(o, k.b[top]);
    put_poly(o, k.a[top]);
  }
}

inline KeyMaterial load_keys(std::istream& in, const CkksContext& ctx) {
  using namespace keyio;
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ConfigError("not a key container");
  if (get_u64(in) != kVersion) throw ConfigError("unsupported key container version");
  const auto fp = fingerprint(ctx);
  if (get_u64(in) != fp.size()) throw ConfigError("key container was made for other parameters");
  for (u64 v : fp) {
    if (get_u64(in) != v) throw ConfigError("key container was made for other parameters");
  }
  KeyMaterial km;
  const BasisPtr& ext = ctx.ext_basis(ctx.max_level());
  km.sk.coeffs.resize(ctx.degree());
  for (auto& c : km.sk.coeffs) {
    const int ch = in.get();
    if (ch == EOF) throw ConfigError("key file truncated");
    c = static_cast<std::int8_t>(static_cast<unsigned char>(ch));
    if (c < -1 || c > 1) throw ConfigError("secret key is not ternary");
  }
  km.sk.eval = ntt_forward(signed_poly(km.sk.coeffs, ext));
  const BasisPtr& q = ctx.level_basis(ctx.max_level());
  km.pk.b = get_poly(in, q);
  km.pk.a = get_poly(in, q);
  if (get_u64(in)) {
    RnsPoly b = get_poly(in, ext);
    RnsPoly a = get_poly(in, ext);
    km.relin = KeyGenerator::expand_levels(ctx, b, a);
  }
  const u64 rots = get_u64(in);
  for (u64 i = 0; i < rots; ++i) {
    const std::size_t r = get_u64(in);
    RnsPoly b = get_poly(in, ext);
    RnsPoly a = get_poly(in, ext);
    km.rotations.emplace(r, KeyGenerator::expand_levels(ctx, b, a));
  }
  return km;
}

inline void save_keys_file(const std::string& path, const CkksContext& ctx, const KeyMaterial& km) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw ConfigError("cannot write " + path);
  save_keys(o, ctx, km);
}

inline KeyMaterial load_keys_file(const std::string& path, const CkksContext& ctx) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return load_keys(in, ctx);
}

}  // namespace sdcfhe
