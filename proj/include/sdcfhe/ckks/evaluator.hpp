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

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "sdcfhe/ckks/encoder.hpp"
#include "sdcfhe/ckks/keys.hpp"
#include "sdcfhe/ckks/stage.hpp"

namespace sdcfhe {

// An operation was applied to a ciphertext in the wrong state (level
// exhausted, mismatched levels or scales).
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Ciphertext {
  RnsPoly c0, c1;  // Evaluation domain over the level basis
  double scale = 1.0;
  int level = 0;

  bool operator==(const Ciphertext& o) const {
    return level == o.level && scale == o.scale && c0 == o.c0 && c1 == o.c1;
  }
};

namespace detail {

inline std::vector<std::size_t> prefix(std::size_t count) {
  std::vector<std::size_t> p(count);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

inline RnsPoly restrict_to_level(const CkksContext& ctx, const RnsPoly& p, int level) {
  if (static_cast<int>(p.limbs()) == level + 1) return p;
  return select_limbs(p, ctx.level_basis(level), prefix(static_cast<std::size_t>(level) + 1));
}

inline bool same_scale(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

}  // namespace detail

class Encryptor {
 public:
  Encryptor(ContextPtr ctx, const PublicKey& pk) : ctx_(std::move(ctx)), pk_(pk) {}

  Ciphertext encrypt(const Plaintext& pt, Sampler& rng) const {
    const int level = pt.level;
    const BasisPtr& basis = ctx_->level_basis(level);
    const double sigma = ctx_->params().noise_stddev;
    const RnsPoly v = ntt_forward(signed_poly(rng.ternary_vector(ctx_->degree()), basis));
    const RnsPoly e0 = ntt_forward(signed_poly(rng.gaussian_vector(ctx_->degree(), sigma), basis));
    const RnsPoly e1 = ntt_forward(signed_poly(rng.gaussian_vector(ctx_->degree(), sigma), basis));
    const RnsPoly b = detail::restrict_to_level(*ctx_, pk_.b, level);
    const RnsPoly a = detail::restrict_to_level(*ctx_, pk_.a, level);
    Ciphertext ct;
    ct.c0 = poly_add(poly_add(pointwise_mul(v, b), e0), pt.poly);
    ct.c1 = poly_add(pointwise_mul(v, a), e1);
    ct.scale = pt.scale;
    ct.level = level;
    return ct;
  }

 private:
  ContextPtr ctx_;
  PublicKey pk_;
};

class Decryptor {
 public:
  Decryptor(ContextPtr ctx, const SecretKey& sk) : ctx_(std::move(ctx)), sk_(sk) {}

  Plaintext decrypt(const Ciphertext& ct) const {
    const RnsPoly s = restrict_secret(*ctx_, sk_, ct.level);
    return {poly_add(ct.c0, pointwise_mul(ct.c1, s)), ct.scale, ct.level};
  }

 private:
  ContextPtr ctx_;
  SecretKey sk_;
};

// Ciphertext operators. Each operator runs as a named instance
// ("ctct-mult#0") whose polynomial steps are stages of an ExecContext.
class Evaluator {
 public:
  Evaluator(ContextPtr ctx, const KeyMaterial* keys) : ctx_(std::move(ctx)), keys_(keys) {}

  const CkksContext& context() const { return *ctx_; }

  Ciphertext ct_pt_add(ExecContext& ex, const Ciphertext& a, const Plaintext& pt) const {
    require_match(a, pt.level, pt.scale, "ct_pt_add");
    OperatorScope op(ex, "ctpt-add");
    StageScope st(ex, "add");
    return {k_add(ex, a.c0, pt.poly), a.c1, a.scale, a.level};
  }

  Ciphertext ct_ct_add(ExecContext& ex, const Ciphertext& a, const Ciphertext& b) const {
    require_match(a, b.level, b.scale, "ct_ct_add");
    OperatorScope op(ex, "ctct-add");
    StageScope st(ex, "add");
    return {k_add(ex, a.c0, b.c0), k_add(ex, a.c1, b.c1), a.scale, a.level};
  }

  Ciphertext ct_pt_mult_no_rescale(ExecContext& ex, const Ciphertext& a, const Plaintext& pt) const {
    if (a.level != pt.level) throw StateError("ct_pt_mult: level mismatch");
    OperatorScope op(ex, "ctpt-mult");
    StageScope st(ex, "point-mult");
    return {k_pointwise(ex, a.c0, pt.poly), k_pointwise(ex, a.c1, pt.poly), a.scale * pt.scale, a.level};
  }

  Ciphertext ct_pt_mult(ExecContext& ex, const Ciphertext& a, const Plaintext& pt) const {
    require_level(a, "ct_pt_mult");
    OperatorScope op(ex, "ctpt-mult");
    return rescale(ex, ct_pt_mult_no_rescale(ex, a, pt));
  }

  Ciphertext ct_ct_mult(ExecContext& ex, const Ciphertext& a, const Ciphertext& b) const {
    require_level(a, "ct_ct_mult");
    if (a.level != b.level) throw StateError("ct_ct_mult: level mismatch");
    if (!keys_ || !keys_->relin) throw ConfigError("ct_ct_mult needs a relinearization key");
    OperatorScope op(ex, "ctct-mult");
    RnsPoly d0, d1, d2;
    {
      StageScope st(ex, "tensor");
      d0 = k_pointwise(ex, a.c0, b.c0);
      const RnsPoly t01 = k_pointwise(ex, a.c0, b.c1);
      const RnsPoly t10 = k_pointwise(ex, a.c1, b.c0);
      d1 = k_add(ex, t01, t10);
      d2 = k_pointwise(ex, a.c1, b.c1);
    }
    auto [r0, r1] = keyswitch(ex, d2, *keys_->relin, a.level);
    Ciphertext out;
    {
      StageScope st(ex, "relin-add");
      out = {k_add(ex, d0, r0), k_add(ex, d1, r1), a.scale * b.scale, a.level};
    }
    return rescale(ex, out);
  }

  // Left rotation by r slots: slot i of the result holds slot i + r.
  Ciphertext ct_rot(ExecContext& ex, const Ciphertext& a, std::size_t r) const {
    if (r >= ctx_->slots()) throw std::invalid_argument("rotation step out of range");
    if (r == 0) return a;
    if (!keys_) throw ConfigError("ct_rot needs rotation keys");
    const SwitchingKey& key = keys_->rotation(r);
    const u64 g = galois_element(r, ctx_->degree());
    OperatorScope op(ex, "rot");
    RnsPoly t0, t1;
    {
      StageScope st(ex, "rot/intt");
      t0 = k_intt(ex, a.c0);
      t1 = k_intt(ex, a.c1);
    }
    {
      StageScope st(ex, "rot/automorphism");
      t0 = k_automorphism(ex, t0, g);
      t1 = k_automorphism(ex, t1, g);
    }
    {
      StageScope st(ex, "rot/ntt");
      t0 = k_ntt(ex, t0);
      t1 = k_ntt(ex, t1);
    }
    auto [r0, r1] = keyswitch(ex, t1, key, a.level);
    StageScope st(ex, "rot/add");
    return {k_add(ex, t0, r0), std::move(r1), a.scale, a.level};
  }

  Ciphertext rescale(ExecContext& ex, const Ciphertext& a) const {
    require_level(a, "rescale");
    OperatorScope op(ex, "rescale");
    const int l = a.level;
    const auto last = std::vector<std::size_t>{static_cast<std::size_t>(l)};
    RnsPoly x0, x1;
    {
      StageScope st(ex, "rescale/intt");
      x0 = k_intt(ex, select_limbs(a.c0, ctx_->last_basis(l), last));
      x1 = k_intt(ex, select_limbs(a.c1, ctx_->last_basis(l), last));
    }
    {
      StageScope st(ex, "rescale/lift");
      x0 = k_lift(ex, x0, ctx_->level_basis(l - 1));
      x1 = k_lift(ex, x1, ctx_->level_basis(l - 1));
    }
    {
      StageScope st(ex, "rescale/ntt");
      x0 = k_ntt(ex, x0);
      x1 = k_ntt(ex, x1);
    }
    StageScope st(ex, "rescale/sub-scale");
    const auto inv = ctx_->q_last_inverse(l);
    Ciphertext out;
    out.c0 = k_sub_scale(ex, detail::restrict_to_level(*ctx_, a.c0, l - 1), x0, inv);
    out.c1 = k_sub_scale(ex, detail::restrict_to_level(*ctx_, a.c1, l - 1), x1, inv);
    out.scale = a.scale / static_cast<double>(ctx_->chain_prime(static_cast<std::size_t>(l)));
    out.level = l - 1;
    return out;
  }

  // Hybrid key switching with one digit: returns (r0, r1) with
  // r0 + r1 s ~ d s' over Q_l.
  std::pair<RnsPoly, RnsPoly> keyswitch(ExecContext& ex, const RnsPoly& d, const SwitchingKey& key,
                                        int level) const {
    require_domain(d, Domain::Evaluation, "keyswitch");
    const std::size_t lq = static_cast<std::size_t>(level) + 1;
    const std::size_t k = ctx_->special_count();
    const BasisPtr& ext = ctx_->ext_basis(level);
    RnsPoly dc, dp, ext_d, u0, u1;
    {
      StageScope st(ex, "keyswitch/op-0");
      dc = k_intt(ex, d);
    }
    {
      StageScope st(ex, "keyswitch/op-1");
      dp = k_bconv(ex, ctx_->modup(level), dc);
    }
    ext_d = RnsPoly(ext, Domain::Coefficient);
    std::copy(dc.data().begin(), dc.data().end(), ext_d.data().begin());
    std::copy(dp.data().begin(), dp.data().end(), ext_d.data().begin() + static_cast<std::ptrdiff_t>(dc.data().size()));
    {
      StageScope st(ex, "keyswitch/op-2");
      ext_d = k_ntt(ex, ext_d);
    }
    {
      StageScope st(ex, "keyswitch/op-3");
      u0 = k_pointwise(ex, ext_d, key.b.at(static_cast<std::size_t>(level)));
      u1 = k_pointwise(ex, ext_d, key.a.at(static_cast<std::size_t>(level)));
    }
    {
      StageScope st(ex, "keyswitch/op-4");
      u0 = k_intt(ex, u0);
      u1 = k_intt(ex, u1);
    }
    std::vector<std::size_t> p_pos(k);
    std::iota(p_pos.begin(), p_pos.end(), lq);
    const BasisPtr& qb = ctx_->level_basis(level);
    const auto q_pos = detail::prefix(lq);
    RnsPoly w0, w1;
    {
      StageScope st(ex, "keyswitch/op-5");
      w0 = k_bconv(ex, ctx_->moddown(level), select_limbs(u0, ctx_->special_basis(), p_pos));
      w1 = k_bconv(ex, ctx_->moddown(level), select_limbs(u1, ctx_->special_basis(), p_pos));
    }
    StageScope st(ex, "keyswitch/op-6");
    const auto pinv = ctx_->p_inverse(level);
    RnsPoly r0 = k_ntt(ex, k_sub_scale(ex, select_limbs(u0, qb, q_pos), w0, pinv));
    RnsPoly r1 = k_ntt(ex, k_sub_scale(ex, select_limbs(u1, qb, q_pos), w1, pinv));
    return {std::move(r0), std::move(r1)};
  }

  // Convenience overloads without protection or observation.
  Ciphertext ct_ct_mult(const Ciphertext& a, const Ciphertext& b) const {
    ExecContext ex;
    return ct_ct_mult(ex, a, b);
  }
  Ciphertext ct_pt_mult(const Ciphertext& a, const Plaintext& pt) const {
    ExecContext ex;
    return ct_pt_mult(ex, a, pt);
  }
  Ciphertext ct_ct_add(const Ciphertext& a, const Ciphertext& b) const {
    ExecContext ex;
    return ct_ct_add(ex, a, b);
  }
  Ciphertext ct_pt_add(const Ciphertext& a, const Plaintext& pt) const {
    ExecContext ex;
    return ct_pt_add(ex, a, pt);
  }
  Ciphertext ct_rot(const Ciphertext& a, std::size_t r) const {
    ExecContext ex;
    return ct_rot(ex, a, r);
  }
  Ciphertext rescale(const Ciphertext& a) const {
    ExecContext ex;
    return rescale(ex, a);
  }

 private:
  static void require_level(const Ciphertext& a, const char* what) {
    if (a.level < 1) throw StateError(std::string(what) + ": level exhausted");
  }

  static void require_match(const Ciphertext& a, int level, double scale, const char* what) {
    if (a.level != level) throw StateError(std::string(what) + ": level mismatch");
    if (!detail::same_scale(a.scale, scale)) throw StateError(std::string(what) + ": scale mismatch");
  }

  ContextPtr ctx_;
  const KeyMaterial* keys_;
};

}  // namespace sdcfhe
