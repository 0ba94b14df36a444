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

// Polynomial-level execution seam.
//
// Every ciphertext operator is a sequence of named stages ("ctct-mult#0/
// keyswitch/op-3"), and every stage is a sequence of kernels (transform,
// pointwise product, linear combination, basis conversion, lift,
// automorphism). Each kernel exposes numbered operand slots: its inputs as
// loaded into the working buffer, its intermediates and its output. Stage
// observers see every kernel; a fault hook may corrupt any live slot; the
// protection mode decides how each kernel is verified.

#pragma once

#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sdcfhe/abft/checksum.hpp"
#include "sdcfhe/ring/bconv.hpp"
#include "sdcfhe/ring/poly_ops.hpp"

namespace sdcfhe {

enum class ProtectionKind { None, Redundant, Checksum };

struct ProtectionMode {
  ProtectionKind kind = ProtectionKind::None;
  int retry_limit = 1;
  // Checksum mode only: verify basis conversion by column sums instead of
  // recomputing it.
  bool bconv_checksum = false;
};

inline const char* protection_name(ProtectionKind k) {
  switch (k) {
    case ProtectionKind::None: return "none";
    case ProtectionKind::Redundant: return "redundant";
    case ProtectionKind::Checksum: return "checksum";
  }
  return "?";
}

inline ProtectionKind parse_protection(std::string_view s) {
  if (s == "none") return ProtectionKind::None;
  if (s == "redundant" || s == "dmr") return ProtectionKind::Redundant;
  if (s == "checksum" || s == "abft") return ProtectionKind::Checksum;
  throw ConfigError("unknown protection mode: " + std::string(s));
}

// A guard kept mismatching after every permitted re-execution.
class UnrecoverableFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KernelKind { NttForward, NttInverse, Pointwise, Add, Sub, SubScale, BasisConversion, Lift, Automorphism };

inline const char* kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::NttForward: return "ntt";
    case KernelKind::NttInverse: return "intt";
    case KernelKind::Pointwise: return "point-mult";
    case KernelKind::Add: return "add";
    case KernelKind::Sub: return "sub";
    case KernelKind::SubScale: return "sub-scale";
    case KernelKind::BasisConversion: return "bconv";
    case KernelKind::Lift: return "lift";
    case KernelKind::Automorphism: return "automorphism";
  }
  return "?";
}

struct OperandShape {
  std::string role;  // "in0", "layer-3", "scaled", "out", ...
  std::size_t limbs = 0;
  std::size_t degree = 0;
};

struct KernelEvent {
  std::string_view stage;
  KernelKind kind;
  std::size_t first_operand = 0;
  std::span<const OperandShape> operands;
  std::span<const RnsPoly* const> inputs;
  const RnsPoly* output = nullptr;
};

class StageObserver {
 public:
  virtual ~StageObserver() = default;
  virtual void on_stage(std::string_view /*stage_id*/) {}
  virtual void on_kernel(const KernelEvent& /*event*/) {}
};

// Fault-injection seam. arm_stage() is consulted once when a stage opens;
// only then are targets()/inject() queried for that stage's operands.
class FaultHook {
 public:
  virtual ~FaultHook() = default;
  virtual bool arm_stage(std::string_view stage_id) = 0;
  virtual bool targets(std::size_t operand) const = 0;
  // `data` holds limbs [first_limb, first_limb + data.size() / degree) of the
  // operand; moduli[k] belongs to limb first_limb + k.
  virtual void inject(std::size_t operand, std::size_t first_limb, std::span<u64> data,
                      std::size_t degree, std::span<const u64> moduli) = 0;
};

struct GuardEvent {
  std::string stage;
  std::string kernel;
  std::size_t limb = 0;
  u64 flag_in = 0;
  u64 flag_out = 0;
  std::string action;
};

class ExecContext {
 public:
  explicit ExecContext(ProtectionMode mode = {}, const abft::ChecksumContext* checksums = nullptr,
                       u64 projection_seed = 0)
      : mode_(mode), checksums_(checksums), projection_rng_(projection_seed) {
    if (mode_.retry_limit < 1) throw ConfigError("retry limit must be at least 1");
    if (mode_.kind == ProtectionKind::Checksum && checksums_ == nullptr) {
      throw ConfigError("checksum protection needs a checksum context");
    }
  }

  const ProtectionMode& mode() const { return mode_; }
  const abft::ChecksumContext* checksums() const { return checksums_; }
  void set_observer(StageObserver* o) { observer_ = o; }
  void set_fault_hook(FaultHook* f) { fault_ = f; }
  StageObserver* observer() const { return observer_; }

  const std::vector<GuardEvent>& guard_events() const { return guard_events_; }
  bool detected() const { return !guard_events_.empty(); }

  // Operator scopes nest; only the outermost one names the instance.
  std::string enter_operator(std::string_view kind) {
    if (operator_depth_++ == 0) {
      const int index = operator_counts_[std::string(kind)]++;
      operator_prefix_ = std::string(kind) + "#" + std::to_string(index);
    }
    return operator_prefix_;
  }
  void leave_operator() {
    if (--operator_depth_ == 0) operator_prefix_.clear();
  }

  void begin_stage(std::string_view sub) {
    stage_id_ = operator_prefix_.empty() ? std::string(sub) : operator_prefix_ + "/" + std::string(sub);
    operand_cursor_ = 0;
    armed_ = fault_ != nullptr && fault_->arm_stage(stage_id_);
    if (observer_) observer_->on_stage(stage_id_);
  }
  void end_stage() {
    stage_id_.clear();
    armed_ = false;
  }
  const std::string& stage_id() const { return stage_id_; }

  std::size_t claim_operands(std::size_t count) {
    if (stage_id_.empty()) throw std::logic_error("kernel executed outside a stage");
    const std::size_t base = operand_cursor_;
    operand_cursor_ += count;
    return base;
  }

  bool armed() const { return armed_; }
  FaultHook* fault() const { return fault_; }

  u64 projection_seed() { return projection_rng_(); }

  void record_guard(GuardEvent e) { guard_events_.push_back(std::move(e)); }

 private:
  ProtectionMode mode_;
  const abft::ChecksumContext* checksums_ = nullptr;
  StageObserver* observer_ = nullptr;
  FaultHook* fault_ = nullptr;
  std::mt19937_64 projection_rng_;
  std::map<std::string, int> operator_counts_;
  std::string operator_prefix_;
  int operator_depth_ = 0;
  std::string stage_id_;
  std::size_t operand_cursor_ = 0;
  bool armed_ = false;
  std::vector<GuardEvent> guard_events_;
};

class OperatorScope {
 public:
  OperatorScope(ExecContext& ctx, std::string_view kind) : ctx_(ctx) { ctx_.enter_operator(kind); }
  ~OperatorScope() { ctx_.leave_operator(); }
  OperatorScope(const OperatorScope&) = delete;
  OperatorScope& operator=(const OperatorScope&) = delete;

 private:
  ExecContext& ctx_;
};

class StageScope {
 public:
  StageScope(ExecContext& ctx, std::string_view sub) : ctx_(ctx) { ctx_.begin_stage(sub); }
  ~StageScope() { ctx_.end_stage(); }
  StageScope(const StageScope&) = delete;
  StageScope& operator=(const StageScope&) = delete;

 private:
  ExecContext& ctx_;
};

namespace detail {

inline std::vector<u64> moduli_of(const RnsBasis& b) {
  std::vector<u64> m(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) m[i] = b.prime(i).value();
  return m;
}

// Fault taps for one kernel execution. Disabled unless the stage is armed.
class KernelTaps {
 public:
  KernelTaps(ExecContext& ctx, std::size_t base) : ctx_(ctx), base_(base) {}

  // Input as loaded into the working buffer: the pristine operand unless a
  // fault targets this slot.
  const RnsPoly& input(std::size_t slot, const RnsPoly& src) {
    if (!ctx_.armed() || !ctx_.fault()->targets(base_ + slot)) return src;
    copies_.push_back(src);
    RnsPoly& copy = copies_.back();
    const auto moduli = moduli_of(*copy.basis());
    ctx_.fault()->inject(base_ + slot, 0, copy.data(), copy.degree(), moduli);
    return copy;
  }

  void live(std::size_t slot, std::size_t first_limb, std::span<u64> data, std::size_t degree,
            std::span<const u64> moduli) {
    if (!ctx_.armed() || !ctx_.fault()->targets(base_ + slot)) return;
    ctx_.fault()->inject(base_ + slot, first_limb, data, degree, moduli);
  }

  void live(std::size_t slot, RnsPoly& p) {
    if (!ctx_.armed() || !ctx_.fault()->targets(base_ + slot)) return;
    const auto moduli = moduli_of(*p.basis());
    ctx_.fault()->inject(base_ + slot, 0, p.data(), p.degree(), moduli);
  }

 private:
  ExecContext& ctx_;
  std::size_t base_;
  std::vector<RnsPoly> copies_;
};

template <class Compute, class Check>
RnsPoly run_kernel(ExecContext& ctx, KernelKind kind, std::vector<OperandShape> shapes,
                   std::vector<const RnsPoly*> inputs, Compute&& compute, Check&& check,
                   bool has_checksum) {
  const std::size_t base = ctx.claim_operands(shapes.size());
  auto once = [&] {
    KernelTaps taps(ctx, base);
    return compute(taps);
  };
  auto log = [&](std::size_t limb, u64 fin, u64 fout, const char* action) {
    ctx.record_guard({ctx.stage_id(), kernel_name(kind), limb, fin, fout, action});
  };

  RnsPoly result;
  const ProtectionKind mode = ctx.mode().kind;
  if (mode == ProtectionKind::None) {
    result = once();
  } else if (mode == ProtectionKind::Checksum && has_checksum) {
    result = once();
    for (int attempt = 0;; ++attempt) {
      const std::vector<abft::ChecksumFlags> flags = check(result);
      std::optional<std::size_t> bad;
      for (std::size_t i = 0; i < flags.size(); ++i) {
        if (!flags[i].match()) {
          bad = i;
          break;
        }
      }
      if (!bad) break;
      if (attempt >= ctx.mode().retry_limit) {
        log(*bad, flags[*bad].flag_in, flags[*bad].flag_out, "unrecoverable");
        throw UnrecoverableFault("checksum mismatch persists in " + ctx.stage_id());
      }
      log(*bad, flags[*bad].flag_in, flags[*bad].flag_out, "re-execute");
      result = once();
    }
  } else {
    // Duplicate execution: the full DMR mode and the recompute guard for
    // kernels without a checksum.
    result = once();
    RnsPoly shadow = once();
    for (int attempt = 0; !(result == shadow); ++attempt) {
      if (attempt >= ctx.mode().retry_limit) {
        log(0, 0, 0, "unrecoverable");
        throw UnrecoverableFault("redundant copies disagree in " + ctx.stage_id());
      }
      log(0, 0, 0, "re-execute");
      result = once();
      shadow = once();
    }
  }

  if (StageObserver* obs = ctx.observer()) {
    KernelEvent ev{ctx.stage_id(), kind, base, shapes, inputs, &result};
    obs->on_kernel(ev);
  }
  return result;
}

inline std::vector<OperandShape> transform_shapes(const RnsPoly& in, int layers) {
  std::vector<OperandShape> s;
  s.push_back({"in", in.limbs(), in.degree()});
  for (int l = 0; l < layers; ++l) s.push_back({"layer-" + std::to_string(l), in.limbs(), in.degree()});
  s.push_back({"out", in.limbs(), in.degree()});
  return s;
}

template <bool Forward>
RnsPoly transform_kernel(ExecContext& ctx, const RnsPoly& in) {
  require_domain(in, Forward ? Domain::Coefficient : Domain::Evaluation, Forward ? "ntt" : "intt");
  const RnsBasis& basis = *in.basis();
  const int layers = Forward ? forward_intermediate_layers(basis.prime(0))
                             : inverse_intermediate_layers(basis.prime(0));
  const std::size_t n = in.degree();
  auto compute = [&](KernelTaps& taps) {
    RnsPoly out = taps.input(0, in);
    out.set_domain(Forward ? Domain::Evaluation : Domain::Coefficient);
    for (std::size_t i = 0; i < out.limbs(); ++i) {
      const PrimeModulus& pm = basis.prime(i);
      const u64 q = pm.value();
      auto tap = [&](int layer, std::span<u64> data) {
        taps.live(1 + static_cast<std::size_t>(layer), i, data, n, std::span<const u64>(&q, 1));
      };
      if constexpr (Forward) {
        ntt_forward_limb(out.limb(i), pm, tap);
      } else {
        ntt_inverse_limb(out.limb(i), pm, tap);
      }
    }
    taps.live(1 + static_cast<std::size_t>(layers), out);
    return out;
  };
  auto check = [&](const RnsPoly& out) {
    const abft::ChecksumContext& cs = *ctx.checksums();
    std::vector<abft::ChecksumFlags> flags(in.limbs());
    for (std::size_t i = 0; i < in.limbs(); ++i) {
      const u64 q = basis.prime(i).value();
      const Modulus& m = basis.prime(i).modulus();
      if constexpr (Forward) {
        flags[i] = {abft::sum_mod(in.limb(i), m), cs.project(out.limb(i), q)};
      } else {
        flags[i] = {cs.project(in.limb(i), q), abft::sum_mod(out.limb(i), m)};
      }
    }
    return flags;
  };
  return run_kernel(ctx, Forward ? KernelKind::NttForward : KernelKind::NttInverse,
                    transform_shapes(in, layers), {&in}, compute, check, true);
}

}  // namespace detail

// Kernels. Each must run inside a StageScope.

inline RnsPoly k_ntt(ExecContext& ctx, const RnsPoly& in) { return detail::transform_kernel<true>(ctx, in); }

inline RnsPoly k_intt(ExecContext& ctx, const RnsPoly& in) { return detail::transform_kernel<false>(ctx, in); }

inline RnsPoly k_pointwise(ExecContext& ctx, const RnsPoly& a, const RnsPoly& b) {
  require_same_basis(a, b, "point-mult");
  require_domain(a, Domain::Evaluation, "point-mult");
  require_domain(b, Domain::Evaluation, "point-mult");
  const RnsBasis& basis = *a.basis();
  auto compute = [&](detail::KernelTaps& taps) {
    const RnsPoly& x = taps.input(0, a);
    const RnsPoly& y = taps.input(1, b);
    RnsPoly out(a.basis(), Domain::Evaluation);
    for (std::size_t i = 0; i < out.limbs(); ++i) {
      mul_limb(x.limb(i), y.limb(i), out.limb(i), basis.prime(i).modulus());
    }
    taps.live(2, out);
    return out;
  };
  auto check = [&](const RnsPoly& out) {
    std::vector<abft::ChecksumFlags> flags(a.limbs());
    for (std::size_t i = 0; i < a.limbs(); ++i) {
      const Modulus& m = basis.prime(i).modulus();
      flags[i] = abft::pointwise_projection(a.limb(i), b.limb(i), out.limb(i),
                                            ctx.projection_seed(), m);
    }
    return flags;
  };
  std::vector<OperandShape> shapes = {{"in0", a.limbs(), a.degree()},
                                      {"in1", b.limbs(), b.degree()},
                                      {"out", a.limbs(), a.degree()}};
  return detail::run_kernel(ctx, KernelKind::Pointwise, std::move(shapes), {&a, &b}, compute, check, true);
}

namespace detail {

// out = scale_i * (a +/- b) per limb; scale empty means 1.
inline RnsPoly linear_kernel(ExecContext& ctx, KernelKind kind, const RnsPoly& a, const RnsPoly& b,
                             std::span<const ShoupFactor> scale) {
  require_same_basis(a, b, kernel_name(kind));
  if (a.domain() != b.domain()) throw ConfigError("linear kernel: operand domains differ");
  const RnsBasis& basis = *a.basis();
  auto compute = [&](KernelTaps& taps) {
    const RnsPoly& x = taps.input(0, a);
    const RnsPoly& y = taps.input(1, b);
    RnsPoly out(a.basis(), a.domain());
    for (std::size_t i = 0; i < out.limbs(); ++i) {
      const u64 q = basis.prime(i).value();
      switch (kind) {
        case KernelKind::Add: add_limb(x.limb(i), y.limb(i), out.limb(i), q); break;
        case KernelKind::Sub: sub_limb(x.limb(i), y.limb(i), out.limb(i), q); break;
        default: sub_scale_limb(x.limb(i), y.limb(i), scale[i], out.limb(i), q); break;
      }
    }
    taps.live(2, out);
    return out;
  };
  auto check = [&](const RnsPoly& out) {
    std::vector<abft::ChecksumFlags> flags(a.limbs());
    for (std::size_t i = 0; i < a.limbs(); ++i) {
      const Modulus& m = basis.prime(i).modulus();
      const u64 sa = abft::sum_mod(a.limb(i), m);
      const u64 sb = abft::sum_mod(b.limb(i), m);
      u64 expected = 0;
      switch (kind) {
        case KernelKind::Add: expected = add_mod(sa, sb, m.value); break;
        case KernelKind::Sub: expected = sub_mod(sa, sb, m.value); break;
        default: expected = mul_shoup(sub_mod(sa, sb, m.value), scale[i], m.value); break;
      }
      flags[i] = {expected, abft::sum_mod(out.limb(i), m)};
    }
    return flags;
  };
  std::vector<OperandShape> shapes = {{"in0", a.limbs(), a.degree()},
                                      {"in1", b.limbs(), b.degree()},
                                      {"out", a.limbs(), a.degree()}};
  return run_kernel(ctx, kind, std::move(shapes), {&a, &b}, compute, check, true);
}

inline std::vector<abft::ChecksumFlags> no_check(const RnsPoly&) { return {}; }

}  // namespace detail

inline RnsPoly k_add(ExecContext& ctx, const RnsPoly& a, const RnsPoly& b) {
  return detail::linear_kernel(ctx, KernelKind::Add, a, b, {});
}

inline RnsPoly k_sub(ExecContext& ctx, const RnsPoly& a, const RnsPoly& b) {
  return detail::linear_kernel(ctx, KernelKind::Sub, a, b, {});
}

inline RnsPoly k_sub_scale(ExecContext& ctx, const RnsPoly& a, const RnsPoly& b,
                           std::span<const ShoupFactor> scale) {
  if (scale.size() < a.limbs()) throw ConfigError("sub-scale: missing per-limb scalars");
  return detail::linear_kernel(ctx, KernelKind::SubScale, a, b, scale);
}

inline RnsPoly k_bconv(ExecContext& ctx, const BasisConverter& conv, const RnsPoly& in) {
  require_domain(in, Domain::Coefficient, "bconv");
  if (!in.basis()->same_primes(*conv.from())) throw ConfigError("bconv: source basis mismatch");
  const auto from_moduli = detail::moduli_of(*conv.from());
  const std::size_t k = conv.from()->size();
  std::vector<u128> scaled_sums(k);
  auto compute = [&](detail::KernelTaps& taps) {
    const RnsPoly& x = taps.input(0, in);
    const std::size_t n = x.degree();
    std::vector<u64> scaled(k * n);
    conv.scale_inputs(x, scaled);
    taps.live(1, 0, scaled, n, from_moduli);
    for (std::size_t i = 0; i < k; ++i) {
      u128 acc = 0;
      for (std::size_t c = 0; c < n; ++c) acc += scaled[i * n + c];
      scaled_sums[i] = acc;
    }
    RnsPoly out(conv.to(), Domain::Coefficient);
    conv.accumulate(scaled, out);
    taps.live(2, out);
    return out;
  };
  // Column sums commute with both steps: the scaled sums must equal the
  // scaled input sums mod q_i, and each output sum the converted scaled sums.
  auto check = [&](const RnsPoly& out) {
    std::vector<abft::ChecksumFlags> flags;
    flags.reserve(k + out.limbs());
    for (std::size_t i = 0; i < k; ++i) {
      const Modulus& m = conv.from()->prime(i).modulus();
      const u64 u = conv.from()->cofactor_inverse_factor(i).operand;
      flags.push_back({mul_mod(u, abft::sum_mod(in.limb(i), m), m), reduce_128(scaled_sums[i], m)});
    }
    for (std::size_t j = 0; j < out.limbs(); ++j) {
      const Modulus& p = conv.to()->prime(j).modulus();
      u64 expect = 0;
      for (std::size_t i = 0; i < k; ++i) {
        expect = add_mod(expect, mul_mod(conv.cofactor_mod(i, j), reduce_128(scaled_sums[i], p), p), p.value);
      }
      flags.push_back({expect, abft::sum_mod(out.limb(j), p)});
    }
    return flags;
  };
  std::vector<OperandShape> shapes = {{"in", in.limbs(), in.degree()},
                                      {"scaled", in.limbs(), in.degree()},
                                      {"out", conv.to()->size(), in.degree()}};
  return detail::run_kernel(ctx, KernelKind::BasisConversion, std::move(shapes), {&in}, compute, check,
                            ctx.mode().bconv_checksum);
}

// Centered lift of a single-limb coefficient poly x (mod q_last) into
// `target`: out_i = ((x + h) mod q_last) - h  mod q_i, h = floor(q_last / 2).
inline RnsPoly k_lift(ExecContext& ctx, const RnsPoly& in, const BasisPtr& target) {
  require_domain(in, Domain::Coefficient, "lift");
  if (in.limbs() != 1) throw ConfigError("lift: source must be a single limb");
  const u64 q_last = in.basis()->prime(0).value();
  const u64 half = q_last / 2;
  auto compute = [&](detail::KernelTaps& taps) {
    const RnsPoly& x = taps.input(0, in);
    RnsPoly out(target, Domain::Coefficient);
    const Modulus& ml = in.basis()->prime(0).modulus();
    for (std::size_t i = 0; i < target->size(); ++i) {
      const Modulus& m = target->prime(i).modulus();
      const u64 half_mod = reduce_64(half, m);
      auto src = x.limb(0);
      auto dst = out.limb(i);
      for (std::size_t c = 0; c < src.size(); ++c) {
        const u64 shifted = add_mod(reduce_64(src[c], ml), half, q_last);
        dst[c] = sub_mod(reduce_64(shifted, m), half_mod, m.value);
      }
    }
    taps.live(1, out);
    return out;
  };
  std::vector<OperandShape> shapes = {{"in", 1, in.degree()}, {"out", target->size(), in.degree()}};
  return detail::run_kernel(ctx, KernelKind::Lift, std::move(shapes), {&in}, compute, detail::no_check,
                            false);
}

inline RnsPoly k_automorphism(ExecContext& ctx, const RnsPoly& in, u64 galois) {
  require_domain(in, Domain::Coefficient, "automorphism");
  auto compute = [&](detail::KernelTaps& taps) {
    const RnsPoly& x = taps.input(0, in);
    RnsPoly out(in.basis(), Domain::Coefficient);
    for (std::size_t i = 0; i < in.limbs(); ++i) {
      automorphism_limb(x.limb(i), galois, out.limb(i), in.basis()->prime(i).value());
    }
    taps.live(1, out);
    return out;
  };
  std::vector<OperandShape> shapes = {{"in", in.limbs(), in.degree()}, {"out", in.limbs(), in.degree()}};
  return detail::run_kernel(ctx, KernelKind::Automorphism, std::move(shapes), {&in}, compute,
                            detail::no_check, false);
}

}  // namespace sdcfhe
