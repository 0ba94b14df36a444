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

#include <string>
#include <utility>
#include <vector>

#include "sdcfhe/abft/checksum.hpp"
#include "sdcfhe/ckks/stage.hpp"

namespace sdcfhe::abft {

enum class Direction { Forward, Inverse };
enum class LinearOp { Add, Sub };

// Options shared by the standalone guards. The hook, if any, sees the
// guarded kernel as stage "guard#0/<name>".
struct GuardOptions {
  int retry_limit = 1;
  FaultHook* fault = nullptr;
  u64 projection_seed = 0;
};

template <class T>
struct Guarded {
  T result;
  // Flags of the returned result, one per limb.
  std::vector<ChecksumFlags> flags;
  std::vector<GuardEvent> events;

  bool detected() const { return !events.empty(); }
};

namespace detail {

template <class Kernel>
RnsPoly guarded_stage(ProtectionMode mode, const ChecksumContext* cs, const GuardOptions& opt,
                      const char* name, std::vector<GuardEvent>& events, Kernel&& kernel) {
  mode.retry_limit = opt.retry_limit;
  ExecContext ctx(mode, cs, opt.projection_seed);
  ctx.set_fault_hook(opt.fault);
  RnsPoly out;
  {
    OperatorScope op(ctx, "guard");
    StageScope st(ctx, name);
    out = kernel(ctx);
  }
  events = ctx.guard_events();
  return out;
}

}  // namespace detail

inline std::vector<ChecksumFlags> transform_flags(const RnsPoly& in, const RnsPoly& out, Direction d,
                                                  const ChecksumContext& cs) {
  std::vector<ChecksumFlags> flags(in.limbs());
  for (std::size_t i = 0; i < in.limbs(); ++i) {
    const PrimeModulus& pm = in.basis()->prime(i);
    if (d == Direction::Forward) {
      flags[i] = {sum_mod(in.limb(i), pm.modulus()), cs.project(out.limb(i), pm.value())};
    } else {
      flags[i] = {cs.project(in.limb(i), pm.value()), sum_mod(out.limb(i), pm.modulus())};
    }
  }
  return flags;
}

inline Guarded<RnsPoly> checked_transform(const RnsPoly& a, Direction d, const ChecksumContext& cs,
                                          const GuardOptions& opt = {}) {
  Guarded<RnsPoly> g;
  g.result = detail::guarded_stage({ProtectionKind::Checksum, 1}, &cs, opt, d == Direction::Forward ? "ntt" : "intt",
                                   g.events, [&](ExecContext& ctx) {
                                     return d == Direction::Forward ? k_ntt(ctx, a) : k_intt(ctx, a);
                                   });
  g.flags = transform_flags(a, g.result, d, cs);
  return g;
}

inline Guarded<RnsPoly> checked_linear(const RnsPoly& a, const RnsPoly& b, LinearOp op, const ChecksumContext& cs,
                                       const GuardOptions& opt = {}) {
  Guarded<RnsPoly> g;
  g.result = detail::guarded_stage({ProtectionKind::Checksum, 1}, &cs, opt, op == LinearOp::Add ? "add" : "sub",
                                   g.events, [&](ExecContext& ctx) {
                                     return op == LinearOp::Add ? k_add(ctx, a, b) : k_sub(ctx, a, b);
                                   });
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    const Modulus& m = a.basis()->prime(i).modulus();
    const u64 sa = sum_mod(a.limb(i), m);
    const u64 sb = sum_mod(b.limb(i), m);
    g.flags.push_back({op == LinearOp::Add ? add_mod(sa, sb, m.value) : sub_mod(sa, sb, m.value),
                       sum_mod(g.result.limb(i), m)});
  }
  return g;
}

inline Guarded<RnsPoly> checked_pointwise(const RnsPoly& a, const RnsPoly& b, const ChecksumContext& cs,
                                          const GuardOptions& opt = {}) {
  Guarded<RnsPoly> g;
  g.result = detail::guarded_stage({ProtectionKind::Checksum, 1}, &cs, opt, "pointwise", g.events,
                                   [&](ExecContext& ctx) { return k_pointwise(ctx, a, b); });
  std::mt19937_64 rng(opt.projection_seed ^ 0x9e3779b97f4a7c15ull);
  for (std::size_t i = 0; i < a.limbs(); ++i) {
    g.flags.push_back(pointwise_projection(a.limb(i), b.limb(i), g.result.limb(i), rng(),
                                           a.basis()->prime(i).modulus()));
  }
  return g;
}

// Runs a basis conversion twice and compares the copies entrywise.
inline Guarded<RnsPoly> recompute_guard(const BasisConverter& conv, const RnsPoly& in, const GuardOptions& opt = {}) {
  Guarded<RnsPoly> g;
  g.result = detail::guarded_stage({ProtectionKind::Redundant, 1}, nullptr, opt, "bconv", g.events,
                                   [&](ExecContext& ctx) { return k_bconv(ctx, conv, in); });
  return g;
}

// Full dual-modular redundancy: every stage kernel of `computation` runs
// twice with comparison. computation(ExecContext&) returns the result.
template <class Computation>
auto dmr_execute(Computation&& computation, const GuardOptions& opt = {}) {
  ExecContext ctx({ProtectionKind::Redundant, opt.retry_limit}, nullptr, opt.projection_seed);
  ctx.set_fault_hook(opt.fault);
  Guarded<decltype(computation(ctx))> g{computation(ctx), {}, {}};
  g.events = ctx.guard_events();
  return g;
}

}  // namespace sdcfhe::abft
