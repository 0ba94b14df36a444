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

#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sdcfhe/ckks/stage.hpp"
#include "sdcfhe/ring/crt.hpp"
#include "test_support.hpp"

namespace sdcfhe {
namespace {

using support::checksums_for;
using support::make_basis;
using support::random_poly;

// Adds one to a word of a chosen operand the first `shots` times the operand
// goes live, moving to the next coefficient after each shot.
class TestHook : public FaultHook {
 public:
  TestHook(std::string stage, std::size_t operand, std::size_t limb, std::size_t coeff, int shots = 1)
      : stage_(std::move(stage)), operand_(operand), limb_(limb), coeff_(coeff), shots_(shots) {}

  bool arm_stage(std::string_view id) override { return id == stage_; }
  bool targets(std::size_t operand) const override { return shots_ > 0 && operand == operand_; }
  void inject(std::size_t, std::size_t first_limb, std::span<u64> data, std::size_t degree,
              std::span<const u64> moduli) override {
    const std::size_t count = data.size() / degree;
    if (limb_ < first_limb || limb_ >= first_limb + count) return;
    u64& w = data[(limb_ - first_limb) * degree + coeff_];
    w = (w + 1) % moduli[limb_ - first_limb];
    coeff_ = (coeff_ + 1) % degree;
    --shots_;
    ++fired;
  }

  int fired = 0;

 private:
  std::string stage_;
  std::size_t operand_, limb_, coeff_;
  int shots_;
};

class Recorder : public StageObserver {
 public:
  void on_stage(std::string_view id) override { stages.emplace_back(id); }
  void on_kernel(const KernelEvent& e) override {
    kernels.push_back(kernel_name(e.kind));
    operand_counts.push_back(e.operands.size());
  }
  std::vector<std::string> stages, kernels;
  std::vector<std::size_t> operand_counts;
};

TEST(Stage, KernelsMatchRingOperations) {
  auto b = make_basis(64, 2);
  std::mt19937_64 rng(1);
  RnsPoly a = random_poly(b, Domain::Coefficient, rng);
  RnsPoly c = random_poly(b, Domain::Coefficient, rng);
  ExecContext ctx;
  OperatorScope op(ctx, "test");
  StageScope st(ctx, "all");
  const RnsPoly A = k_ntt(ctx, a);
  EXPECT_EQ(A, ntt_forward(a));
  EXPECT_EQ(k_intt(ctx, A), a);
  const RnsPoly C = ntt_forward(c);
  EXPECT_EQ(k_pointwise(ctx, A, C), pointwise_mul(A, C));
  EXPECT_EQ(k_add(ctx, a, c), poly_add(a, c));
  EXPECT_EQ(k_sub(ctx, a, c), poly_sub(a, c));
  EXPECT_EQ(k_automorphism(ctx, a, galois_element(3, 64)), automorphism(a, 3));
}

TEST(Stage, ObserverSeesStagesAndOperandSlots) {
  auto b = make_basis(16, 1);
  std::mt19937_64 rng(2);
  RnsPoly a = random_poly(b, Domain::Coefficient, rng);
  ExecContext ctx;
  Recorder rec;
  ctx.set_observer(&rec);
  {
    OperatorScope op(ctx, "mult");
    {
      StageScope st(ctx, "x");
      k_ntt(ctx, a);
    }
    OperatorScope inner(ctx, "rescale");
    StageScope st(ctx, "y");
    k_add(ctx, a, a);
  }
  {
    OperatorScope op(ctx, "mult");
    StageScope st(ctx, "x");
  }
  EXPECT_EQ(rec.stages, (std::vector<std::string>{"mult#0/x", "mult#0/y", "mult#1/x"}));
  // Forward transform at n = 16: input, three intermediate layers, output.
  EXPECT_EQ(rec.operand_counts, (std::vector<std::size_t>{5, 3}));
}

TEST(Stage, KernelOutsideStageIsRejected) {
  auto b = make_basis(16, 1);
  RnsPoly a(b, Domain::Coefficient);
  ExecContext ctx;
  EXPECT_THROW(k_ntt(ctx, a), std::logic_error);
}

TEST(Stage, UnprotectedFaultPropagates) {
  auto b = make_basis(16, 2);
  std::mt19937_64 rng(3);
  RnsPoly a = random_poly(b, Domain::Coefficient, rng);
  TestHook hook("op#0/s", 2, 1, 5);
  ExecContext ctx;
  ctx.set_fault_hook(&hook);
  OperatorScope op(ctx, "op");
  StageScope st(ctx, "s");
  const RnsPoly out = k_ntt(ctx, a);
  EXPECT_EQ(hook.fired, 1);
  EXPECT_NE(out, ntt_forward(a));
  EXPECT_FALSE(ctx.detected());
}

TEST(Stage, ChecksumDetectsAndRecoversEveryTransformSlot) {
  auto b = make_basis(16, 2);
  auto cs = checksums_for(b);
  std::mt19937_64 rng(4);
  RnsPoly a = random_poly(b, Domain::Coefficient, rng);
  const RnsPoly expected = ntt_forward(a);
  for (std::size_t slot = 0; slot < 5; ++slot) {
    for (std::size_t limb = 0; limb < 2; ++limb) {
      TestHook hook("op#0/s", slot, limb, 7);
      ExecContext ctx({ProtectionKind::Checksum, 1}, &cs);
      ctx.set_fault_hook(&hook);
      OperatorScope op(ctx, "op");
      StageScope st(ctx, "s");
      const RnsPoly out = k_ntt(ctx, a);
      EXPECT_EQ(hook.fired, 1);
      EXPECT_TRUE(ctx.detected()) << slot << " " << limb;
      EXPECT_EQ(out, expected);
      ASSERT_EQ(ctx.guard_events().size(), 1u);
      EXPECT_EQ(ctx.guard_events()[0].limb, limb);
      EXPECT_EQ(ctx.guard_events()[0].action, "re-execute");
    }
  }
}

TEST(Stage, ChecksumCoversInverseLinearAndPointwise) {
  auto b = make_basis(16, 2);
  auto cs = checksums_for(b);
  std::mt19937_64 rng(5);
  RnsPoly x = random_poly(b, Domain::Evaluation, rng);
  RnsPoly y = random_poly(b, Domain::Evaluation, rng);
  std::vector<ShoupFactor> scale;
  for (std::size_t i = 0; i < 2; ++i) scale.emplace_back(12345, b->prime(i).value());

  auto run = [&](auto&& kernel, std::size_t slot) {
    TestHook hook("op#0/s", slot, 1, 3);
    ExecContext ctx({ProtectionKind::Checksum, 1}, &cs, 9);
    ctx.set_fault_hook(&hook);
    OperatorScope op(ctx, "op");
    StageScope st(ctx, "s");
    RnsPoly out = kernel(ctx);
    EXPECT_EQ(hook.fired, 1);
    EXPECT_TRUE(ctx.detected()) << slot;
    return out;
  };
  for (std::size_t slot = 0; slot < 6; ++slot) {
    EXPECT_EQ(run([&](ExecContext& c) { return k_intt(c, x); }, slot), ntt_inverse(x));
  }
  for (std::size_t slot = 0; slot < 3; ++slot) {
    EXPECT_EQ(run([&](ExecContext& c) { return k_pointwise(c, x, y); }, slot), pointwise_mul(x, y));
    EXPECT_EQ(run([&](ExecContext& c) { return k_add(c, x, y); }, slot), poly_add(x, y));
    EXPECT_EQ(run([&](ExecContext& c) { return k_sub_scale(c, x, y, scale); }, slot),
              [&] {
                ExecContext plain;
                OperatorScope op(plain, "plain");
                StageScope st(plain, "s");
                return k_sub_scale(plain, x, y, scale);
              }());
  }
}

TEST(Stage, GuardsCoverBconvLiftAndAutomorphism) {
  auto from = make_basis(16, 2, 40);
  std::vector<PrimePtr> tp;
  for (u64 q : generate_ntt_primes(50, 16, 2)) tp.push_back(std::make_shared<const PrimeModulus>(q, 16));
  auto to = RnsBasis::make(tp);
  BasisConverter conv(from, to);
  auto cs = checksums_for(from);
  std::mt19937_64 rng(6);
  RnsPoly v = random_poly(from, Domain::Coefficient, rng);
  RnsPoly single(RnsBasis::make({from->prime_ptr(0)}), Domain::Coefficient);
  for (auto& w : single.limb(0)) w = rng() % from->prime(0).value();

  for (auto kind : {ProtectionKind::Checksum, ProtectionKind::Redundant}) {
    for (std::size_t slot = 0; slot < 3; ++slot) {
      TestHook hook("op#0/s", slot, 0, 2);
      ExecContext ctx({kind, 1}, &cs);
      ctx.set_fault_hook(&hook);
      OperatorScope op(ctx, "op");
      StageScope st(ctx, "s");
      EXPECT_EQ(k_bconv(ctx, conv, v), conv.convert(v));
      EXPECT_TRUE(ctx.detected());
    }
    for (std::size_t slot = 0; slot < 2; ++slot) {
      TestHook hook("op#0/s", slot, 0, 2);
      ExecContext ctx({kind, 1}, &cs);
      ctx.set_fault_hook(&hook);
      OperatorScope op(ctx, "op");
      StageScope st(ctx, "s");
      const RnsPoly expected = automorphism(v, 1);
      EXPECT_EQ(k_automorphism(ctx, v, galois_element(1, 16)), expected);
      EXPECT_TRUE(ctx.detected());
    }
    TestHook hook("op#0/s", 1, 0, 2);
    ExecContext ctx({kind, 1}, &cs);
    ctx.set_fault_hook(&hook);
    OperatorScope op(ctx, "op");
    StageScope st(ctx, "s");
    const RnsPoly lifted = k_lift(ctx, single, to);
    EXPECT_TRUE(ctx.detected());
    EXPECT_TRUE(lifted.is_canonical());
  }
}

TEST(Stage, BconvColumnChecksumCatchesEveryOperand) {
  auto from = make_basis(16, 3, 40);
  std::vector<PrimePtr> tp;
  for (u64 q : generate_ntt_primes(50, 16, 2)) tp.push_back(std::make_shared<const PrimeModulus>(q, 16));
  BasisConverter conv(from, RnsBasis::make(tp));
  auto cs = checksums_for(from);
  std::mt19937_64 rng(9);
  RnsPoly v = random_poly(from, Domain::Coefficient, rng);
  ProtectionMode mode{ProtectionKind::Checksum, 1, true};
  {
    ExecContext ctx(mode, &cs);
    OperatorScope op(ctx, "op");
    StageScope st(ctx, "s");
    EXPECT_EQ(k_bconv(ctx, conv, v), conv.convert(v));
    EXPECT_FALSE(ctx.detected());
  }
  for (std::size_t slot = 0; slot < 3; ++slot) {
    for (std::size_t limb = 0; limb < 2; ++limb) {
      TestHook hook("op#0/s", slot, limb, 5);
      ExecContext ctx(mode, &cs);
      ctx.set_fault_hook(&hook);
      OperatorScope op(ctx, "op");
      StageScope st(ctx, "s");
      EXPECT_EQ(k_bconv(ctx, conv, v), conv.convert(v));
      EXPECT_TRUE(ctx.detected()) << slot << " " << limb;
      ASSERT_FALSE(ctx.guard_events().empty());
      EXPECT_EQ(ctx.guard_events().front().action, "re-execute");
    }
  }
}

TEST(Stage, LiftIsCenteredRounding) {
  auto src = make_basis(16, 1, 30);
  std::vector<PrimePtr> tp;
  for (u64 q : generate_ntt_primes(40, 16, 2)) tp.push_back(std::make_shared<const PrimeModulus>(q, 16));
  auto to = RnsBasis::make(tp);
  const u64 ql = src->prime(0).value();
  RnsPoly x(src, Domain::Coefficient);
  auto l = x.limb(0);
  l[0] = 0;
  l[1] = 1;
  l[2] = ql - 1;
  l[3] = ql / 2;
  l[4] = ql / 2 + 1;
  ExecContext ctx;
  OperatorScope op(ctx, "op");
  StageScope st(ctx, "s");
  const RnsPoly out = k_lift(ctx, x, to);
  const auto values = crt_interpolate(out);
  // Centered representatives of x mod q_last.
  EXPECT_EQ(values[0], 0);
  EXPECT_EQ(values[1], 1);
  EXPECT_EQ(values[2], -1);
  EXPECT_EQ(values[3], BigInt(ql / 2));
  EXPECT_EQ(values[4], BigInt(ql / 2 + 1) - BigInt(ql));
}

TEST(Stage, RedundantModeDetectsAnySlot) {
  auto b = make_basis(16, 1);
  std::mt19937_64 rng(7);
  RnsPoly a = random_poly(b, Domain::Coefficient, rng);
  for (std::size_t slot = 0; slot < 5; ++slot) {
    TestHook hook("op#0/s", slot, 0, 0);
    ExecContext ctx({ProtectionKind::Redundant, 1});
    ctx.set_fault_hook(&hook);
    OperatorScope op(ctx, "op");
    StageScope st(ctx, "s");
    EXPECT_EQ(k_ntt(ctx, a), ntt_forward(a));
    EXPECT_TRUE(ctx.detected());
  }
}

TEST(Stage, PersistentFaultIsUnrecoverable) {
  auto b = make_basis(16, 1);
  auto cs = checksums_for(b);
  std::mt19937_64 rng(8);
  RnsPoly a = random_poly(b, Domain::Coefficient, rng);
  for (auto kind : {ProtectionKind::Checksum, ProtectionKind::Redundant}) {
    TestHook hook("op#0/s", 0, 0, 0, 100);
    ExecContext ctx({kind, 1}, &cs);
    ctx.set_fault_hook(&hook);
    OperatorScope op(ctx, "op");
    StageScope st(ctx, "s");
    EXPECT_THROW(k_ntt(ctx, a), UnrecoverableFault);
  }
}

TEST(Stage, FaultFreeGuardsNeverFlag) {
  auto b = make_basis(64, 3);
  auto cs = checksums_for(b);
  std::mt19937_64 rng(9);
  ExecContext ctx({ProtectionKind::Checksum, 1}, &cs, 1);
  OperatorScope op(ctx, "op");
  StageScope st(ctx, "s");
  for (int t = 0; t < 200; ++t) {
    RnsPoly a = random_poly(b, Domain::Coefficient, rng);
    RnsPoly A = k_ntt(ctx, a);
    k_intt(ctx, A);
    k_pointwise(ctx, A, A);
    k_add(ctx, a, a);
  }
  EXPECT_FALSE(ctx.detected());
}

TEST(Stage, ConfigValidation) {
  EXPECT_THROW(ExecContext({ProtectionKind::Checksum, 1}, nullptr), ConfigError);
  EXPECT_THROW(ExecContext({ProtectionKind::Redundant, 0}), ConfigError);
  EXPECT_EQ(parse_protection("checksum"), ProtectionKind::Checksum);
  EXPECT_THROW(parse_protection("tmr"), ConfigError);
}

}  // namespace
}  // namespace sdcfhe
