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
#include <vector>

#include <gtest/gtest.h>

#include "sdcfhe/ring/bconv.hpp"
#include "sdcfhe/ring/crt.hpp"
#include "sdcfhe/ring/poly_ops.hpp"
#include "test_oracles.hpp"

namespace sdcfhe {
namespace {

BasisPtr single_prime_basis(u64 q, std::size_t n, std::optional<u64> psi = std::nullopt) {
  return RnsBasis::make({std::make_shared<const PrimeModulus>(q, n, psi)});
}

RnsPoly random_poly(const BasisPtr& b, Domain d, std::mt19937_64& rng) {
  RnsPoly p(b, d);
  for (std::size_t i = 0; i < p.limbs(); ++i) {
    const u64 q = b->prime(i).value();
    for (auto& v : p.limb(i)) v = rng() % q;
  }
  return p;
}

TEST(ModArith, BarrettMatchesWideRemainder) {
  std::mt19937_64 rng(1);
  for (u64 q : {17ull, 65537ull, (1ull << 30) - 35ull, 1125899906826241ull, (1ull << 61) - 1}) {
    const Modulus m(q);
    for (int t = 0; t < 20000; ++t) {
      const u128 x = (static_cast<u128>(rng()) << 64) | rng();
      ASSERT_EQ(reduce_128(x, m), static_cast<u64>(x % q));
      const u64 a = rng() % q, b = rng() % q;
      ASSERT_EQ(mul_mod(a, b, m), static_cast<u64>(static_cast<u128>(a) * b % q));
      const u64 w = rng() % q, any = rng();
      ASSERT_EQ(mul_shoup(any, ShoupFactor(w, q), q), static_cast<u64>(static_cast<u128>(any) * w % q));
    }
  }
}

TEST(ModArith, PrimeGenerationYieldsNttFriendlyPrimes) {
  const auto primes = generate_ntt_primes(50, 2048, 6);
  ASSERT_EQ(primes.size(), 6u);
  for (u64 p : primes) {
    EXPECT_TRUE(is_prime(p));
    EXPECT_EQ((p - 1) % 4096, 0u);
    EXPECT_EQ(bit_width_of(p), 50);
  }
  const auto scaling = generate_scaling_primes(30, 2048, 8);
  for (u64 p : scaling) {
    EXPECT_LE(std::abs(std::log2(static_cast<double>(p)) - 30.0), 1.0);
  }
}

TEST(PrimeModulus, RootAndInverseInvariants) {
  for (u64 q : generate_ntt_primes(30, 256, 3)) {
    PrimeModulus pm(q, 256);
    const Modulus m(q);
    EXPECT_EQ(pow_mod(pm.psi(), 512, m), 1u);
    EXPECT_EQ(pow_mod(pm.psi(), 256, m), q - 1);
    EXPECT_EQ(mul_mod(pm.n_inv(), 256, m), 1u);
  }
  EXPECT_THROW(PrimeModulus(97, 64), ConfigError);   // 97 != 1 mod 128
  EXPECT_THROW(PrimeModulus(91, 4), ConfigError);    // composite
}

TEST(Ntt, ZeroMapsToZero) {
  auto b = single_prime_basis(65537, 16);
  RnsPoly z(b, Domain::Coefficient);
  auto f = ntt_forward(z);
  for (u64 v : f.data()) EXPECT_EQ(v, 0u);
  auto back = ntt_inverse(f);
  for (u64 v : back.data()) EXPECT_EQ(v, 0u);
}

TEST(Ntt, SmallCaseMatchesNaiveEvaluation) {
  auto b = single_prime_basis(17, 4, 2);
  RnsPoly a(b, Domain::Coefficient);
  const std::vector<u64> coeffs = {3, 1, 4, 1};
  std::copy(coeffs.begin(), coeffs.end(), a.limb(0).begin());
  const auto expected = oracle::naive_negacyclic_ntt(coeffs, 17, 2);
  // Frozen from the evaluation oracle: a(2), a(8), a(32), a(128) mod 17.
  EXPECT_EQ(expected, (std::vector<u64>{12, 14, 9, 11}));
  auto f = ntt_forward(a);
  EXPECT_EQ(std::vector<u64>(f.limb(0).begin(), f.limb(0).end()), expected);
  auto back = ntt_inverse(f);
  EXPECT_EQ(std::vector<u64>(back.limb(0).begin(), back.limb(0).end()), coeffs);
}

TEST(Ntt, MatchesNaiveEvaluationAtModerateDegree) {
  std::mt19937_64 rng(7);
  const u64 q = generate_ntt_primes(40, 64, 1)[0];
  auto b = single_prime_basis(q, 64);
  for (int t = 0; t < 20; ++t) {
    auto a = random_poly(b, Domain::Coefficient, rng);
    const std::vector<u64> coeffs(a.limb(0).begin(), a.limb(0).end());
    auto f = ntt_forward(a);
    EXPECT_EQ(std::vector<u64>(f.limb(0).begin(), f.limb(0).end()),
              oracle::naive_negacyclic_ntt(coeffs, q, b->prime(0).psi()));
  }
}

TEST(Ntt, RoundTripIsIdentity) {
  std::mt19937_64 rng(11);
  auto b16 = single_prime_basis(65537, 16);
  for (int t = 0; t < 1000; ++t) {
    auto a = random_poly(b16, Domain::Coefficient, rng);
    ASSERT_EQ(ntt_inverse(ntt_forward(a)), a);
  }
  for (std::size_t n : {256u, 2048u}) {
    std::vector<PrimePtr> primes;
    for (u64 q : generate_ntt_primes(50, n, 2)) primes.push_back(std::make_shared<const PrimeModulus>(q, n));
    for (u64 q : generate_scaling_primes(30, n, 2)) primes.push_back(std::make_shared<const PrimeModulus>(q, n));
    auto b = RnsBasis::make(primes);
    for (int t = 0; t < 100; ++t) {
      auto a = random_poly(b, Domain::Coefficient, rng);
      ASSERT_EQ(ntt_inverse(ntt_forward(a)), a);
    }
  }
}

TEST(Ntt, IsLinear) {
  std::mt19937_64 rng(3);
  auto b = single_prime_basis(generate_ntt_primes(30, 128, 1)[0], 128);
  for (int t = 0; t < 50; ++t) {
    auto a = random_poly(b, Domain::Coefficient, rng);
    auto c = random_poly(b, Domain::Coefficient, rng);
    EXPECT_EQ(ntt_forward(poly_add(a, c)), poly_add(ntt_forward(a), ntt_forward(c)));
  }
}

TEST(Ntt, RejectsWrongDomain) {
  auto b = single_prime_basis(65537, 16);
  RnsPoly e(b, Domain::Evaluation);
  EXPECT_THROW(ntt_forward(e), ConfigError);
  RnsPoly c(b, Domain::Coefficient);
  EXPECT_THROW(ntt_inverse(c), ConfigError);
}

TEST(NegacyclicMul, IdentityAndMonomial) {
  std::mt19937_64 rng(5);
  auto b = single_prime_basis(97, 8);
  RnsPoly one(b, Domain::Coefficient);
  one.at(0, 0) = 1;
  auto x = random_poly(b, Domain::Coefficient, rng);
  EXPECT_EQ(negacyclic_mul(one, x), x);

  auto b4 = single_prime_basis(17, 4, 2);
  RnsPoly mono(b4, Domain::Coefficient);
  mono.at(0, 1) = 1;
  auto sq = negacyclic_mul(mono, mono);
  EXPECT_EQ(std::vector<u64>(sq.limb(0).begin(), sq.limb(0).end()), (std::vector<u64>{0, 0, 1, 0}));
}

TEST(NegacyclicMul, MatchesSchoolbook) {
  std::mt19937_64 rng(9);
  auto b = single_prime_basis(97, 8);
  for (int t = 0; t < 200; ++t) {
    auto x = random_poly(b, Domain::Coefficient, rng);
    auto y = random_poly(b, Domain::Coefficient, rng);
    const std::vector<u64> xs(x.limb(0).begin(), x.limb(0).end());
    const std::vector<u64> ys(y.limb(0).begin(), y.limb(0).end());
    auto prod = negacyclic_mul(x, y);
    ASSERT_EQ(std::vector<u64>(prod.limb(0).begin(), prod.limb(0).end()),
              oracle::schoolbook_negacyclic(xs, ys, 97));
  }
  // Evaluation-domain path agrees with the coefficient path.
  auto x = random_poly(b, Domain::Coefficient, rng);
  auto y = random_poly(b, Domain::Coefficient, rng);
  EXPECT_EQ(ntt_inverse(negacyclic_mul(ntt_forward(x), ntt_forward(y))), negacyclic_mul(x, y));
}

TEST(NegacyclicMul, RejectsBasisMismatch) {
  auto b1 = single_prime_basis(97, 8);
  auto b2 = single_prime_basis(17, 8);
  EXPECT_THROW(negacyclic_mul(RnsPoly(b1, Domain::Coefficient), RnsPoly(b2, Domain::Coefficient)),
               ConfigError);
}

TEST(Automorphism, IdentityAndGaloisOracle) {
  std::mt19937_64 rng(2);
  auto b = single_prime_basis(97, 8);
  auto a = random_poly(b, Domain::Coefficient, rng);
  EXPECT_EQ(automorphism(a, 0), a);

  RnsPoly x(b, Domain::Coefficient);
  x.at(0, 1) = 1;
  // X -> X^5: exponent 5 < 8 so the image is +X^5.
  auto img = automorphism(x, 1);
  const auto expected = oracle::galois_map({0, 1, 0, 0, 0, 0, 0, 0}, 5, 97);
  EXPECT_EQ(expected, (std::vector<u64>{0, 0, 0, 0, 0, 1, 0, 0}));
  EXPECT_EQ(std::vector<u64>(img.limb(0).begin(), img.limb(0).end()), expected);

  for (int t = 0; t < 20; ++t) {
    auto r = random_poly(b, Domain::Coefficient, rng);
    const std::vector<u64> rs(r.limb(0).begin(), r.limb(0).end());
    auto out = automorphism(r, 2);
    EXPECT_EQ(std::vector<u64>(out.limb(0).begin(), out.limb(0).end()), oracle::galois_map(rs, 25 % 16, 97));
  }
  EXPECT_THROW(automorphism(a, 4), std::invalid_argument);
}

TEST(Automorphism, GroupLaw) {
  std::mt19937_64 rng(4);
  auto b = single_prime_basis(generate_ntt_primes(30, 64, 1)[0], 64);
  for (std::size_t r1 = 0; r1 < 8; ++r1) {
    for (std::size_t r2 = 0; r1 + r2 < 32 && r2 < 8; ++r2) {
      auto a = random_poly(b, Domain::Coefficient, rng);
      EXPECT_EQ(automorphism(automorphism(a, r1), r2), automorphism(a, r1 + r2));
    }
  }
}

TEST(Crt, ExhaustiveSmallBasis) {
  // Degree-1 bases admit any odd prime, so {5, 7} is representable.
  auto b57 = RnsBasis::make({std::make_shared<const PrimeModulus>(5, 1),
                             std::make_shared<const PrimeModulus>(7, 1)});
  RnsPoly v57(b57, Domain::Coefficient);
  v57.at(0, 0) = 3;
  v57.at(1, 0) = 2;
  EXPECT_EQ(oracle::crt_scan({3, 2}, {5, 7}), 23u);
  // 23 lies above Q/2 = 17.5, so the recentered representative is 23 - 35.
  EXPECT_EQ(crt_interpolate(v57)[0], -12);

  const std::size_t n = 4;
  auto p0 = std::make_shared<const PrimeModulus>(17, n, 2);
  auto p1 = std::make_shared<const PrimeModulus>(41, n);
  auto b = RnsBasis::make({p0, p1});
  EXPECT_EQ((b->cofactor(0) * b->cofactor_inverse(0)) % 17, 1);
  EXPECT_EQ((b->cofactor(1) * b->cofactor_inverse(1)) % 41, 1);
  for (u64 r0 = 0; r0 < 17; ++r0) {
    for (u64 r1 = 0; r1 < 41; ++r1) {
      RnsPoly v(b, Domain::Coefficient);
      v.at(0, 0) = r0;
      v.at(1, 0) = r1;
      const auto d = crt_interpolate(v);
      u64 scan = oracle::crt_scan({r0, r1}, {17, 41});
      BigInt expected = scan > 697 / 2 ? BigInt(scan) - 697 : BigInt(scan);
      ASSERT_EQ(d[0], expected);
      ASSERT_EQ(d[1], 0);
    }
  }
}

TEST(Crt, MinusOneRecenters) {
  const std::size_t n = 16;
  std::vector<PrimePtr> primes;
  for (u64 q : generate_ntt_primes(50, n, 3)) primes.push_back(std::make_shared<const PrimeModulus>(q, n));
  auto b = RnsBasis::make(primes);
  RnsPoly v(b, Domain::Coefficient);
  for (std::size_t i = 0; i < 3; ++i) v.at(i, 5) = b->prime(i).value() - 1;
  const auto d = crt_interpolate(v);
  EXPECT_EQ(d[5], -1);
  EXPECT_EQ(d[0], 0);
}

TEST(Crt, DecomposeInterpolateRoundTrip) {
  std::mt19937_64 rng(8);
  const std::size_t n = 32;
  std::vector<PrimePtr> primes;
  for (u64 q : generate_ntt_primes(50, n, 4)) primes.push_back(std::make_shared<const PrimeModulus>(q, n));
  auto b = RnsBasis::make(primes);
  for (int t = 0; t < 20; ++t) {
    std::vector<BigInt> values(n);
    for (auto& v : values) {
      BigInt x = 0;
      for (int w = 0; w < 4; ++w) x = (x << 64) + rng();
      x %= b->product();
      if (x > b->half_product()) x -= b->product();
      v = x;
    }
    EXPECT_EQ(crt_interpolate(crt_decompose(values, b)), values);
  }
}

TEST(Bconv, ZeroAndSinglePrimeExact) {
  const std::size_t n = 8;
  const auto qs = generate_ntt_primes(40, n, 3);
  auto from1 = RnsBasis::make({std::make_shared<const PrimeModulus>(qs[0], n)});
  auto to = RnsBasis::make({std::make_shared<const PrimeModulus>(qs[1], n),
                            std::make_shared<const PrimeModulus>(qs[2], n)});
  RnsPoly z(from1, Domain::Coefficient);
  auto zc = bconv(z, to);
  for (u64 v : zc.data()) EXPECT_EQ(v, 0u);

  std::mt19937_64 rng(6);
  RnsPoly v(from1, Domain::Coefficient);
  for (auto& x : v.limb(0)) x = rng() % qs[0];
  auto out = bconv(v, to);
  for (std::size_t c = 0; c < n; ++c) {
    EXPECT_EQ(out.at(0, c), v.at(0, c) % qs[1]);
    EXPECT_EQ(out.at(1, c), v.at(0, c) % qs[2]);
  }
  EXPECT_THROW(bconv(v, from1), ConfigError);
}

TEST(Bconv, SmallCrtExample) {
  auto from = RnsBasis::make({std::make_shared<const PrimeModulus>(5, 1),
                              std::make_shared<const PrimeModulus>(7, 1)});
  auto to = RnsBasis::make({std::make_shared<const PrimeModulus>(11, 1)});
  RnsPoly v(from, Domain::Coefficient);
  v.at(0, 0) = 3;
  v.at(1, 0) = 2;
  const auto out = bconv(v, to);
  const auto admissible = oracle::bconv_candidates(23, 35, 2);
  bool matched = false;
  for (u64 cand : admissible) matched |= out.at(0, 0) == cand % 11;
  EXPECT_TRUE(matched) << out.at(0, 0);
}

TEST(Bconv, OvershootIsBoundedMultipleOfQ) {
  // Small primes 17, 41, 73, 89 are 1 mod 8 (n = 4). B1 = {17, 41}, B2 = {73, 89}.
  const std::size_t n = 4;
  auto from = RnsBasis::make({std::make_shared<const PrimeModulus>(17, n, 2),
                              std::make_shared<const PrimeModulus>(41, n)});
  auto to = RnsBasis::make({std::make_shared<const PrimeModulus>(73, n),
                            std::make_shared<const PrimeModulus>(89, n)});
  BasisConverter conv(from, to);
  for (u64 r0 = 0; r0 < 17; ++r0) {
    for (u64 r1 = 0; r1 < 41; ++r1) {
      RnsPoly v(from, Domain::Coefficient);
      v.at(0, 0) = r0;
      v.at(1, 0) = r1;
      auto out = conv.convert(v);
      const u64 d = oracle::crt_scan({r0, r1}, {17, 41});
      const auto admissible = oracle::bconv_candidates(d, 697, 2);
      bool matched = false;
      for (u64 cand : admissible) {
        if (out.at(0, 0) == cand % 73 && out.at(1, 0) == cand % 89) matched = true;
      }
      ASSERT_TRUE(matched) << "residues " << r0 << "," << r1;
    }
  }
}

}  // namespace
}  // namespace sdcfhe
