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
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sdcfhe/ckks/context.hpp"
#include "sdcfhe/ring/crt.hpp"
#include "sdcfhe/ring/ntt.hpp"

namespace sdcfhe {

using Complex = std::complex<double>;

struct Plaintext {
  RnsPoly poly;  // Evaluation domain over the level basis
  double scale = 1.0;
  int level = 0;
};

// Canonical embedding through the slot-ordered special FFT. Slot j is the
// evaluation at zeta^(5^j), zeta = exp(i pi / N), so X -> X^(5^r) rotates the
// slot vector left by r.
class Encoder {
 public:
  explicit Encoder(ContextPtr ctx) : ctx_(std::move(ctx)) {
    const std::size_t n = ctx_->degree();
    m_ = 2 * n;
    const std::size_t slots = n / 2;
    rot_group_.resize(slots);
    std::size_t g = 1;
    for (std::size_t j = 0; j < slots; ++j) {
      rot_group_[j] = g;
      g = (g * 5) % m_;
    }
    ksi_.resize(m_ + 1);
    for (std::size_t k = 0; k <= m_; ++k) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m_);
      ksi_[k] = Complex(std::cos(angle), std::sin(angle));
    }
  }

  const ContextPtr& context() const { return ctx_; }

  // Integer coefficients of round(scale * Encode(values)) before reduction.
  std::vector<double> embed(const std::vector<Complex>& values, double scale) const {
    const std::size_t n = ctx_->degree();
    const std::size_t slots = n / 2;
    if (values.size() > slots) throw std::invalid_argument("encode: more values than slots");
    std::vector<Complex> v(slots, Complex(0.0, 0.0));
    std::copy(values.begin(), values.end(), v.begin());
    fft_special_inv(v);
    std::vector<double> coeffs(n);
    for (std::size_t i = 0; i < slots; ++i) {
      coeffs[i] = std::round(v[i].real() * scale);
      coeffs[i + slots] = std::round(v[i].imag() * scale);
    }
    return coeffs;
  }

  Plaintext encode(const std::vector<Complex>& values, double scale, int level) const {
    if (level < 0 || level > ctx_->max_level()) throw std::invalid_argument("encode: level out of range");
    double max_abs = 0.0;
    for (const auto& z : values) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw std::range_error("encode: non-finite value");
      max_abs = std::max(max_abs, std::abs(z));
    }
    if (max_abs > 0.0 && std::log2(max_abs) + std::log2(scale) > ctx_->log2_q(level) - 10.0) {
      throw std::range_error("encode: message too large for the level modulus");
    }
    const auto coeffs = embed(values, scale);
    const BasisPtr& basis = ctx_->level_basis(level);
    RnsPoly poly(basis, Domain::Coefficient);
    for (std::size_t i = 0; i < basis->size(); ++i) {
      const u64 q = basis->prime(i).value();
      auto limb = poly.limb(i);
      for (std::size_t c = 0; c < coeffs.size(); ++c) limb[c] = reduce_double(coeffs[c], q);
    }
    return {ntt_forward(poly), scale, level};
  }

  Plaintext encode(const std::vector<double>& values, double scale, int level) const {
    return encode(to_complex(values), scale, level);
  }

  // Constant-in-every-slot plaintext.
  Plaintext encode_constant(double value, double scale, int level) const {
    return encode(std::vector<double>(ctx_->slots(), value), scale, level);
  }

  std::vector<Complex> decode(const Plaintext& pt) const {
    const RnsPoly coeff = pt.poly.domain() == Domain::Evaluation ? ntt_inverse(pt.poly) : pt.poly;
    const auto ints = crt_interpolate(coeff);
    std::vector<double> c(ints.size());
    for (std::size_t i = 0; i < ints.size(); ++i) c[i] = ints[i].convert_to<double>() / pt.scale;
    return decode_coefficients(c);
  }

  std::vector<Complex> decode_coefficients(const std::vector<double>& coeffs) const {
    const std::size_t slots = ctx_->slots();
    std::vector<Complex> v(slots);
    for (std::size_t i = 0; i < slots; ++i) v[i] = Complex(coeffs[i], coeffs[i + slots]);
    fft_special(v);
    return v;
  }

  static std::vector<Complex> to_complex(const std::vector<double>& v) {
    std::vector<Complex> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = Complex(v[i], 0.0);
    return out;
  }

 private:
  static u64 reduce_double(double x, u64 q) {
    // |x| < 2^63 is guaranteed by the overflow guard at desk scale; larger
    // magnitudes go through the big-integer path.
    if (std::abs(x) < 9.0e18) {
      const auto v = static_cast<std::int64_t>(x);
      const auto r = static_cast<std::int64_t>(static_cast<u64>(v < 0 ? -v : v) % q);
      return v < 0 && r != 0 ? q - static_cast<u64>(r) : static_cast<u64>(r);
    }
    int exp = 0;
    const double mant = std::frexp(x, &exp);
    BigInt big = static_cast<std::int64_t>(std::ldexp(mant, 62));
    if (exp > 62) {
      big <<= (exp - 62);
    } else {
      big >>= (62 - exp);
    }
    return big_mod_word(big, q);
  }

  static void bit_reverse(std::vector<Complex>& v) {
    const std::size_t n = v.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(v[i], v[j]);
    }
  }

  void fft_special(std::vector<Complex>& v) const {
    const std::size_t size = v.size();
    bit_reverse(v);
    for (std::size_t len = 2; len <= size; len <<= 1) {
      const std::size_t lenh = len >> 1;
      const std::size_t lenq = len << 2;
      for (std::size_t i = 0; i < size; i += len) {
        for (std::size_t j = 0; j < lenh; ++j) {
          const std::size_t idx = (rot_group_[j] % lenq) * m_ / lenq;
          const Complex u = v[i + j];
          const Complex w = v[i + j + lenh] * ksi_[idx];
          v[i + j] = u + w;
          v[i + j + lenh] = u - w;
        }
      }
    }
  }

  void fft_special_inv(std::vector<Complex>& v) const {
    const std::size_t size = v.size();
    for (std::size_t len = size; len >= 2; len >>= 1) {
      const std::size_t lenh = len >> 1;
      const std::size_t lenq = len << 2;
      for (std::size_t i = 0; i < size; i += len) {
        for (std::size_t j = 0; j < lenh; ++j) {
          const std::size_t idx = (lenq - (rot_group_[j] % lenq)) * m_ / lenq;
          const Complex u = v[i + j] + v[i + j + lenh];
          const Complex w = (v[i + j] - v[i + j + lenh]) * ksi_[idx];
          v[i + j] = u;
          v[i + j + lenh] = w;
        }
      }
    }
    bit_reverse(v);
    const double inv = 1.0 / static_cast<double>(size);
    for (auto& z : v) z *= inv;
  }

  ContextPtr ctx_;
  std::size_t m_ = 0;
  std::vector<std::size_t> rot_group_;
  std::vector<Complex> ksi_;
};

}  // namespace sdcfhe
