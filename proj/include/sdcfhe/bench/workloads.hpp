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
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdcfhe/ckks/encoder.hpp"
#include "sdcfhe/ckks/evaluator.hpp"
#include "sdcfhe/ckks/keys.hpp"
#include "sdcfhe/ckks/random.hpp"
#include "sdcfhe/fault/workload.hpp"

#ifndef SDCFHE_DATA_DIR
#define SDCFHE_DATA_DIR "data"
#endif

namespace sdcfhe::bench {

inline const std::vector<std::string>& workload_ids() {
  static const std::vector<std::string> ids = {"vv",           "mv",           "rot",          "house",
                                               "op-ctpt-add",  "op-ctct-add",  "op-ctpt-mult", "op-ctct-mult",
                                               "op-rot",       "ks-step-sweep"};
  return ids;
}

struct WorkloadOptions {
  std::size_t mv_dimension = 64;
  std::size_t mv_baby_steps = 8;
  std::size_t rotation = 1;
  std::string house_csv;  // bundled synthetic file when empty
  // Replace the generated messages (x, then y) or the mv matrix.
  std::optional<std::vector<std::vector<double>>> inputs;
  std::optional<std::vector<std::vector<double>>> matrix;
};

namespace detail {

inline std::vector<double> uniform_vector(Sampler& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform_unit();
  return v;
}

inline std::vector<Complex> rotate_left(const std::vector<Complex>& v, std::size_t r) {
  std::vector<Complex> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[(i + r) % v.size()];
  return out;
}

}  // namespace detail

// Shared machinery: context, keys derived from the data seed, and the
// client-side encode / encrypt / decrypt path.
class CkksWorkload : public fault::Workload {
 public:
  const std::string& id() const override { return id_; }
  const ContextPtr& context() const override { return ctx_; }

  std::vector<Ciphertext> encrypt_inputs(std::uint64_t seed) const override {
    Sampler rng(seed);
    std::vector<Ciphertext> out;
    for (const auto& m : messages_) out.push_back(encryptor_->encrypt(encoder_.encode(m, delta(), top()), rng));
    return out;
  }

  std::vector<Complex> decrypt(const Ciphertext& ct) const override { return encoder_.decode(decryptor_->decrypt(ct)); }

  const std::vector<std::vector<Complex>>& messages() const { return messages_; }
  const KeyMaterial& keys() const { return keys_; }
  const Encoder& encoder() const { return encoder_; }
  const Evaluator& evaluator() const { return *evaluator_; }

 protected:
  CkksWorkload(const CkksWorkload&) = delete;
  CkksWorkload& operator=(const CkksWorkload&) = delete;

  CkksWorkload(std::string id, const CkksParams& params, std::uint64_t seed, const std::vector<std::size_t>& rotations,
               bool relin)
      : id_(std::move(id)),
        ctx_(make_context(params)),
        keys_(KeyGenerator(ctx_, derive_seed(seed, 1)).generate(rotations, relin)),
        encoder_(ctx_),
        encryptor_(std::make_unique<Encryptor>(ctx_, keys_.pk)),
        decryptor_(std::make_unique<Decryptor>(ctx_, keys_.sk)),
        evaluator_(std::make_unique<Evaluator>(ctx_, &keys_)),
        rng_(derive_seed(seed, 2)) {}

  double delta() const { return ctx_->params().delta(); }
  int top() const { return ctx_->max_level(); }
  std::size_t slots() const { return ctx_->slots(); }

  std::vector<Complex> message_or_random(const WorkloadOptions& opt, std::size_t index) {
    if (opt.inputs && index < opt.inputs->size()) {
      const auto& v = (*opt.inputs)[index];
      if (v.size() != slots()) throw ConfigError("input vector must have one value per slot");
      return Encoder::to_complex(v);
    }
    return Encoder::to_complex(detail::uniform_vector(rng_, slots(), -1.0, 1.0));
  }

  std::string id_;
  ContextPtr ctx_;
  KeyMaterial keys_;
  Encoder encoder_;
  std::unique_ptr<Encryptor> encryptor_;
  std::unique_ptr<Decryptor> decryptor_;
  std::unique_ptr<Evaluator> evaluator_;
  Sampler rng_;
  std::vector<std::vector<Complex>> messages_;
};

// Single binary operator on x and y; y is a plaintext for the ct-pt forms.
class BinaryWorkload : public CkksWorkload {
 public:
  enum class Op { CtPtAdd, CtCtAdd, CtPtMult, CtCtMult };

  BinaryWorkload(std::string id, Op op, const CkksParams& params, std::uint64_t seed, const WorkloadOptions& opt,
                 std::string filter = {})
      : CkksWorkload(std::move(id), params, seed, {}, op == Op::CtCtMult), op_(op), filter_(std::move(filter)) {
    x_ = message_or_random(opt, 0);
    y_ = message_or_random(opt, 1);
    messages_.push_back(x_);
    if (op_ == Op::CtCtAdd || op_ == Op::CtCtMult) {
      messages_.push_back(y_);
    } else {
      pt_ = encoder_.encode(y_, delta(), top());
    }
  }

  Ciphertext execute(ExecContext& ex, const std::vector<Ciphertext>& in) const override {
    switch (op_) {
      case Op::CtPtAdd: return evaluator_->ct_pt_add(ex, in[0], pt_);
      case Op::CtCtAdd: return evaluator_->ct_ct_add(ex, in[0], in[1]);
      case Op::CtPtMult: return evaluator_->ct_pt_mult(ex, in[0], pt_);
      case Op::CtCtMult: return evaluator_->ct_ct_mult(ex, in[0], in[1]);
    }
    throw std::logic_error("unknown operator");
  }

  std::vector<Complex> reference() const override {
    std::vector<Complex> out(x_.size());
    const bool add = op_ == Op::CtPtAdd || op_ == Op::CtCtAdd;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = add ? x_[i] + y_[i] : x_[i] * y_[i];
    return out;
  }

  std::string default_stage_filter() const override { return filter_; }

 private:
  Op op_;
  std::string filter_;
  std::vector<Complex> x_, y_;
  Plaintext pt_;
};

class RotationWorkload : public CkksWorkload {
 public:
  RotationWorkload(std::string id, const CkksParams& params, std::uint64_t seed, const WorkloadOptions& opt)
      : CkksWorkload(std::move(id), params, seed, {opt.rotation}, false), r_(opt.rotation) {
    if (r_ >= slots()) throw ConfigError("rotation step must be below the slot count");
    messages_.push_back(message_or_random(opt, 0));
  }

  Ciphertext execute(ExecContext& ex, const std::vector<Ciphertext>& in) const override {
    return evaluator_->ct_rot(ex, in[0], r_);
  }

  std::vector<Complex> reference() const override { return detail::rotate_left(messages_[0], r_); }

 private:
  std::size_t r_;
};

// y = A x by the diagonal method with baby-step giant-step rotations. x is
// replicated with period d across the slots, so y is too.
class MatVecWorkload : public CkksWorkload {
 public:
  MatVecWorkload(const CkksParams& params, std::uint64_t seed, const WorkloadOptions& opt)
      : CkksWorkload("mv", params, seed, rotation_steps(params, opt), false),
        d_(opt.mv_dimension),
        n1_(opt.mv_baby_steps) {
    std::vector<double> x;
    if (opt.inputs && !opt.inputs->empty()) {
      x = (*opt.inputs)[0];
      if (x.size() != d_) throw ConfigError("mv input must have mv_dimension entries");
    } else {
      x = detail::uniform_vector(rng_, d_, -1.0, 1.0);
    }
    if (opt.matrix) {
      a_ = *opt.matrix;
      if (a_.size() != d_) throw ConfigError("mv matrix must be mv_dimension square");
      for (const auto& row : a_) {
        if (row.size() != d_) throw ConfigError("mv matrix must be mv_dimension square");
      }
    } else {
      const double bound = 1.0 / std::sqrt(static_cast<double>(d_));
      for (std::size_t i = 0; i < d_; ++i) a_.push_back(detail::uniform_vector(rng_, d_, -bound, bound));
    }
    x_ = x;
    std::vector<Complex> rep(slots());
    for (std::size_t j = 0; j < rep.size(); ++j) rep[j] = x[j % d_];
    messages_.push_back(rep);

    // Giant step g, baby step b: diagonal k = n1 g + b pre-rotated right by n1 g.
    for (std::size_t g = 0; g * n1_ < d_; ++g) {
      std::vector<Plaintext> row;
      for (std::size_t b = 0; b < n1_ && g * n1_ + b < d_; ++b) {
        const std::size_t k = g * n1_ + b;
        std::vector<Complex> diag(slots());
        for (std::size_t j = 0; j < slots(); ++j) {
          const std::size_t jj = (j + slots() - (g * n1_) % slots()) % slots();
          diag[j] = a_[jj % d_][(jj + k) % d_];
        }
        row.push_back(encoder_.encode(diag, delta(), top()));
      }
      diagonals_.push_back(std::move(row));
    }
  }

  static std::vector<std::size_t> rotation_steps(const CkksParams& p, const WorkloadOptions& opt) {
    const std::size_t d = opt.mv_dimension, n1 = opt.mv_baby_steps;
    if (d == 0 || n1 == 0 || n1 > d) throw ConfigError("mv needs 0 < mv_baby_steps <= mv_dimension");
    if ((p.n / 2) % d != 0) throw ConfigError("mv_dimension must divide the slot count");
    std::vector<std::size_t> r;
    for (std::size_t b = 1; b < n1; ++b) r.push_back(b);
    for (std::size_t g = 1; g * n1 < d; ++g) r.push_back(g * n1);
    return r;
  }

  Ciphertext execute(ExecContext& ex, const std::vector<Ciphertext>& in) const override {
    const Evaluator& ev = *evaluator_;
    std::vector<Ciphertext> baby{in[0]};
    for (std::size_t b = 1; b < n1_ && b < d_; ++b) baby.push_back(ev.ct_rot(ex, in[0], b));
    std::optional<Ciphertext> acc;
    for (std::size_t g = 0; g < diagonals_.size(); ++g) {
      std::optional<Ciphertext> inner;
      for (std::size_t b = 0; b < diagonals_[g].size(); ++b) {
        Ciphertext t = ev.ct_pt_mult_no_rescale(ex, baby[b], diagonals_[g][b]);
        inner = inner ? ev.ct_ct_add(ex, *inner, t) : std::move(t);
      }
      Ciphertext giant = ev.ct_rot(ex, *inner, g * n1_);
      acc = acc ? ev.ct_ct_add(ex, *acc, giant) : std::move(giant);
    }
    return ev.rescale(ex, *acc);
  }

  std::vector<Complex> reference() const override {
    std::vector<double> y(d_, 0.0);
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t j = 0; j < d_; ++j) y[i] += a_[i][j] * x_[j];
    }
    std::vector<Complex> out(slots());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = y[j % d_];
    return out;
  }

 private:
  std::size_t d_, n1_;
  std::vector<std::vector<double>> a_;
  std::vector<double> x_;
  std::vector<std::vector<Plaintext>> diagonals_;
};

// California-Housing layout: eight features then the target.
inline const std::array<const char*, 9> kHousingColumns = {"MedInc",     "HouseAge", "AveRooms",
                                                           "AveBedrms",  "Population", "AveOccup",
                                                           "Latitude",   "Longitude", "MedHouseVal"};

struct HousingData {
  std::vector<std::array<double, 8>> features;
  std::vector<double> target;
};

inline HousingData parse_housing_csv(std::istream& in, const std::string& name = "csv") {
  HousingData data;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) -> ConfigError {
    return ConfigError(name + ":" + std::to_string(lineno) + ": " + what);
  };
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (!header) {
      if (cells.size() != kHousingColumns.size()) throw fail("expected 9 columns in header");
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] != kHousingColumns[i]) throw fail("unexpected column '" + cells[i] + "'");
      }
      header = true;
      continue;
    }
    if (cells.size() != kHousingColumns.size()) throw fail("expected 9 fields, got " + std::to_string(cells.size()));
    std::array<double, 9> v{};
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& c = cells[i];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v[i]);
      if (ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(v[i])) {
        throw fail("bad number '" + c + "' in column " + kHousingColumns[i]);
      }
    }
    std::array<double, 8> f;
    std::copy(v.begin(), v.begin() + 8, f.begin());
    data.features.push_back(f);
    data.target.push_back(v[8]);
  }
  if (!header) throw fail("missing header");
  if (data.features.empty()) throw fail("no data rows");
  return data;
}

inline HousingData load_housing_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse_housing_csv(in, path);
}

inline std::string bundled_housing_csv() { return std::string(SDCFHE_DATA_DIR) + "/housing_synth.csv"; }

// Linear model fitted offline on standardized features of the bundled file.
struct HousingModel {
  std::array<double, 8> mean = {3.8880871074218755, 26.04296875,       5.1865767460937509, 1.0733426220703124,
                                1464.19140625,      2.899566528320312, 37.278479230468768, -119.60094242187498};
  std::array<double, 8> stddev = {1.7653416037651324, 15.175603280809742, 1.2871216574419813, 0.2684191189669633,
                                  1117.2657850562673, 0.616244447488417,  2.664078416977945,  2.2620358094617607};
  std::array<double, 8> weight = {0.76751015702031067,  0.18152268449579034,  -0.13484550962280242,
                                  0.15528917843094844,  0.011053605578457535, -0.054846330162304287,
                                  -0.95948103895715486, -0.76221505727649852};
  double bias = 1.777820791992172;

  double standardize(std::size_t k, double x) const { return (x - mean[k]) / stddev[k]; }

  double predict(const std::array<double, 8>& f) const {
    double y = bias;
    for (std::size_t k = 0; k < 8; ++k) y += weight[k] * standardize(k, f[k]);
    return y;
  }
};

// Encrypted inference y = w.z + b: one ciphertext per standardized feature,
// one sample per slot.
class HouseWorkload : public CkksWorkload {
 public:
  HouseWorkload(const CkksParams& params, std::uint64_t seed, const WorkloadOptions& opt)
      : CkksWorkload("house", params, seed, {}, false) {
    const HousingData data = load_housing_csv(opt.house_csv.empty() ? bundled_housing_csv() : opt.house_csv);
    rows_ = std::min(data.features.size(), slots());
    for (std::size_t k = 0; k < 8; ++k) {
      std::vector<Complex> z(slots(), 0.0);
      for (std::size_t i = 0; i < rows_; ++i) z[i] = model_.standardize(k, data.features[i][k]);
      messages_.push_back(std::move(z));
      weights_.push_back(encoder_.encode_constant(model_.weight[k], delta(), top()));
    }
    for (std::size_t i = 0; i < rows_; ++i) predictions_.push_back(model_.predict(data.features[i]));
    const CkksContext& c = *ctx_;
    const double out_scale = delta() * delta() / static_cast<double>(c.chain_prime(top()));
    bias_ = encoder_.encode(std::vector<double>(slots(), model_.bias), out_scale, top() - 1);
  }

  Ciphertext execute(ExecContext& ex, const std::vector<Ciphertext>& in) const override {
    std::optional<Ciphertext> acc;
    for (std::size_t k = 0; k < in.size(); ++k) {
      Ciphertext t = evaluator_->ct_pt_mult(ex, in[k], weights_[k]);
      acc = acc ? evaluator_->ct_ct_add(ex, *acc, t) : std::move(t);
    }
    return evaluator_->ct_pt_add(ex, *acc, bias_);
  }

  // Padding slots carry zero features and so predict the bias.
  std::vector<Complex> reference() const override {
    std::vector<Complex> out(slots(), model_.bias);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = predictions_[i];
    return out;
  }

  std::size_t rows() const { return rows_; }

 private:
  HousingModel model_;
  std::size_t rows_ = 0;
  std::vector<Plaintext> weights_;
  std::vector<double> predictions_;
  Plaintext bias_;
};

inline std::unique_ptr<CkksWorkload> make_workload(const std::string& id, const CkksParams& params, std::uint64_t seed,
                                                   const WorkloadOptions& opt = {}) {
  using Op = BinaryWorkload::Op;
  if (id == "vv") return std::make_unique<BinaryWorkload>(id, Op::CtCtMult, params, seed, opt);
  if (id == "mv") return std::make_unique<MatVecWorkload>(params, seed, opt);
  if (id == "rot" || id == "op-rot") return std::make_unique<RotationWorkload>(id, params, seed, opt);
  if (id == "house") return std::make_unique<HouseWorkload>(params, seed, opt);
  if (id == "op-ctpt-add") return std::make_unique<BinaryWorkload>(id, Op::CtPtAdd, params, seed, opt);
  if (id == "op-ctct-add") return std::make_unique<BinaryWorkload>(id, Op::CtCtAdd, params, seed, opt);
  if (id == "op-ctpt-mult") return std::make_unique<BinaryWorkload>(id, Op::CtPtMult, params, seed, opt);
  if (id == "op-ctct-mult") return std::make_unique<BinaryWorkload>(id, Op::CtCtMult, params, seed, opt);
  if (id == "ks-step-sweep") return std::make_unique<BinaryWorkload>(id, Op::CtCtMult, params, seed, opt, "keyswitch");
  throw ConfigError("unknown workload: " + id);
}

}  // namespace sdcfhe::bench
