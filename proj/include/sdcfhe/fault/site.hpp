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

#include <algorithm>
#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sdcfhe/ckks/random.hpp"
#include "sdcfhe/ckks/stage.hpp"

namespace sdcfhe::fault {

inline constexpr int kSiteBits = 62;

inline u64 flip_bit(u64 value, int bit) {
  if (bit < 0 || bit >= kSiteBits) throw std::invalid_argument("bit index must be in [0, 62)");
  return value ^ (u64{1} << bit);
}

// One injectable bit: stage id, operand slot within the stage, limb,
// coefficient and bit. Written as "stage@operand:limb:coeff:bit".
struct FaultSite {
  std::string stage;
  std::size_t operand = 0;
  std::size_t limb = 0;
  std::size_t coeff = 0;
  int bit = 0;

  bool operator==(const FaultSite&) const = default;
};

inline std::string format_site(const FaultSite& s) {
  return s.stage + "@" + std::to_string(s.operand) + ":" + std::to_string(s.limb) + ":" +
         std::to_string(s.coeff) + ":" + std::to_string(s.bit);
}

inline FaultSite parse_site(std::string_view text) {
  const auto at = text.rfind('@');
  if (at == std::string_view::npos || at == 0) throw std::invalid_argument("fault site must be stage@operand:limb:coeff:bit");
  FaultSite s;
  s.stage = std::string(text.substr(0, at));
  std::string_view rest = text.substr(at + 1);
  std::size_t fields[4];
  for (int i = 0; i < 4; ++i) {
    const auto colon = rest.find(':');
    const std::string_view part = i < 3 ? rest.substr(0, colon) : rest;
    if ((i < 3 && colon == std::string_view::npos) || part.empty()) {
      throw std::invalid_argument("fault site must be stage@operand:limb:coeff:bit");
    }
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), fields[i]);
    if (ec != std::errc() || ptr != part.data() + part.size()) {
      throw std::invalid_argument("bad number in fault site: " + std::string(part));
    }
    if (i < 3) rest = rest.substr(colon + 1);
  }
  s.operand = fields[0];
  s.limb = fields[1];
  s.coeff = fields[2];
  if (fields[3] >= static_cast<std::size_t>(kSiteBits)) throw std::invalid_argument("bit index must be in [0, 62)");
  s.bit = static_cast<int>(fields[3]);
  return s;
}

// Stage id without the operator instance number: "ctct-mult#2/keyswitch/op-3"
// belongs to group "ctct-mult/keyswitch/op-3".
inline std::string stage_group(std::string_view stage) {
  std::string out;
  for (std::size_t i = 0; i < stage.size(); ++i) {
    if (stage[i] == '#') {
      while (i + 1 < stage.size() && stage[i + 1] != '/') ++i;
      continue;
    }
    out.push_back(stage[i]);
  }
  return out;
}

// A filter is a run of whole path components of the stage id, with or
// without instance numbers: "op-3", "keyswitch" and "ctct-mult/keyswitch/op-3"
// all select "ctct-mult#0/keyswitch/op-3".
inline bool stage_matches(std::string_view stage, std::string_view filter) {
  if (filter.empty()) return true;
  const std::string f = "/" + std::string(filter) + "/";
  return ("/" + std::string(stage) + "/").find(f) != std::string::npos ||
         ("/" + stage_group(stage) + "/").find(f) != std::string::npos;
}

struct OperandSpace {
  std::size_t operand = 0;
  std::string kernel;
  std::string role;
  std::size_t limbs = 0;
  std::size_t degree = 0;

  u64 cardinality() const { return static_cast<u64>(limbs) * degree * kSiteBits; }
};

struct StageSpace {
  std::string stage;
  std::vector<OperandSpace> operands;

  u64 cardinality() const {
    u64 c = 0;
    for (const auto& o : operands) c += o.cardinality();
    return c;
  }
};

// The countable site space {stage} x {operand} x {limb} x {coeff} x {bit} of
// one workload execution, in execution order.
class SiteSpace {
 public:
  SiteSpace() = default;
  explicit SiteSpace(std::vector<StageSpace> stages) : stages_(std::move(stages)) { index(); }

  const std::vector<StageSpace>& stages() const { return stages_; }
  u64 cardinality() const { return total_; }
  bool empty() const { return total_ == 0; }

  SiteSpace filtered(std::string_view filter) const {
    std::vector<StageSpace> keep;
    for (const auto& s : stages_) {
      if (stage_matches(s.stage, filter)) keep.push_back(s);
    }
    return SiteSpace(std::move(keep));
  }

  std::vector<std::string> groups() const {
    std::vector<std::string> g;
    for (const auto& s : stages_) {
      auto name = stage_group(s.stage);
      if (std::find(g.begin(), g.end(), name) == g.end()) g.push_back(std::move(name));
    }
    return g;
  }

  FaultSite at(u64 index) const {
    if (index >= total_) throw std::out_of_range("site index out of range");
    // Stage by cumulative count, then operand, then limb/coeff/bit.
    auto it = std::upper_bound(stage_offsets_.begin(), stage_offsets_.end(), index);
    const std::size_t si = static_cast<std::size_t>(it - stage_offsets_.begin()) - 1;
    u64 rem = index - stage_offsets_[si];
    const StageSpace& st = stages_[si];
    for (const auto& op : st.operands) {
      const u64 c = op.cardinality();
      if (rem < c) {
        FaultSite s;
        s.stage = st.stage;
        s.operand = op.operand;
        s.bit = static_cast<int>(rem % kSiteBits);
        rem /= kSiteBits;
        s.coeff = static_cast<std::size_t>(rem % op.degree);
        s.limb = static_cast<std::size_t>(rem / op.degree);
        return s;
      }
      rem -= c;
    }
    throw std::logic_error("site index bookkeeping failed");
  }

  FaultSite sample(Sampler& rng) const {
    if (empty()) throw std::invalid_argument("empty site space");
    return at(rng.uniform(total_));
  }

  const OperandSpace* find(const FaultSite& s) const {
    for (const auto& st : stages_) {
      if (st.stage != s.stage) continue;
      for (const auto& op : st.operands) {
        if (op.operand == s.operand) return &op;
      }
    }
    return nullptr;
  }

  // Throws std::invalid_argument unless `s` addresses a bit of this space.
  void validate(const FaultSite& s) const {
    const OperandSpace* op = find(s);
    if (!op) throw std::invalid_argument("no operand " + std::to_string(s.operand) + " in stage " + s.stage);
    if (s.limb >= op->limbs) throw std::invalid_argument("limb index out of range for " + format_site(s));
    if (s.coeff >= op->degree) throw std::invalid_argument("coefficient index out of range for " + format_site(s));
    if (s.bit < 0 || s.bit >= kSiteBits) throw std::invalid_argument("bit index out of range");
  }

 private:
  void index() {
    stage_offsets_.clear();
    total_ = 0;
    for (const auto& s : stages_) {
      stage_offsets_.push_back(total_);
      total_ += s.cardinality();
    }
  }

  std::vector<StageSpace> stages_;
  std::vector<u64> stage_offsets_;
  u64 total_ = 0;
};

// Observer that records the stage graph of one execution.
class SiteRecorder : public StageObserver {
 public:
  void on_stage(std::string_view id) override { stages_.push_back({std::string(id), {}}); }

  void on_kernel(const KernelEvent& e) override {
    if (stages_.empty() || stages_.back().stage != e.stage) stages_.push_back({std::string(e.stage), {}});
    for (std::size_t j = 0; j < e.operands.size(); ++j) {
      const auto& shape = e.operands[j];
      stages_.back().operands.push_back({e.first_operand + j, kernel_name(e.kind), shape.role, shape.limbs, shape.degree});
    }
  }

  SiteSpace space() const {
    std::vector<StageSpace> nonempty;
    for (const auto& s : stages_) {
      if (!s.operands.empty()) nonempty.push_back(s);
    }
    return SiteSpace(std::move(nonempty));
  }

 private:
  std::vector<StageSpace> stages_;
};

// Flips the addressed bit the first time its operand goes live. The flipped
// word is kept reduced mod q, which every downstream kernel would otherwise
// do on its first use.
class FaultInjector : public FaultHook {
 public:
  explicit FaultInjector(FaultSite site) : site_(std::move(site)) {}

  bool arm_stage(std::string_view stage) override { return fired_ == 0 && stage == site_.stage; }

  bool targets(std::size_t operand) const override { return fired_ == 0 && operand == site_.operand; }

  void inject(std::size_t, std::size_t first_limb, std::span<u64> data, std::size_t degree,
              std::span<const u64> moduli) override {
    const std::size_t count = data.size() / degree;
    if (fired_ != 0 || site_.limb < first_limb || site_.limb >= first_limb + count) return;
    const std::size_t k = site_.limb - first_limb;
    u64& word = data[k * degree + site_.coeff];
    before_ = word;
    after_ = flip_bit(word, site_.bit);
    word = after_ % moduli[k];
    ++fired_;
  }

  int fired() const { return fired_; }
  u64 before() const { return before_; }
  u64 after() const { return after_; }
  const FaultSite& site() const { return site_; }

 private:
  FaultSite site_;
  int fired_ = 0;
  u64 before_ = 0;
  u64 after_ = 0;
};

}  // namespace sdcfhe::fault
