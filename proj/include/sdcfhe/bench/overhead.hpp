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
#include <chrono>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdcfhe/fault/outcome.hpp"
#include "sdcfhe/fault/workload.hpp"

namespace sdcfhe::bench {

inline constexpr const char* kOverheadSchema = "sdcfhe.overhead/1";
inline constexpr std::size_t kMinRepetitions = 10;

struct OverheadRow {
  ProtectionKind mode = ProtectionKind::None;
  std::uint64_t median_ns = 0;
  double normalized = 1.0;
  std::vector<std::uint64_t> samples;
};

struct OverheadTable {
  std::string workload;
  std::string preset;
  std::size_t repetitions = 0;
  std::vector<OverheadRow> rows;

  const OverheadRow& row(ProtectionKind k) const {
    for (const auto& r : rows) {
      if (r.mode == k) return r;
    }
    throw std::out_of_range("mode not benchmarked");
  }

  fault::Json to_json() const {
    fault::Json j;
    j["schema"] = kOverheadSchema;
    j["workload"] = workload;
    j["preset"] = preset;
    j["repetitions"] = repetitions;
    fault::Json modes = fault::Json::array();
    for (const auto& r : rows) {
      modes.push_back({{"mode", protection_name(r.mode)},
                       {"median_ns", r.median_ns},
                       {"normalized", r.normalized},
                       {"overhead_percent", 100.0 * (r.normalized - 1.0)}});
    }
    j["modes"] = std::move(modes);
    return j;
  }
};

inline std::uint64_t median(std::vector<std::uint64_t> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

// Median fault-free wall clock of the ciphertext computation per mode,
// normalized to None. Modes are interleaved within each repetition so slow
// drift of the machine affects all of them alike.
inline OverheadTable overhead_bench(const fault::Workload& w, std::vector<ProtectionKind> modes,
                                    std::size_t repetitions, std::uint64_t seed = 1) {
  if (repetitions < kMinRepetitions) throw ConfigError("overhead benchmark needs at least 10 repetitions");
  if (std::find(modes.begin(), modes.end(), ProtectionKind::None) == modes.end()) modes.insert(modes.begin(), ProtectionKind::None);
  const auto inputs = w.encrypt_inputs(seed);
  const auto* checks = &w.context()->checksums();
  OverheadTable t;
  t.workload = w.id();
  t.preset = w.params().name;
  t.repetitions = repetitions;
  for (auto m : modes) t.rows.push_back({m, 0, 1.0, {}});
  auto time_once = [&](ProtectionKind m, std::uint64_t rep) {
    ExecContext ex(ProtectionMode{m, 1}, checks, rep);
    const auto t0 = std::chrono::steady_clock::now();
    const Ciphertext ct = w.execute(ex, inputs);
    const auto t1 = std::chrono::steady_clock::now();
    if (ex.detected()) throw std::logic_error("guard flagged a fault-free run");
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
  };
  for (auto& r : t.rows) time_once(r.mode, 0);  // warm-up
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    for (auto& r : t.rows) r.samples.push_back(time_once(r.mode, rep + 1));
  }
  for (auto& r : t.rows) r.median_ns = median(r.samples);
  const double base = static_cast<double>(t.row(ProtectionKind::None).median_ns);
  for (auto& r : t.rows) r.normalized = static_cast<double>(r.median_ns) / base;
  return t;
}

}  // namespace sdcfhe::bench
