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
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdcfhe/fault/outcome.hpp"

namespace sdcfhe::bench {

using fault::CampaignHeader;
using fault::Classification;
using fault::DecadeHistogram;
using fault::Json;
using fault::RunRecord;

inline constexpr const char* kSummarySchema = "sdcfhe.summary/1";

// Fraction of slots an SDC run must corrupt to count as diffused.
inline constexpr double kDiffusionFraction = 0.99;

struct OutcomeCounts {
  std::uint64_t masked = 0, sdc = 0, detected = 0;

  std::uint64_t total() const { return masked + sdc + detected; }
  void add(Classification c) {
    if (c == Classification::Masked) ++masked;
    if (c == Classification::SDC) ++sdc;
    if (c == Classification::Detected) ++detected;
  }
  double rate(std::uint64_t n) const { return total() ? static_cast<double>(n) / static_cast<double>(total()) : 0.0; }
};

struct GroupSummary {
  std::string group;
  OutcomeCounts counts;
  double max_deviation = 0;
};

struct CampaignSummary {
  CampaignHeader header;
  OutcomeCounts counts;
  double max_deviation = 0;
  double min_deviation = 0;
  double sdc_max_deviation = 0;
  DecadeHistogram histogram;
  std::uint64_t diffused_sdc_runs = 0;
  double min_sdc_slot_fraction = 0;
  std::vector<GroupSummary> groups;
  std::uint64_t total_ns = 0;

  double sdc_rate() const { return counts.rate(counts.sdc); }
  double masked_rate() const { return counts.rate(counts.masked); }
  double detected_rate() const { return counts.rate(counts.detected); }
  double diffusion_rate() const {
    return counts.sdc ? static_cast<double>(diffused_sdc_runs) / static_cast<double>(counts.sdc) : 0.0;
  }
  const GroupSummary* group(const std::string& g) const {
    for (const auto& s : groups) {
      if (s.group == g) return &s;
    }
    return nullptr;
  }

  Json to_json() const {
    Json j;
    j["schema"] = kSummarySchema;
    j["workload"] = header.workload;
    j["preset"] = header.preset;
    j["protection"] = header.protection;
    j["runs"] = counts.total();
    j["master_seed"] = header.master_seed;
    j["epsilon"] = header.epsilon;
    j["noise_ceiling"] = header.noise_ceiling;
    j["stage_filter"] = header.stage_filter;
    j["site_space"] = header.site_space;
    j["counts"] = {{"masked", counts.masked}, {"sdc", counts.sdc}, {"detected", counts.detected}};
    j["rates"] = {{"masked", masked_rate()}, {"sdc", sdc_rate()}, {"detected", detected_rate()}};
    Json dev;
    dev["max"] = max_deviation;
    dev["min"] = min_deviation;
    dev["sdc_max"] = sdc_max_deviation;
    dev["histogram"] = histogram.to_json();
    j["deviation"] = std::move(dev);
    j["slot_diffusion"] = {{"threshold", kDiffusionFraction},
                           {"sdc_runs", counts.sdc},
                           {"diffused_runs", diffused_sdc_runs},
                           {"rate", diffusion_rate()},
                           {"min_slot_fraction", min_sdc_slot_fraction}};
    Json gs = Json::array();
    for (const auto& g : groups) {
      Json e;
      e["group"] = g.group;
      e["runs"] = g.counts.total();
      e["masked"] = g.counts.masked;
      e["sdc"] = g.counts.sdc;
      e["detected"] = g.counts.detected;
      e["sdc_rate"] = g.counts.rate(g.counts.sdc);
      e["max_deviation"] = g.max_deviation;
      gs.push_back(std::move(e));
    }
    j["stage_groups"] = std::move(gs);
    const std::uint64_t n = counts.total();
    j["timing"] = {{"timed", header.timed}, {"total_ns", total_ns}, {"mean_ns", n ? total_ns / n : 0}};
    return j;
  }
};

// Summary of one campaign, exact over its record stream.
inline CampaignSummary aggregate(const CampaignHeader& header, const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no records to aggregate");
  CampaignSummary s;
  s.header = header;
  std::map<std::string, std::size_t> index;
  for (const auto& g : header.stage_groups) {
    index.emplace(g, s.groups.size());
    s.groups.push_back({g, {}, 0});
  }
  s.min_deviation = records.front().min_deviation;
  s.min_sdc_slot_fraction = 1.0;
  const std::uint64_t slots = records.front().slots;
  for (const auto& r : records) {
    if (r.slots != slots) throw std::invalid_argument("records disagree on slot count");
    s.counts.add(r.classification);
    s.max_deviation = std::max(s.max_deviation, r.max_deviation);
    s.min_deviation = std::min(s.min_deviation, r.min_deviation);
    s.histogram.merge(r.histogram);
    s.total_ns += r.duration_ns;
    if (r.classification == Classification::SDC) {
      s.sdc_max_deviation = std::max(s.sdc_max_deviation, r.max_deviation);
      const double frac = slots ? static_cast<double>(r.slots_over_epsilon) / static_cast<double>(slots) : 0.0;
      s.min_sdc_slot_fraction = std::min(s.min_sdc_slot_fraction, frac);
      if (frac >= kDiffusionFraction) ++s.diffused_sdc_runs;
    }
    if (!r.site.empty()) {
      const std::string g = r.group();
      auto [it, fresh] = index.emplace(g, s.groups.size());
      if (fresh) s.groups.push_back({g, {}, 0});
      GroupSummary& gs = s.groups[it->second];
      gs.counts.add(r.classification);
      gs.max_deviation = std::max(gs.max_deviation, r.max_deviation);
    }
  }
  if (s.counts.sdc == 0) s.min_sdc_slot_fraction = 0;
  return s;
}

struct RecordFile {
  CampaignHeader header;
  std::vector<RunRecord> records;
};

inline RecordFile read_records(std::istream& in, const std::string& name = "records") {
  RecordFile f;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      if (!have_header) {
        f.header = CampaignHeader::from_json(j);
        have_header = true;
      } else {
        f.records.push_back(fault::record_from_json(j));
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument(name + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw std::invalid_argument(name + ": missing campaign header");
  return f;
}

inline std::string format_summary(const CampaignSummary& s) { return s.to_json().dump(2) + "\n"; }

}  // namespace sdcfhe::bench
