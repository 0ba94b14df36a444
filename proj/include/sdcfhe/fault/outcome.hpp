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
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sdcfhe/ckks/stage.hpp"
#include "sdcfhe/fault/site.hpp"

namespace sdcfhe::fault {

using Json = nlohmann::ordered_json;

enum class Classification { Masked, SDC, Detected };

inline const char* classification_name(Classification c) {
  switch (c) {
    case Classification::Masked: return "masked";
    case Classification::SDC: return "sdc";
    case Classification::Detected: return "detected";
  }
  return "?";
}

inline Classification parse_classification(std::string_view s) {
  if (s == "masked") return Classification::Masked;
  if (s == "sdc") return Classification::SDC;
  if (s == "detected") return Classification::Detected;
  throw std::invalid_argument("unknown classification: " + std::string(s));
}

inline Classification classify(std::span<const double> deviations, double epsilon, bool guard_flagged) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (guard_flagged) return Classification::Detected;
  for (double d : deviations) {
    if (!(d <= epsilon)) return Classification::SDC;  // NaN counts as corrupted
  }
  return Classification::Masked;
}

// Counts of values per power-of-ten bucket; bucket d holds [10^d, 10^(d+1)).
class DecadeHistogram {
 public:
  static int decade(double x) {
    int d = static_cast<int>(std::floor(std::log10(x)));
    while (d > -400 && std::pow(10.0, d) > x) --d;
    while (d < 400 && std::pow(10.0, d + 1) <= x) ++d;
    return d;
  }

  void add(double x, std::uint64_t count = 1) {
    if (std::isnan(x)) {
      nan_ += count;
    } else if (x <= 0) {
      zero_ += count;
    } else if (std::isinf(x)) {
      decades_[400] += count;
    } else {
      decades_[decade(x)] += count;
    }
  }

  void merge(const DecadeHistogram& o) {
    zero_ += o.zero_;
    nan_ += o.nan_;
    for (const auto& [d, c] : o.decades_) decades_[d] += c;
  }

  std::uint64_t zero() const { return zero_; }
  std::uint64_t nan() const { return nan_; }
  const std::map<int, std::uint64_t>& decades() const { return decades_; }
  std::uint64_t total() const {
    std::uint64_t t = zero_ + nan_;
    for (const auto& [d, c] : decades_) t += c;
    return t;
  }

  bool operator==(const DecadeHistogram&) const = default;

  Json to_json() const {
    Json buckets = Json::array();
    for (const auto& [d, c] : decades_) buckets.push_back(Json::array({d, c}));
    Json j;
    j["zero"] = zero_;
    if (nan_) j["nan"] = nan_;
    j["decades"] = std::move(buckets);
    return j;
  }

  static DecadeHistogram from_json(const Json& j) {
    DecadeHistogram h;
    h.zero_ = j.at("zero").get<std::uint64_t>();
    if (j.contains("nan")) h.nan_ = j.at("nan").get<std::uint64_t>();
    for (const auto& b : j.at("decades")) h.decades_[b.at(0).get<int>()] += b.at(1).get<std::uint64_t>();
    return h;
  }

 private:
  std::uint64_t zero_ = 0;
  std::uint64_t nan_ = 0;
  std::map<int, std::uint64_t> decades_;
};

struct RunOutcome {
  Classification classification = Classification::Masked;
  std::vector<double> deviations;  // one per slot
  std::uint64_t duration_ns = 0;
  std::optional<FaultSite> site;
  std::uint64_t seed = 0;
  std::vector<GuardEvent> guard_events;
  int injections = 0;

  double max_deviation() const {
    double m = 0;
    for (double d : deviations) {
      if (!std::isfinite(d)) return std::numeric_limits<double>::max();
      m = std::max(m, d);
    }
    return m;
  }
};

// One line of a campaign record file.
struct RunRecord {
  std::uint64_t run = 0;
  std::uint64_t seed = 0;
  std::string site;  // empty for a fault-free run
  Classification classification = Classification::Masked;
  double max_deviation = 0;
  double min_deviation = 0;
  std::uint64_t slots = 0;
  std::uint64_t slots_over_epsilon = 0;
  std::uint64_t duration_ns = 0;
  std::vector<GuardEvent> guard_events;
  DecadeHistogram histogram;

  std::string group() const { return site.empty() ? std::string() : stage_group(parse_site(site).stage); }
};

inline RunRecord make_record(std::uint64_t run, const RunOutcome& o, double epsilon) {
  RunRecord r;
  r.run = run;
  r.seed = o.seed;
  if (o.site) r.site = format_site(*o.site);
  r.classification = o.classification;
  r.slots = o.deviations.size();
  r.max_deviation = o.max_deviation();
  r.min_deviation = o.deviations.empty() ? 0 : r.max_deviation;
  for (double d : o.deviations) {
    if (d < r.min_deviation) r.min_deviation = d;
    if (!(d <= epsilon)) ++r.slots_over_epsilon;
    r.histogram.add(d);
  }
  r.duration_ns = o.duration_ns;
  r.guard_events = o.guard_events;
  return r;
}

inline Json to_json(const GuardEvent& g) {
  Json j;
  j["stage"] = g.stage;
  j["kernel"] = g.kernel;
  j["limb"] = g.limb;
  j["flag_in"] = g.flag_in;
  j["flag_out"] = g.flag_out;
  j["action"] = g.action;
  return j;
}

inline constexpr const char* kRecordSchema = "sdcfhe.record/1";
inline constexpr const char* kCampaignSchema = "sdcfhe.campaign/1";

inline Json to_json(const RunRecord& r) {
  Json j;
  j["schema"] = kRecordSchema;
  j["run"] = r.run;
  j["seed"] = r.seed;
  j["site"] = r.site.empty() ? Json(nullptr) : Json(r.site);
  j["classification"] = classification_name(r.classification);
  j["max_deviation"] = r.max_deviation;
  j["min_deviation"] = r.min_deviation;
  j["slots"] = r.slots;
  j["slots_over_epsilon"] = r.slots_over_epsilon;
  j["duration_ns"] = r.duration_ns;
  Json guards = Json::array();
  for (const auto& g : r.guard_events) guards.push_back(to_json(g));
  j["guard_events"] = std::move(guards);
  j["histogram"] = r.histogram.to_json();
  return j;
}

inline RunRecord record_from_json(const Json& j) {
  if (j.value("schema", "") != kRecordSchema) throw std::invalid_argument("record schema mismatch, expected " + std::string(kRecordSchema));
  RunRecord r;
  r.run = j.at("run").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("site").is_null()) r.site = j.at("site").get<std::string>();
  r.classification = parse_classification(j.at("classification").get<std::string>());
  r.max_deviation = j.at("max_deviation").get<double>();
  r.min_deviation = j.at("min_deviation").get<double>();
  r.slots = j.at("slots").get<std::uint64_t>();
  r.slots_over_epsilon = j.at("slots_over_epsilon").get<std::uint64_t>();
  r.duration_ns = j.at("duration_ns").get<std::uint64_t>();
  for (const auto& g : j.at("guard_events")) {
    r.guard_events.push_back({g.at("stage").get<std::string>(), g.at("kernel").get<std::string>(),
                              g.at("limb").get<std::size_t>(), g.at("flag_in").get<u64>(),
                              g.at("flag_out").get<u64>(), g.at("action").get<std::string>()});
  }
  r.histogram = DecadeHistogram::from_json(j.at("histogram"));
  return r;
}

// First line of a record file: what was run and how outcomes were judged.
struct CampaignHeader {
  std::string workload;
  std::string preset;
  std::string protection;
  std::uint64_t runs = 0;
  std::uint64_t master_seed = 0;
  double epsilon = 0;
  double noise_ceiling = 0;
  std::string stage_filter;
  std::uint64_t site_space = 0;
  std::vector<std::string> stage_groups;
  bool timed = false;

  Json to_json() const {
    Json j;
    j["schema"] = kCampaignSchema;
    j["workload"] = workload;
    j["preset"] = preset;
    j["protection"] = protection;
    j["runs"] = runs;
    j["master_seed"] = master_seed;
    j["epsilon"] = epsilon;
    j["noise_ceiling"] = noise_ceiling;
    j["stage_filter"] = stage_filter;
    j["site_space"] = site_space;
    j["stage_groups"] = stage_groups;
    j["timed"] = timed;
    return j;
  }

  static CampaignHeader from_json(const Json& j) {
    if (j.value("schema", "") != kCampaignSchema) throw std::invalid_argument("campaign header schema mismatch, expected " + std::string(kCampaignSchema));
    CampaignHeader h;
    h.workload = j.at("workload").get<std::string>();
    h.preset = j.at("preset").get<std::string>();
    h.protection = j.at("protection").get<std::string>();
    h.runs = j.at("runs").get<std::uint64_t>();
    h.master_seed = j.at("master_seed").get<std::uint64_t>();
    h.epsilon = j.at("epsilon").get<double>();
    h.noise_ceiling = j.at("noise_ceiling").get<double>();
    h.stage_filter = j.at("stage_filter").get<std::string>();
    h.site_space = j.at("site_space").get<std::uint64_t>();
    h.stage_groups = j.at("stage_groups").get<std::vector<std::string>>();
    h.timed = j.at("timed").get<bool>();
    return h;
  }
};

}  // namespace sdcfhe::fault
