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

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "sdcfhe/bench/aggregate.hpp"
#include "sdcfhe/bench/workloads.hpp"
#include "sdcfhe/fault/campaign.hpp"

namespace sdcfhe::bench {

inline std::uint64_t data_seed(std::uint64_t master) { return derive_seed(master, fault::seed_tag::kData); }

// Keys and messages of a campaign's workload hang off its master seed.
inline std::unique_ptr<CkksWorkload> campaign_workload(const fault::CampaignSpec& spec, const CkksParams& params,
                                                       const WorkloadOptions& opt = {}) {
  return make_workload(spec.workload, params, data_seed(spec.seed), opt);
}

struct CampaignArtifacts {
  std::string records;
  std::string summary;
  std::string deviations;  // empty unless requested
  CampaignSummary stats;
};

inline CampaignArtifacts run_campaign_artifacts(const fault::Workload& w, const fault::CampaignSpec& spec,
                                                fault::ReferenceCache& cache, bool deviations) {
  std::ostringstream rec, dev;
  const auto result = fault::run_campaign(w, spec, cache, {&rec, deviations ? &dev : nullptr});
  CampaignArtifacts a;
  a.records = rec.str();
  a.deviations = dev.str();
  a.stats = aggregate(result.header, result.records);
  a.summary = format_summary(a.stats);
  return a;
}

struct CampaignPaths {
  std::filesystem::path records, summary, deviations;

  static CampaignPaths in(const std::filesystem::path& dir) {
    return {dir / "records.jsonl", dir / "summary.json", dir / "deviations.csv"};
  }
};

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream o(p, std::ios::binary);
  if (!o) throw ConfigError("cannot write " + p.string());
  o << bytes;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline CampaignSummary write_campaign(const fault::Workload& w, const fault::CampaignSpec& spec,
                                      fault::ReferenceCache& cache, const CampaignPaths& out, bool deviations) {
  const auto a = run_campaign_artifacts(w, spec, cache, deviations);
  write_file(out.records, a.records);
  write_file(out.summary, a.summary);
  if (deviations) write_file(out.deviations, a.deviations);
  return a.stats;
}

// Summary document rebuilt from a record file.
inline std::string report(const std::string& records_bytes, const std::string& name = "records") {
  std::istringstream in(records_bytes);
  const RecordFile f = read_records(in, name);
  return format_summary(aggregate(f.header, f.records));
}

}  // namespace sdcfhe::bench
