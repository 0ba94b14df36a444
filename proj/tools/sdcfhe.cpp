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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdcfhe/bench/campaign.hpp"
#include "sdcfhe/bench/overhead.hpp"
#include "sdcfhe/ckks/keys.hpp"

namespace {

using namespace sdcfhe;

constexpr int kExitConfig = 2;
constexpr int kExitUnrecoverable = 3;

struct ParamFlags {
  std::string preset = "DESK1";
  std::string file;

  void add(CLI::App* app) {
    app->add_option("--preset", preset, "parameter preset (see `params list`)");
    app->add_option("--params", file, "key-value parameter file, overrides --preset");
  }

  CkksParams resolve() const {
    CkksParams p = file.empty() ? sdcfhe::preset(preset) : load_params_file(file);
    if (p.insecure) {
      std::fprintf(stderr,
                   "warning: parameter set %s is cryptographically insecure; "
                   "it exists for reliability experiments only\n",
                   p.name.c_str());
    }
    return p;
  }
};

struct WorkloadFlags {
  std::string id = "vv";
  bench::WorkloadOptions opt;

  void add(CLI::App* app) {
    app->add_option("--workload", id, "workload id")->check(CLI::IsMember(bench::workload_ids()));
    app->add_option("--rotation", opt.rotation, "rotation step of rot and op-rot");
    app->add_option("--mv-dimension", opt.mv_dimension, "matrix dimension of mv");
    app->add_option("--mv-baby-steps", opt.mv_baby_steps, "baby steps of mv");
    app->add_option("--house-csv", opt.house_csv, "feature file of house (bundled file by default)");
  }
};

ProtectionMode protection_of(const std::string& name, int retries) {
  return ProtectionMode{parse_protection(name), retries};
}

void write_or_print(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-") {
    std::cout << bytes;
  } else {
    bench::write_file(path, bytes);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft-error reliability experiments on CKKS ciphertext computation"};
  app.require_subcommand(1);

  // params
  auto* params = app.add_subcommand("params", "list or show parameter sets");
  params->require_subcommand(1);
  params->add_subcommand("list", "list preset names")->callback([] {
    for (const auto& name : preset_names()) {
      const CkksParams p = preset(name);
      std::printf("%-11s n=%zu log_delta=%d depth=%d log_q=%d special=%d%s\n", name.c_str(), p.n, p.log_delta, p.depth,
                  p.log_q_bits(), p.resolved_special_count(), p.insecure ? " (insecure)" : "");
    }
  });
  ParamFlags show_flags;
  auto* show = params->add_subcommand("show", "print a parameter set in parameter-file form");
  show->add_option("preset", show_flags.preset, "preset name");
  show->add_option("--params", show_flags.file, "parameter file");

  // keygen
  ParamFlags key_params;
  std::uint64_t key_seed = 0;
  std::vector<std::size_t> key_rotations;
  bool key_no_relin = false;
  std::string key_out;
  auto* keygen = app.add_subcommand("keygen", "generate and serialize key material");
  key_params.add(keygen);
  keygen->add_option("--seed", key_seed, "key seed");
  keygen->add_option("--rotations", key_rotations, "rotation steps needing Galois keys")->delimiter(',');
  keygen->add_flag("--no-relin", key_no_relin, "skip the relinearization key");
  keygen->add_option("--out", key_out, "output file")->required();

  // run
  ParamFlags run_params;
  WorkloadFlags run_wl;
  std::string run_protection = "none";
  int run_retries = 1;
  std::uint64_t run_seed_flag = 0;
  std::uint64_t run_index = 0;
  std::string run_fault;
  std::optional<double> run_epsilon;
  std::size_t run_ceiling_runs = fault::kCeilingRuns;
  auto* run = app.add_subcommand("run", "one execution, optionally with a single bit flip");
  run_params.add(run);
  run_wl.add(run);
  run->add_option("--protection", run_protection, "none | redundant | checksum");
  run->add_option("--retry-limit", run_retries, "re-executions after a detected fault");
  run->add_option("--seed", run_seed_flag, "master seed");
  run->add_option("--run-index", run_index, "run index under the master seed");
  run->add_option("--fault", run_fault, "site literal stage@operand:limb:coeff:bit");
  run->add_option("--epsilon", run_epsilon, "SDC threshold (default from the noise ceiling)");
  run->add_option("--ceiling-runs", run_ceiling_runs, "fault-free runs behind the noise ceiling");
  bool run_sites = false;
  run->add_flag("--list-stages", run_sites, "print the injectable stages and exit");

  // campaign
  ParamFlags camp_params;
  WorkloadFlags camp_wl;
  fault::CampaignSpec spec;
  std::string camp_protection = "none";
  std::string camp_out = "campaign";
  std::string camp_cache;
  std::string camp_filter;
  bool camp_csv = false;
  auto* campaign = app.add_subcommand("campaign", "fault-injection campaign");
  camp_params.add(campaign);
  camp_wl.add(campaign);
  campaign->add_option("--protection", camp_protection, "none | redundant | checksum");
  campaign->add_option("--retry-limit", spec.protection.retry_limit, "re-executions after a detected fault");
  campaign->add_option("--runs", spec.runs, "number of runs");
  campaign->add_option("--seed", spec.seed, "master seed");
  campaign->add_option("--out-dir", camp_out, "directory for records.jsonl, summary.json, deviations.csv");
  campaign->add_option("--workers", spec.workers, "worker threads");
  campaign->add_option("--stage-filter", camp_filter, "restrict sites to matching stage path components");
  campaign->add_option("--epsilon", spec.epsilon, "SDC threshold (default from the noise ceiling)");
  campaign->add_option("--ceiling-runs", spec.ceiling_runs, "fault-free runs behind the noise ceiling");
  campaign->add_option("--cache-dir", camp_cache, "directory persisting noise ceilings");
  campaign->add_flag("--deviations", camp_csv, "also write the per-slot deviation matrix");
  campaign->add_flag("--timing", spec.timing, "record per-run wall clock");

  // bench
  ParamFlags bench_params;
  WorkloadFlags bench_wl;
  std::size_t bench_reps = 10;
  std::uint64_t bench_seed = 0;
  std::vector<std::string> bench_modes = {"none", "checksum", "redundant"};
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "fault-free overhead per protection mode");
  bench_params.add(bench_cmd);
  bench_wl.add(bench_cmd);
  bench_cmd->add_option("--repetitions", bench_reps, "timed repetitions per mode (at least 10)");
  bench_cmd->add_option("--seed", bench_seed, "master seed");
  bench_cmd->add_option("--modes", bench_modes, "protection modes")->delimiter(',');
  bench_cmd->add_option("--out", bench_out, "output file (stdout by default)");

  // report
  std::string report_in;
  std::string report_out;
  auto* report = app.add_subcommand("report", "summary JSON rebuilt from a record file");
  report->add_option("records", report_in, "records.jsonl")->required();
  report->add_option("--out", report_out, "output file (stdout by default)");

  try {
    app.parse(argc, argv);

    if (show->parsed()) {
      std::cout << format_params(show_flags.resolve());
    } else if (keygen->parsed()) {
      const auto ctx = make_context(key_params.resolve());
      const KeyMaterial km = KeyGenerator(ctx, key_seed).generate(key_rotations, !key_no_relin);
      save_keys_file(key_out, *ctx, km);
    } else if (run->parsed()) {
      const CkksParams p = run_params.resolve();
      const auto w = bench::make_workload(run_wl.id, p, bench::data_seed(run_seed_flag), run_wl.opt);
      fault::ReferenceCache cache;
      const std::uint64_t enc = fault::encryption_seed(run_seed_flag);
      if (run_sites) {
        for (const auto& s : cache.reference(*w, enc)->space.stages()) {
          std::printf("%s %llu\n", s.stage.c_str(), static_cast<unsigned long long>(s.cardinality()));
        }
        return 0;
      }
      fault::RunRequest req;
      req.protection = protection_of(run_protection, run_retries);
      if (!run_fault.empty()) req.fault = fault::parse_site(run_fault);
      req.seed = enc;
      req.run_seed = fault::run_seed(run_seed_flag, run_index);
      req.epsilon = run_epsilon ? *run_epsilon : fault::epsilon_policy(cache.noise_ceiling(*w, enc, run_ceiling_runs));
      req.timing = true;
      const auto outcome = fault::run_once(*w, req, cache);
      std::cout << fault::to_json(fault::make_record(run_index, outcome, req.epsilon)).dump() << '\n';
    } else if (campaign->parsed()) {
      const CkksParams p = camp_params.resolve();
      spec.workload = camp_wl.id;
      spec.preset = p.name;
      spec.protection.kind = parse_protection(camp_protection);
      if (campaign->count("--stage-filter")) spec.stage_filter = camp_filter;
      const auto w = bench::campaign_workload(spec, p, camp_wl.opt);
      auto cache = camp_cache.empty() ? std::make_unique<fault::ReferenceCache>()
                                      : std::make_unique<fault::ReferenceCache>(camp_cache);
      const auto s = bench::write_campaign(*w, spec, *cache, bench::CampaignPaths::in(camp_out), camp_csv);
      std::fprintf(stderr, "%s %s %s: %llu runs, sdc %.6f, masked %.6f, detected %.6f\n", s.header.workload.c_str(),
                   s.header.preset.c_str(), s.header.protection.c_str(),
                   static_cast<unsigned long long>(s.counts.total()), s.sdc_rate(), s.masked_rate(),
                   s.detected_rate());
    } else if (bench_cmd->parsed()) {
      const CkksParams p = bench_params.resolve();
      const auto w = bench::make_workload(bench_wl.id, p, bench::data_seed(bench_seed), bench_wl.opt);
      std::vector<ProtectionKind> modes;
      for (const auto& m : bench_modes) modes.push_back(parse_protection(m));
      const auto t = bench::overhead_bench(*w, modes, bench_reps, fault::encryption_seed(bench_seed));
      write_or_print(bench_out, t.to_json().dump(2) + "\n");
    } else if (report->parsed()) {
      write_or_print(report_out, bench::report(bench::read_file(report_in), report_in));
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const UnrecoverableFault& e) {
    std::fprintf(stderr, "unrecoverable fault: %s\n", e.what());
    return kExitUnrecoverable;
  }
  return 0;
}
