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

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "sdcfhe/ckks/random.hpp"
#include "sdcfhe/fault/outcome.hpp"
#include "sdcfhe/fault/site.hpp"
#include "sdcfhe/fault/workload.hpp"

namespace sdcfhe::fault {

// Tags for derive_seed; every random stream of a campaign hangs off the
// master seed through one of these.
namespace seed_tag {
inline constexpr std::uint64_t kData = 0x64617461;
inline constexpr std::uint64_t kEncrypt = 0x656e6372;
inline constexpr std::uint64_t kRun = 0x72756e73;
inline constexpr std::uint64_t kCeiling = 0x6365696c;
}  // namespace seed_tag

inline constexpr double kEpsilonFloor = 1e-3;
inline constexpr std::size_t kCeilingRuns = 100;

inline double epsilon_policy(double noise_ceiling) { return std::max(10 * noise_ceiling, kEpsilonFloor); }

inline std::vector<double> slot_deviations(const std::vector<Complex>& got, const std::vector<Complex>& want) {
  if (got.size() != want.size()) throw std::invalid_argument("slot count mismatch");
  std::vector<double> d(got.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(got[i] - want[i]);
  return d;
}

// Fault-free state of one (workload, preset, encryption seed): encrypted
// inputs, decoded output and the stage graph. Immutable once built.
struct Reference {
  std::vector<Ciphertext> inputs;
  std::vector<Complex> output;
  SiteSpace space;
};

// Memoizes references and noise ceilings. Ceilings may also persist in a
// directory so later campaigns skip the fault-free sweep.
class ReferenceCache {
 public:
  ReferenceCache() = default;
  explicit ReferenceCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::shared_ptr<const Reference> reference(const Workload& w, std::uint64_t seed) {
    std::lock_guard lock(mu_);
    auto& slot = refs_[key(w, seed)];
    if (!slot) {
      auto ref = std::make_shared<Reference>();
      ref->inputs = w.encrypt_inputs(seed);
      SiteRecorder rec;
      ExecContext ex;
      ex.set_observer(&rec);
      ref->output = w.decrypt(w.execute(ex, ref->inputs));
      ref->space = rec.space();
      slot = std::move(ref);
    }
    return slot;
  }

  // Largest slot error against the plaintext reference over `runs`
  // fault-free executions with distinct encryption seeds.
  double noise_ceiling(const Workload& w, std::uint64_t seed, std::size_t runs = kCeilingRuns) {
    std::lock_guard lock(mu_);
    const std::string k = key(w, seed) + "-" + std::to_string(runs);
    if (auto it = ceilings_.find(k); it != ceilings_.end()) return it->second;
    if (auto stored = load_ceiling(k)) return ceilings_[k] = *stored;
    const auto want = w.reference();
    double ceiling = 0;
    for (std::size_t j = 0; j < runs; ++j) {
      ExecContext ex;
      const auto out = w.decrypt(w.execute(ex, w.encrypt_inputs(derive_seed(seed, seed_tag::kCeiling, j))));
      for (double d : slot_deviations(out, want)) ceiling = std::max(ceiling, d);
    }
    store_ceiling(k, ceiling);
    return ceilings_[k] = ceiling;
  }

 private:
  static std::string key(const Workload& w, std::uint64_t seed) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(seed));
    return w.id() + "-" + w.params().name + "-" + hex;
  }

  std::optional<double> load_ceiling(const std::string& k) const {
    if (dir_.empty()) return std::nullopt;
    std::ifstream in(dir_ / (k + ".ceiling"));
    double v;
    if (in >> v) return v;
    return std::nullopt;
  }

  void store_ceiling(const std::string& k, double v) const {
    if (dir_.empty()) return;
    std::filesystem::create_directories(dir_);
    const auto path = dir_ / (k + ".ceiling");
    const auto tmp = dir_ / (k + ".ceiling.tmp");
    {
      std::ofstream o(tmp);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g\n", v);
      o << buf;
    }
    std::filesystem::rename(tmp, path);
  }

  std::filesystem::path dir_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Reference>> refs_;
  std::map<std::string, double> ceilings_;
};

struct RunRequest {
  ProtectionMode protection;
  std::optional<FaultSite> fault;
  std::uint64_t seed = 0;      // encryption seed, selects the reference
  std::uint64_t run_seed = 0;  // projection weights; reported with the outcome
  double epsilon = kEpsilonFloor;
  bool timing = false;
};

// One execution with at most one bit flip, decrypted with pristine keys and
// compared slot by slot with the fault-free output for the same seed.
inline RunOutcome run_once(const Workload& w, const RunRequest& req, ReferenceCache& cache) {
  const auto ref = cache.reference(w, req.seed);
  if (req.fault) ref->space.validate(*req.fault);

  ExecContext ex(req.protection, &w.context()->checksums(), derive_seed(req.run_seed, 1));
  std::optional<FaultInjector> injector;
  if (req.fault) {
    injector.emplace(*req.fault);
    ex.set_fault_hook(&*injector);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Ciphertext ct = w.execute(ex, ref->inputs);
  const auto t1 = std::chrono::steady_clock::now();

  RunOutcome o;
  o.site = req.fault;
  o.seed = req.run_seed;
  o.injections = injector ? injector->fired() : 0;
  if (injector && o.injections != 1) throw std::logic_error("fault site was not reached: " + format_site(*req.fault));
  o.deviations = slot_deviations(w.decrypt(ct), ref->output);
  o.guard_events = ex.guard_events();
  o.classification = classify(o.deviations, req.epsilon, ex.detected());
  if (req.timing) o.duration_ns = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
  return o;
}

struct CampaignSpec {
  std::string workload;  // checked against the workload when set
  std::string preset;
  ProtectionMode protection;
  std::uint64_t runs = 10000;
  std::uint64_t seed = 0;
  std::optional<double> epsilon;             // overrides the policy
  std::optional<std::string> stage_filter;   // defaults to the workload's own
  std::size_t workers = 1;
  bool timing = false;
  std::size_t ceiling_runs = kCeilingRuns;
};

struct CampaignSinks {
  std::ostream* records = nullptr;
  std::ostream* deviations = nullptr;
};

struct CampaignResult {
  CampaignHeader header;
  std::vector<RunRecord> records;
};

inline std::uint64_t encryption_seed(std::uint64_t master) { return derive_seed(master, seed_tag::kEncrypt); }
inline std::uint64_t run_seed(std::uint64_t master, std::uint64_t run) { return derive_seed(master, seed_tag::kRun, run); }

inline void write_deviation_header(std::ostream& o, std::size_t slots) {
  o << "run";
  for (std::size_t j = 0; j < slots; ++j) o << ",slot_" << j;
  o << '\n';
}

inline void write_deviation_row(std::ostream& o, std::uint64_t run, const std::vector<double>& d) {
  std::string line = std::to_string(run);
  char buf[32];
  for (double x : d) {
    std::snprintf(buf, sizeof buf, ",%.9e", x);
    line += buf;
  }
  line += '\n';
  o << line;
}

inline CampaignResult run_campaign(const Workload& w, const CampaignSpec& spec, ReferenceCache& cache,
                                   CampaignSinks sinks = {}) {
  if (spec.runs == 0) throw ConfigError("campaign needs at least one run");
  if (spec.workers == 0) throw ConfigError("campaign needs at least one worker");
  if (!spec.workload.empty() && spec.workload != w.id()) throw ConfigError("campaign names workload " + spec.workload + " but got " + w.id());
  if (!spec.preset.empty() && spec.preset != w.params().name) throw ConfigError("campaign names preset " + spec.preset + " but got " + w.params().name);

  const std::uint64_t enc_seed = encryption_seed(spec.seed);
  const auto ref = cache.reference(w, enc_seed);
  const std::string filter = spec.stage_filter.value_or(w.default_stage_filter());
  const SiteSpace space = ref->space.filtered(filter);
  if (ref->space.empty()) throw ConfigError("workload " + w.id() + " has no injectable stages");
  if (space.empty()) throw ConfigError("stage filter '" + filter + "' matches no stage of " + w.id());

  CampaignResult result;
  CampaignHeader& h = result.header;
  h.workload = w.id();
  h.preset = w.params().name;
  h.protection = protection_name(spec.protection.kind);
  h.runs = spec.runs;
  h.master_seed = spec.seed;
  h.noise_ceiling = spec.epsilon ? 0.0 : cache.noise_ceiling(w, enc_seed, spec.ceiling_runs);
  h.epsilon = spec.epsilon ? *spec.epsilon : epsilon_policy(h.noise_ceiling);
  h.stage_filter = filter;
  h.site_space = space.cardinality();
  h.stage_groups = space.groups();
  h.timed = spec.timing;
  if (!(h.epsilon > 0)) throw ConfigError("epsilon must be positive");

  if (sinks.records) *sinks.records << h.to_json().dump() << '\n';
  if (sinks.deviations) write_deviation_header(*sinks.deviations, w.context()->slots());

  result.records.resize(spec.runs);
  std::mutex mu;
  std::map<std::uint64_t, RunOutcome> pending;
  std::uint64_t next_write = 0;
  std::atomic<std::uint64_t> next_run{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;

  auto emit = [&](std::uint64_t i, RunOutcome&& o) {
    std::lock_guard lock(mu);
    pending.emplace(i, std::move(o));
    while (!pending.empty() && pending.begin()->first == next_write) {
      auto node = pending.extract(pending.begin());
      RunRecord rec = make_record(next_write, node.mapped(), h.epsilon);
      if (sinks.records) *sinks.records << to_json(rec).dump() << '\n';
      if (sinks.deviations) write_deviation_row(*sinks.deviations, next_write, node.mapped().deviations);
      result.records[next_write] = std::move(rec);
      ++next_write;
    }
  };

  auto worker = [&] {
    try {
      for (;;) {
        const std::uint64_t i = next_run.fetch_add(1);
        if (i >= spec.runs || failed) return;
        RunRequest req;
        req.protection = spec.protection;
        req.seed = enc_seed;
        req.run_seed = run_seed(spec.seed, i);
        Sampler rng(req.run_seed);
        req.fault = space.sample(rng);
        req.epsilon = h.epsilon;
        req.timing = spec.timing;
        emit(i, run_once(w, req, cache));
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!error) error = std::current_exception();
      failed = true;
    }
  };

  if (spec.workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < spec.workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return result;
}

}  // namespace sdcfhe::fault
