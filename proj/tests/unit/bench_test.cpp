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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sdcfhe/bench/campaign.hpp"
#include "sdcfhe/bench/overhead.hpp"

namespace sdcfhe::bench {
namespace {

std::vector<Complex> run_clean(const CkksWorkload& w, std::uint64_t seed = 5) {
  ExecContext ex;
  return w.decrypt(w.execute(ex, w.encrypt_inputs(seed)));
}

double max_abs_error(const std::vector<Complex>& got, const std::vector<Complex>& want) {
  double e = 0;
  for (std::size_t i = 0; i < want.size(); ++i) e = std::max(e, std::abs(got[i] - want[i]));
  return e;
}

std::vector<double> ramp(std::size_t n, double scale) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = scale * std::sin(0.37 * static_cast<double>(i) + 0.1);
  return v;
}

TEST(Workloads, VvWithAllOnesReturnsFirstOperand) {
  const CkksParams p = desk_preset(1);
  WorkloadOptions opt;
  const auto x = ramp(p.n / 2, 0.9);
  opt.inputs = std::vector<std::vector<double>>{x, std::vector<double>(p.n / 2, 1.0)};
  const auto w = make_workload("vv", p, 3, opt);
  EXPECT_LT(max_abs_error(run_clean(*w), Encoder::to_complex(x)), 1e-3);
}

TEST(Workloads, MvWithIdentityReturnsInput) {
  const CkksParams p = desk_preset(1);
  WorkloadOptions opt;
  std::vector<std::vector<double>> eye(64, std::vector<double>(64, 0.0));
  for (std::size_t i = 0; i < 64; ++i) eye[i][i] = 1.0;
  opt.matrix = eye;
  const auto x = ramp(64, 0.8);
  opt.inputs = std::vector<std::vector<double>>{x};
  const auto w = make_workload("mv", p, 3, opt);
  const auto out = run_clean(*w);
  double e = 0;
  for (std::size_t j = 0; j < out.size(); ++j) e = std::max(e, std::abs(out[j] - Complex(x[j % 64], 0)));
  EXPECT_LT(e, 1e-3);
}

TEST(Workloads, HouseMatchesPlaintextModelWithinOnePercent) {
  const auto w = make_workload("house", desk_preset(1), 3);
  const auto out = run_clean(*w);
  const auto ref = w->reference();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ASSERT_LE(std::abs(out[i] - ref[i]), 1e-2 * std::abs(ref[i])) << i;
  }
}

TEST(Workloads, ShippedHouseModelFitsTheBundledData) {
  const HousingData d = load_housing_csv(bundled_housing_csv());
  ASSERT_EQ(d.features.size(), 1024u);
  const HousingModel m;
  double mean = 0;
  for (double t : d.target) mean += t;
  mean /= static_cast<double>(d.target.size());
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < d.target.size(); ++i) {
    ss_res += std::pow(d.target[i] - m.predict(d.features[i]), 2);
    ss_tot += std::pow(d.target[i] - mean, 2);
  }
  EXPECT_GT(1.0 - ss_res / ss_tot, 0.5);
}

TEST(Workloads, RotationByZeroIsIdentity) {
  WorkloadOptions opt;
  opt.rotation = 0;
  const auto w = make_workload("op-rot", desk_preset(1), 3, opt);
  EXPECT_LT(max_abs_error(run_clean(*w), w->messages()[0]), 1e-3);
}

TEST(Workloads, RotationShiftsLeft) {
  WorkloadOptions opt;
  opt.rotation = 5;
  const auto w = make_workload("rot", desk_preset(1), 3, opt);
  const auto out = run_clean(*w);
  const auto& x = w->messages()[0];
  for (std::size_t j = 0; j < out.size(); ++j) ASSERT_LT(std::abs(out[j] - x[(j + 5) % x.size()]), 1e-3);
}

TEST(Workloads, CtCtAddOfEqualOperandsDoubles) {
  const CkksParams p = desk_preset(1);
  WorkloadOptions opt;
  const auto x = ramp(p.n / 2, 0.7);
  opt.inputs = std::vector<std::vector<double>>{x, x};
  const auto w = make_workload("op-ctct-add", p, 3, opt);
  const auto out = run_clean(*w);
  for (std::size_t j = 0; j < x.size(); ++j) ASSERT_LT(std::abs(out[j] - Complex(2 * x[j], 0)), 1e-3);
}

TEST(Workloads, EveryWorkloadMatchesItsReference) {
  for (const auto& id : workload_ids()) {
    const auto w = make_workload(id, desk_preset(2), 11);
    EXPECT_LT(max_abs_error(run_clean(*w), w->reference()), 1e-3) << id;
  }
}

TEST(Workloads, UnknownIdIsConfigError) {
  EXPECT_THROW(make_workload("conv", desk_preset(1), 1), ConfigError);
  WorkloadOptions bad;
  bad.mv_dimension = 48;
  EXPECT_THROW(make_workload("mv", desk_preset(1), 1, bad), ConfigError);
}

std::string message_of(const std::string& csv) {
  std::istringstream in(csv);
  try {
    parse_housing_csv(in, "h.csv");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(HousingCsv, ErrorsCarryLineNumbers) {
  const std::string header = "MedInc,HouseAge,AveRooms,AveBedrms,Population,AveOccup,Latitude,Longitude,MedHouseVal\n";
  const std::string row = "3.1,20,5.2,1.1,900,2.5,37.2,-121.9,2.4\n";
  EXPECT_EQ(message_of("MedInc,HouseAge\n").rfind("h.csv:1:", 0), 0u);
  EXPECT_EQ(message_of(header + row + "3.1,20,x,1.1,900,2.5,37.2,-121.9,2.4\n").rfind("h.csv:3:", 0), 0u);
  EXPECT_EQ(message_of(header + row + row + "1,2,3\n").rfind("h.csv:4:", 0), 0u);
  EXPECT_NE(message_of(header).find("no data rows"), std::string::npos);
  EXPECT_EQ(message_of(header + row), "");
  std::istringstream crlf(header + "3.1,20,5.2,1.1,900,2.5,37.2,-121.9,2.4\r\n");
  EXPECT_EQ(parse_housing_csv(crlf).target, std::vector<double>{2.4});
}

RunRecord record(std::uint64_t run, Classification c, double max_dev, std::uint64_t over, const std::string& site) {
  RunRecord r;
  r.run = run;
  r.classification = c;
  r.max_deviation = max_dev;
  r.min_deviation = max_dev / 10;
  r.slots = 4;
  r.slots_over_epsilon = over;
  r.site = site;
  r.histogram.add(max_dev);
  return r;
}

CampaignHeader header_for_tests() {
  CampaignHeader h;
  h.workload = "vv";
  h.preset = "DESK1";
  h.protection = "none";
  h.runs = 4;
  h.epsilon = 1e-3;
  h.stage_groups = {"ctct-mult/tensor", "ctct-mult/relin-add"};
  return h;
}

TEST(Aggregate, SingleMaskedRecordHasZeroSdcRate) {
  const auto s = aggregate(header_for_tests(), {record(0, Classification::Masked, 1e-6, 0, "ctct-mult#0/tensor@0:0:1:2")});
  EXPECT_EQ(s.sdc_rate(), 0.0);
  EXPECT_EQ(s.masked_rate(), 1.0);
}

TEST(Aggregate, ThreeSdcAndOneMasked) {
  const std::vector<RunRecord> rs = {record(0, Classification::SDC, 10.0, 4, "ctct-mult#0/tensor@0:0:1:2"),
                                     record(1, Classification::SDC, 3.0, 2, "ctct-mult#0/relin-add@1:0:1:2"),
                                     record(2, Classification::Masked, 1e-5, 0, "ctct-mult#0/tensor@0:0:3:2"),
                                     record(3, Classification::SDC, 5.0, 4, "ctct-mult#0/tensor@2:1:1:40")};
  const auto s = aggregate(header_for_tests(), rs);
  EXPECT_DOUBLE_EQ(s.sdc_rate(), 0.75);
  EXPECT_DOUBLE_EQ(s.sdc_rate() + s.masked_rate() + s.detected_rate(), 1.0);
  EXPECT_EQ(s.max_deviation, 10.0);
  EXPECT_DOUBLE_EQ(s.min_deviation, 1e-6);
  EXPECT_EQ(s.diffused_sdc_runs, 2u);
  EXPECT_DOUBLE_EQ(s.min_sdc_slot_fraction, 0.5);
  ASSERT_NE(s.group("ctct-mult/tensor"), nullptr);
  EXPECT_EQ(s.group("ctct-mult/tensor")->counts.sdc, 2u);
  EXPECT_EQ(s.group("ctct-mult/relin-add")->counts.sdc, 1u);
  EXPECT_EQ(s.histogram.total(), 4u);
  const Json j = s.to_json();
  EXPECT_EQ(j["schema"], kSummarySchema);
  EXPECT_EQ(j["counts"]["sdc"], 3);
}

TEST(Aggregate, RejectsEmptyAndMixedStreams) {
  EXPECT_THROW(aggregate(header_for_tests(), {}), std::invalid_argument);
  auto a = record(0, Classification::Masked, 0, 0, "");
  auto b = a;
  b.slots = 8;
  EXPECT_THROW(aggregate(header_for_tests(), {a, b}), std::invalid_argument);
}

TEST(RecordFile, ErrorsCarryLineNumbers) {
  std::istringstream no_header("");
  EXPECT_THROW(read_records(no_header), std::invalid_argument);
  const std::string head = header_for_tests().to_json().dump() + "\n";
  std::istringstream bad(head + fault::to_json(record(0, Classification::SDC, 2.0, 4, "")).dump() + "\n{oops\n");
  try {
    read_records(bad, "r.jsonl");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_EQ(std::string(e.what()).rfind("r.jsonl:3:", 0), 0u) << e.what();
  }
}

TEST(Report, RebuildsTheCampaignSummary) {
  const CkksParams p = desk_preset(1);
  fault::CampaignSpec spec;
  spec.workload = "op-ctct-mult";
  spec.preset = p.name;
  spec.runs = 40;
  spec.seed = 99;
  spec.ceiling_runs = 5;
  const auto w = campaign_workload(spec, p);
  fault::ReferenceCache cache;
  const auto a = run_campaign_artifacts(*w, spec, cache, true);
  EXPECT_EQ(report(a.records), a.summary);
  // One header row and one row per run.
  EXPECT_EQ(std::count(a.deviations.begin(), a.deviations.end(), '\n'), 41);
  EXPECT_EQ(a.deviations.rfind("run,slot_0,slot_1,", 0), 0u);
}

TEST(Overhead, NoneIsUnityAndRepetitionsAreChecked) {
  const auto w = make_workload("op-ctct-add", desk_preset(1), 1);
  EXPECT_THROW(overhead_bench(*w, {ProtectionKind::Checksum}, 9), ConfigError);
  const auto t = overhead_bench(*w, {ProtectionKind::Checksum, ProtectionKind::Redundant}, 10);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.row(ProtectionKind::None).normalized, 1.0);
  EXPECT_EQ(t.row(ProtectionKind::Checksum).samples.size(), 10u);
  const Json j = t.to_json();
  EXPECT_EQ(j["schema"], kOverheadSchema);
  EXPECT_EQ(j["modes"][0]["overhead_percent"], 0.0);
}

}  // namespace
}  // namespace sdcfhe::bench
