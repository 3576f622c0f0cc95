/* Copyright 2026 The pfsim Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.h"
#include "pfsim/errors.h"
#include "pfsim/report.h"

namespace pfsim {
namespace {

MeasurementSet make(const std::vector<std::pair<double, double>>& rows) {
  MeasurementSet s;
  int i = 0;
  for (auto [p, m] : rows) s.push_back({"c" + std::to_string(i++), p, m});
  return s;
}

TEST(Mape, Examples) {
  EXPECT_EQ(mape(make({{1, 1}, {3, 3}})), 0);
  EXPECT_DOUBLE_EQ(mape(make({{10, 10}, {20, 25}})), 0.10);
}

TEST(Mape, ScaleInvariant) {
  const MeasurementSet a = make({{1.5, 1}, {2, 2.5}, {7, 6}});
  MeasurementSet b = a;
  for (auto& m : b) {
    m.predicted *= 3.25;
    m.measured *= 3.25;
  }
  EXPECT_NEAR(mape(a), mape(b), 1e-15);
}

TEST(RSquared, Examples) {
  EXPECT_EQ(r_squared(make({{1, 1}, {2, 2}, {4, 4}})), 1.0);
  EXPECT_EQ(r_squared(make({{2, 1}, {2, 2}, {2, 3}})), 0.0);
  EXPECT_DOUBLE_EQ(r_squared(make({{1, 1}, {2, 2}, {4, 3}})), 0.5);
}

TEST(Metrics, RandomSetsMatchOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 100);
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<double> pred(n), meas(n);
    MeasurementSet s;
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = u(rng);
      meas[i] = u(rng);
      s.push_back({"id" + std::to_string(i), pred[i], meas[i]});
    }
    const double m = oracle::mape(pred, meas), r = oracle::r_squared(pred, meas);
    EXPECT_NEAR(mape(s), m, 1e-12 * std::max(1.0, std::abs(m)));
    EXPECT_NEAR(r_squared(s), r, 1e-12 * std::max(1.0, std::abs(r)));
  }
}

TEST(Measurements, Validation) {
  EXPECT_THROW(mape({}), ValidationError);
  EXPECT_THROW(mape(make({{1, 0}})), ValidationError);
  MeasurementSet dup = make({{1, 1}, {2, 2}});
  dup[1].config_id = dup[0].config_id;
  EXPECT_THROW(mape(dup), ValidationError);
}

TEST(Measurements, CsvParsing) {
  const MeasurementSet s =
      read_measurements_csv("# comment\nconfig_id,predicted_s,measured_s\na,1.0,2.0\nb,,3\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].config_id, "a");
  EXPECT_EQ(s[0].predicted, 1.0);
  EXPECT_EQ(s[1].measured, 3.0);
  EXPECT_THROW(read_measurements_csv("id,value\na,1\n"), ValidationError);
  EXPECT_THROW(read_measurements_csv("config_id,measured_s\na,x\n"), ValidationError);
  EXPECT_THROW(read_measurements_csv("config_id,measured_s\na,-1\n"), ValidationError);
}

RunReport sample() {
  RunReport r;
  r.mode = "infer";
  r.config = {{"mode", "infer"}, {"b", 1}, {"a", 2.5}};
  Table t{"results", {"id", "value", "flag", "count"}, {}};
  t.add_row({std::string("x,1"), 1.0 / 3.0, true, std::int64_t{7}});
  t.add_row({std::string("y"), 2e-20, false, std::int64_t{0}});
  r.tables.push_back(t);
  r.metrics["mape"] = 0.0757;
  r.warnings = {"something odd"};
  return r;
}

TEST(Report, NumberFormatting) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(1234567.0), "1.23457e+06");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Report, CsvLayout) {
  const std::string csv = emit(sample(), Format::csv);
  EXPECT_NE(csv.find("# table: results\nid,value,flag,count\n\"x,1\",0.333333,true,7\n"),
            std::string::npos);
  EXPECT_NE(csv.find("# warning: something odd"), std::string::npos);
  EXPECT_NE(csv.find("metric,value\nmape,0.0757\n"), std::string::npos);
  EXPECT_EQ(csv.rfind("# pfsim", 0), 0u);
}

TEST(Report, JsonLayout) {
  const auto doc = nlohmann::json::parse(emit(sample(), Format::json));
  EXPECT_EQ(doc["mode"], "infer");
  EXPECT_EQ(doc["tables"][0]["rows"][0][1], 0.333333);
  EXPECT_EQ(doc["tables"][0]["rows"][0][2], true);
  EXPECT_EQ(doc["metrics"]["mape"], 0.0757);
  EXPECT_EQ(doc["config"]["b"], 1);
}

TEST(Report, Deterministic) {
  EXPECT_EQ(emit(sample(), Format::json), emit(sample(), Format::json));
  EXPECT_EQ(emit(sample(), Format::csv), emit(sample(), Format::csv));
}

TEST(Report, EmptyResultSet) {
  RunReport r;
  r.mode = "sweep";
  r.tables.push_back(Table{"sweep", {"config_id"}, {}});
  const auto doc = nlohmann::json::parse(emit(r, Format::json));
  EXPECT_TRUE(doc["tables"][0]["rows"].empty());
  EXPECT_NE(emit(r, Format::csv).find("# table: sweep\nconfig_id\n"), std::string::npos);
}

TEST(Report, RowWidthChecked) {
  Table t{"t", {"a", "b"}, {}};
  EXPECT_THROW(t.add_row({1.0}), std::logic_error);
}

TEST(Report, WriteFailureIsRuntimeError) {
  EXPECT_THROW(write_report(sample(), Format::csv, "/nonexistent-dir/x.csv"), std::runtime_error);
  const auto path = std::filesystem::temp_directory_path() / "pfsim_report_test.json";
  write_report(sample(), Format::json, path);
  std::ifstream in(path);
  std::stringstream b;
  b << in.rdbuf();
  EXPECT_EQ(b.str(), emit(sample(), Format::json));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace pfsim
