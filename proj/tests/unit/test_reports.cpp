// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>

#include "json.hpp"
#include "trtvit/reports.hpp"

namespace trtvit {
namespace {

const std::string kData = TRTVIT_DATA_DIR;

std::string cell(const ReportTable& t, const std::string& row0, const std::string& col) {
  std::size_t ci = 0;
  while (ci < t.columns.size() && t.columns[ci] != col) ++ci;
  for (const auto& r : t.rows) {
    if (r[0] == row0) return r.at(ci);
  }
  return "";
}

TEST(Describe, GroupsConsecutiveBlocks) {
  const ReportTable t = describe_table(preset("trt-vit-c"));
  EXPECT_EQ(cell(t, "stage4", "blocks"), "bottleneck ×7 + mixc(R=0.5,S=2,K=7) ×2");
  EXPECT_EQ(cell(t, "stage4", "output_size"), "14x14");
  EXPECT_EQ(cell(t, "stage5", "output_size"), "7x7");
  const ReportTable r = describe_table(preset("resnet50"));
  EXPECT_NE(r.notes.front().find("3-4-6-3"), std::string::npos);
  EXPECT_EQ(cell(r, "stage2", "blocks"), "bottleneck ×3");
}

TEST(Render, Formats) {
  ReportTable t;
  t.title = "t";
  t.columns = {"name", "value"};
  t.rows = {{"a,b", "1.5"}, {"x|y", "n/a"}};
  t.notes = {"note"};
  EXPECT_EQ(t.render(ReportFormat::kCsv), "name,value\n\"a,b\",1.5\nx|y,n/a\n");
  const std::string md = t.render(ReportFormat::kMarkdown);
  EXPECT_NE(md.find("| x\\|y | n/a |"), std::string::npos);
  EXPECT_NE(md.find("- note"), std::string::npos);
  const std::string jl = t.render(ReportFormat::kJsonl);
  const auto first = nlohmann::json::parse(jl.substr(0, jl.find('\n')));
  EXPECT_EQ(first["value"], 1.5);
  EXPECT_EQ(first["name"], "a,b");
  EXPECT_THROW(parse_report_format("xml"), InvalidArgument);
}

TEST(CostTable, EndsWithTotal) {
  const CostNode m = count_model(preset("resnet50"));
  const ReportTable t = cost_table(m, CostDepth::kStage);
  EXPECT_EQ(t.rows.size(), 8u);
  EXPECT_EQ(t.rows.back()[0], "total");
  EXPECT_EQ(t.rows.back()[6], std::to_string(m.params));
  EXPECT_GT(cost_table(m, CostDepth::kOp).rows.size(), cost_table(m, CostDepth::kBlock).rows.size());
}

TEST(Guidelines, G1Ordering) {
  const auto lat = import_latency_csv(kData + "/table1_t4.csv");
  const ReportTable g = guideline_report("g1", lat).front();
  std::map<std::string, double> tf;
  for (const auto& r : g.rows) tf[r[0] + "@" + r[1]] = std::stod(r[7]);
  for (const char* fm : {"256x56x56", "512x28x28", "1024x14x14", "2048x7x7"}) {
    const std::string s = std::string("@") + fm;
    EXPECT_GT(tf["bottleneck" + s], tf["mixc" + s]) << fm;
    EXPECT_GT(tf["mixc" + s], tf["transformer" + s]) << fm;
    EXPECT_GT(tf["mixa" + s], tf["transformer" + s]) << fm;
  }
}

TEST(Guidelines, G2AndG4) {
  const ReportTable g2 = guideline_report("g2", {}).front();
  EXPECT_EQ(cell(g2, "refined-resnet50", "stage_depth"), "2-3-6-5");
  EXPECT_EQ(cell(g2, "refined-resnet50", "params_M"), "34.13");
  EXPECT_EQ(cell(g2, "refined-resnet50", "top1_acc"), kAccuracyNa);
  EXPECT_EQ(cell(g2, "refined-resnet50", "latency_ms"), "n/a");
  const auto g4 = guideline_report("g4", import_latency_csv(kData + "/table4_t4.csv"));
  EXPECT_EQ(cell(g4[0], "mixnet-c", "latency_ms"), "4.10");
  const ReportTable& tr = g4[1];
  EXPECT_EQ(tr.rows.back()[2], tr.rows.back()[4]);
  EXPECT_EQ(tr.notes.back(), "totals are identical");
  EXPECT_THROW(guideline_report("g9", {}), InvalidArgument);
}

}  // namespace
}  // namespace trtvit
