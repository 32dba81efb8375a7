// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

// Tabular reports shared by the CLI and the C API. Every report is a plain
// table of string cells, rendered as Markdown, CSV or JSON lines.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trtvit/bench.hpp"

namespace trtvit {

enum class ReportFormat { kMarkdown, kCsv, kJsonl };
ReportFormat parse_report_format(const std::string& s);

struct ReportTable {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;  // Markdown only

  /// JSON lines emit one object per row; cells that parse fully as numbers
  /// become JSON numbers.
  std::string render(ReportFormat format) const;
};

/// Concatenates tables; Markdown separates them with a blank line, CSV and
/// JSON lines simply append (JSON rows carry a "table" key).
std::string render_all(const std::vector<ReportTable>& tables, ReportFormat format);

std::string format_fixed(double x, int digits);

/// Compact label of one block, e.g. "mixc(R=0.5,S=2,K=7)".
std::string block_label(const BlockSpec& b);
/// Consecutive equal blocks grouped, e.g. "bottleneck ×7 + mixc(R=0.5,S=2,K=7) ×2".
std::string stage_summary(const StageSpec& stage);
/// "C", "T" or "M": convolution-only, Transformer or MixBlock stage.
char stage_block_type(const StageSpec& stage);

/// Stage-by-stage layout: stage, output size, blocks, channels, depth.
ReportTable describe_table(const ArchSpec& arch, std::int64_t resolution = 224);

enum class CostDepth { kStage, kBlock, kOp };
CostDepth parse_cost_depth(const std::string& s);
/// Columns path, kind, Cin, Cout, H, W, params, flops (H, W of the input);
/// the last row is the model total.
ReportTable cost_table(const CostNode& model, CostDepth depth = CostDepth::kBlock);

/// Columns target, kind, Cin, H, W, batch, params_K, flops_M, latency_ms,
/// teraparams, teraflops, source, env. Unmatched latency rows become notes.
ReportTable metrics_table(const JoinResult& joined, const std::string& title);

/// Per-guideline comparison tables. Latency cells come from `latencies`
/// (block rows joined on shape, model rows on preset name) and read "n/a"
/// when absent. Accuracy is never computed.
std::vector<ReportTable> guideline_report(const std::string& id, const std::vector<LatencyRecord>& latencies);

inline constexpr const char* kAccuracyNa = "n/a (training out of scope)";
inline constexpr const char* kMetricUnitsNote =
    "teraflops = FLOPs[M] / latency[ms] (i.e. GFLOP/s); teraparams = Params[K] / latency[ms]; one FLOP = one MAC";

}  // namespace trtvit
