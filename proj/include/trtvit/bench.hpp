// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trtvit/analysis.hpp"

namespace trtvit {

/// One latency observation: latency of a full forward call of `batch` images.
/// Block targets carry their input (c_in, h, w); model targets use kind
/// "model" and the input image shape.
struct LatencyRecord {
  std::string target;
  std::string kind;
  std::int64_t c_in = 0;
  std::int64_t c_out = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::int64_t batch = 1;
  double latency_ms = 0.0;
  std::string source;  // "measured-local" or "imported"
  std::string env;

  bool operator==(const LatencyRecord&) const = default;
};

inline constexpr const char* kLatencyCsvHeader = "target,kind,c_in,c_out,h,w,batch,latency_ms,source,env";

/// Throws FormatError("line N: ...") for malformed rows and InvalidArgument
/// for non-positive latency or batch.
std::vector<LatencyRecord> parse_latency_csv(const std::string& text);
std::string format_latency_csv(const std::vector<LatencyRecord>& records);
std::vector<LatencyRecord> import_latency_csv(const std::string& path);
void export_latency_csv(const std::vector<LatencyRecord>& records, const std::string& path);

enum class Statistic { kMedian, kMean, kMin };
const char* statistic_name(Statistic s);
Statistic parse_statistic(const std::string& s);

struct BenchConfig {
  int warmup = 10;
  int iterations = 50;
  std::int64_t batch = 1;
  Statistic statistic = Statistic::kMedian;

  /// Throws InvalidArgument unless warmup >= 1, iterations >= 3, batch >= 1.
  void validate() const;
};

struct BenchStats {
  std::vector<double> samples_ms;
  double min = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double max = 0.0;
};
BenchStats summarize(std::vector<double> samples_ms);

/// What to time: a single block on a c_in x h x w map, or a whole preset.
struct BenchTarget {
  std::string name;
  bool is_model = false;
  ArchSpec arch;
  std::int64_t resolution = 224;
  BlockSpec block;
  std::int64_t c_in = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;
};
BenchTarget block_target(const BlockSpec& spec, std::int64_t c_in, std::int64_t h, std::int64_t w);
BenchTarget model_target(const ArchSpec& arch, std::int64_t resolution = 224);

/// Builds the target at 32-bit, synthesizes a fixed input from seed, runs the
/// warmup and measured iterations single-threaded on a monotonic clock.
LatencyRecord bench_target(const BenchTarget& target, const BenchConfig& cfg, std::uint64_t seed,
                           BenchStats* stats = nullptr);

std::string host_environment();

/// Analytic cost of something that latency rows can refer to.
struct CostItem {
  std::string target;
  std::string kind;
  std::int64_t c_in = 0;
  std::int64_t c_out = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::int64_t params = 0;
  std::int64_t flops = 0;
};
std::vector<CostItem> grid_cost_items();
CostItem model_cost_item(const ArchSpec& arch, std::int64_t resolution = 224);

struct MetricRow {
  std::string target;
  std::string kind;
  std::int64_t c_in = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::int64_t batch = 0;
  double params_k = 0.0;
  double flops_m = 0.0;
  double latency_ms = 0.0;
  double teraparams = 0.0;
  double teraflops = 0.0;
  std::string source;
  std::string env;
};

struct JoinResult {
  std::vector<MetricRow> rows;
  std::vector<LatencyRecord> unmatched;
};

/// Matches model records by target name and block records by
/// (kind, c_in, c_out, h, w). Every record lands in exactly one output list.
JoinResult join_metrics(const std::vector<CostItem>& costs, const std::vector<LatencyRecord>& latencies);

}  // namespace trtvit
