// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>

namespace trtvit {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      f.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  f.push_back(cur);
  return f;
}

std::string fmt_double(double x) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

void check_field(const std::string& s, const char* what) {
  if (s.find_first_of(",\"\n\r") != std::string::npos) {
    throw InvalidArgument(std::string("latency csv: ") + what + " '" + s + "' contains a comma, quote or newline");
  }
}

}  // namespace

std::vector<LatencyRecord> parse_latency_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  bool header = false;
  std::vector<LatencyRecord> out;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(n) + ": ";
    if (!header) {
      if (line != kLatencyCsvHeader) throw FormatError(where + "expected header '" + kLatencyCsvHeader + "'");
      header = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 10) throw FormatError(where + "expected 10 fields, got " + std::to_string(f.size()));
    LatencyRecord r;
    r.target = f[0];
    r.kind = f[1];
    std::int64_t* ints[] = {&r.c_in, &r.c_out, &r.h, &r.w, &r.batch};
    for (int i = 0; i < 5; ++i) {
      const auto& s = f[static_cast<std::size_t>(2 + i)];
      auto res = std::from_chars(s.data(), s.data() + s.size(), *ints[i]);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw FormatError(where + "bad integer '" + s + "' in column " + std::to_string(3 + i));
      }
    }
    {
      const auto& s = f[7];
      auto res = std::from_chars(s.data(), s.data() + s.size(), r.latency_ms);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw FormatError(where + "bad latency '" + s + "'");
      }
    }
    r.source = f[8];
    r.env = f[9];
    if (r.target.empty() || r.kind.empty()) throw FormatError(where + "empty target or kind");
    if (!(r.latency_ms > 0)) throw InvalidArgument(where + "latency must be positive, got " + f[7]);
    if (r.batch < 1) throw InvalidArgument(where + "batch must be >= 1");
    out.push_back(std::move(r));
  }
  if (!header) throw FormatError("latency csv: missing header row");
  return out;
}

std::string format_latency_csv(const std::vector<LatencyRecord>& records) {
  std::string s = std::string(kLatencyCsvHeader) + "\n";
  for (const auto& r : records) {
    check_field(r.target, "target");
    check_field(r.kind, "kind");
    check_field(r.source, "source");
    check_field(r.env, "env");
    if (!(r.latency_ms > 0)) throw InvalidArgument("latency csv: non-positive latency for '" + r.target + "'");
    s += r.target + "," + r.kind + "," + std::to_string(r.c_in) + "," + std::to_string(r.c_out) + "," +
         std::to_string(r.h) + "," + std::to_string(r.w) + "," + std::to_string(r.batch) + "," +
         fmt_double(r.latency_ms) + "," + r.source + "," + r.env + "\n";
  }
  return s;
}

std::vector<LatencyRecord> import_latency_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open latency file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    return parse_latency_csv(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

void export_latency_csv(const std::vector<LatencyRecord>& records, const std::string& path) {
  const std::string s = format_latency_csv(records);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << s;
  if (!f) throw IoError("write failed for '" + path + "'");
}

const char* statistic_name(Statistic s) {
  switch (s) {
    case Statistic::kMedian: return "median";
    case Statistic::kMean: return "mean";
    case Statistic::kMin: return "min";
  }
  return "median";
}

Statistic parse_statistic(const std::string& s) {
  if (s == "median") return Statistic::kMedian;
  if (s == "mean") return Statistic::kMean;
  if (s == "min") return Statistic::kMin;
  throw InvalidArgument("unknown statistic '" + s + "' (median, mean, min)");
}

void BenchConfig::validate() const {
  if (warmup < 1) throw InvalidArgument("bench: warmup must be >= 1");
  if (iterations < 3) throw InvalidArgument("bench: iterations must be >= 3");
  if (batch < 1) throw InvalidArgument("bench: batch must be >= 1");
}

BenchStats summarize(std::vector<double> samples_ms) {
  if (samples_ms.empty()) throw InvalidArgument("bench: no samples");
  BenchStats s;
  std::vector<double> sorted = samples_ms;
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  const std::size_t n = sorted.size();
  s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  s.samples_ms = std::move(samples_ms);
  return s;
}

BenchTarget block_target(const BlockSpec& spec, std::int64_t c_in, std::int64_t h, std::int64_t w) {
  BenchTarget t;
  t.name = std::string(block_kind_name(spec.kind)) + "-" + std::to_string(c_in) + "x" + std::to_string(h);
  t.block = spec;
  t.c_in = c_in;
  t.h = h;
  t.w = w;
  return t;
}

BenchTarget model_target(const ArchSpec& arch, std::int64_t resolution) {
  BenchTarget t;
  t.name = arch.name;
  t.is_model = true;
  t.arch = arch;
  t.resolution = resolution;
  return t;
}

std::string host_environment() {
  std::string env = "local-cpu 1-thread";
#if defined(__clang__)
  env += " clang-" + std::to_string(__clang_major__);
#elif defined(__GNUC__)
  env += " gcc-" + std::to_string(__GNUC__);
#endif
  return env;
}

LatencyRecord bench_target(const BenchTarget& target, const BenchConfig& cfg, std::uint64_t seed, BenchStats* stats) {
  cfg.validate();
  LatencyRecord rec;
  rec.target = target.name;
  rec.batch = cfg.batch;
  rec.source = "measured-local";
  rec.env = host_environment() + " bs" + std::to_string(cfg.batch) + " " + statistic_name(cfg.statistic);

  std::function<void()> run;
  std::unique_ptr<Model<float>> model;
  std::unique_ptr<Block<float>> block;
  Rng rng(seed);
  Var<float> input;
  if (target.is_model) {
    model = Model<float>::instantiate(target.arch, seed);
    rec.kind = "model";
    rec.c_in = target.arch.in_channels;
    rec.c_out = target.arch.num_classes;
    rec.h = rec.w = target.resolution;
    input = Var<float>::leaf(rand_normal<float>(rng, {cfg.batch, rec.c_in, rec.h, rec.w}, 1.0));
    run = [&] { (void)model->forward(Context<float>{}, input); };
  } else {
    const auto v = block_resolution_violations(target.block, target.h, target.w);
    if (!v.empty()) throw InvalidArgument(target.name + ": " + v.front());
    Rng init = rng.split(1);
    block = make_block<float>(target.block, target.c_in, init);
    rec.kind = block_kind_name(target.block.kind);
    rec.c_in = target.c_in;
    rec.c_out = target.block.out_channels;
    rec.h = target.h;
    rec.w = target.w;
    input = Var<float>::leaf(rand_normal<float>(rng, {cfg.batch, rec.c_in, rec.h, rec.w}, 1.0));
    run = [&] { (void)block->forward(Context<float>{}, input); };
  }

  for (int i = 0; i < cfg.warmup; ++i) run();
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int i = 0; i < cfg.iterations; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    run();
    const auto t1 = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  BenchStats s = summarize(std::move(samples));
  switch (cfg.statistic) {
    case Statistic::kMedian: rec.latency_ms = s.median; break;
    case Statistic::kMean: rec.latency_ms = s.mean; break;
    case Statistic::kMin: rec.latency_ms = s.min; break;
  }
  // A clock tick can round a tiny block to zero.
  rec.latency_ms = std::max(rec.latency_ms, 1e-6);
  if (stats) *stats = std::move(s);
  return rec;
}

std::vector<CostItem> grid_cost_items() {
  std::vector<CostItem> out;
  for (const auto& g : efficiency_grid()) {
    const CostNode n = count_block(g.spec, g.c_in, g.h, g.w, g.target);
    out.push_back({g.target, block_kind_name(g.spec.kind), g.c_in, g.spec.out_channels, g.h, g.w, n.params, n.flops});
  }
  return out;
}

CostItem model_cost_item(const ArchSpec& arch, std::int64_t resolution) {
  const CostNode n = count_model(arch, resolution);
  return {arch.name, "model", arch.in_channels, arch.num_classes, resolution, resolution, n.params, n.flops};
}

JoinResult join_metrics(const std::vector<CostItem>& costs, const std::vector<LatencyRecord>& latencies) {
  JoinResult res;
  for (const auto& r : latencies) {
    const CostItem* hit = nullptr;
    for (const auto& c : costs) {
      const bool match = r.kind == "model"
                             ? (c.kind == "model" && c.target == r.target)
                             : (c.kind == r.kind && c.c_in == r.c_in && c.c_out == r.c_out && c.h == r.h && c.w == r.w);
      if (match) {
        hit = &c;
        break;
      }
    }
    if (!hit) {
      res.unmatched.push_back(r);
      continue;
    }
    MetricRow m;
    m.target = r.target;
    m.kind = r.kind;
    m.c_in = r.c_in;
    m.h = r.h;
    m.w = r.w;
    m.batch = r.batch;
    m.params_k = static_cast<double>(hit->params) / 1e3;
    m.flops_m = static_cast<double>(hit->flops) / 1e6;
    m.latency_ms = r.latency_ms;
    m.teraparams = teraparams(m.params_k, r.latency_ms);
    m.teraflops = teraflops(m.flops_m, r.latency_ms);
    m.source = r.source;
    m.env = r.env;
    res.rows.push_back(std::move(m));
  }
  return res;
}

}  // namespace trtvit
