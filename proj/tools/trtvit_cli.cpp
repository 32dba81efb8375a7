// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through trtvit.h.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trtvit/trtvit.h"

namespace {

// Thrown after an API call fails; carries the library's message.
struct ApiError {
  trtvit_status status;
  std::string message;
};

void check(trtvit_status s) {
  if (s != TRTVIT_OK) throw ApiError{s, trtvit_last_error()};
}

struct ArchDeleter {
  void operator()(trtvit_arch* a) const { trtvit_arch_free(a); }
};
struct ModelDeleter {
  void operator()(trtvit_model* m) const { trtvit_model_free(m); }
};
struct StringDeleter {
  void operator()(trtvit_string* s) const { trtvit_string_free(s); }
};
using ArchPtr = std::unique_ptr<trtvit_arch, ArchDeleter>;
using ModelPtr = std::unique_ptr<trtvit_model, ModelDeleter>;
using StringPtr = std::unique_ptr<trtvit_string, StringDeleter>;

std::string take(trtvit_string* s) {
  StringPtr p(s);
  return trtvit_string_data(p.get());
}

trtvit_format parse_format(const std::string& f) {
  if (f == "markdown" || f == "md") return TRTVIT_FORMAT_MARKDOWN;
  if (f == "csv") return TRTVIT_FORMAT_CSV;
  return TRTVIT_FORMAT_JSONL;
}

// A preset name or a spec file, exactly one.
struct TargetArgs {
  std::string preset;
  std::string spec_file;

  void add(CLI::App* cmd, bool required = true) {
    auto* p = cmd->add_option("target", preset, "preset name (see `presets`)");
    auto* s = cmd->add_option("--spec", spec_file, "architecture text file")->check(CLI::ExistingFile);
    p->excludes(s);
    s->excludes(p);
    if (required) cmd->callback([p, s] {
        if (p->count() + s->count() != 1) throw CLI::ValidationError("give exactly one of a preset name or --spec");
      });
  }
  bool given() const { return !preset.empty() || !spec_file.empty(); }
  ArchPtr load() const {
    trtvit_arch* a = nullptr;
    if (!spec_file.empty()) {
      check(trtvit_arch_load(spec_file.c_str(), &a));
    } else {
      check(trtvit_arch_preset(preset.c_str(), &a));
    }
    return ArchPtr(a);
  }
};

void add_format(CLI::App* cmd, std::string& fmt) {
  cmd->add_option("--format", fmt, "output format")
      ->check(CLI::IsMember({"markdown", "md", "csv", "jsonl"}))
      ->capture_default_str();
}

void add_resolution(CLI::App* cmd, std::int64_t& res) {
  cmd->add_option("--res", res, "input resolution (divisible by 32)")->capture_default_str();
}

void check_resolution(std::int64_t res) {
  if (res <= 0 || res % 32) {
    throw ApiError{TRTVIT_ERR_INVALID_ARGUMENT,
                   "resolution " + std::to_string(res) + " is not a positive multiple of 32"};
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Small local table printer for results assembled by the CLI itself.
void print_rows(const std::vector<std::string>& cols, const std::vector<std::vector<std::string>>& rows,
                trtvit_format fmt) {
  if (fmt == TRTVIT_FORMAT_MARKDOWN) {
    std::cout << "|";
    for (const auto& c : cols) std::cout << " " << c << " |";
    std::cout << "\n|";
    for (std::size_t i = 0; i < cols.size(); ++i) std::cout << " --- |";
    std::cout << "\n";
    for (const auto& r : rows) {
      std::cout << "|";
      for (const auto& c : r) std::cout << " " << c << " |";
      std::cout << "\n";
    }
  } else if (fmt == TRTVIT_FORMAT_CSV) {
    for (std::size_t i = 0; i < cols.size(); ++i) std::cout << (i ? "," : "") << cols[i];
    std::cout << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) std::cout << (i ? "," : "") << r[i];
      std::cout << "\n";
    }
  } else {
    for (const auto& r : rows) {
      std::cout << "{";
      for (std::size_t i = 0; i < cols.size(); ++i) {
        char* end = nullptr;
        std::strtod(r[i].c_str(), &end);
        const bool num = !r[i].empty() && end && *end == '\0' && r[i] != "nan" && r[i] != "inf";
        std::cout << (i ? "," : "") << "\"" << cols[i] << "\":" << (num ? r[i] : "\"" + r[i] + "\"");
      }
      std::cout << "}\n";
    }
  }
}

std::vector<float> read_f32(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ApiError{TRTVIT_ERR_IO, "cannot open input '" + path + "'"};
  f.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(f.tellg());
  f.seekg(0);
  if (bytes % 4) throw ApiError{TRTVIT_ERR_FORMAT, path + ": size is not a multiple of 4 bytes"};
  std::vector<float> v(bytes / 4);
  // Raw little-endian float32; the supported hosts are little-endian.
  f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
  if (!f) throw ApiError{TRTVIT_ERR_IO, "read failed for '" + path + "'"};
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Count, time and inspect hybrid convolution/Transformer backbones"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(trtvit_version()));

  std::string fmt = "markdown";
  std::int64_t res = 224;
  bool failed_check = false;

  auto* presets_cmd = app.add_subcommand("presets", "list the built-in architectures");

  TargetArgs describe_t;
  auto* describe_cmd = app.add_subcommand("describe", "stage-by-stage layout of an architecture");
  describe_t.add(describe_cmd);
  add_resolution(describe_cmd, res);
  add_format(describe_cmd, fmt);
  bool emit = false;
  describe_cmd->add_flag("--emit", emit, "print the architecture text form instead");

  TargetArgs count_t;
  std::string depth = "block";
  auto* count_cmd = app.add_subcommand("count", "parameter and FLOP counts");
  count_t.add(count_cmd);
  add_resolution(count_cmd, res);
  add_format(count_cmd, fmt);
  count_cmd->add_option("--depth", depth, "tree depth")->check(CLI::IsMember({"stage", "block", "op"}))
      ->capture_default_str();

  TargetArgs bench_t;
  trtvit_bench_config bcfg = trtvit_bench_default_config();
  std::string stat = "median", bench_out, block_kind;
  std::int64_t b_cin = 0, b_c = 0, b_hw = 0, b_sr = 1, b_k = 3, b_stride = 1;
  double b_ratio = 0.5;
  auto* bench_cmd = app.add_subcommand("bench", "time a preset or a single block on this machine");
  bench_t.add(bench_cmd, false);
  add_resolution(bench_cmd, res);
  add_format(bench_cmd, fmt);
  bench_cmd->add_option("--batch", bcfg.batch, "images per forward call")->capture_default_str();
  bench_cmd->add_option("--warmup", bcfg.warmup, "untimed iterations")->capture_default_str();
  bench_cmd->add_option("--iters", bcfg.iterations, "timed iterations")->capture_default_str();
  bench_cmd->add_option("--stat", stat, "reported statistic")->check(CLI::IsMember({"median", "mean", "min"}))
      ->capture_default_str();
  bench_cmd->add_option("--seed", bcfg.seed, "weight and input seed")->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "also write the latency CSV here");
  bench_cmd->add_option("--block", block_kind, "time one block of this kind instead of a preset");
  bench_cmd->add_option("--c-in", b_cin, "block input channels (default: --c)");
  bench_cmd->add_option("--c", b_c, "block output channels");
  bench_cmd->add_option("--hw", b_hw, "block input extent");
  bench_cmd->add_option("--ratio", b_ratio, "shrinking ratio (mix kinds)")->capture_default_str();
  bench_cmd->add_option("--sr", b_sr, "spatial reduction ratio")->capture_default_str();
  bench_cmd->add_option("--k", b_k, "kernel size")->capture_default_str();
  bench_cmd->add_option("--stride", b_stride, "block stride")->capture_default_str();

  std::string latency;
  bool blocks = false;
  TargetArgs metrics_t;
  auto* metrics_cmd = app.add_subcommand("metrics", "join latencies with counts into TeraFLOPS/TeraParams");
  metrics_t.add(metrics_cmd, false);
  metrics_cmd->add_option("--latency", latency, "latency CSV (from `bench --out` or a shipped table)");
  metrics_cmd->add_flag("--blocks", blocks, "match block rows against the per-block grid");
  add_resolution(metrics_cmd, res);
  add_format(metrics_cmd, fmt);

  std::string gc_kind;
  std::int64_t gc_c = 64, gc_hw = 8;
  std::uint64_t gc_seed = 0;
  int gc_seeds = 1;
  bool gc_tiny = false, gc_ops = false;
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check at 64-bit");
  gc_cmd->add_option("kind", gc_kind, "block kind, op:<name>, or all")->required();
  gc_cmd->add_option("--c", gc_c, "channels")->capture_default_str();
  gc_cmd->add_option("--hw", gc_hw, "map extent")->capture_default_str();
  gc_cmd->add_option("--seed", gc_seed, "first seed")->capture_default_str();
  gc_cmd->add_option("--seeds", gc_seeds, "number of consecutive seeds")->capture_default_str();
  gc_cmd->add_flag("--tiny", gc_tiny, "c=64, hw=4");
  gc_cmd->add_flag("--ops", gc_ops, "with `all`, also check every primitive op");
  add_format(gc_cmd, fmt);

  TargetArgs infer_t;
  std::string weights, input;
  std::uint64_t infer_seed = 0;
  int top = 5;
  auto* infer_cmd = app.add_subcommand("infer", "run a forward pass on a raw float32 CxHxW image");
  infer_t.add(infer_cmd);
  infer_cmd->add_option("--weights", weights, "weights file")->check(CLI::ExistingFile);
  infer_cmd->add_option("--input", input, "raw little-endian float32 image, C x H x W")->required()
      ->check(CLI::ExistingFile);
  infer_cmd->add_option("--seed", infer_seed, "initialization seed when no weights are given")->capture_default_str();
  infer_cmd->add_option("--top", top, "also report the top-k classes")->capture_default_str();
  add_format(infer_cmd, fmt);

  TargetArgs init_t;
  std::string init_out;
  std::uint64_t init_seed = 0;
  auto* init_cmd = app.add_subcommand("init", "write freshly initialized weights");
  init_t.add(init_cmd);
  init_cmd->add_option("--out", init_out, "weights file")->required();
  init_cmd->add_option("--seed", init_seed, "initialization seed")->capture_default_str();

  std::string guide;
  std::vector<std::string> cmp_latency;
  auto* compare_cmd = app.add_subcommand("compare", "guideline comparison tables");
  compare_cmd->add_option("guideline", guide, "g1, g2, g3, g4 or ratio")->required();
  compare_cmd->add_option("--latency", cmp_latency, "latency CSV(s) to fill the latency columns");
  add_format(compare_cmd, fmt);

  CLI11_PARSE(app, argc, argv);
  const trtvit_format f = parse_format(fmt);

  try {
    if (*presets_cmd) {
      for (std::size_t i = 0; i < trtvit_preset_count(); ++i) std::cout << trtvit_preset_name(i) << "\n";
    } else if (*describe_cmd) {
      check_resolution(res);
      ArchPtr a = describe_t.load();
      trtvit_string* s = nullptr;
      check(emit ? trtvit_arch_emit(a.get(), &s) : trtvit_report_describe(a.get(), res, f, &s));
      std::cout << take(s);
    } else if (*count_cmd) {
      check_resolution(res);
      ArchPtr a = count_t.load();
      trtvit_string* s = nullptr;
      check(trtvit_report_count(a.get(), res, depth.c_str(), f, &s));
      std::cout << take(s);
    } else if (*bench_cmd) {
      bcfg.statistic = stat == "mean" ? TRTVIT_STAT_MEAN : stat == "min" ? TRTVIT_STAT_MIN : TRTVIT_STAT_MEDIAN;
      trtvit_bench_result r{};
      trtvit_string* csv = nullptr;
      std::string name;
      if (!block_kind.empty()) {
        if (bench_t.given()) throw ApiError{TRTVIT_ERR_INVALID_ARGUMENT, "give either a target or --block"};
        if (b_c <= 0 || b_hw <= 0) throw ApiError{TRTVIT_ERR_INVALID_ARGUMENT, "--block needs --c and --hw"};
        if (b_cin <= 0) b_cin = b_c;
        check(trtvit_bench_block(block_kind.c_str(), b_cin, b_c, b_hw, b_ratio, b_sr, b_k, b_stride, &bcfg, &r, &csv));
        name = block_kind + "-" + std::to_string(b_cin) + "x" + std::to_string(b_hw);
      } else {
        if (!bench_t.given()) throw ApiError{TRTVIT_ERR_INVALID_ARGUMENT, "give a preset, --spec or --block"};
        check_resolution(res);
        ArchPtr a = bench_t.load();
        check(trtvit_bench_arch(a.get(), res, &bcfg, &r, &csv));
        name = trtvit_arch_name(a.get());
      }
      const std::string text = take(csv);
      if (!bench_out.empty()) {
        std::ofstream o(bench_out, std::ios::binary | std::ios::trunc);
        if (!(o << text)) throw ApiError{TRTVIT_ERR_IO, "cannot write '" + bench_out + "'"};
      }
      print_rows({"target", "batch", "statistic", "latency_ms", "min_ms", "median_ms", "mean_ms", "max_ms", "source"},
                 {{name, std::to_string(bcfg.batch), stat, fixed(r.latency_ms, 4), fixed(r.min_ms, 4),
                   fixed(r.median_ms, 4), fixed(r.mean_ms, 4), fixed(r.max_ms, 4), "measured-local"}},
                 f);
    } else if (*metrics_cmd) {
      ArchPtr a;
      if (metrics_t.given()) {
        check_resolution(res);
        a = metrics_t.load();
      }
      trtvit_string* s = nullptr;
      check(trtvit_report_metrics(latency.c_str(), blocks ? 1 : 0, a.get(), res, f, &s));
      std::cout << take(s);
    } else if (*gc_cmd) {
      if (gc_tiny) {
        gc_c = 64;
        gc_hw = 4;
      }
      std::vector<std::string> kinds;
      if (gc_kind == "all") {
        kinds = {"conv", "maxpool", "bottleneck", "transformer", "mixa", "mixb", "mixc"};
        if (gc_ops) {
          for (std::size_t i = 0; i < trtvit_gradcheck_op_count(); ++i) {
            kinds.push_back(std::string("op:") + trtvit_gradcheck_op_name(i));
          }
        }
      } else {
        kinds = {gc_kind};
      }
      std::vector<std::vector<std::string>> rows;
      for (const auto& k : kinds) {
        for (int i = 0; i < gc_seeds; ++i) {
          const std::uint64_t seed = gc_seed + static_cast<std::uint64_t>(i);
          trtvit_gradcheck_result r{};
          trtvit_string* worst = nullptr;
          check(trtvit_gradcheck(k.c_str(), gc_c, gc_hw, seed, &r, &worst));
          if (!r.pass) failed_check = true;
          char err[32];
          std::snprintf(err, sizeof(err), "%.3e", r.max_rel_err);
          rows.push_back({k, std::to_string(gc_c), std::to_string(gc_hw), std::to_string(seed), r.pass ? "PASS" : "FAIL",
                          err, std::to_string(r.checked), std::to_string(r.skipped_nonsmooth),
                          std::to_string(r.total_coords), take(worst)});
        }
      }
      print_rows({"kind", "c", "hw", "seed", "result", "max_rel_err", "checked", "skipped_nonsmooth", "coords", "worst"},
                 rows, f);
    } else if (*infer_cmd) {
      ArchPtr a = infer_t.load();
      trtvit_model* m = nullptr;
      check(trtvit_model_create(a.get(), infer_seed, &m));
      ModelPtr model(m);
      if (!weights.empty()) check(trtvit_model_load_weights(model.get(), weights.c_str()));
      const std::vector<float> img = read_f32(input);
      const std::int64_t c = trtvit_model_in_channels(model.get());
      const auto per = static_cast<std::int64_t>(img.size()) / c;
      const auto hw = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(per))));
      if (static_cast<std::int64_t>(img.size()) != c * hw * hw) {
        throw ApiError{TRTVIT_ERR_DIMENSION, input + ": " + std::to_string(img.size()) +
                                                 " floats is not a square " + std::to_string(c) + "-channel image"};
      }
      const std::int64_t classes = trtvit_model_num_classes(model.get());
      std::vector<float> logits(static_cast<std::size_t>(classes));
      check(trtvit_model_forward(model.get(), img.data(), 1, hw, hw, logits.data(), logits.size()));
      std::vector<std::vector<std::string>> rows;
      char buf[32];
      for (std::int64_t i = 0; i < classes; ++i) {
        std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(logits[static_cast<std::size_t>(i)]));
        rows.push_back({std::to_string(i), buf});
      }
      print_rows({"class", "logit"}, rows, f);
      if (top > 0 && f == TRTVIT_FORMAT_MARKDOWN) {
        std::vector<std::int64_t> idx(static_cast<std::size_t>(classes));
        for (std::int64_t i = 0; i < classes; ++i) idx[static_cast<std::size_t>(i)] = i;
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(top), idx.size());
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                          [&](std::int64_t x, std::int64_t y) {
                            return logits[static_cast<std::size_t>(x)] > logits[static_cast<std::size_t>(y)];
                          });
        std::cout << "\ntop-" << k << ":";
        for (std::size_t i = 0; i < k; ++i) std::cout << " " << idx[i];
        std::cout << "\n";
      }
    } else if (*init_cmd) {
      ArchPtr a = init_t.load();
      trtvit_model* m = nullptr;
      check(trtvit_model_create(a.get(), init_seed, &m));
      ModelPtr model(m);
      check(trtvit_model_save_weights(model.get(), init_out.c_str()));
      std::int64_t n = 0;
      check(trtvit_model_parameter_count(model.get(), &n));
      std::cerr << "wrote " << init_out << " (" << n << " parameters)\n";
    } else if (*compare_cmd) {
      std::vector<const char*> paths;
      for (const auto& p : cmp_latency) paths.push_back(p.c_str());
      trtvit_string* s = nullptr;
      check(trtvit_report_compare(guide.c_str(), paths.data(), paths.size(), f, &s));
      std::cout << take(s);
    }
  } catch (const ApiError& e) {
    std::cerr << "error (" << trtvit_status_name(e.status) << "): " << e.message << "\n";
    return 2;
  }
  return failed_check ? 1 : 0;
}
