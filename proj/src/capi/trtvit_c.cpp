// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/trtvit.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "trtvit/gradcheck_suite.hpp"
#include "trtvit/reports.hpp"

struct trtvit_arch {
  trtvit::ArchSpec spec;
};

struct trtvit_model {
  std::unique_ptr<trtvit::Model<float>> model;
};

struct trtvit_string {
  std::string text;
};

namespace {

thread_local std::string g_last_error;

trtvit_status fail(trtvit_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs fn, mapping library exceptions onto status codes.
template <class F>
trtvit_status guard(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TRTVIT_OK;
  } catch (const trtvit::DimensionError& e) {
    return fail(TRTVIT_ERR_DIMENSION, e.what());
  } catch (const trtvit::InvalidArgument& e) {
    return fail(TRTVIT_ERR_INVALID_ARGUMENT, e.what());
  } catch (const trtvit::PrecisionError& e) {
    return fail(TRTVIT_ERR_PRECISION, e.what());
  } catch (const trtvit::FormatError& e) {
    return fail(TRTVIT_ERR_FORMAT, e.what());
  } catch (const trtvit::IoError& e) {
    return fail(TRTVIT_ERR_IO, e.what());
  } catch (const trtvit::NotFound& e) {
    return fail(TRTVIT_ERR_NOT_FOUND, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TRTVIT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TRTVIT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TRTVIT_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw trtvit::InvalidArgument(std::string(what) + " must not be NULL");
}

trtvit::ReportFormat to_format(trtvit_format f) {
  switch (f) {
    case TRTVIT_FORMAT_MARKDOWN: return trtvit::ReportFormat::kMarkdown;
    case TRTVIT_FORMAT_CSV: return trtvit::ReportFormat::kCsv;
    case TRTVIT_FORMAT_JSONL: return trtvit::ReportFormat::kJsonl;
  }
  throw trtvit::InvalidArgument("unknown report format " + std::to_string(static_cast<int>(f)));
}

trtvit::Statistic to_statistic(trtvit_statistic s) {
  switch (s) {
    case TRTVIT_STAT_MEDIAN: return trtvit::Statistic::kMedian;
    case TRTVIT_STAT_MEAN: return trtvit::Statistic::kMean;
    case TRTVIT_STAT_MIN: return trtvit::Statistic::kMin;
  }
  throw trtvit::InvalidArgument("unknown statistic " + std::to_string(static_cast<int>(s)));
}

trtvit::BenchConfig to_bench_config(const trtvit_bench_config* c) {
  trtvit::BenchConfig cfg;
  if (c) {
    cfg.warmup = c->warmup;
    cfg.iterations = c->iterations;
    cfg.batch = c->batch;
    cfg.statistic = to_statistic(c->statistic);
  }
  return cfg;
}

trtvit_string* new_string(std::string s) { return new trtvit_string{std::move(s)}; }

void store_bench(const trtvit::LatencyRecord& rec, const trtvit::BenchStats& st, trtvit_bench_result* result,
                 trtvit_string** csv_out) {
  if (result) *result = {rec.latency_ms, st.min, st.median, st.mean, st.max};
  if (csv_out) *csv_out = new_string(trtvit::format_latency_csv({rec}));
}

}  // namespace

extern "C" {

const char* trtvit_version(void) { return "1.0.0"; }

const char* trtvit_status_name(trtvit_status status) {
  switch (status) {
    case TRTVIT_OK: return "ok";
    case TRTVIT_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TRTVIT_ERR_DIMENSION: return "dimension error";
    case TRTVIT_ERR_PRECISION: return "precision error";
    case TRTVIT_ERR_FORMAT: return "format error";
    case TRTVIT_ERR_IO: return "i/o error";
    case TRTVIT_ERR_NOT_FOUND: return "not found";
    case TRTVIT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* trtvit_last_error(void) { return g_last_error.c_str(); }

const char* trtvit_string_data(const trtvit_string* s) { return s ? s->text.c_str() : ""; }
size_t trtvit_string_size(const trtvit_string* s) { return s ? s->text.size() : 0; }
void trtvit_string_free(trtvit_string* s) { delete s; }

size_t trtvit_preset_count(void) { return trtvit::preset_names().size(); }

const char* trtvit_preset_name(size_t index) {
  const auto& n = trtvit::preset_names();
  return index < n.size() ? n[index].c_str() : nullptr;
}

trtvit_status trtvit_arch_preset(const char* name, trtvit_arch** out) {
  return guard([&] {
    require(name && out, "name and out");
    *out = new trtvit_arch{trtvit::preset(name)};
  });
}

trtvit_status trtvit_arch_parse(const char* text, trtvit_arch** out) {
  return guard([&] {
    require(text && out, "text and out");
    *out = new trtvit_arch{trtvit::parse_arch(text)};
  });
}

trtvit_status trtvit_arch_load(const char* path, trtvit_arch** out) {
  return guard([&] {
    require(path && out, "path and out");
    std::ifstream f(path, std::ios::binary);
    if (!f) throw trtvit::IoError(std::string("cannot open arch file '") + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    try {
      *out = new trtvit_arch{trtvit::parse_arch(ss.str())};
    } catch (const trtvit::FormatError& e) {
      throw trtvit::FormatError(std::string(path) + ": " + e.what());
    }
  });
}

void trtvit_arch_free(trtvit_arch* arch) { delete arch; }

const char* trtvit_arch_name(const trtvit_arch* arch) { return arch ? arch->spec.name.c_str() : ""; }

trtvit_status trtvit_arch_emit(const trtvit_arch* arch, trtvit_string** out) {
  return guard([&] {
    require(arch && out, "arch and out");
    *out = new_string(trtvit::emit_arch(arch->spec));
  });
}

trtvit_status trtvit_arch_validate(const trtvit_arch* arch, int64_t resolution) {
  return guard([&] {
    require(arch, "arch");
    const auto v = trtvit::validate(arch->spec, resolution);
    if (v.empty()) return;
    std::string msg = "invalid arch '" + arch->spec.name + "':";
    for (const auto& m : v) msg += "\n  " + m;
    throw trtvit::InvalidArgument(msg);
  });
}

trtvit_status trtvit_arch_count(const trtvit_arch* arch, int64_t resolution, int64_t* params, int64_t* flops) {
  return guard([&] {
    require(arch, "arch");
    const trtvit::CostNode c = trtvit::count_model(arch->spec, resolution);
    if (params) *params = c.params;
    if (flops) *flops = c.flops;
  });
}

trtvit_status trtvit_report_describe(const trtvit_arch* arch, int64_t resolution, trtvit_format format,
                                     trtvit_string** out) {
  return guard([&] {
    require(arch && out, "arch and out");
    *out = new_string(trtvit::describe_table(arch->spec, resolution).render(to_format(format)));
  });
}

trtvit_status trtvit_report_count(const trtvit_arch* arch, int64_t resolution, const char* depth,
                                  trtvit_format format, trtvit_string** out) {
  return guard([&] {
    require(arch && out, "arch and out");
    const trtvit::CostDepth d = trtvit::parse_cost_depth(depth ? depth : "block");
    const trtvit::CostNode c = trtvit::count_model(arch->spec, resolution);
    *out = new_string(trtvit::cost_table(c, d).render(to_format(format)));
  });
}

trtvit_status trtvit_report_metrics(const char* latency_csv_path, int include_blocks, const trtvit_arch* extra,
                                    int64_t resolution, trtvit_format format, trtvit_string** out) {
  return guard([&] {
    require(out, "out");
    if (!latency_csv_path || !*latency_csv_path) {
      throw trtvit::InvalidArgument(
          "no latency source: run `bench` and pass its CSV, or import a table such as data/table1_t4.csv");
    }
    const auto records = trtvit::import_latency_csv(latency_csv_path);
    std::vector<trtvit::CostItem> costs;
    if (include_blocks) costs = trtvit::grid_cost_items();
    if (extra) costs.push_back(trtvit::model_cost_item(extra->spec, resolution));
    for (const auto& n : trtvit::preset_names()) {
      if (extra && n == extra->spec.name) continue;
      costs.push_back(trtvit::model_cost_item(trtvit::preset(n)));
    }
    std::vector<trtvit::LatencyRecord> wanted;
    for (const auto& r : records) {
      if (include_blocks || r.kind == "model") wanted.push_back(r);
    }
    const trtvit::JoinResult j = trtvit::join_metrics(costs, wanted);
    if (j.rows.empty()) {
      throw trtvit::NotFound(std::string("no latency row in '") + latency_csv_path + "' matches a known target" +
                             (include_blocks ? "" : " (block rows need --blocks)"));
    }
    *out = new_string(trtvit::metrics_table(j, "metrics").render(to_format(format)));
  });
}

trtvit_status trtvit_report_compare(const char* id, const char* const* latency_csv_paths, size_t path_count,
                                    trtvit_format format, trtvit_string** out) {
  return guard([&] {
    require(id && out, "id and out");
    std::vector<trtvit::LatencyRecord> lat;
    for (size_t i = 0; i < path_count; ++i) {
      require(latency_csv_paths && latency_csv_paths[i], "latency path");
      const auto r = trtvit::import_latency_csv(latency_csv_paths[i]);
      lat.insert(lat.end(), r.begin(), r.end());
    }
    *out = new_string(trtvit::render_all(trtvit::guideline_report(id, lat), to_format(format)));
  });
}

trtvit_bench_config trtvit_bench_default_config(void) { return {10, 50, 1, TRTVIT_STAT_MEDIAN, 0}; }

trtvit_status trtvit_bench_arch(const trtvit_arch* arch, int64_t resolution, const trtvit_bench_config* config,
                                trtvit_bench_result* result, trtvit_string** csv_out) {
  return guard([&] {
    require(arch, "arch");
    const trtvit::BenchConfig cfg = to_bench_config(config);
    const auto v = trtvit::validate(arch->spec, resolution);
    if (!v.empty()) throw trtvit::InvalidArgument("invalid arch '" + arch->spec.name + "': " + v.front());
    trtvit::BenchStats st;
    const auto rec = trtvit::bench_target(trtvit::model_target(arch->spec, resolution), cfg,
                                          config ? config->seed : 0, &st);
    store_bench(rec, st, result, csv_out);
  });
}

trtvit_status trtvit_bench_block(const char* kind, int64_t c_in, int64_t c_out, int64_t hw, double ratio,
                                 int64_t sr_ratio, int64_t kernel, int64_t stride, const trtvit_bench_config* config,
                                 trtvit_bench_result* result, trtvit_string** csv_out) {
  return guard([&] {
    require(kind, "kind");
    const trtvit::BlockKind k = trtvit::parse_block_kind(kind);
    trtvit::BlockSpec spec;
    switch (k) {
      case trtvit::BlockKind::kConv: spec = trtvit::conv_block(c_out, kernel, stride); break;
      case trtvit::BlockKind::kMaxPool: spec = trtvit::maxpool_block(c_out); break;
      case trtvit::BlockKind::kBottleNeck: spec = trtvit::bottleneck_block(c_out, stride, kernel); break;
      case trtvit::BlockKind::kTransformer: spec = trtvit::transformer_block(c_out, stride, sr_ratio); break;
      default: spec = trtvit::mix_block(k, c_out, ratio, sr_ratio, kernel, stride); break;
    }
    const auto v = trtvit::block_violations(spec, c_in);
    if (!v.empty()) throw trtvit::InvalidArgument(std::string(kind) + ": " + v.front());
    trtvit::BenchStats st;
    const auto rec = trtvit::bench_target(trtvit::block_target(spec, c_in, hw, hw), to_bench_config(config),
                                          config ? config->seed : 0, &st);
    store_bench(rec, st, result, csv_out);
  });
}

trtvit_status trtvit_gradcheck(const char* kind, int64_t c, int64_t hw, uint64_t seed,
                               trtvit_gradcheck_result* result, trtvit_string** worst_out) {
  return guard([&] {
    require(kind, "kind");
    const std::string k = kind;
    trtvit::GradcheckReport rep;
    if (k.rfind("op:", 0) == 0) {
      rep = trtvit::gradcheck_op(k.substr(3), c, hw, seed);
    } else {
      const trtvit::BlockKind bk = trtvit::parse_block_kind(k);
      rep = trtvit::gradcheck_block(trtvit::gradcheck_block_spec(bk, c), c, hw, seed);
    }
    if (result) *result = {rep.max_rel_err, rep.total_coords, rep.checked, rep.skipped_nonsmooth, rep.pass ? 1 : 0};
    if (worst_out) *worst_out = new_string(rep.worst);
  });
}

size_t trtvit_gradcheck_op_count(void) { return trtvit::gradcheck_op_names().size(); }

const char* trtvit_gradcheck_op_name(size_t index) {
  const auto& n = trtvit::gradcheck_op_names();
  return index < n.size() ? n[index].c_str() : nullptr;
}

trtvit_status trtvit_model_create(const trtvit_arch* arch, uint64_t seed, trtvit_model** out) {
  return guard([&] {
    require(arch && out, "arch and out");
    *out = new trtvit_model{trtvit::Model<float>::instantiate(arch->spec, seed)};
  });
}

void trtvit_model_free(trtvit_model* model) { delete model; }

int64_t trtvit_model_num_classes(const trtvit_model* model) {
  return model ? model->model->spec().num_classes : 0;
}

int64_t trtvit_model_in_channels(const trtvit_model* model) {
  return model ? model->model->spec().in_channels : 0;
}

trtvit_status trtvit_model_parameter_count(const trtvit_model* model, int64_t* out) {
  return guard([&] {
    require(model && out, "model and out");
    *out = model->model->parameter_count();
  });
}

trtvit_status trtvit_model_save_weights(const trtvit_model* model, const char* path) {
  return guard([&] {
    require(model && path, "model and path");
    trtvit::save_weights(model->model->weights(), path);
  });
}

trtvit_status trtvit_model_load_weights(trtvit_model* model, const char* path) {
  return guard([&] {
    require(model && path, "model and path");
    model->model->load(trtvit::load_weights(path));
  });
}

trtvit_status trtvit_model_forward(const trtvit_model* model, const float* input, int64_t batch, int64_t h, int64_t w,
                                   float* logits, size_t logits_len) {
  return guard([&] {
    require(model && input && logits, "model, input and logits");
    if (batch < 1 || h < 1 || w < 1) throw trtvit::DimensionError("batch, h and w must be positive");
    const auto& spec = model->model->spec();
    const int64_t classes = spec.num_classes;
    if (logits_len < static_cast<size_t>(batch * classes)) {
      throw trtvit::DimensionError("logits buffer holds " + std::to_string(logits_len) + " floats, need " +
                                   std::to_string(batch * classes));
    }
    const auto n = static_cast<size_t>(batch * spec.in_channels * h * w);
    std::vector<float> data(input, input + n);
    const trtvit::Tensor<float> x({batch, spec.in_channels, h, w}, std::move(data));
    const trtvit::Tensor<float> y = model->model->predict(x);
    std::memcpy(logits, y.ptr(), static_cast<size_t>(y.size()) * sizeof(float));
  });
}

}  // extern "C"
