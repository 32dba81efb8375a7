// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/reports.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <optional>

#include "json.hpp"

namespace trtvit {

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string md_cell(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '|') o += '\\';
    o += c;
  }
  return o;
}

nlohmann::json json_cell(const std::string& s) {
  if (!s.empty()) {
    std::int64_t i = 0;
    auto ri = std::from_chars(s.data(), s.data() + s.size(), i);
    if (ri.ec == std::errc() && ri.ptr == s.data() + s.size()) return i;
    double d = 0;
    auto rd = std::from_chars(s.data(), s.data() + s.size(), d);
    if (rd.ec == std::errc() && rd.ptr == s.data() + s.size()) return d;
  }
  return s;
}

std::string trim_ratio(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", r);
  return buf;
}

std::string millions(std::int64_t n) { return format_fixed(static_cast<double>(n) / 1e6, 2); }
std::string billions(std::int64_t n) { return format_fixed(static_cast<double>(n) / 1e9, 2); }

std::string join_depths(const std::vector<std::int64_t>& d) {
  std::string s;
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "-" : "") + std::to_string(d[i]);
  return s;
}

std::optional<double> model_latency(const std::vector<LatencyRecord>& lat, const std::string& name) {
  for (const auto& r : lat) {
    if (r.kind == "model" && r.target == name) return r.latency_ms;
  }
  return std::nullopt;
}

std::string opt_fixed(const std::optional<double>& v, int digits) {
  return v ? format_fixed(*v, digits) : std::string("n/a");
}

std::string block_types(const ArchSpec& a) {
  std::string s;
  for (std::size_t i = 2; i < a.stages.size(); ++i) {
    if (!s.empty()) s += '-';
    s += stage_block_type(a.stages[i]);
  }
  return s;
}

ReportTable model_table(const std::string& title, const std::vector<std::string>& names,
                        const std::vector<LatencyRecord>& lat) {
  ReportTable t;
  t.title = title;
  t.columns = {"model", "stage_depth", "block_type", "params_M", "flops_G", "latency_ms", "top1_acc"};
  for (const auto& n : names) {
    const ArchSpec a = preset(n);
    const CostNode c = count_model(a);
    t.rows.push_back({n, join_depths(a.main_depths()), block_types(a), millions(c.params), billions(c.flops),
                      opt_fixed(model_latency(lat, n), 2), kAccuracyNa});
  }
  t.notes.push_back("params and FLOPs are analytic counts at 224x224; latency is read from the supplied table");
  return t;
}

ReportTable g1_table(const std::vector<LatencyRecord>& lat) {
  ReportTable t;
  t.title = "g1: per-block efficiency grid";
  t.columns = {"block", "feature_map", "c", "params_K", "flops_M", "latency_ms", "teraparams", "teraflops"};
  const auto costs = grid_cost_items();
  std::vector<LatencyRecord> block_lat;
  for (const auto& r : lat) {
    if (r.kind != "model") block_lat.push_back(r);
  }
  const JoinResult j = join_metrics(costs, block_lat);
  std::map<std::string, double> tf;  // kind@h -> teraflops
  for (const auto& c : costs) {
    const MetricRow* m = nullptr;
    for (const auto& r : j.rows) {
      if (r.kind == c.kind && r.c_in == c.c_in && r.h == c.h && r.w == c.w) m = &r;
    }
    const std::string fm = std::to_string(c.c_in) + "x" + std::to_string(c.h) + "x" + std::to_string(c.w);
    std::vector<std::string> row = {c.kind, fm, std::to_string(c.c_out),
                                    format_fixed(static_cast<double>(c.params) / 1e3, 1),
                                    format_fixed(static_cast<double>(c.flops) / 1e6, 1)};
    if (m) {
      row.push_back(format_fixed(m->latency_ms, 3));
      row.push_back(format_fixed(m->teraparams, 1));
      row.push_back(format_fixed(m->teraflops, 1));
      tf[c.kind + "@" + std::to_string(c.h)] = m->teraflops;
    } else {
      row.insert(row.end(), {"n/a", "n/a", "n/a"});
    }
    t.rows.push_back(std::move(row));
  }
  t.notes.push_back(kMetricUnitsNote);
  t.notes.push_back("mix rows use R=0.5, S=1, K=3; mixb costs exactly what mixc costs");
  std::string ratios;
  for (int h : {56, 28, 14, 7}) {
    const auto a = tf.find("transformer@" + std::to_string(h));
    const auto b = tf.find("bottleneck@" + std::to_string(h));
    if (a == tf.end() || b == tf.end()) continue;
    if (!ratios.empty()) ratios += ", ";
    ratios += std::to_string(h) + "x" + std::to_string(h) + ": " + format_fixed(a->second / b->second, 2);
  }
  if (!ratios.empty()) t.notes.push_back("transformer/bottleneck teraflops ratio: " + ratios);
  if (!j.unmatched.empty()) t.notes.push_back(std::to_string(j.unmatched.size()) + " latency rows matched no grid block");
  return t;
}

ReportTable g4_trace_table() {
  const std::int64_t c = 512, hw = 14;
  const BlockSpec b = mix_block(BlockKind::kMixB, c, 0.5, 1, 3);
  const BlockSpec cc = mix_block(BlockKind::kMixC, c, 0.5, 1, 3);
  const Trace tb = block_trace(b, c, hw, hw);
  const Trace tc = block_trace(cc, c, hw, hw);
  ReportTable t;
  t.title = "g4: mixb vs mixc op order (c=512, 14x14, R=0.5, S=1, K=3)";
  t.columns = {"step", "mixb_op", "mixb_flops", "mixc_op", "mixc_flops"};
  std::int64_t fb = 0, fc = 0, pb = 0, pc = 0;
  for (std::size_t i = 0; i < std::max(tb.size(), tc.size()); ++i) {
    std::vector<std::string> row = {std::to_string(i)};
    for (const Trace* tr : {&tb, &tc}) {
      if (i < tr->size()) {
        const OpCost oc = count_op((*tr)[i]);
        row.push_back(describe((*tr)[i]));
        row.push_back(std::to_string(oc.flops));
        (tr == &tb ? fb : fc) += oc.flops;
        (tr == &tb ? pb : pc) += oc.params;
      } else {
        row.insert(row.end(), {"", ""});
      }
    }
    t.rows.push_back(std::move(row));
  }
  t.rows.push_back({"total", "params " + std::to_string(pb), std::to_string(fb), "params " + std::to_string(pc),
                    std::to_string(fc)});
  t.notes.push_back("mixb runs the kxk convolution before attention (local then global); mixc runs attention first");
  t.notes.push_back(std::string("totals are ") + (fb == fc && pb == pc ? "identical" : "DIFFERENT"));
  return t;
}

ReportTable mix_cost_table() {
  ReportTable t;
  t.title = "g3: block cost at each resolution (R=0.5, S=1, K=3)";
  t.columns = {"feature_map", "block", "params_K", "flops_M"};
  const std::int64_t sizes[4][2] = {{256, 56}, {512, 28}, {1024, 14}, {2048, 7}};
  for (const auto& s : sizes) {
    for (BlockKind k : {BlockKind::kTransformer, BlockKind::kMixA, BlockKind::kMixB, BlockKind::kMixC}) {
      const BlockSpec spec = k == BlockKind::kTransformer ? transformer_block(s[0]) : mix_block(k, s[0], 0.5, 1, 3);
      const CostNode n = count_block(spec, s[0], s[1], s[1], "");
      t.rows.push_back({std::to_string(s[0]) + "x" + std::to_string(s[1]) + "x" + std::to_string(s[1]),
                        block_kind_name(k), format_fixed(static_cast<double>(n.params) / 1e3, 1),
                        format_fixed(static_cast<double>(n.flops) / 1e6, 1)});
    }
  }
  return t;
}

}  // namespace

ReportFormat parse_report_format(const std::string& s) {
  if (s == "markdown" || s == "md") return ReportFormat::kMarkdown;
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "jsonl" || s == "json-lines") return ReportFormat::kJsonl;
  throw InvalidArgument("unknown format '" + s + "' (markdown, csv, jsonl)");
}

std::string format_fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

std::string ReportTable::render(ReportFormat format) const {
  std::string out;
  switch (format) {
    case ReportFormat::kMarkdown: {
      if (!title.empty()) out += "## " + title + "\n\n";
      out += "|";
      for (const auto& c : columns) out += " " + md_cell(c) + " |";
      out += "\n|";
      for (std::size_t i = 0; i < columns.size(); ++i) out += " --- |";
      out += "\n";
      for (const auto& r : rows) {
        out += "|";
        for (const auto& c : r) out += " " + md_cell(c) + " |";
        out += "\n";
      }
      if (!notes.empty()) out += "\n";
      for (const auto& n : notes) out += "- " + n + "\n";
      break;
    }
    case ReportFormat::kCsv: {
      for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + csv_cell(columns[i]);
      out += "\n";
      for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + csv_cell(r[i]);
        out += "\n";
      }
      break;
    }
    case ReportFormat::kJsonl: {
      for (const auto& r : rows) {
        nlohmann::ordered_json j;
        if (!title.empty()) j["table"] = title;
        for (std::size_t i = 0; i < columns.size() && i < r.size(); ++i) j[columns[i]] = json_cell(r[i]);
        out += j.dump() + "\n";
      }
      break;
    }
  }
  return out;
}

std::string render_all(const std::vector<ReportTable>& tables, ReportFormat format) {
  std::string out;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (i && format == ReportFormat::kMarkdown) out += "\n";
    out += tables[i].render(format);
  }
  return out;
}

std::string block_label(const BlockSpec& b) {
  switch (b.kind) {
    case BlockKind::kConv:
      return "conv" + std::to_string(b.kernel) + "x" + std::to_string(b.kernel);
    case BlockKind::kMaxPool:
      return "maxpool3x3";
    case BlockKind::kBottleNeck:
      return b.kernel == 3 ? std::string("bottleneck") : "bottleneck(K=" + std::to_string(b.kernel) + ")";
    case BlockKind::kTransformer:
      return b.sr_ratio == 1 ? std::string("transformer") : "transformer(S=" + std::to_string(b.sr_ratio) + ")";
    case BlockKind::kMixA:
    case BlockKind::kMixB:
    case BlockKind::kMixC:
      return std::string(block_kind_name(b.kind)) + "(R=" + trim_ratio(b.ratio) + ",S=" + std::to_string(b.sr_ratio) +
             ",K=" + std::to_string(b.kernel) + ")";
  }
  return block_kind_name(b.kind);
}

std::string stage_summary(const StageSpec& stage) {
  std::string s;
  std::size_t i = 0;
  while (i < stage.blocks.size()) {
    const std::string label = block_label(stage.blocks[i]);
    std::size_t j = i + 1;
    while (j < stage.blocks.size() && block_label(stage.blocks[j]) == label) ++j;
    if (!s.empty()) s += " + ";
    s += label + " ×" + std::to_string(j - i);
    i = j;
  }
  return s;
}

char stage_block_type(const StageSpec& stage) {
  char t = 'C';
  for (const auto& b : stage.blocks) {
    if (is_mix(b.kind)) return 'M';
    if (b.kind == BlockKind::kTransformer) t = 'T';
  }
  return t;
}

ReportTable describe_table(const ArchSpec& arch, std::int64_t resolution) {
  const auto v = validate(arch, resolution);
  if (!v.empty()) throw InvalidArgument("invalid arch '" + arch.name + "': " + v.front());
  ReportTable t;
  t.title = arch.name;
  t.columns = {"stage", "output_size", "blocks", "channels", "depth"};
  std::int64_t h = resolution;
  for (const auto& st : arch.stages) {
    std::string ch;
    std::int64_t last = -1;
    for (const auto& b : st.blocks) {
      if (b.out_channels != last) ch += (ch.empty() ? "" : "->") + std::to_string(b.out_channels);
      last = b.out_channels;
      h = block_out_extent(b, h);
    }
    t.rows.push_back({st.name, std::to_string(h) + "x" + std::to_string(h), stage_summary(st), ch,
                      std::to_string(st.blocks.size())});
  }
  t.rows.push_back({"head", "1x1", "global avgpool + linear", std::to_string(arch.num_classes), "1"});
  t.notes.push_back("stage depths (stage2-stage5): " + join_depths(arch.main_depths()));
  return t;
}

CostDepth parse_cost_depth(const std::string& s) {
  if (s == "stage") return CostDepth::kStage;
  if (s == "block") return CostDepth::kBlock;
  if (s == "op") return CostDepth::kOp;
  throw InvalidArgument("unknown depth '" + s + "' (stage, block, op)");
}

ReportTable cost_table(const CostNode& model, CostDepth depth) {
  ReportTable t;
  t.title = model.path + ": cost";
  t.columns = {"path", "kind", "Cin", "Cout", "H", "W", "params", "flops"};
  auto add = [&](const CostNode& n) {
    t.rows.push_back({n.path, n.kind, std::to_string(n.in_shape[0]), std::to_string(n.out_shape[0]),
                      std::to_string(n.in_shape[1]), std::to_string(n.in_shape[2]), std::to_string(n.params),
                      std::to_string(n.flops)});
  };
  for (const auto& st : model.children) {
    add(st);
    if (depth == CostDepth::kStage) continue;
    for (const auto& b : st.children) {
      add(b);
      if (depth != CostDepth::kOp) continue;
      for (const auto& op : b.children) add(op);
    }
  }
  add(model);
  t.rows.back()[0] = "total";
  t.notes.push_back("total: " + millions(model.params) + "M params, " + billions(model.flops) + "G FLOPs at " +
                    std::to_string(model.in_shape[1]) + "x" + std::to_string(model.in_shape[2]));
  t.notes.push_back("one FLOP = one multiply-accumulate; norms, activations, pooling and adds cost 0");
  return t;
}

ReportTable metrics_table(const JoinResult& joined, const std::string& title) {
  ReportTable t;
  t.title = title;
  t.columns = {"target",     "kind",       "Cin",       "H",      "W",   "batch", "params_K",
               "flops_M",    "latency_ms", "teraparams", "teraflops", "source", "env"};
  for (const auto& r : joined.rows) {
    t.rows.push_back({r.target, r.kind, std::to_string(r.c_in), std::to_string(r.h), std::to_string(r.w),
                      std::to_string(r.batch), format_fixed(r.params_k, 1), format_fixed(r.flops_m, 1),
                      format_fixed(r.latency_ms, 4), format_fixed(r.teraparams, 2), format_fixed(r.teraflops, 2),
                      r.source, r.env});
  }
  t.notes.push_back(kMetricUnitsNote);
  for (const auto& u : joined.unmatched) {
    t.notes.push_back("unmatched latency row: " + u.target + " (" + u.kind + " " + std::to_string(u.c_in) + "x" +
                      std::to_string(u.h) + "x" + std::to_string(u.w) + ")");
  }
  return t;
}

std::vector<ReportTable> guideline_report(const std::string& id, const std::vector<LatencyRecord>& latencies) {
  if (id == "g1") {
    ReportTable placement =
        model_table("g1: where the Transformer goes", {"resnet50", "mixnet-v", "ablation-ccmm", "ablation-cmmm"},
                    latencies);
    return {g1_table(latencies), placement};
  }
  if (id == "g2") {
    return {model_table("g2: shallow-then-deep stage depths",
                        {"resnet50", "refined-resnet50", "mixnet-v", "refined-mixnet-v"}, latencies)};
  }
  if (id == "g3") {
    return {model_table("g3: block type", {"resnet50", "refined-mixnet-v", "mixnet-a", "mixnet-b", "mixnet-c"},
                        latencies),
            mix_cost_table()};
  }
  if (id == "g4") {
    return {model_table("g4: global-then-local", {"mixnet-b", "mixnet-c", "trt-vit-a"}, latencies),
            g4_trace_table()};
  }
  if (id == "ratio") {
    return {model_table("shrinking ratio in the last stage", {"ratio-r25", "ratio-r50", "ratio-r75", "ratio-r100"},
                        latencies)};
  }
  throw InvalidArgument("unknown guideline '" + id + "' (g1, g2, g3, g4, ratio)");
}

}  // namespace trtvit
