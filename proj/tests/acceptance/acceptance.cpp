// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate. Prints one PASS/FAIL line per criterion (with its wall
// time) and exits non-zero when any criterion fails. Reference figures are
// the published values, pinned here independently of the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "trtvit/analysis.hpp"
#include "trtvit/arch.hpp"
#include "trtvit/bench.hpp"
#include "trtvit/blocks.hpp"
#include "trtvit/gradcheck_suite.hpp"

#ifndef TRTVIT_DATA_DIR
#define TRTVIT_DATA_DIR "data"
#endif

namespace trtvit {
namespace {

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;  // printed indented under the verdict

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      details.push_back(what);
    }
  }
};

double rel_dev(double got, double want) { return (got - want) / want; }

std::string pct(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f%%", d * 100.0);
  return buf;
}

std::string num(double x, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

const char* kSizes[] = {"256x56", "512x28", "1024x14", "2048x7"};

std::map<std::string, CostNode> grid_costs(BlockKind mix_bc) {
  std::map<std::string, CostNode> out;
  for (const GridEntry& g : efficiency_grid(mix_bc)) out[g.target] = count_block(g.spec, g.c_in, g.h, g.w, g.target);
  return out;
}

// ---------------------------------------------------------------------------
// 1. BottleNeck and Transformer counts on the four feature-map sizes.
Outcome criterion1() {
  Outcome o;
  const double bn_params_k[] = {70, 279, 1114, 4456};
  const double bn_flops_m[] = {218, 218, 218, 218};
  const double tf_params_k[] = {658, 2627, 10498, 41960};
  const double tf_flops_m[] = {7098, 2688, 2135, 2066};
  const auto costs = grid_costs(BlockKind::kMixC);
  double worst_f = 0, worst_p = 0;
  for (int i = 0; i < 4; ++i) {
    for (const auto& [kind, pk, fm] : {std::tuple{"bottleneck", bn_params_k[i], bn_flops_m[i]},
                                       std::tuple{"transformer", tf_params_k[i], tf_flops_m[i]}}) {
      const std::string t = std::string(kind) + "-" + kSizes[i];
      const CostNode& c = costs.at(t);
      const double df = rel_dev(c.flops / 1e6, fm), dp = rel_dev(c.params / 1e3, pk);
      worst_f = std::max(worst_f, std::abs(df));
      worst_p = std::max(worst_p, std::abs(dp));
      o.require(std::abs(df) <= 0.02, t + " flops " + num(c.flops / 1e6, 1) + "M vs " + num(fm, 0) + "M (" +
                                           pct(df) + ")");
      o.require(std::abs(dp) <= 0.03, t + " params " + num(c.params / 1e3, 1) + "K vs " + num(pk, 0) + "K (" +
                                           pct(dp) + ")");
    }
  }
  o.summary = "8 blocks; worst flops dev " + pct(worst_f) + " (tol 2%), worst params dev " + pct(worst_p) +
              " (tol 3%)";
  return o;
}

// 2. MixBlock counts; B and C must cost exactly the same.
Outcome criterion2() {
  Outcome o;
  const double printed_m[] = {3195, 989, 712, 676};
  const auto with_b = grid_costs(BlockKind::kMixB);
  const auto with_c = grid_costs(BlockKind::kMixC);
  double worst = 0;
  for (int i = 0; i < 4; ++i) {
    const CostNode& a = with_c.at(std::string("mixa-") + kSizes[i]);
    const CostNode& b = with_b.at(std::string("mixb-") + kSizes[i]);
    const CostNode& c = with_c.at(std::string("mixc-") + kSizes[i]);
    o.require(b.flops == c.flops && b.params == c.params,
              std::string("mixb/mixc differ at ") + kSizes[i] + ": " + std::to_string(b.flops) + " vs " +
                  std::to_string(c.flops));
    for (const CostNode* n : {&a, &c}) {
      const double d = rel_dev(n->flops / 1e6, printed_m[i]);
      worst = std::max(worst, std::abs(d));
      o.require(std::abs(d) <= 0.20,
                n->path + " flops " + num(n->flops / 1e6, 1) + "M vs " + num(printed_m[i], 0) + "M (" + pct(d) + ")");
    }
  }
  o.summary = "MixA and MixB/C at 4 sizes; worst flops dev " + pct(worst) + " (tol 20%); MixB == MixC exactly";
  return o;
}

// 3. Published latencies joined with analytic counts against the printed
// efficiency figures.
Outcome criterion3() {
  Outcome o;
  struct Printed {
    const char* kind;
    double tf[4];
    double tp[4];
  };
  const Printed printed[] = {
      {"transformer", {81, 184, 435, 599}, {7.5, 179, 2142, 11988}},
      {"bottleneck", {378, 573, 620, 670}, {120, 733, 3173, 13723}},
      {"mixa", {117, 206, 456, 625}, {7.9, 182, 2200, 12694}},
      {"mixc", {122, 219, 474, 644}, {8.1, 191, 2288, 13057}},
  };
  const auto lat = import_latency_csv(std::string(TRTVIT_DATA_DIR) + "/table1_t4.csv");
  const JoinResult j = join_metrics(grid_cost_items(), lat);
  o.require(j.unmatched.empty(), std::to_string(j.unmatched.size()) + " latency rows did not join");
  int total = 0, within = 0;
  for (const Printed& p : printed) {
    for (int i = 0; i < 4; ++i) {
      const std::string t = std::string(p.kind) + "-" + kSizes[i];
      const auto it = std::find_if(j.rows.begin(), j.rows.end(), [&](const MetricRow& r) { return r.target == t; });
      if (it == j.rows.end()) {
        o.require(false, t + " missing from the join");
        continue;
      }
      for (const auto& [name, got, want] :
           {std::tuple{"teraflops", it->teraflops, p.tf[i]}, std::tuple{"teraparams", it->teraparams, p.tp[i]}}) {
        ++total;
        const double d = rel_dev(got, want);
        if (std::abs(d) <= 0.02) ++within;
        o.require(std::abs(d) <= 0.02,
                  t + " " + name + " " + num(got) + " vs printed " + num(want, 1) + " (" + pct(d) + ")");
      }
    }
  }
  o.summary = std::to_string(within) + "/" + std::to_string(total) + " printed values within 2%";
  return o;
}

// 4. Whole-model counts at 224.
Outcome criterion4() {
  Outcome o;
  struct Want {
    const char* name;
    double params_m, flops_g, tol;
  };
  const Want wants[] = {
      {"resnet50", 25.6, 4.1, 0.02},         {"trt-vit-a", 29.3, 2.7, 0.10},
      {"trt-vit-b", 43.1, 4.0, 0.10},        {"trt-vit-c", 67.3, 5.9, 0.10},
      {"trt-vit-d", 103.0, 9.7, 0.10},       {"refined-resnet50", 34.1, 4.1, 0.10},
  };
  std::ostringstream s;
  for (const Want& w : wants) {
    const CostNode c = count_model(preset(w.name), 224);
    const double pm = c.params / 1e6, fg = c.flops / 1e9;
    const double dp = rel_dev(pm, w.params_m), df = rel_dev(fg, w.flops_g);
    o.require(std::abs(dp) <= w.tol && std::abs(df) <= w.tol,
              std::string(w.name) + " " + num(pm) + "M/" + num(fg) + "G vs " + num(w.params_m, 1) + "M/" +
                  num(w.flops_g, 1) + "G (" + pct(dp) + ", " + pct(df) + "; tol " + num(w.tol * 100, 0) + "%)");
    s << (s.tellp() > 0 ? ", " : "") << w.name << " " << num(pm) << "M/" << num(fg) << "G";
  }
  o.summary = s.str();
  return o;
}

// 5. Closed-form counts against an instrumented forward pass: every MAC the
// kernels execute is tallied at runtime and every weight scalar enumerated.
Outcome criterion5() {
  Outcome o;
  const BlockKind kinds[] = {BlockKind::kConv,        BlockKind::kMaxPool, BlockKind::kBottleNeck,
                             BlockKind::kTransformer, BlockKind::kMixA,    BlockKind::kMixB,
                             BlockKind::kMixC};
  const std::int64_t widths[] = {32, 64, 96, 128, 256};
  const double ratios[] = {0.25, 0.5, 0.75};
  constexpr int kPerKind = 50;
  Rng pick(5150);
  int checked = 0;
  for (BlockKind k : kinds) {
    int done = 0;
    while (done < kPerKind) {
      const std::int64_t c = widths[pick.next_u64() % 5];
      std::int64_t c_in = pick.uniform() < 0.5 ? c : widths[pick.next_u64() % 5];
      const std::int64_t hw = 2 * (2 + static_cast<std::int64_t>(pick.next_u64() % 3));  // 4, 6, 8
      const std::int64_t stride = pick.uniform() < 0.5 ? 2 : 1;
      const std::int64_t sr = 1 + static_cast<std::int64_t>(pick.next_u64() % 2);
      const std::int64_t kern = pick.uniform() < 0.5 ? 3 : (pick.uniform() < 0.5 ? 1 : 5);
      const double r = ratios[pick.next_u64() % 3];
      BlockSpec s;
      switch (k) {
        case BlockKind::kConv: s = conv_block(c, kern, stride); break;
        case BlockKind::kMaxPool: s = maxpool_block(c); c_in = c; break;
        case BlockKind::kBottleNeck: s = bottleneck_block(c, stride, kern); break;
        case BlockKind::kTransformer: s = transformer_block(c, stride, sr); break;
        default: s = mix_block(k, c, r, sr, kern == 1 ? 3 : kern, stride); break;
      }
      if (!block_violations(s, c_in).empty() || !block_resolution_violations(s, hw, hw).empty()) continue;

      Rng init(pick.next_u64());
      auto b = make_block<float>(s, c_in, init);
      MacCounter mc;
      Context<float> ctx{&mc, nullptr, false};
      Rng in(7);
      const Var<float> y = b->forward(ctx, Var<float>::leaf(rand_normal<float>(in, {1, c_in, hw, hw}, 1.0)));
      std::int64_t scalars = 0;
      for (const ParamRef<float>& p : block_parameters(*b)) {
        if (!p.buffer) scalars += p.tensor->size();
      }
      const CostNode cn = count_block(s, c_in, hw, hw, "");
      const std::string tag = std::string(block_kind_name(k)) + " c_in=" + std::to_string(c_in) +
                              " c=" + std::to_string(c) + " hw=" + std::to_string(hw) +
                              " stride=" + std::to_string(stride);
      o.require(static_cast<std::int64_t>(mc.total()) == cn.flops,
                tag + ": runtime MACs " + std::to_string(mc.total()) + " vs analytic " + std::to_string(cn.flops));
      o.require(scalars == cn.params,
                tag + ": weight scalars " + std::to_string(scalars) + " vs analytic " + std::to_string(cn.params));
      const std::int64_t ho = block_out_extent(s, hw);
      o.require(y.shape() == Shape({1, c, ho, ho}), tag + ": unexpected output shape " + shape_str(y.shape()));
      ++done;
      ++checked;
    }
  }
  o.summary = std::to_string(checked) + " configs (" + std::to_string(kPerKind) +
              " per kind x 7 kinds); flops == runtime MACs and params == weight scalars";
  return o;
}

// 6. Central-difference gradient checks at 64-bit.
Outcome criterion6() {
  Outcome o;
  constexpr int kSeeds = 20;
  constexpr std::int64_t kC = 64;
  const BlockKind kinds[] = {BlockKind::kConv,        BlockKind::kMaxPool, BlockKind::kBottleNeck,
                             BlockKind::kTransformer, BlockKind::kMixA,    BlockKind::kMixB,
                             BlockKind::kMixC};
  double worst = 0;
  std::string worst_name;
  int runs = 0;
  auto note = [&](const std::string& name, const GradcheckReport& r) {
    ++runs;
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      worst_name = name + " " + r.worst;
    }
    o.require(r.pass && r.max_rel_err <= 1e-4,
              name + ": max rel err " + sci(r.max_rel_err) + " at " + r.worst + ", checked " +
                  std::to_string(r.checked) + ", skipped " + std::to_string(r.skipped_nonsmooth));
  };
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    for (const std::string& op : gradcheck_op_names()) {
      note("op:" + op + " seed " + std::to_string(seed), gradcheck_op(op, kC, 4, seed));
    }
    for (BlockKind k : kinds) {
      note(std::string(block_kind_name(k)) + " seed " + std::to_string(seed),
           gradcheck_block(gradcheck_block_spec(k, kC), kC, 4, seed));
    }
  }
  // The largest allowed extent, once per op and kind.
  for (const std::string& op : gradcheck_op_names()) note("op:" + op + " hw8", gradcheck_op(op, kC, 8, 100));
  for (BlockKind k : kinds) {
    note(std::string(block_kind_name(k)) + " hw8", gradcheck_block(gradcheck_block_spec(k, kC), kC, 8, 100));
  }
  o.summary = std::to_string(gradcheck_op_names().size()) + " ops + 7 block kinds, C=64, " +
              std::to_string(kSeeds) + " seeds at 4x4 + one at 8x8 (" + std::to_string(runs) +
              " checks); worst rel err " + sci(worst) + " (" + worst_name + "; tol 1e-4)";
  return o;
}

// 7. Structural properties behind the design guidelines.
Outcome criterion7() {
  Outcome o;
  const char* trt[] = {"trt-vit-a", "trt-vit-b", "trt-vit-c", "trt-vit-d"};

  // (a) attention only in the last two stages.
  for (const char* n : trt) {
    const ArchSpec a = preset(n);
    for (std::size_t s = 0; s < a.stages.size(); ++s) {
      if (a.stages[s].name == "stage4" || a.stages[s].name == "stage5") continue;
      for (const BlockSpec& b : a.stages[s].blocks) {
        o.require(!has_attention(b.kind), std::string("(a) ") + n + " " + a.stages[s].name + " has a " +
                                              block_kind_name(b.kind) + " block");
      }
    }
  }

  // (b) early stages shallow, late stages deep; refined variants move depth
  // from early to late stages.
  auto d = [](const char* n) { return preset(n).main_depths(); };
  for (const char* n : {"trt-vit-a", "trt-vit-b", "trt-vit-c", "trt-vit-d", "refined-resnet50", "refined-mixnet-v"}) {
    const auto m = d(n);
    const std::int64_t late = std::max(m[2], m[3]);
    o.require(m[0] <= m[1] && m[1] <= late && m[0] + m[1] < m[2] + m[3],
              std::string("(b) ") + n + " depths " + std::to_string(m[0]) + "-" + std::to_string(m[1]) + "-" +
                  std::to_string(m[2]) + "-" + std::to_string(m[3]) + " are not shallow-then-deep");
  }
  for (const auto& [base, refined] : {std::pair{"resnet50", "refined-resnet50"}, std::pair{"mixnet-v", "refined-mixnet-v"}}) {
    const auto b = d(base), r = d(refined);
    o.require(r[0] < b[0] && r[1] < b[1] && r[3] > b[3],
              std::string("(b) ") + refined + " does not move depth from stages 2-3 to stage 5 of " + base);
  }

  // (c) order inside MixB / MixC, identical totals.
  for (const GridEntry& g : efficiency_grid(BlockKind::kMixC)) {
    if (g.spec.kind != BlockKind::kMixC) continue;
    BlockSpec sb = g.spec;
    sb.kind = BlockKind::kMixB;
    const Trace tc = block_trace(g.spec, g.c_in, g.h, g.w);
    const Trace tb = block_trace(sb, g.c_in, g.h, g.w);
    auto first = [&](const Trace& t, bool attention) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (attention ? t[i].kind == OpKind::kAttention
                      : (t[i].kind == OpKind::kConv2d && t[i].kernel == g.spec.kernel && g.spec.kernel > 1)) {
          return i;
        }
      }
      return t.size();
    };
    o.require(first(tc, true) < first(tc, false) && first(tc, false) < tc.size(),
              "(c) mixc at " + g.target + " does not run attention before the KxK conv");
    o.require(first(tb, false) < first(tb, true) && first(tb, true) < tb.size(),
              "(c) mixb at " + g.target + " does not run the KxK conv before attention");
    const CostNode cb = count_block(sb, g.c_in, g.h, g.w, ""), cc = count_block(g.spec, g.c_in, g.h, g.w, "");
    o.require(cb.flops == cc.flops && cb.params == cc.params, "(c) mixb/mixc totals differ at " + g.target);
  }

  // (d) Transformer / BottleNeck compute density ratio rises towards 7x7.
  const auto lat = import_latency_csv(std::string(TRTVIT_DATA_DIR) + "/table1_t4.csv");
  const JoinResult j = join_metrics(grid_cost_items(), lat);
  auto tf = [&](const std::string& t) {
    for (const MetricRow& r : j.rows) {
      if (r.target == t) return r.teraflops;
    }
    throw NotFound("no joined row " + t);
  };
  std::vector<double> ratio;
  for (const char* s : kSizes) ratio.push_back(tf(std::string("transformer-") + s) / tf(std::string("bottleneck-") + s));
  for (std::size_t i = 1; i < ratio.size(); ++i) {
    o.require(ratio[i] > ratio[i - 1], "(d) ratio does not rise between " + std::string(kSizes[i - 1]) + " and " +
                                           kSizes[i]);
  }
  o.require(std::abs(ratio.front() - 0.21) <= 0.02 && std::abs(ratio.back() - 0.89) <= 0.02,
            "(d) ratio endpoints " + num(ratio.front()) + ".." + num(ratio.back()) + " vs 0.21..0.89");

  o.summary = "(a) no attention before stage4 in 4 TRT presets; (b) shallow-then-deep depths; (c) MixC attention "
              "before KxK conv, MixB after, equal totals; (d) ratio " +
              num(ratio[0]) + " -> " + num(ratio[1]) + " -> " + num(ratio[2]) + " -> " + num(ratio[3]);
  return o;
}

// 8. Whole-network forward at 224, batch 2.
Outcome criterion8() {
  Outcome o;
  struct Want {
    const char* name;
    std::int64_t c2, c3, c4, c5;
  };
  const Want wants[] = {{"trt-vit-a", 160, 320, 640, 1280},
                        {"trt-vit-b", 192, 384, 768, 1536},
                        {"trt-vit-c", 192, 384, 768, 1536},
                        {"trt-vit-d", 256, 512, 1024, 2048}};
  Rng in(2024);
  const Tensor<float> x = rand_normal<float>(in, {2, 3, 224, 224}, 1.0);
  for (const Want& w : wants) {
    const ArchSpec spec = preset(w.name);
    const std::vector<Shape> expect = {{2, 32, 112, 112}, {2, 64, 112, 112}, {2, w.c2, 56, 56},
                                       {2, w.c3, 28, 28}, {2, w.c4, 14, 14}, {2, w.c5, 7, 7}};
    auto m1 = Model<float>::instantiate(spec, 42);
    const auto out1 = m1->forward(Context<float>{}, Var<float>::leaf(x));
    o.require(out1.stage_shapes == expect, std::string(w.name) + " stage shapes differ from the layout table");
    o.require(out1.logits.shape() == Shape({2, 1000}),
              std::string(w.name) + " logits shape " + shape_str(out1.logits.shape()));
    m1.reset();
    auto m2 = Model<float>::instantiate(spec, 42);
    const auto out2 = m2->forward(Context<float>{}, Var<float>::leaf(x));
    const auto& a = out1.logits.value();
    const auto& b = out2.logits.value();
    o.require(a.size() == b.size() && std::memcmp(a.ptr(), b.ptr(), sizeof(float) * a.size()) == 0,
              std::string(w.name) + " logits differ between two seeded runs");
    bool finite = true;
    for (float v : a.data()) finite = finite && std::isfinite(v);
    o.require(finite, std::string(w.name) + " produced non-finite logits");
  }
  o.summary = "trt-vit-a..d at 2x3x224x224: stage shapes 112/112/56/28/14/7 with the tabulated widths, 2x1000 "
              "logits, bit-identical across two seeded instantiations";
  return o;
}

// 9. Weights and latency CSV round trips.
Outcome criterion9() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("trtvit_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  auto m = Model<float>::instantiate(preset("trt-vit-a"), 3);
  const ModelWeights w = m->weights();
  const auto bytes = serialize_weights(w);
  o.require(serialize_weights(deserialize_weights(bytes)) == bytes, "weights: serialize(deserialize(b)) != b");
  const std::string wpath = (dir / "a.bin").string();
  save_weights(w, wpath);
  const ModelWeights loaded = load_weights(wpath);
  o.require(loaded == w, "weights: file round trip changed the tensors");
  auto other = Model<float>::instantiate(preset("trt-vit-a"), 99);
  other->load(loaded);
  o.require(serialize_weights(other->weights()) == bytes, "weights: a model loaded from file re-serializes differently");

  std::vector<LatencyRecord> recs;
  for (const char* f : {"table1_t4.csv", "table4_t4.csv"}) {
    const auto r = import_latency_csv(std::string(TRTVIT_DATA_DIR) + "/" + f);
    recs.insert(recs.end(), r.begin(), r.end());
  }
  // Values with no short decimal form must survive as well.
  recs.push_back({"bottleneck-64x8", "bottleneck", 64, 64, 8, 8, 4, 1.0 / 3.0, "measured-local", "host bs4 median"});
  recs.push_back({"conv-32x6", "conv", 16, 32, 6, 6, 1, 0.1 + 0.2, "measured-local", "host bs1 min"});
  const std::string csv = format_latency_csv(recs);
  o.require(parse_latency_csv(csv) == recs, "latency csv: parse(format(r)) != r");
  const std::string cpath = (dir / "lat.csv").string();
  export_latency_csv(recs, cpath);
  const auto back = import_latency_csv(cpath);
  o.require(back == recs, "latency csv: file round trip changed values");
  o.require(format_latency_csv(back) == csv, "latency csv: second formatting differs");

  fs::remove_all(dir);
  o.summary = std::to_string(bytes.size()) + "-byte trt-vit-a weights byte-stable through memory, file and reload; " +
              std::to_string(recs.size()) + " latency records value-stable through CSV";
  return o;
}

}  // namespace
}  // namespace trtvit

int main() {
  using trtvit::Outcome;
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "block counts: BottleNeck and Transformer", trtvit::criterion1},
      {2, "block counts: MixBlocks", trtvit::criterion2},
      {3, "efficiency metrics from published latencies", trtvit::criterion3},
      {4, "model counts", trtvit::criterion4},
      {5, "analytic counts equal instrumented forward", trtvit::criterion5},
      {6, "gradient checks", trtvit::criterion6},
      {7, "structural guideline properties", trtvit::criterion7},
      {8, "end-to-end shapes and determinism", trtvit::criterion8},
      {9, "serialization round trips", trtvit::criterion9},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.summary.c_str(),
                secs);
    for (const std::string& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
