// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/arch.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <type_traits>

namespace trtvit {

static_assert(std::endian::native == std::endian::little, "weights files are written in host byte order");

// ---------------------------------------------------------------------------
// ArchSpec
// ---------------------------------------------------------------------------

std::vector<std::int64_t> ArchSpec::stage_depths() const {
  std::vector<std::int64_t> d;
  for (const auto& s : stages) d.push_back(static_cast<std::int64_t>(s.blocks.size()));
  return d;
}

std::vector<std::int64_t> ArchSpec::main_depths() const {
  auto d = stage_depths();
  if (d.size() < 6) return {};
  return {d.begin() + 2, d.begin() + 6};
}

std::int64_t ArchSpec::out_channels() const {
  for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
    if (!it->blocks.empty()) return it->blocks.back().out_channels;
  }
  return in_channels;
}

void assign_divisors(ArchSpec& spec) {
  std::int64_t div = 1;
  for (auto& st : spec.stages) {
    for (const auto& b : st.blocks) div *= b.stride;
    st.divisor = div;
  }
}

// ---------------------------------------------------------------------------
// presets
// ---------------------------------------------------------------------------

namespace {

// n blocks, the first carrying the stage's stride.
void append(std::vector<BlockSpec>& v, BlockSpec b, std::int64_t n, std::int64_t first_stride) {
  for (std::int64_t i = 0; i < n; ++i) {
    b.stride = i == 0 ? first_stride : 1;
    v.push_back(b);
  }
}

ArchSpec finish(ArchSpec a) {
  for (std::size_t i = 0; i < a.stages.size(); ++i) a.stages[i].name = kStageNames[i];
  assign_divisors(a);
  return a;
}

struct TrtConfig {
  std::int64_t widths[4];
  std::int64_t depths[4];
  std::int64_t stage4_mix;
};

// Table-style skeleton: 3x3 stem, two 3x3 convs, BottleNeck stages 2-4
// (optionally ending stage4 with MixBlockC), and a final stage of `last`.
ArchSpec trt_skeleton(const std::string& name, const TrtConfig& c, const BlockSpec& last) {
  ArchSpec a;
  a.name = name;
  a.stages.resize(6);
  a.stages[0].blocks = {conv_block(32, 3, 2)};
  a.stages[1].blocks = {conv_block(32, 3, 1), conv_block(64, 3, 1)};
  append(a.stages[2].blocks, bottleneck_block(c.widths[0], 1), c.depths[0], 2);
  append(a.stages[3].blocks, bottleneck_block(c.widths[1], 1), c.depths[1], 2);
  append(a.stages[4].blocks, bottleneck_block(c.widths[2], 1), c.depths[2] - c.stage4_mix, 2);
  append(a.stages[4].blocks, mix_block(BlockKind::kMixC, c.widths[2], 0.5, 2, 7), c.stage4_mix, 1);
  append(a.stages[5].blocks, last, c.depths[3], 2);
  return finish(a);
}

ArchSpec trt_vit(const std::string& name, const TrtConfig& c) {
  return trt_skeleton(name, c, mix_block(BlockKind::kMixC, c.widths[3], 0.5, 1, 7));
}

constexpr TrtConfig kTrtA{{160, 320, 640, 1280}, {2, 4, 5, 4}, 0};
constexpr TrtConfig kTrtB{{192, 384, 768, 1536}, {3, 4, 7, 4}, 0};
constexpr TrtConfig kTrtC{{192, 384, 768, 1536}, {3, 4, 9, 6}, 2};
constexpr TrtConfig kTrtD{{256, 512, 1024, 2048}, {4, 5, 9, 5}, 2};
constexpr TrtConfig kMixnetV{{160, 320, 640, 1280}, {3, 5, 6, 3}, 0};
constexpr TrtConfig kRefinedMixnetV{{160, 320, 640, 1280}, {2, 3, 6, 4}, 0};

// ResNet layout: 7x7 stem, max pool as stage1, BottleNeck stages 2-5.
ArchSpec resnet(const std::string& name, const std::int64_t (&depths)[4]) {
  ArchSpec a;
  a.name = name;
  a.stages.resize(6);
  a.stages[0].blocks = {conv_block(64, 7, 2)};
  a.stages[1].blocks = {maxpool_block(64)};
  append(a.stages[2].blocks, bottleneck_block(256, 1), depths[0], 1);
  append(a.stages[3].blocks, bottleneck_block(512, 1), depths[1], 2);
  append(a.stages[4].blocks, bottleneck_block(1024, 1), depths[2], 2);
  append(a.stages[5].blocks, bottleneck_block(2048, 1), depths[3], 2);
  return finish(a);
}

ArchSpec with_stage(ArchSpec a, std::size_t stage, BlockSpec b) {
  const auto n = static_cast<std::int64_t>(a.stages[stage].blocks.size());
  const auto first = a.stages[stage].blocks.front().stride;
  a.stages[stage].blocks.clear();
  append(a.stages[stage].blocks, b, n, first);
  return finish(a);
}

ArchSpec renamed(ArchSpec a, const std::string& name) {
  a.name = name;
  return a;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "trt-vit-a",  "trt-vit-b",     "trt-vit-c", "trt-vit-d",     "resnet50",      "refined-resnet50",
      "mixnet-v",   "refined-mixnet-v", "mixnet-a", "mixnet-b",   "mixnet-c",      "ablation-ccmm",
      "ablation-cmmm", "ratio-r25",  "ratio-r50", "ratio-r75",     "ratio-r100"};
  return names;
}

ArchSpec preset(const std::string& name) {
  static const std::int64_t kResnet[4] = {3, 4, 6, 3};
  static const std::int64_t kRefinedResnet[4] = {2, 3, 6, 5};

  if (name == "trt-vit-a") return trt_vit(name, kTrtA);
  if (name == "trt-vit-b") return trt_vit(name, kTrtB);
  if (name == "trt-vit-c") return trt_vit(name, kTrtC);
  if (name == "trt-vit-d") return trt_vit(name, kTrtD);
  if (name == "resnet50") return resnet(name, kResnet);
  if (name == "refined-resnet50") return resnet(name, kRefinedResnet);
  if (name == "mixnet-v") return trt_skeleton(name, kMixnetV, transformer_block(1280));
  if (name == "refined-mixnet-v") return trt_skeleton(name, kRefinedMixnetV, transformer_block(1280));
  if (name == "mixnet-a" || name == "mixnet-b" || name == "mixnet-c") {
    const BlockKind k = name == "mixnet-a" ? BlockKind::kMixA : name == "mixnet-b" ? BlockKind::kMixB : BlockKind::kMixC;
    return trt_skeleton(name, kTrtA, mix_block(k, 1280, 0.5, 1, 7));
  }
  if (name == "ablation-ccmm") {
    return renamed(with_stage(trt_vit(name, kTrtA), 4, mix_block(BlockKind::kMixC, 640, 0.5, 2, 7)), name);
  }
  if (name == "ablation-cmmm") {
    ArchSpec a = with_stage(trt_vit(name, kTrtA), 4, mix_block(BlockKind::kMixC, 640, 0.5, 2, 7));
    return renamed(with_stage(a, 3, mix_block(BlockKind::kMixC, 320, 0.5, 4, 7)), name);
  }
  if (name == "ratio-r25" || name == "ratio-r50" || name == "ratio-r75") {
    const double r = name == "ratio-r25" ? 0.25 : name == "ratio-r50" ? 0.5 : 0.75;
    return renamed(with_stage(trt_vit(name, kTrtA), 5, mix_block(BlockKind::kMixC, 1280, r, 1, 7)), name);
  }
  if (name == "ratio-r100") return renamed(with_stage(trt_vit(name, kTrtA), 5, transformer_block(1280)), name);
  throw NotFound("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

std::vector<std::string> validate(const ArchSpec& spec, std::int64_t resolution) {
  std::vector<std::string> v;
  if (spec.stages.size() != 6) {
    v.push_back("expected 6 stages (stem, stage1..stage5), got " + std::to_string(spec.stages.size()));
    return v;
  }
  if (resolution <= 0 || resolution % 32 != 0) {
    v.push_back("resolution " + std::to_string(resolution) + " not divisible by 32");
    return v;
  }
  if (spec.num_classes <= 0) v.push_back("head: num_classes must be positive");
  std::int64_t c = spec.in_channels;
  std::int64_t h = resolution;
  std::int64_t div = 1;
  for (std::size_t si = 0; si < spec.stages.size(); ++si) {
    const auto& st = spec.stages[si];
    if (st.name != kStageNames[si]) v.push_back("stage " + std::to_string(si) + " named '" + st.name + "', expected '" +
                                                kStageNames[si] + "'");
    if (st.blocks.empty()) v.push_back(st.name + ": no blocks");
    for (std::size_t bi = 0; bi < st.blocks.size(); ++bi) {
      const BlockSpec& b = st.blocks[bi];
      const std::string path = st.name + "." + std::to_string(bi);
      if (b.in_channels != 0 && b.in_channels != c) {
        v.push_back(path + ": declared input channels " + std::to_string(b.in_channels) + " but previous block emits " +
                    std::to_string(c));
      }
      if (bi > 0 && b.stride != 1) v.push_back(path + ": only the first block of a stage may be strided");
      for (const auto& m : block_violations(b, c)) v.push_back(path + ": " + m);
      for (const auto& m : block_resolution_violations(b, h, h)) v.push_back(path + ": " + m);
      div *= b.stride;
      c = b.out_channels;
      if (h > 0) h = block_out_extent(b, h);
    }
    if (st.divisor != div) {
      v.push_back(st.name + ": declared divisor " + std::to_string(st.divisor) + " but strides give " +
                  std::to_string(div));
    }
    if (h > 0 && h * div != resolution) {
      v.push_back(st.name + ": output extent " + std::to_string(h) + " inconsistent with divisor " + std::to_string(div));
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------

namespace {

std::string num(double x) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

bool uses_sr(BlockKind k) { return has_attention(k); }

std::int64_t parse_int(const std::string& s, int line, const std::string& key) {
  std::int64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw FormatError("line " + std::to_string(line) + ": bad integer for '" + key + "': '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, int line, const std::string& key) {
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw FormatError("line " + std::to_string(line) + ": bad number for '" + key + "': '" + s + "'");
  }
  return v;
}

}  // namespace

std::string emit_arch(const ArchSpec& spec) {
  std::ostringstream os;
  os << "arch " << spec.name << "\n";
  os << "classes " << spec.num_classes << "\n";
  for (const auto& st : spec.stages) {
    for (const auto& b : st.blocks) {
      os << st.name << ": " << block_kind_name(b.kind) << " c=" << b.out_channels;
      if (b.in_channels) os << " in=" << b.in_channels;
      if (is_mix(b.kind)) os << " r=" << num(b.ratio);
      if (uses_sr(b.kind)) {
        os << " s=" << b.sr_ratio;
        if (is_mix(b.kind)) os << " k=" << b.kernel;
        if (b.stride != 1) os << " stride=" << b.stride;
      } else {
        if (b.kind != BlockKind::kBottleNeck || b.kernel != 3) os << " k=" << b.kernel;
        os << " s=" << b.stride;
      }
      os << "\n";
    }
  }
  return os.str();
}

ArchSpec parse_arch(const std::string& text) {
  ArchSpec a;
  a.stages.resize(6);
  for (std::size_t i = 0; i < 6; ++i) a.stages[i].name = kStageNames[i];
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  int last_stage = 0;
  bool have_name = false;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string head;
    if (!(ls >> head)) continue;
    const std::string where = "line " + std::to_string(line) + ": ";
    if (head == "arch") {
      if (!(ls >> a.name)) throw FormatError(where + "'arch' needs a name");
      have_name = true;
      continue;
    }
    if (head == "classes") {
      std::string n;
      if (!(ls >> n)) throw FormatError(where + "'classes' needs a count");
      a.num_classes = parse_int(n, line, "classes");
      continue;
    }
    if (head.back() != ':') throw FormatError(where + "expected '<stage>: <kind> ...', got '" + head + "'");
    head.pop_back();
    int stage = -1;
    for (int i = 0; i < 6; ++i) {
      if (head == kStageNames[i]) stage = i;
    }
    if (stage < 0) throw FormatError(where + "unknown stage '" + head + "'");
    if (stage < last_stage) throw FormatError(where + "stage '" + head + "' out of order");
    last_stage = stage;
    std::string kind;
    if (!(ls >> kind)) throw FormatError(where + "missing block kind");
    BlockSpec b;
    try {
      b.kind = parse_block_kind(kind);
    } catch (const InvalidArgument& e) {
      throw FormatError(where + e.what());
    }
    if (b.kind == BlockKind::kMaxPool) b.stride = 2;
    if (b.kind == BlockKind::kMixB) b.ratio = 0.5;
    bool have_c = false;
    bool have_r = false;
    std::string kv;
    while (ls >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw FormatError(where + "expected key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      const std::string val = kv.substr(eq + 1);
      if (key == "c") {
        b.out_channels = parse_int(val, line, key);
        have_c = true;
      } else if (key == "in") {
        b.in_channels = parse_int(val, line, key);
      } else if (key == "k") {
        b.kernel = parse_int(val, line, key);
      } else if (key == "r") {
        b.ratio = parse_double(val, line, key);
        have_r = true;
      } else if (key == "stride") {
        b.stride = parse_int(val, line, key);
      } else if (key == "s") {
        (uses_sr(b.kind) ? b.sr_ratio : b.stride) = parse_int(val, line, key);
      } else {
        throw FormatError(where + "unknown key '" + key + "'");
      }
    }
    if (!have_c) throw FormatError(where + "missing c=<channels>");
    if (have_r && !is_mix(b.kind)) throw FormatError(where + "r= only applies to mixed blocks");
    if (!have_r && (b.kind == BlockKind::kMixA || b.kind == BlockKind::kMixC)) {
      throw FormatError(where + kind + " needs r=<ratio>");
    }
    a.stages[static_cast<std::size_t>(stage)].blocks.push_back(b);
  }
  if (!have_name) throw FormatError("missing 'arch <name>' line");
  assign_divisors(a);
  return a;
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'X', 'V', 'W'};
constexpr std::uint16_t kVersion = 1;

template <class U>
void put(std::vector<std::uint8_t>& out, U v) {
  std::uint8_t b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  out.insert(out.end(), b, b + sizeof(U));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}
  template <class U>
  U get(const char* what) {
    need(sizeof(U), what);
    U v;
    std::memcpy(&v, b_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }
  void bytes(void* dst, std::size_t n, const char* what) {
    need(n, what);
    if (n) std::memcpy(dst, b_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (b_.size() - pos_ < n) throw FormatError(std::string("weights: truncated while reading ") + what);
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

std::size_t dtype_size(DType d) { return d == DType::kF32 ? 4 : 8; }

}  // namespace

const WeightEntry* ModelWeights::find(const std::string& path) const {
  for (const auto& e : entries) {
    if (e.path == path) return &e;
  }
  return nullptr;
}

std::vector<std::uint8_t> serialize_weights(const ModelWeights& w) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put<std::uint16_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(w.entries.size()));
  for (const auto& e : w.entries) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.path.size()));
    out.insert(out.end(), e.path.begin(), e.path.end());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(e.dtype));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(e.shape.size()));
    for (auto x : e.shape) put<std::uint64_t>(out, static_cast<std::uint64_t>(x));
  }
  std::size_t payload = 0;
  for (const auto& e : w.entries) payload += e.bytes.size();
  out.reserve(out.size() + payload);
  for (const auto& e : w.entries) {
    if (e.bytes.size() != static_cast<std::size_t>(numel(e.shape)) * dtype_size(e.dtype)) {
      throw InvalidArgument("weights: entry '" + e.path + "' payload does not match its shape");
    }
    out.insert(out.end(), e.bytes.begin(), e.bytes.end());
  }
  return out;
}

ModelWeights deserialize_weights(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("weights: bad magic (not an MXVW file)");
  const auto version = r.get<std::uint16_t>("version");
  if (version != kVersion) throw FormatError("weights: unsupported version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>("entry count");
  ModelWeights w;
  for (std::uint32_t i = 0; i < count; ++i) {
    WeightEntry e;
    const auto len = r.get<std::uint32_t>("path length");
    if (len > bytes.size()) throw FormatError("weights: path length out of range");
    e.path.resize(len);
    r.bytes(e.path.data(), len, "path");
    const auto tag = r.get<std::uint8_t>("dtype");
    if (tag != 1 && tag != 2) throw FormatError("weights: unknown dtype tag " + std::to_string(tag) + " for '" + e.path + "'");
    e.dtype = static_cast<DType>(tag);
    const auto rank = r.get<std::uint8_t>("rank");
    for (int d = 0; d < rank; ++d) {
      const auto x = r.get<std::uint64_t>("extent");
      if (x > (1ULL << 40)) throw FormatError("weights: extent out of range for '" + e.path + "'");
      e.shape.push_back(static_cast<std::int64_t>(x));
    }
    w.entries.push_back(std::move(e));
  }
  for (auto& e : w.entries) {
    e.bytes.resize(static_cast<std::size_t>(numel(e.shape)) * dtype_size(e.dtype));
    r.bytes(e.bytes.data(), e.bytes.size(), "tensor data");
  }
  if (!r.done()) throw FormatError("weights: trailing bytes after tensor data");
  return w;
}

void save_weights(const ModelWeights& w, const std::string& path) {
  const auto bytes = serialize_weights(w);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for '" + path + "'");
}

ModelWeights load_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_weights(bytes);
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

template <class T>
std::unique_ptr<Model<T>> Model<T>::instantiate(const ArchSpec& spec, std::uint64_t seed) {
  const auto v = validate(spec);
  if (!v.empty()) {
    std::string msg = "invalid arch '" + spec.name + "': " + v.front();
    if (v.size() > 1) msg += " (and " + std::to_string(v.size() - 1) + " more)";
    throw InvalidArgument(msg);
  }
  std::unique_ptr<Model<T>> m(new Model<T>());
  m->spec_ = spec;
  const Rng root(seed);
  std::uint64_t stream = 1;
  std::int64_t c = spec.in_channels;
  for (const auto& st : spec.stages) {
    auto& blocks = m->stages_.emplace_back();
    for (const auto& b : st.blocks) {
      Rng rng = root.split(stream++);
      blocks.push_back(make_block<T>(b, c, rng));
      c = b.out_channels;
    }
  }
  Rng rng = root.split(stream);
  m->head_.weight = Var<T>::leaf(trunc_normal<T>(rng, {c, spec.num_classes}, 0.02));
  m->head_.bias = Var<T>::leaf(Tensor<T>::zeros({spec.num_classes}));
  return m;
}

template <class T>
typename Model<T>::Output Model<T>::forward(const Context<T>& ctx, const Var<T>& x) const {
  const auto& s = x.shape();
  if (s.size() != 4 || s[1] != spec_.in_channels) {
    throw DimensionError("model input must be [B, " + std::to_string(spec_.in_channels) + ", H, W], got " +
                         shape_str(s));
  }
  if (s[2] % 32 != 0 || s[3] % 32 != 0 || s[2] == 0 || s[3] == 0) {
    throw InvalidArgument("input resolution " + std::to_string(s[2]) + "x" + std::to_string(s[3]) +
                          " not divisible by 32");
  }
  Output out;
  Var<T> y = x;
  for (const auto& blocks : stages_) {
    for (const auto& b : blocks) y = b->forward(ctx, y);
    out.stage_shapes.push_back(y.shape());
  }
  out.logits = nn::linear_forward(ctx, nn::global_avg_pool(ctx, y), head_);
  return out;
}

template <class T>
Tensor<T> Model<T>::predict(const Tensor<T>& x) const {
  return forward(Context<T>{}, Var<T>::leaf(x)).logits.value();
}

template <class T>
std::vector<ParamRef<T>> Model<T>::parameters() {
  std::vector<ParamRef<T>> out;
  for (std::size_t si = 0; si < stages_.size(); ++si) {
    for (std::size_t bi = 0; bi < stages_[si].size(); ++bi) {
      stages_[si][bi]->collect(spec_.stages[si].name + "." + std::to_string(bi), out);
    }
  }
  out.push_back({"head.fc.weight", &head_.weight.mutable_value(), head_.weight, false});
  out.push_back({"head.fc.bias", &head_.bias.mutable_value(), head_.bias, false});
  return out;
}

template <class T>
std::int64_t Model<T>::parameter_count() {
  return trainable_count(parameters());
}

template <class T>
ModelWeights Model<T>::weights() {
  ModelWeights w;
  for (const auto& p : parameters()) {
    WeightEntry e;
    e.path = p.path;
    e.dtype = std::is_same_v<T, float> ? DType::kF32 : DType::kF64;
    e.shape = p.tensor->shape();
    e.bytes.resize(static_cast<std::size_t>(p.tensor->size()) * sizeof(T));
    if (!e.bytes.empty()) std::memcpy(e.bytes.data(), p.tensor->ptr(), e.bytes.size());
    w.entries.push_back(std::move(e));
  }
  return w;
}

template <class T>
void Model<T>::load(const ModelWeights& w) {
  auto params = parameters();
  const DType want = std::is_same_v<T, float> ? DType::kF32 : DType::kF64;
  const std::size_t n = std::max(params.size(), w.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= params.size()) throw FormatError("weights: unexpected extra entry '" + w.entries[i].path + "'");
    if (i >= w.entries.size()) throw FormatError("weights: missing entry '" + params[i].path + "'");
    const auto& e = w.entries[i];
    const auto& p = params[i];
    if (e.path != p.path) throw FormatError("weights: mismatch at '" + p.path + "' (file has '" + e.path + "')");
    if (e.dtype != want) throw FormatError("weights: dtype mismatch at '" + p.path + "'");
    if (e.shape != p.tensor->shape()) {
      throw FormatError("weights: shape mismatch at '" + p.path + "': file " + shape_str(e.shape) + ", model " +
                        shape_str(p.tensor->shape()));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!w.entries[i].bytes.empty()) std::memcpy(params[i].tensor->ptr(), w.entries[i].bytes.data(), w.entries[i].bytes.size());
  }
}

template class Model<float>;
template class Model<double>;

}  // namespace trtvit
