// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "trtvit/linalg.hpp"

namespace trtvit::nn {

namespace {

template <class T>
void require_rank(const Var<T>& x, int rank, const char* op) {
  if (x.value().rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + " input, got " +
                         shape_str(x.shape()));
  }
}

// Batch-free descriptor for shape-preserving ops.
template <class T>
OpDesc same_shape_desc(OpKind kind, const Tensor<T>& v) {
  if (v.rank() == 4) return map_desc(kind, v.dim(1), v.dim(2), v.dim(3));
  if (v.rank() >= 2) return token_desc(kind, v.size() / (v.dim(0) * v.dim(-1)), v.dim(-1));
  return token_desc(kind, 1, v.size());
}

template <class T>
void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
  T* d = dst.ptr();
  const T* s = src.ptr();
  for (std::int64_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

// col [C*K*K, OH*OW] from one image [C, H, W].
template <class T>
void im2col(const T* x, std::int64_t c, std::int64_t h, std::int64_t w, std::int64_t k, std::int64_t stride,
            std::int64_t pad, std::int64_t oh, std::int64_t ow, T* col) {
  for (std::int64_t ci = 0; ci < c; ++ci) {
    for (std::int64_t ky = 0; ky < k; ++ky) {
      for (std::int64_t kx = 0; kx < k; ++kx) {
        T* row = col + ((ci * k + ky) * k + kx) * oh * ow;
        for (std::int64_t oy = 0; oy < oh; ++oy) {
          const std::int64_t iy = oy * stride - pad + ky;
          T* dst = row + oy * ow;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + ow, T{0});
            continue;
          }
          const T* src = x + (ci * h + iy) * w;
          for (std::int64_t ox = 0; ox < ow; ++ox) {
            const std::int64_t ix = ox * stride - pad + kx;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : T{0};
          }
        }
      }
    }
  }
}

template <class T>
void col2im(const T* col, std::int64_t c, std::int64_t h, std::int64_t w, std::int64_t k, std::int64_t stride,
            std::int64_t pad, std::int64_t oh, std::int64_t ow, T* dx) {
  for (std::int64_t ci = 0; ci < c; ++ci) {
    for (std::int64_t ky = 0; ky < k; ++ky) {
      for (std::int64_t kx = 0; kx < k; ++kx) {
        const T* row = col + ((ci * k + ky) * k + kx) * oh * ow;
        for (std::int64_t oy = 0; oy < oh; ++oy) {
          const std::int64_t iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          T* dst = dx + (ci * h + iy) * w;
          for (std::int64_t ox = 0; ox < ow; ++ox) {
            const std::int64_t ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) dst[ix] += row[oy * ow + ox];
          }
        }
      }
    }
  }
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

}  // namespace

double gelu_tanh(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x))); }

// ---------------------------------------------------------------------------
// conv2d
// ---------------------------------------------------------------------------

template <class T>
Var<T> conv2d(const Context<T>& ctx, const Var<T>& x, const Var<T>& weight, const Var<T>& bias, std::int64_t stride,
              std::int64_t padding) {
  require_rank(x, 4, "conv2d");
  require_rank(weight, 4, "conv2d weight");
  const auto& xs = x.shape();
  const auto& ws = weight.shape();
  const std::int64_t b = xs[0], c = xs[1], h = xs[2], w = xs[3];
  const std::int64_t co = ws[0], k = ws[2];
  if (ws[1] != c || ws[3] != k) {
    throw DimensionError("conv2d: input " + shape_str(xs) + " incompatible with weight " + shape_str(ws));
  }
  if (stride < 1 || padding < 0) throw InvalidArgument("conv2d: stride must be >= 1 and padding >= 0");
  const bool has_bias = static_cast<bool>(bias);
  if (has_bias && (bias.value().rank() != 1 || bias.shape()[0] != co)) {
    throw DimensionError("conv2d: bias " + shape_str(bias.shape()) + " for " + std::to_string(co) + " outputs");
  }
  const std::int64_t oh = conv_out_extent(h, k, stride, padding);
  const std::int64_t ow = conv_out_extent(w, k, stride, padding);
  if (oh <= 0 || ow <= 0) {
    throw DimensionError("conv2d: non-positive output extent for input " + shape_str(xs) + " kernel " +
                         std::to_string(k));
  }
  const std::int64_t ckk = c * k * k;
  const std::int64_t plane = oh * ow;
  const bool direct = (k == 1 && stride == 1 && padding == 0);

  Tensor<T> out({b, co, oh, ow});
  std::vector<T> col(direct ? 0 : static_cast<std::size_t>(ckk * plane));
  for (std::int64_t n = 0; n < b; ++n) {
    const T* xn = x.value().ptr() + n * c * h * w;
    const T* src = xn;
    if (!direct) {
      im2col(xn, c, h, w, k, stride, padding, oh, ow, col.data());
      src = col.data();
    }
    T* on = out.ptr() + n * co * plane;
    gemm<T>(false, false, co, plane, ckk, weight.value().ptr(), ckk, src, plane, on, plane, false);
    if (has_bias) {
      for (std::int64_t o = 0; o < co; ++o) {
        const T bv = bias.value()[o];
        for (std::int64_t p = 0; p < plane; ++p) on[o * plane + p] += bv;
      }
    }
  }
  ctx.count(static_cast<std::uint64_t>(b * co * plane * ckk));
  ctx.record(conv_desc(c, co, k, stride, padding, h, w, has_bias));

  std::vector<Var<T>> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return make_result<T>(ctx, std::move(out), inputs, "conv2d", [=](Node<T>& self) {
    const Tensor<T>& dy = self.grad;
    Node<T>* px = self.parents[0].get();
    Node<T>* pw = self.parents[1].get();
    std::vector<T> colbuf(static_cast<std::size_t>(ckk * plane));
    std::vector<T> dcol(static_cast<std::size_t>(ckk * plane));
    for (std::int64_t n = 0; n < b; ++n) {
      const T* dyn = dy.ptr() + n * co * plane;
      const T* xn = px->value.ptr() + n * c * h * w;
      if (pw->requires_grad) {
        const T* src = xn;
        if (!direct) {
          im2col(xn, c, h, w, k, stride, padding, oh, ow, colbuf.data());
          src = colbuf.data();
        }
        gemm<T>(false, true, co, ckk, plane, dyn, plane, src, plane, pw->grad_buffer().ptr(), ckk, true);
      }
      if (px->requires_grad) {
        T* dxn = px->grad_buffer().ptr() + n * c * h * w;
        if (direct) {
          gemm<T>(true, false, ckk, plane, co, pw->value.ptr(), ckk, dyn, plane, dxn, plane, true);
        } else {
          gemm<T>(true, false, ckk, plane, co, pw->value.ptr(), ckk, dyn, plane, dcol.data(), plane, false);
          col2im(dcol.data(), c, h, w, k, stride, padding, oh, ow, dxn);
        }
      }
      if (has_bias && self.parents[2]->requires_grad) {
        T* db = self.parents[2]->grad_buffer().ptr();
        for (std::int64_t o = 0; o < co; ++o) {
          T s{0};
          for (std::int64_t p = 0; p < plane; ++p) s += dyn[o * plane + p];
          db[o] += s;
        }
      }
    }
  });
}

template <class T>
Var<T> conv2d_forward(const Context<T>& ctx, const Var<T>& x, const ConvParams<T>& p) {
  require_rank(x, 4, "conv2d");
  if (x.shape()[1] != p.in_channels) {
    throw DimensionError("conv2d: input has " + std::to_string(x.shape()[1]) + " channels, layer expects " +
                         std::to_string(p.in_channels));
  }
  return conv2d(ctx, x, p.weight, p.bias, p.stride, p.padding);
}

// ---------------------------------------------------------------------------
// linear
// ---------------------------------------------------------------------------

template <class T>
Var<T> linear(const Context<T>& ctx, const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  const auto& xs = x.shape();
  require_rank(weight, 2, "linear weight");
  if (xs.empty() || xs.back() != weight.shape()[0]) {
    throw DimensionError("linear: input " + shape_str(xs) + " incompatible with weight " +
                         shape_str(weight.shape()));
  }
  const std::int64_t cin = weight.shape()[0];
  const std::int64_t cout = weight.shape()[1];
  const std::int64_t rows = x.value().size() / cin;
  const bool has_bias = static_cast<bool>(bias);
  if (has_bias && (bias.value().rank() != 1 || bias.shape()[0] != cout)) {
    throw DimensionError("linear: bias " + shape_str(bias.shape()) + " for " + std::to_string(cout) + " outputs");
  }
  Shape os = xs;
  os.back() = cout;
  Tensor<T> out(os);
  gemm<T>(false, false, rows, cout, cin, x.value().ptr(), cin, weight.value().ptr(), cout, out.ptr(), cout, false);
  if (has_bias) {
    const T* bv = bias.value().ptr();
    for (std::int64_t r = 0; r < rows; ++r) {
      T* o = out.ptr() + r * cout;
      for (std::int64_t j = 0; j < cout; ++j) o[j] += bv[j];
    }
  }
  ctx.count(static_cast<std::uint64_t>(rows * cin * cout));
  const std::int64_t batch = xs.size() >= 2 ? xs[0] : 1;
  ctx.record(linear_desc(rows / batch, cin, cout, has_bias));

  std::vector<Var<T>> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return make_result<T>(ctx, std::move(out), inputs, "linear", [=](Node<T>& self) {
    const T* dy = self.grad.ptr();
    Node<T>* px = self.parents[0].get();
    Node<T>* pw = self.parents[1].get();
    if (px->requires_grad) {
      gemm<T>(false, true, rows, cin, cout, dy, cout, pw->value.ptr(), cout, px->grad_buffer().ptr(), cin, true);
    }
    if (pw->requires_grad) {
      gemm<T>(true, false, cin, cout, rows, px->value.ptr(), cin, dy, cout, pw->grad_buffer().ptr(), cout, true);
    }
    if (has_bias && self.parents[2]->requires_grad) {
      T* db = self.parents[2]->grad_buffer().ptr();
      for (std::int64_t r = 0; r < rows; ++r) {
        for (std::int64_t j = 0; j < cout; ++j) db[j] += dy[r * cout + j];
      }
    }
  });
}

// ---------------------------------------------------------------------------
// normalization
// ---------------------------------------------------------------------------

template <class T>
Var<T> batch_norm(const Context<T>& ctx, const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                  const Tensor<T>& running_mean, const Tensor<T>& running_var, double eps) {
  require_rank(x, 4, "batch_norm");
  const auto& xs = x.shape();
  const std::int64_t b = xs[0], c = xs[1], plane = xs[2] * xs[3];
  for (const Tensor<T>* t : {&gamma.value(), &beta.value(), &running_mean, &running_var}) {
    if (t->rank() != 1 || t->dim(0) != c) {
      throw DimensionError("batch_norm: parameter of shape " + shape_str(t->shape()) + " for " +
                           std::to_string(c) + " channels");
    }
  }
  if (!(eps > 0)) throw InvalidArgument("batch_norm: epsilon must be positive");
  std::vector<T> inv_std(static_cast<std::size_t>(c));
  for (std::int64_t ci = 0; ci < c; ++ci) {
    if (running_var[ci] < 0) throw InvalidArgument("batch_norm: negative running variance");
    inv_std[static_cast<std::size_t>(ci)] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var[ci]) + eps));
  }
  Tensor<T> out(xs);
  for (std::int64_t n = 0; n < b; ++n) {
    for (std::int64_t ci = 0; ci < c; ++ci) {
      const T mu = running_mean[ci];
      const T s = inv_std[static_cast<std::size_t>(ci)] * gamma.value()[ci];
      const T sh = beta.value()[ci];
      const T* xi = x.value().ptr() + (n * c + ci) * plane;
      T* o = out.ptr() + (n * c + ci) * plane;
      for (std::int64_t p = 0; p < plane; ++p) o[p] = (xi[p] - mu) * s + sh;
    }
  }
  ctx.record(map_desc(OpKind::kBatchNorm, c, xs[2], xs[3]));
  Tensor<T> mean = running_mean;
  return make_result<T>(ctx, std::move(out), {x, gamma, beta}, "batch_norm", [=](Node<T>& self) {
    const T* dy = self.grad.ptr();
    Node<T>* px = self.parents[0].get();
    Node<T>* pg = self.parents[1].get();
    Node<T>* pb = self.parents[2].get();
    for (std::int64_t n = 0; n < b; ++n) {
      for (std::int64_t ci = 0; ci < c; ++ci) {
        const T is = inv_std[static_cast<std::size_t>(ci)];
        const T* g = dy + (n * c + ci) * plane;
        const T* xi = px->value.ptr() + (n * c + ci) * plane;
        if (px->requires_grad) {
          T* dx = px->grad_buffer().ptr() + (n * c + ci) * plane;
          const T s = is * pg->value[ci];
          for (std::int64_t p = 0; p < plane; ++p) dx[p] += g[p] * s;
        }
        if (pg->requires_grad) {
          T acc{0};
          for (std::int64_t p = 0; p < plane; ++p) acc += g[p] * (xi[p] - mean[ci]) * is;
          pg->grad_buffer()[ci] += acc;
        }
        if (pb->requires_grad) {
          T acc{0};
          for (std::int64_t p = 0; p < plane; ++p) acc += g[p];
          pb->grad_buffer()[ci] += acc;
        }
      }
    }
  });
}

template <class T>
Var<T> layer_norm(const Context<T>& ctx, const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, double eps) {
  const auto& xs = x.shape();
  if (xs.empty()) throw DimensionError("layer_norm: scalar input");
  const std::int64_t c = xs.back();
  if (gamma.value().rank() != 1 || gamma.shape()[0] != c || beta.value().rank() != 1 || beta.shape()[0] != c) {
    throw DimensionError("layer_norm: parameters " + shape_str(gamma.shape()) + "/" + shape_str(beta.shape()) +
                         " for channel extent " + std::to_string(c));
  }
  if (!(eps > 0)) throw InvalidArgument("layer_norm: epsilon must be positive");
  const std::int64_t rows = x.value().size() / c;
  Tensor<T> out(xs);
  Tensor<T> xhat(xs);
  std::vector<T> inv_std(static_cast<std::size_t>(rows));
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* xi = x.value().ptr() + r * c;
    T mean{0};
    for (std::int64_t j = 0; j < c; ++j) mean += xi[j];
    mean /= static_cast<T>(c);
    T var{0};
    for (std::int64_t j = 0; j < c; ++j) var += (xi[j] - mean) * (xi[j] - mean);
    var /= static_cast<T>(c);
    const T is = static_cast<T>(1.0 / std::sqrt(static_cast<double>(var) + eps));
    inv_std[static_cast<std::size_t>(r)] = is;
    T* xh = xhat.ptr() + r * c;
    T* o = out.ptr() + r * c;
    for (std::int64_t j = 0; j < c; ++j) {
      xh[j] = (xi[j] - mean) * is;
      o[j] = xh[j] * gamma.value()[j] + beta.value()[j];
    }
  }
  ctx.record(same_shape_desc(OpKind::kLayerNorm, x.value()));
  return make_result<T>(ctx, std::move(out), {x, gamma, beta}, "layer_norm",
                        [=, xhat = std::move(xhat)](Node<T>& self) {
    const T* dy = self.grad.ptr();
    Node<T>* px = self.parents[0].get();
    Node<T>* pg = self.parents[1].get();
    Node<T>* pb = self.parents[2].get();
    std::vector<T> dxh(static_cast<std::size_t>(c));
    for (std::int64_t r = 0; r < rows; ++r) {
      const T* g = dy + r * c;
      const T* xh = xhat.ptr() + r * c;
      if (pg->requires_grad) {
        T* dg = pg->grad_buffer().ptr();
        for (std::int64_t j = 0; j < c; ++j) dg[j] += g[j] * xh[j];
      }
      if (pb->requires_grad) {
        T* db = pb->grad_buffer().ptr();
        for (std::int64_t j = 0; j < c; ++j) db[j] += g[j];
      }
      if (px->requires_grad) {
        T mean_d{0};
        T mean_dx{0};
        for (std::int64_t j = 0; j < c; ++j) {
          dxh[static_cast<std::size_t>(j)] = g[j] * pg->value[j];
          mean_d += dxh[static_cast<std::size_t>(j)];
          mean_dx += dxh[static_cast<std::size_t>(j)] * xh[j];
        }
        mean_d /= static_cast<T>(c);
        mean_dx /= static_cast<T>(c);
        const T is = inv_std[static_cast<std::size_t>(r)];
        T* dx = px->grad_buffer().ptr() + r * c;
        for (std::int64_t j = 0; j < c; ++j) dx[j] += is * (dxh[static_cast<std::size_t>(j)] - mean_d - xh[j] * mean_dx);
      }
    }
  });
}

template <class T>
Var<T> norm_forward(const Context<T>& ctx, const Var<T>& x, const NormParams<T>& p) {
  if (p.kind == NormKind::kBatchNormInference) {
    return batch_norm(ctx, x, p.gamma, p.beta, p.running_mean, p.running_var, p.eps);
  }
  return layer_norm(ctx, x, p.gamma, p.beta, p.eps);
}

// ---------------------------------------------------------------------------
// activations and softmax
// ---------------------------------------------------------------------------

template <class T>
Var<T> relu(const Context<T>& ctx, const Var<T>& x) {
  Tensor<T> out(x.shape());
  const T* xi = x.value().ptr();
  T* o = out.ptr();
  for (std::int64_t i = 0; i < out.size(); ++i) o[i] = xi[i] > T{0} ? xi[i] : T{0};
  ctx.record(same_shape_desc(OpKind::kReLU, x.value()));
  return make_result<T>(ctx, std::move(out), {x}, "relu", [](Node<T>& self) {
    Node<T>* px = self.parents[0].get();
    T* dx = px->grad_buffer().ptr();
    const T* xi = px->value.ptr();
    const T* g = self.grad.ptr();
    for (std::int64_t i = 0; i < self.grad.size(); ++i) {
      if (xi[i] > T{0}) dx[i] += g[i];
    }
  });
}

template <class T>
Var<T> gelu(const Context<T>& ctx, const Var<T>& x) {
  Tensor<T> out(x.shape());
  const T* xi = x.value().ptr();
  T* o = out.ptr();
  for (std::int64_t i = 0; i < out.size(); ++i) o[i] = static_cast<T>(gelu_tanh(static_cast<double>(xi[i])));
  ctx.record(same_shape_desc(OpKind::kGeLU, x.value()));
  return make_result<T>(ctx, std::move(out), {x}, "gelu", [](Node<T>& self) {
    Node<T>* px = self.parents[0].get();
    T* dx = px->grad_buffer().ptr();
    const T* xi = px->value.ptr();
    const T* g = self.grad.ptr();
    for (std::int64_t i = 0; i < self.grad.size(); ++i) {
      const double v = static_cast<double>(xi[i]);
      const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
      const double d = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
      dx[i] += g[i] * static_cast<T>(d);
    }
  });
}

template <class T>
Var<T> softmax(const Context<T>& ctx, const Var<T>& x) {
  const auto& xs = x.shape();
  if (xs.empty()) throw DimensionError("softmax: scalar input");
  const std::int64_t c = xs.back();
  const std::int64_t rows = c ? x.value().size() / c : 0;
  Tensor<T> out(xs);
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* xi = x.value().ptr() + r * c;
    T* o = out.ptr() + r * c;
    T mx = -std::numeric_limits<T>::infinity();
    for (std::int64_t j = 0; j < c; ++j) mx = std::max(mx, xi[j]);
    T sum{0};
    for (std::int64_t j = 0; j < c; ++j) {
      o[j] = std::exp(xi[j] - mx);
      sum += o[j];
    }
    const T inv = T{1} / sum;
    for (std::int64_t j = 0; j < c; ++j) o[j] *= inv;
  }
  ctx.record(same_shape_desc(OpKind::kSoftmax, x.value()));
  return make_result<T>(ctx, out, {x}, "softmax", [=, y = out](Node<T>& self) {
    Node<T>* px = self.parents[0].get();
    T* dx = px->grad_buffer().ptr();
    const T* g = self.grad.ptr();
    for (std::int64_t r = 0; r < rows; ++r) {
      const T* yr = y.ptr() + r * c;
      const T* gr = g + r * c;
      T dot{0};
      for (std::int64_t j = 0; j < c; ++j) dot += gr[j] * yr[j];
      for (std::int64_t j = 0; j < c; ++j) dx[r * c + j] += yr[j] * (gr[j] - dot);
    }
  });
}

// ---------------------------------------------------------------------------
// pooling
// ---------------------------------------------------------------------------

template <class T>
Var<T> avg_pool2d(const Context<T>& ctx, const Var<T>& x, std::int64_t kernel, std::int64_t stride) {
  require_rank(x, 4, "avg_pool2d");
  if (kernel < 1 || stride < 1) throw InvalidArgument("avg_pool2d: kernel and stride must be >= 1");
  const auto& xs = x.shape();
  const std::int64_t b = xs[0], c = xs[1], h = xs[2], w = xs[3];
  const std::int64_t oh = conv_out_extent(h, kernel, stride, 0);
  const std::int64_t ow = conv_out_extent(w, kernel, stride, 0);
  if (oh <= 0 || ow <= 0) throw DimensionError("avg_pool2d: window larger than input " + shape_str(xs));
  const T inv = T{1} / static_cast<T>(kernel * kernel);
  Tensor<T> out({b, c, oh, ow});
  for (std::int64_t nc = 0; nc < b * c; ++nc) {
    const T* xi = x.value().ptr() + nc * h * w;
    T* o = out.ptr() + nc * oh * ow;
    for (std::int64_t oy = 0; oy < oh; ++oy) {
      for (std::int64_t ox = 0; ox < ow; ++ox) {
        T s{0};
        for (std::int64_t ky = 0; ky < kernel; ++ky) {
          for (std::int64_t kx = 0; kx < kernel; ++kx) s += xi[(oy * stride + ky) * w + ox * stride + kx];
        }
        o[oy * ow + ox] = s * inv;
      }
    }
  }
  ctx.record(pool_desc(OpKind::kAvgPool, c, kernel, stride, 0, h, w));
  return make_result<T>(ctx, std::move(out), {x}, "avg_pool2d", [=](Node<T>& self) {
    Node<T>* px = self.parents[0].get();
    for (std::int64_t nc = 0; nc < b * c; ++nc) {
      T* dx = px->grad_buffer().ptr() + nc * h * w;
      const T* g = self.grad.ptr() + nc * oh * ow;
      for (std::int64_t oy = 0; oy < oh; ++oy) {
        for (std::int64_t ox = 0; ox < ow; ++ox) {
          const T v = g[oy * ow + ox] * inv;
          for (std::int64_t ky = 0; ky < kernel; ++ky) {
            for (std::int64_t kx = 0; kx < kernel; ++kx) dx[(oy * stride + ky) * w + ox * stride + kx] += v;
          }
        }
      }
    }
  });
}

template <class T>
Var<T> max_pool2d(const Context<T>& ctx, const Var<T>& x, std::int64_t kernel, std::int64_t stride,
                  std::int64_t padding) {
  require_rank(x, 4, "max_pool2d");
  if (kernel < 1 || stride < 1 || padding < 0) throw InvalidArgument("max_pool2d: bad window parameters");
  const auto& xs = x.shape();
  const std::int64_t b = xs[0], c = xs[1], h = xs[2], w = xs[3];
  const std::int64_t oh = conv_out_extent(h, kernel, stride, padding);
  const std::int64_t ow = conv_out_extent(w, kernel, stride, padding);
  if (oh <= 0 || ow <= 0) throw DimensionError("max_pool2d: window larger than input " + shape_str(xs));
  Tensor<T> out({b, c, oh, ow});
  std::vector<std::int64_t> argmax(static_cast<std::size_t>(out.size()));
  for (std::int64_t nc = 0; nc < b * c; ++nc) {
    const T* xi = x.value().ptr() + nc * h * w;
    for (std::int64_t oy = 0; oy < oh; ++oy) {
      for (std::int64_t ox = 0; ox < ow; ++ox) {
        T best = -std::numeric_limits<T>::infinity();
        std::int64_t arg = -1;
        for (std::int64_t ky = 0; ky < kernel; ++ky) {
          const std::int64_t iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= h) continue;
          for (std::int64_t kx = 0; kx < kernel; ++kx) {
            const std::int64_t ix = ox * stride - padding + kx;
            if (ix < 0 || ix >= w) continue;
            if (arg < 0 || xi[iy * w + ix] > best) {
              best = xi[iy * w + ix];
              arg = iy * w + ix;
            }
          }
        }
        const std::int64_t oi = (nc * oh + oy) * ow + ox;
        out[oi] = best;
        argmax[static_cast<std::size_t>(oi)] = arg;
      }
    }
  }
  ctx.record(pool_desc(OpKind::kMaxPool, c, kernel, stride, padding, h, w));
  return make_result<T>(ctx, std::move(out), {x}, "max_pool2d", [=, argmax = std::move(argmax)](Node<T>& self) {
    Node<T>* px = self.parents[0].get();
    T* dx = px->grad_buffer().ptr();
    const T* g = self.grad.ptr();
    for (std::int64_t nc = 0; nc < b * c; ++nc) {
      for (std::int64_t p = 0; p < oh * ow; ++p) {
        const std::int64_t oi = nc * oh * ow + p;
        dx[nc * h * w + argmax[static_cast<std::size_t>(oi)]] += g[oi];
      }
    }
  });
}

template <class T>
Var<T> global_avg_pool(const Context<T>& ctx, const Var<T>& x) {
  require_rank(x, 4, "global_avg_pool");
  const auto& xs = x.shape();
  const std::int64_t b = xs[0], c = xs[1], plane = xs[2] * xs[3];
  const T inv = T{1} / static_cast<T>(plane);
  Tensor<T> out({b, c});
  for (std::int64_t nc = 0; nc < b * c; ++nc) {
    const T* xi = x.value().ptr() + nc * plane;
    T s{0};
    for (std::int64_t p = 0; p < plane; ++p) s += xi[p];
    out[nc] = s * inv;
  }
  ctx.record(global_pool_desc(c, xs[2], xs[3]));
  return make_result<T>(ctx, std::move(out), {x}, "global_avg_pool", [=](Node<T>& self) {
    T* dx = self.parents[0]->grad_buffer().ptr();
    for (std::int64_t nc = 0; nc < b * c; ++nc) {
      const T v = self.grad[nc] * inv;
      for (std::int64_t p = 0; p < plane; ++p) dx[nc * plane + p] += v;
    }
  });
}

// ---------------------------------------------------------------------------
// channel split / concat, elementwise
// ---------------------------------------------------------------------------

template <class T>
std::pair<Var<T>, Var<T>> channel_split(const Context<T>& ctx, const Var<T>& x, std::int64_t c1) {
  const auto& xs = x.shape();
  if (xs.size() < 2) throw DimensionError("channel_split: expected rank >= 2, got " + shape_str(xs));
  const std::int64_t c = xs[1];
  if (c1 <= 0 || c1 >= c) {
    throw InvalidArgument("channel_split: split point " + std::to_string(c1) + " outside (0, " + std::to_string(c) +
                          ")");
  }
  const std::int64_t outer = xs[0];
  const std::int64_t inner = x.value().size() / (outer * c);
  const std::int64_t c2 = c - c1;
  Shape s1 = xs, s2 = xs;
  s1[1] = c1;
  s2[1] = c2;
  Tensor<T> a(s1), bt(s2);
  for (std::int64_t n = 0; n < outer; ++n) {
    const T* src = x.value().ptr() + n * c * inner;
    std::copy(src, src + c1 * inner, a.ptr() + n * c1 * inner);
    std::copy(src + c1 * inner, src + c * inner, bt.ptr() + n * c2 * inner);
  }
  const std::int64_t h = xs.size() == 4 ? xs[2] : 0;
  const std::int64_t w = xs.size() == 4 ? xs[3] : 0;
  ctx.record(split_desc(OpKind::kSplit, c1, c2, h, w));
  auto first = make_result<T>(ctx, std::move(a), {x}, "split", [=](Node<T>& self) {
    T* dx = self.parents[0]->grad_buffer().ptr();
    for (std::int64_t n = 0; n < outer; ++n) {
      const T* g = self.grad.ptr() + n * c1 * inner;
      for (std::int64_t i = 0; i < c1 * inner; ++i) dx[n * c * inner + i] += g[i];
    }
  });
  auto second = make_result<T>(ctx, std::move(bt), {x}, "split", [=](Node<T>& self) {
    T* dx = self.parents[0]->grad_buffer().ptr();
    for (std::int64_t n = 0; n < outer; ++n) {
      const T* g = self.grad.ptr() + n * c2 * inner;
      for (std::int64_t i = 0; i < c2 * inner; ++i) dx[n * c * inner + c1 * inner + i] += g[i];
    }
  });
  return {first, second};
}

template <class T>
Var<T> channel_concat(const Context<T>& ctx, const Var<T>& a, const Var<T>& b) {
  const auto& as = a.shape();
  const auto& bs = b.shape();
  bool ok = as.size() == bs.size() && as.size() >= 2 && as[0] == bs[0];
  for (std::size_t i = 2; ok && i < as.size(); ++i) ok = as[i] == bs[i];
  if (!ok) throw DimensionError("channel_concat: incompatible " + shape_str(as) + " and " + shape_str(bs));
  const std::int64_t outer = as[0], c1 = as[1], c2 = bs[1], c = c1 + c2;
  const std::int64_t inner = a.value().size() / (outer * c1);
  Shape os = as;
  os[1] = c;
  Tensor<T> out(os);
  for (std::int64_t n = 0; n < outer; ++n) {
    std::copy(a.value().ptr() + n * c1 * inner, a.value().ptr() + (n + 1) * c1 * inner, out.ptr() + n * c * inner);
    std::copy(b.value().ptr() + n * c2 * inner, b.value().ptr() + (n + 1) * c2 * inner,
              out.ptr() + n * c * inner + c1 * inner);
  }
  const std::int64_t h = as.size() == 4 ? as[2] : 0;
  const std::int64_t w = as.size() == 4 ? as[3] : 0;
  ctx.record(split_desc(OpKind::kConcat, c1, c2, h, w));
  return make_result<T>(ctx, std::move(out), {a, b}, "concat", [=](Node<T>& self) {
    Node<T>* pa = self.parents[0].get();
    Node<T>* pb = self.parents[1].get();
    for (std::int64_t n = 0; n < outer; ++n) {
      const T* g = self.grad.ptr() + n * c * inner;
      if (pa->requires_grad) {
        T* d = pa->grad_buffer().ptr() + n * c1 * inner;
        for (std::int64_t i = 0; i < c1 * inner; ++i) d[i] += g[i];
      }
      if (pb->requires_grad) {
        T* d = pb->grad_buffer().ptr() + n * c2 * inner;
        for (std::int64_t i = 0; i < c2 * inner; ++i) d[i] += g[c1 * inner + i];
      }
    }
  });
}

template <class T>
Var<T> add(const Context<T>& ctx, const Var<T>& a, const Var<T>& b) {
  Tensor<T> out = elementwise(ElementwiseOp::kAdd, a.value(), b.value());
  ctx.record(same_shape_desc(OpKind::kAdd, a.value()));
  return make_result<T>(ctx, std::move(out), {a, b}, "add", [](Node<T>& self) {
    for (int i = 0; i < 2; ++i) {
      if (self.parents[static_cast<std::size_t>(i)]->requires_grad) {
        accumulate(self.parents[static_cast<std::size_t>(i)]->grad_buffer(), self.grad);
      }
    }
  });
}

template <class T>
Var<T> scale(const Context<T>& ctx, const Var<T>& x, T factor) {
  Tensor<T> out = elementwise(ElementwiseOp::kScale, x.value(), factor);
  return make_result<T>(ctx, std::move(out), {x}, "scale", [factor](Node<T>& self) {
    T* dx = self.parents[0]->grad_buffer().ptr();
    for (std::int64_t i = 0; i < self.grad.size(); ++i) dx[i] += self.grad[i] * factor;
  });
}

// ---------------------------------------------------------------------------
// layout changes
// ---------------------------------------------------------------------------

namespace {

// out[b][j][i] = in[b][i][j] for in [B, R, C].
template <class T>
void batched_transpose(const T* in, T* out, std::int64_t batch, std::int64_t rows, std::int64_t cols, bool add) {
  for (std::int64_t n = 0; n < batch; ++n) {
    const T* src = in + n * rows * cols;
    T* dst = out + n * rows * cols;
    for (std::int64_t i = 0; i < rows; ++i) {
      for (std::int64_t j = 0; j < cols; ++j) {
        if (add) {
          dst[j * rows + i] += src[i * cols + j];
        } else {
          dst[j * rows + i] = src[i * cols + j];
        }
      }
    }
  }
}

// [B, N, H, D] <-> [B, H, N, D]
template <class T>
void swap_mid(const T* in, T* out, std::int64_t b, std::int64_t n1, std::int64_t n2, std::int64_t d, bool add) {
  for (std::int64_t bi = 0; bi < b; ++bi) {
    for (std::int64_t i = 0; i < n1; ++i) {
      for (std::int64_t j = 0; j < n2; ++j) {
        const T* src = in + ((bi * n1 + i) * n2 + j) * d;
        T* dst = out + ((bi * n2 + j) * n1 + i) * d;
        for (std::int64_t k = 0; k < d; ++k) {
          if (add) {
            dst[k] += src[k];
          } else {
            dst[k] = src[k];
          }
        }
      }
    }
  }
}

}  // namespace

template <class T>
Var<T> to_tokens(const Context<T>& ctx, const Var<T>& x) {
  require_rank(x, 4, "to_tokens");
  const auto& xs = x.shape();
  const std::int64_t b = xs[0], c = xs[1], n = xs[2] * xs[3];
  Tensor<T> out({b, n, c});
  batched_transpose(x.value().ptr(), out.ptr(), b, c, n, false);
  return make_result<T>(ctx, std::move(out), {x}, "to_tokens", [=](Node<T>& self) {
    batched_transpose(self.grad.ptr(), self.parents[0]->grad_buffer().ptr(), b, n, c, true);
  });
}

template <class T>
Var<T> to_map(const Context<T>& ctx, const Var<T>& x, std::int64_t h, std::int64_t w) {
  require_rank(x, 3, "to_map");
  const auto& xs = x.shape();
  const std::int64_t b = xs[0], n = xs[1], c = xs[2];
  if (n != h * w) {
    throw DimensionError("to_map: " + std::to_string(n) + " tokens cannot form a " + std::to_string(h) + "x" +
                         std::to_string(w) + " map");
  }
  Tensor<T> out({b, c, h, w});
  batched_transpose(x.value().ptr(), out.ptr(), b, n, c, false);
  return make_result<T>(ctx, std::move(out), {x}, "to_map", [=](Node<T>& self) {
    batched_transpose(self.grad.ptr(), self.parents[0]->grad_buffer().ptr(), b, c, n, true);
  });
}

template <class T>
Var<T> split_heads(const Context<T>& ctx, const Var<T>& x, std::int64_t heads) {
  require_rank(x, 3, "split_heads");
  const auto& xs = x.shape();
  const std::int64_t b = xs[0], n = xs[1], c = xs[2];
  if (heads < 1 || c % heads != 0) {
    throw InvalidArgument("split_heads: " + std::to_string(c) + " channels not divisible into " +
                          std::to_string(heads) + " heads");
  }
  const std::int64_t d = c / heads;
  Tensor<T> out({b * heads, n, d});
  swap_mid(x.value().ptr(), out.ptr(), b, n, heads, d, false);
  return make_result<T>(ctx, std::move(out), {x}, "split_heads", [=](Node<T>& self) {
    swap_mid(self.grad.ptr(), self.parents[0]->grad_buffer().ptr(), b, heads, n, d, true);
  });
}

template <class T>
Var<T> merge_heads(const Context<T>& ctx, const Var<T>& x, std::int64_t heads) {
  require_rank(x, 3, "merge_heads");
  const auto& xs = x.shape();
  if (heads < 1 || xs[0] % heads != 0) throw InvalidArgument("merge_heads: leading extent not divisible by heads");
  const std::int64_t b = xs[0] / heads, n = xs[1], d = xs[2];
  Tensor<T> out({b, n, heads * d});
  swap_mid(x.value().ptr(), out.ptr(), b, heads, n, d, false);
  return make_result<T>(ctx, std::move(out), {x}, "merge_heads", [=](Node<T>& self) {
    swap_mid(self.grad.ptr(), self.parents[0]->grad_buffer().ptr(), b, n, heads, d, true);
  });
}

template <class T>
Var<T> batched_matmul(const Context<T>& ctx, const Var<T>& a, const Var<T>& b, bool trans_b) {
  require_rank(a, 3, "batched_matmul");
  require_rank(b, 3, "batched_matmul");
  const auto& as = a.shape();
  const auto& bs = b.shape();
  const std::int64_t g = as[0], m = as[1], k = as[2];
  const std::int64_t kb = trans_b ? bs[2] : bs[1];
  const std::int64_t n = trans_b ? bs[1] : bs[2];
  if (bs[0] != g || kb != k) {
    throw DimensionError("batched_matmul: incompatible shapes " + shape_str(as) + " and " + shape_str(bs));
  }
  Tensor<T> out({g, m, n});
  for (std::int64_t i = 0; i < g; ++i) {
    gemm<T>(false, trans_b, m, n, k, a.value().ptr() + i * m * k, k, b.value().ptr() + i * k * n, trans_b ? k : n,
            out.ptr() + i * m * n, n, false);
  }
  ctx.count(static_cast<std::uint64_t>(g * m * k * n));
  ctx.record(matmul_desc(g, m, k, n));
  return make_result<T>(ctx, std::move(out), {a, b}, "batched_matmul", [=](Node<T>& self) {
    Node<T>* pa = self.parents[0].get();
    Node<T>* pb = self.parents[1].get();
    for (std::int64_t i = 0; i < g; ++i) {
      const T* dc = self.grad.ptr() + i * m * n;
      const T* av = pa->value.ptr() + i * m * k;
      const T* bv = pb->value.ptr() + i * k * n;
      if (pa->requires_grad) {
        // da = dc * op(b)^T
        gemm<T>(false, !trans_b, m, k, n, dc, n, bv, trans_b ? k : n, pa->grad_buffer().ptr() + i * m * k, k, true);
      }
      if (pb->requires_grad) {
        if (trans_b) {
          // b stored [n, k]: db = dc^T a
          gemm<T>(true, false, n, k, m, dc, n, av, k, pb->grad_buffer().ptr() + i * k * n, k, true);
        } else {
          gemm<T>(true, false, k, n, m, av, k, dc, n, pb->grad_buffer().ptr() + i * k * n, n, true);
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// attention
// ---------------------------------------------------------------------------

template <class T>
Var<T> sra_attention_forward(const Context<T>& ctx, const Var<T>& x, const AttentionParams<T>& p, std::int64_t h,
                             std::int64_t w) {
  require_rank(x, 3, "attention");
  const auto& xs = x.shape();
  const std::int64_t c = p.channels;
  if (c % kHeadDim != 0 || c <= 0) {
    throw InvalidArgument("attention: channels " + std::to_string(c) + " not divisible by head dim 32");
  }
  if (xs[2] != c) {
    throw DimensionError("attention: input has " + std::to_string(xs[2]) + " channels, expected " + std::to_string(c));
  }
  if (xs[1] != h * w) {
    throw DimensionError("attention: " + std::to_string(xs[1]) + " tokens do not match " + std::to_string(h) + "x" +
                         std::to_string(w));
  }
  if (p.sr_ratio < 1 || h % p.sr_ratio != 0 || w % p.sr_ratio != 0) {
    throw InvalidArgument("attention: spatial reduction " + std::to_string(p.sr_ratio) + " does not divide " +
                          std::to_string(h) + "x" + std::to_string(w));
  }
  ctx.record(attention_desc(c, h, w, p.sr_ratio));
  const Context<T> inner = ctx.untraced();
  const std::int64_t heads = p.heads();

  Var<T> q = linear_forward(inner, x, p.q);
  Var<T> kv_src = x;
  if (p.sr_ratio > 1) {
    Var<T> map = to_map(inner, x, h, w);
    Var<T> reduced = conv2d_forward(inner, map, p.reduction);
    kv_src = norm_forward(inner, to_tokens(inner, reduced), p.reduction_norm);
  }
  Var<T> k = linear_forward(inner, kv_src, p.k);
  Var<T> v = linear_forward(inner, kv_src, p.v);

  Var<T> qh = split_heads(inner, q, heads);
  Var<T> kh = split_heads(inner, k, heads);
  Var<T> vh = split_heads(inner, v, heads);
  Var<T> scores = scale(inner, batched_matmul(inner, qh, kh, true), static_cast<T>(1.0 / std::sqrt(double(kHeadDim))));
  Var<T> probs = softmax(inner, scores);
  Var<T> ctx_heads = batched_matmul(inner, probs, vh, false);
  return linear_forward(inner, merge_heads(inner, ctx_heads, heads), p.out);
}

#define TRTVIT_INSTANTIATE(T)                                                                                      \
  template Var<T> conv2d<T>(const Context<T>&, const Var<T>&, const Var<T>&, const Var<T>&, std::int64_t,         \
                            std::int64_t);                                                                         \
  template Var<T> conv2d_forward<T>(const Context<T>&, const Var<T>&, const ConvParams<T>&);                       \
  template Var<T> linear<T>(const Context<T>&, const Var<T>&, const Var<T>&, const Var<T>&);                       \
  template Var<T> batch_norm<T>(const Context<T>&, const Var<T>&, const Var<T>&, const Var<T>&, const Tensor<T>&, \
                                const Tensor<T>&, double);                                                         \
  template Var<T> layer_norm<T>(const Context<T>&, const Var<T>&, const Var<T>&, const Var<T>&, double);           \
  template Var<T> norm_forward<T>(const Context<T>&, const Var<T>&, const NormParams<T>&);                         \
  template Var<T> relu<T>(const Context<T>&, const Var<T>&);                                                       \
  template Var<T> gelu<T>(const Context<T>&, const Var<T>&);                                                       \
  template Var<T> softmax<T>(const Context<T>&, const Var<T>&);                                                    \
  template Var<T> avg_pool2d<T>(const Context<T>&, const Var<T>&, std::int64_t, std::int64_t);                     \
  template Var<T> max_pool2d<T>(const Context<T>&, const Var<T>&, std::int64_t, std::int64_t, std::int64_t);       \
  template Var<T> global_avg_pool<T>(const Context<T>&, const Var<T>&);                                            \
  template std::pair<Var<T>, Var<T>> channel_split<T>(const Context<T>&, const Var<T>&, std::int64_t);             \
  template Var<T> channel_concat<T>(const Context<T>&, const Var<T>&, const Var<T>&);                              \
  template Var<T> add<T>(const Context<T>&, const Var<T>&, const Var<T>&);                                         \
  template Var<T> scale<T>(const Context<T>&, const Var<T>&, T);                                                   \
  template Var<T> to_tokens<T>(const Context<T>&, const Var<T>&);                                                  \
  template Var<T> to_map<T>(const Context<T>&, const Var<T>&, std::int64_t, std::int64_t);                         \
  template Var<T> split_heads<T>(const Context<T>&, const Var<T>&, std::int64_t);                                  \
  template Var<T> merge_heads<T>(const Context<T>&, const Var<T>&, std::int64_t);                                  \
  template Var<T> batched_matmul<T>(const Context<T>&, const Var<T>&, const Var<T>&, bool);                        \
  template Var<T> sra_attention_forward<T>(const Context<T>&, const Var<T>&, const AttentionParams<T>&,            \
                                           std::int64_t, std::int64_t);

TRTVIT_INSTANTIATE(float)
TRTVIT_INSTANTIATE(double)

#undef TRTVIT_INSTANTIATE

}  // namespace trtvit::nn
