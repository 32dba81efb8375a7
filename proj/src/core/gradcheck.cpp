// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace trtvit {

namespace {

double project(const Tensor<double>& out, const Tensor<double>& r) {
  double s = 0.0;
  for (std::int64_t i = 0; i < out.size(); ++i) s += out[i] * r[i];
  return s;
}

// Second difference large relative to the first means the step crossed a kink.
bool nonsmooth(double fp, double f0, double fm) {
  const double first = std::abs(fp - fm);
  const double second = std::abs(fp - 2.0 * f0 + fm);
  const double scale = std::max({std::abs(fp), std::abs(f0), std::abs(fm), 1.0});
  if (second <= 1e-13 * scale) return false;
  return second > 1e-3 * first;
}

}  // namespace

double grad_rel_error(double analytic, double numeric, double abs_floor) {
  const double diff = std::abs(analytic - numeric);
  if (diff <= abs_floor) return 0.0;
  return diff / std::max(std::abs(analytic), std::abs(numeric));
}

GradcheckReport gradcheck(const GradForward& forward, const std::vector<GradLeaf>& leaves,
                          const GradcheckOptions& opts) {
  if (!(opts.step > 0)) throw InvalidArgument("gradcheck: step must be positive");
  GradcheckReport rep;
  for (const auto& l : leaves) {
    if (!l.var) throw InvalidArgument("gradcheck: empty leaf '" + l.name + "'");
    l.var.node()->requires_grad = true;
    l.var.node()->grad = Tensor<double>();
    rep.total_coords += l.var.value().size();
  }

  Context<double> grad_ctx;
  grad_ctx.record_grad = true;
  Var<double> out = forward(grad_ctx);
  Rng rng(opts.seed, 0x6a09e667f3bcc908ULL);
  const Tensor<double> r = rand_normal<double>(rng, out.shape(), 1.0);
  backward(out, r);

  // (leaf, coordinate) pairs to check.
  std::vector<std::pair<std::size_t, std::int64_t>> coords;
  if (rep.total_coords <= opts.full_limit) {
    for (std::size_t li = 0; li < leaves.size(); ++li) {
      for (std::int64_t i = 0; i < leaves[li].var.value().size(); ++i) coords.emplace_back(li, i);
    }
  } else {
    // One coordinate from every leaf, the rest uniform over all coordinates.
    Rng pick = rng.split(1);
    for (std::size_t li = 0; li < leaves.size(); ++li) {
      const auto n = static_cast<std::uint64_t>(leaves[li].var.value().size());
      if (n) coords.emplace_back(li, static_cast<std::int64_t>(pick.next_u64() % n));
    }
    while (static_cast<std::int64_t>(coords.size()) < std::max<std::int64_t>(opts.sample, 200)) {
      auto flat = static_cast<std::int64_t>(pick.next_u64() % static_cast<std::uint64_t>(rep.total_coords));
      std::size_t li = 0;
      while (flat >= leaves[li].var.value().size()) flat -= leaves[li++].var.value().size();
      coords.emplace_back(li, flat);
    }
  }

  const Context<double> eval_ctx;
  auto loss = [&] { return project(forward(eval_ctx).value(), r); };
  const double f0 = loss();
  for (const auto& [li, idx] : coords) {
    Var<double> v = leaves[li].var;
    double& x = v.mutable_value()[idx];
    const double saved = x;
    x = saved + opts.step;
    const double fp = loss();
    x = saved - opts.step;
    const double fm = loss();
    x = saved;
    if (nonsmooth(fp, f0, fm)) {
      ++rep.skipped_nonsmooth;
      continue;
    }
    const double numeric = (fp - fm) / (2.0 * opts.step);
    const double analytic = v.has_grad() ? v.grad()[idx] : 0.0;
    const double err = grad_rel_error(analytic, numeric, opts.abs_floor);
    ++rep.checked;
    if (err > rep.max_rel_err || rep.worst.empty()) {
      if (err >= rep.max_rel_err) {
        rep.max_rel_err = err;
        rep.worst = leaves[li].name + "[" + std::to_string(idx) + "]";
      }
    }
  }
  // A handful of kink crossings is expected with ReLU; many means the check
  // did not really exercise the gradient.
  rep.pass = rep.checked > 0 && rep.max_rel_err <= opts.tolerance && rep.skipped_nonsmooth * 10 <= rep.checked;
  return rep;
}

}  // namespace trtvit
