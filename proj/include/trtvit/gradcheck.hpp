// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "trtvit/autograd.hpp"
#include "trtvit/rng.hpp"

namespace trtvit {

struct GradLeaf {
  std::string name;
  Var<double> var;
};

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // |analytic - numeric| at or below this counts as agreement.
  double abs_floor = 1e-7;
  // Check every coordinate when the total is at most this, else subsample.
  std::int64_t full_limit = 2000;
  std::int64_t sample = 256;
  std::uint64_t seed = 0;
};

struct GradcheckReport {
  double max_rel_err = 0.0;
  std::string worst;  // "<leaf>[<flat index>]"
  std::int64_t total_coords = 0;
  std::int64_t checked = 0;
  // Coordinates whose +/- step straddles a ReLU or max-pool kink; the
  // central difference is meaningless there and they are excluded.
  std::int64_t skipped_nonsmooth = 0;
  bool pass = false;
};

using GradForward = std::function<Var<double>(const Context<double>&)>;

/// Compares reverse-mode gradients of <r, forward()> for a fixed random
/// projection r against central differences over the leaves' coordinates.
GradcheckReport gradcheck(const GradForward& forward, const std::vector<GradLeaf>& leaves,
                          const GradcheckOptions& opts = {});

/// Relative error with an absolute floor: 0 when |a - n| <= floor, else
/// |a - n| / max(|a|, |n|).
double grad_rel_error(double analytic, double numeric, double abs_floor);

}  // namespace trtvit
