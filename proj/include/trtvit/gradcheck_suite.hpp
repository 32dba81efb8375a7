// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

// Ready-made gradient checks for every primitive op and block kind at 64-bit.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trtvit/blocks.hpp"
#include "trtvit/gradcheck.hpp"

namespace trtvit {

const std::vector<std::string>& gradcheck_op_names();

/// Checks one primitive on random inputs of batch 2, c channels and an
/// hw x hw map (token ops use hw*hw tokens). Throws NotFound for unknown ops.
GradcheckReport gradcheck_op(const std::string& name, std::int64_t c, std::int64_t hw, std::uint64_t seed,
                             const GradcheckOptions& opts = {});

/// The block a kind is checked with: stride 1, c_in == c, spatial reduction
/// 2 for attention-bearing kinds, R = 0.5 and K = 3 for mix kinds.
BlockSpec gradcheck_block_spec(BlockKind kind, std::int64_t c);

/// Builds the block at 64-bit, perturbs every weight and batch-norm
/// statistic away from its initial value, then checks the gradients of all
/// trainable tensors and of a batch-2 input.
GradcheckReport gradcheck_block(const BlockSpec& spec, std::int64_t c_in, std::int64_t hw, std::uint64_t seed,
                                const GradcheckOptions& opts = {});

}  // namespace trtvit
