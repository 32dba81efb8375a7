// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/autograd.hpp"

#include <type_traits>
#include <unordered_set>

namespace trtvit {

template <class T>
void backward(const Var<T>& root, const Tensor<T>& upstream) {
  if constexpr (!std::is_same_v<T, double>) {
    throw PrecisionError("gradients require a 64-bit graph; this graph was built in 32-bit");
  } else {
    if (!root) throw InvalidArgument("backward: empty root");
    if (upstream.shape() != root.shape()) {
      throw DimensionError("backward: upstream gradient " + shape_str(upstream.shape()) + " does not match output " +
                           shape_str(root.shape()));
    }
    if (!root.requires_grad()) return;

    // Iterative post-order DFS gives a topological order.
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, std::size_t>> stack;
    stack.emplace_back(root.node(), 0);
    seen.insert(root.node());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->parents.size()) {
        Node<T>* p = node->parents[next++].get();
        if (p->requires_grad && !seen.count(p)) {
          seen.insert(p);
          stack.emplace_back(p, 0);
        }
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }

    auto& g = root.node()->grad_buffer();
    for (std::int64_t i = 0; i < g.size(); ++i) g[i] += upstream[i];
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node<T>* n = *it;
      if (n->backward_fn && n->grad.shape() == n->value.shape()) n->backward_fn(*n);
    }
  }
}

template void backward<float>(const Var<float>&, const Tensor<float>&);
template void backward<double>(const Var<double>&, const Tensor<double>&);

}  // namespace trtvit
