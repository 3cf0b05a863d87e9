#pragma once

#include <cstddef>

#include "tree_access.hpp"

namespace sumtree::testing {

/// Fault injection for tests: adds `delta` to the stored sum of one node
/// without touching anything else. Returns false if the node does not exist.
template <element_value T>
bool corrupt_sum(sum_sequence<T>& seq, std::size_t level, std::size_t ordinal, T delta) {
  if (level >= seq.level_count()) {
    return false;
  }
  auto* n = detail::tree_access::mutable_node(seq, level, ordinal);
  if (n == nullptr) {
    return false;
  }
  n->sum += delta;
  return true;
}

} // namespace sumtree::testing
