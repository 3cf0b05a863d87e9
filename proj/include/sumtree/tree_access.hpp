#pragma once

#include <cstddef>

#include "sequence.hpp"

namespace sumtree::detail {

// Read access to tree internals for the query algorithms, which live outside
// the container class.
struct tree_access {
  template <element_value T>
  static const node<T>* top_head(const sum_sequence<T>& s) noexcept {
    return s.levels_.back().head;
  }

  template <element_value T>
  static const node<T>* locate(const sum_sequence<T>& s, std::size_t rank, query_stats* stats) {
    return s.locate(rank, stats);
  }

  template <element_value T>
  static const node<T>* node_of(const cursor<T>& c) {
    c.check();
    return c.node_;
  }

  template <element_value T>
  static node<T>* mutable_node(sum_sequence<T>& s, std::size_t level, std::size_t ordinal) {
    node<T>* n = s.levels_.at(level).head;
    for (; n != nullptr && ordinal > 0; --ordinal) {
      n = n->next;
    }
    return n;
  }
};

} // namespace sumtree::detail
