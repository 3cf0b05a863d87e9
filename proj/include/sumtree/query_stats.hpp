#pragma once

#include <cstdint>

namespace sumtree {

/// Operation counts of a single query. Reset per query, never shared.
struct query_stats {
  std::uint64_t nodes_visited = 0;
  std::uint64_t additions = 0;
  std::uint64_t subtractions = 0;
  std::uint64_t levels_touched = 0;
  // Part of nodes_visited spent locating endpoints by rank before the
  // summation path starts (zero for prefix sums and cursor-based queries).
  std::uint64_t locate_visits = 0;

  query_stats& operator+=(const query_stats& o) noexcept {
    nodes_visited += o.nodes_visited;
    additions += o.additions;
    subtractions += o.subtractions;
    levels_touched += o.levels_touched;
    locate_visits += o.locate_visits;
    return *this;
  }
};

} // namespace sumtree
