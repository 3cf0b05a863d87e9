#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "query_stats.hpp"
#include "sequence.hpp"
#include "tree_access.hpp"

namespace sumtree {

template <typename V>
struct sum_result {
  V value{};
  query_stats stats;
};

namespace detail {

template <element_value T>
void check_range(const sum_sequence<T>& seq, std::size_t m, std::size_t n) {
  if (m > n || n > seq.size()) {
    throw range_error("range [" + std::to_string(m) + ", " + std::to_string(n) +
                      ") invalid for size " + std::to_string(seq.size()));
  }
}

// Top-down walk toward rank n: every rightward step adds the sum of the node
// it leaves behind, descents add nothing. Stops once n elements are covered.
template <element_value T>
typename value_traits<T>::sum_type prefix_raw(const sum_sequence<T>& seq, std::size_t n,
                                              query_stats& st) {
  typename value_traits<T>::sum_type acc{};
  if (n == 0) {
    return acc;
  }
  const node<T>* x = tree_access::top_head(seq);
  std::uint64_t covered = 0;
  for (;;) {
    ++st.levels_touched;
    for (;;) {
      ++st.nodes_visited;
      if (covered + x->count > n) {
        break;
      }
      covered += x->count;
      acc += x->sum;
      ++st.additions;
      if (covered == n) {
        return acc;
      }
      x = x->next;
    }
    x = x->down;
  }
}

// Moves right from leaf x by k elements using counts: climbs while the
// target lies past the current group, then descends. O(log k) levels.
template <element_value T>
const node<T>* finger_advance(const node<T>* x, std::uint64_t k, query_stats& st) {
  for (;;) {
    ++st.nodes_visited;
    if (k < x->count) {
      break;
    }
    k -= x->count;
    const node<T>* nx = x->next;
    if (nx == nullptr) {
      throw range_error("finger search ran past the last element");
    }
    x = nx->group_head && nx->up != nullptr ? nx->up : nx;
  }
  while (x->down != nullptr) {
    x = x->down;
    ++st.nodes_visited;
    while (k >= x->count) {
      k -= x->count;
      x = x->next;
      ++st.nodes_visited;
    }
  }
  return x;
}

// Shortest summation path between leaves first and last (inclusive).
// Keeps a window [left, right] of same-level nodes whose subtrees cover
// exactly what is still uncounted; each level peels the partial groups at
// both ends and climbs one level. `take` receives every node whose whole
// subtree lies in the range.
template <element_value T, typename Take>
void finger_path(const node<T>* first, const node<T>* last, query_stats& st, Take&& take) {
  const node<T>* left = first;
  const node<T>* right = last;
  for (;;) {
    ++st.levels_touched;
    const node<T>* x = left;
    for (;;) {
      ++st.nodes_visited;
      if (x == right) {
        for (const node<T>* y = left;; y = y->next) {
          take(*y);
          if (y == right) {
            return;
          }
        }
      }
      if (x->next == nullptr) {
        throw range_error("range endpoints are out of order");
      }
      if (x->next->group_head) {
        break;
      }
      x = x->next;
    }
    const node<T>* head = right;
    ++st.nodes_visited;
    while (!head->group_head) {
      head = head->prev;
      ++st.nodes_visited;
    }
    for (const node<T>* y = left;; y = y->next) {
      take(*y);
      if (y == x) {
        break;
      }
    }
    for (const node<T>* y = head;; y = y->next) {
      take(*y);
      if (y == right) {
        break;
      }
    }
    const node<T>* after_left = x->next->up;
    const node<T>* right_parent = head->up;
    if (after_left == right_parent) {
      return;
    }
    if (right_parent->prev == nullptr) {
      throw range_error("range endpoints are out of order");
    }
    left = after_left;
    right = right_parent->prev;
  }
}

// Sum (and optionally sum of squares and count) over ranks [m, n): locate
// the left leaf top-down, reach the right leaf by finger search, then walk
// the shortest path between them.
template <element_value T>
aggregate<T> range_totals(const sum_sequence<T>& seq, std::size_t m, std::size_t n,
                          bool squares, query_stats& st) {
  aggregate<T> acc;
  if (m == n) {
    return acc;
  }
  query_stats locate;
  const node<T>* first = tree_access::locate(seq, m, &locate);
  const node<T>* last = finger_advance(first, n - 1 - m, locate);
  st.nodes_visited += locate.nodes_visited;
  st.locate_visits += locate.nodes_visited;
  finger_path(first, last, st, [&](const node<T>& nd) {
    acc.add(nd);
    st.additions += squares ? 2 : 1;
  });
  return acc;
}

} // namespace detail

/// Sum of the first n elements.
template <element_value T>
sum_result<T> prefix_sum(const sum_sequence<T>& seq, std::size_t n) {
  if (n > seq.size()) {
    throw range_error("prefix length " + std::to_string(n) + " exceeds size " +
                      std::to_string(seq.size()));
  }
  sum_result<T> r;
  r.value = value_traits<T>::narrow(detail::prefix_raw(seq, n, r.stats));
  return r;
}

/// Sum of all elements, read off the top level.
template <element_value T>
sum_result<T> total_sum(const sum_sequence<T>& seq) {
  sum_result<T> r;
  typename value_traits<T>::sum_type acc{};
  if (!seq.empty()) {
    r.stats.levels_touched = 1;
    for (auto* x = detail::tree_access::top_head(seq); x != nullptr; x = x->next) {
      ++r.stats.nodes_visited;
      ++r.stats.additions;
      acc += x->sum;
    }
  }
  r.value = value_traits<T>::narrow(acc);
  return r;
}

/// Sum over ranks [m, n) along the finger path. `stats.locate_visits` holds
/// the cost of finding the two endpoints.
template <element_value T>
sum_result<T> range_sum(const sum_sequence<T>& seq, std::size_t m, std::size_t n) {
  detail::check_range(seq, m, n);
  sum_result<T> r;
  r.value = value_traits<T>::narrow(detail::range_totals(seq, m, n, false, r.stats).sum);
  return r;
}

/// Sum over the elements from cursor a to cursor b, both included. Uses only
/// the path between the two leaves, so its cost depends on their distance.
template <element_value T>
sum_result<T> range_sum_between(const cursor<T>& a, const cursor<T>& b) {
  if (a.owner() != b.owner()) {
    throw ownership_error("cursors belong to different sequences");
  }
  const auto* first = detail::tree_access::node_of(a);
  const auto* last = detail::tree_access::node_of(b);
  sum_result<T> r;
  typename value_traits<T>::sum_type acc{};
  detail::finger_path(first, last, r.stats, [&](const detail::node<T>& nd) {
    acc += nd.sum;
    ++r.stats.additions;
  });
  r.value = value_traits<T>::narrow(acc);
  return r;
}

/// prefix_sum(n) - prefix_sum(m). Kept for comparison: it pays for the
/// prefix before m twice and loses precision when that prefix is large.
template <element_value T>
sum_result<T> range_sum_diff(const sum_sequence<T>& seq, std::size_t m, std::size_t n) {
  detail::check_range(seq, m, n);
  sum_result<T> r;
  const auto upper = detail::prefix_raw(seq, n, r.stats);
  const auto lower = detail::prefix_raw(seq, m, r.stats);
  ++r.stats.subtractions;
  r.value = value_traits<T>::narrow(upper - lower);
  return r;
}

} // namespace sumtree
