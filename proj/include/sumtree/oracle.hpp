#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "value_traits.hpp"

// Reference implementations that every tree query is checked against.
// Nothing here touches the tree.
namespace sumtree::oracle {

/// Left-to-right sum over [m, n).
template <element_value T>
T naive_sum(std::span<const T> values, std::size_t m, std::size_t n) {
  if (m > n || n > values.size()) {
    throw range_error("naive_sum bounds [" + std::to_string(m) + ", " + std::to_string(n) +
                      ") invalid for length " + std::to_string(values.size()));
  }
  typename value_traits<T>::sum_type acc{};
  for (std::size_t i = m; i < n; ++i) {
    acc += values[i];
  }
  return value_traits<T>::narrow(acc);
}

template <element_value T>
struct pairwise_result {
  T total{};
  std::size_t rounds = 0;
  std::size_t additions = 0;
};

/// Sequential simulation of the pairwise parallel reduction: each round adds
/// adjacent pairs; an unpaired last element moves on without an addition.
template <element_value T>
pairwise_result<T> pairwise_sum(std::span<const T> values) {
  using sum_type = typename value_traits<T>::sum_type;
  pairwise_result<T> r;
  std::vector<sum_type> level(values.begin(), values.end());
  while (level.size() > 1) {
    std::vector<sum_type> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      next.push_back(level[i] + level[i + 1]);
      ++r.additions;
    }
    if (level.size() % 2 == 1) {
      next.push_back(level.back());
    }
    level = std::move(next);
    ++r.rounds;
  }
  if (!level.empty()) {
    r.total = value_traits<T>::narrow(level.front());
  }
  return r;
}

struct naive_stats_result {
  std::size_t count = 0;
  long double sum = 0;
  long double sum_sq = 0;
  double mean = 0;
  double variance = 0;
};

/// Two-pass statistics over [m, n): mean first, then mean squared deviation.
template <element_value T>
naive_stats_result naive_stats(std::span<const T> values, std::size_t m, std::size_t n) {
  if (m > n || n > values.size()) {
    throw range_error("naive_stats bounds invalid");
  }
  if (m == n) {
    throw empty_range_error("naive_stats needs a nonempty range");
  }
  naive_stats_result r;
  r.count = n - m;
  for (std::size_t i = m; i < n; ++i) {
    const long double v = static_cast<long double>(values[i]);
    r.sum += v;
    r.sum_sq += v * v;
  }
  const long double mean = r.sum / static_cast<long double>(r.count);
  long double dev = 0;
  for (std::size_t i = m; i < n; ++i) {
    const long double d = static_cast<long double>(values[i]) - mean;
    dev += d * d;
  }
  r.mean = static_cast<double>(mean);
  r.variance = static_cast<double>(dev / static_cast<long double>(r.count));
  return r;
}

} // namespace sumtree::oracle
