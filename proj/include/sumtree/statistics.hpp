#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "summation.hpp"

namespace sumtree {

template <element_value T>
struct range_stats {
  std::size_t count = 0;
  T sum{};
  typename value_traits<T>::square_type sum_sq{};
  double mean = 0;
  double variance = 0;  // population variance, never negative
  double stddev = 0;
  query_stats stats;
};

struct real_result {
  double value = 0;
  query_stats stats;
};

namespace detail {

template <element_value T>
void check_nonempty(const sum_sequence<T>& seq, std::size_t m, std::size_t n) {
  check_range(seq, m, n);
  if (m == n) {
    throw empty_range_error("statistics need a nonempty range");
  }
}

template <element_value T>
void check_squares(const sum_sequence<T>& seq) {
  if (!seq.config().track_squares) {
    throw capability_error("sequence was built without sums of squares");
  }
}

} // namespace detail

template <element_value T>
std::size_t range_count(const sum_sequence<T>& seq, std::size_t m, std::size_t n) {
  detail::check_range(seq, m, n);
  return n - m;
}

template <element_value T>
real_result range_mean(const sum_sequence<T>& seq, std::size_t m, std::size_t n) {
  detail::check_nonempty(seq, m, n);
  real_result r;
  const auto totals = detail::range_totals(seq, m, n, false, r.stats);
  r.value = static_cast<double>(value_traits<T>::to_real(totals.sum) /
                                static_cast<long double>(n - m));
  return r;
}

/// Sum of squared elements over [m, n), read from the same path as range_sum.
template <element_value T>
sum_result<typename value_traits<T>::square_type> range_sum_sq(const sum_sequence<T>& seq,
                                                                std::size_t m, std::size_t n) {
  detail::check_range(seq, m, n);
  detail::check_squares(seq);
  sum_result<typename value_traits<T>::square_type> r;
  r.value = detail::range_totals(seq, m, n, true, r.stats).sum_sq;
  return r;
}

/// Count, sum, sum of squares, mean, population variance and standard
/// deviation from a single traversal. Variance uses E[a^2] - E[a]^2, clamped
/// at zero.
template <element_value T>
range_stats<T> stats_report(const sum_sequence<T>& seq, std::size_t m, std::size_t n) {
  detail::check_nonempty(seq, m, n);
  detail::check_squares(seq);
  range_stats<T> r;
  const auto totals = detail::range_totals(seq, m, n, true, r.stats);
  using traits = value_traits<T>;
  const long double count = static_cast<long double>(n - m);
  const long double mean = traits::to_real(totals.sum) / count;
  const long double second = traits::to_real(totals.sum_sq) / count;
  const long double variance = std::max<long double>(0, second - mean * mean);
  r.count = n - m;
  r.sum = traits::narrow(totals.sum);
  r.sum_sq = totals.sum_sq;
  r.mean = static_cast<double>(mean);
  r.variance = static_cast<double>(variance);
  r.stddev = static_cast<double>(std::sqrt(variance));
  return r;
}

template <element_value T>
real_result range_variance(const sum_sequence<T>& seq, std::size_t m, std::size_t n) {
  const auto s = stats_report(seq, m, n);
  return {s.variance, s.stats};
}

template <element_value T>
real_result range_stddev(const sum_sequence<T>& seq, std::size_t m, std::size_t n) {
  const auto s = stats_report(seq, m, n);
  return {s.stddev, s.stats};
}

} // namespace sumtree
