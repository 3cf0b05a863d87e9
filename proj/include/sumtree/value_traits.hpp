#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "config.hpp"

namespace sumtree {

__extension__ using int128_t = __int128;

/// Arithmetic policy for element values. Integer results are range checked
/// and never wrap; integer squares are kept in 128 bits.
template <typename T>
struct value_traits;

template <>
struct value_traits<std::int64_t> {
  using value_type = std::int64_t;
  // Internal aggregates are 128-bit: a subtree sum of int64 values cannot
  // overflow them, so only query results need a range check.
  using sum_type = int128_t;
  using square_type = int128_t;
  static constexpr bool exact = true;

  static value_type narrow(sum_type s) {
    if (s < std::numeric_limits<value_type>::min() ||
        s > std::numeric_limits<value_type>::max()) {
      throw arithmetic_error("sum does not fit in a 64-bit integer");
    }
    return static_cast<value_type>(s);
  }

  static square_type checked_add(square_type a, square_type b) {
    square_type r;
    if (__builtin_add_overflow(a, b, &r)) {
      throw arithmetic_error("integer overflow in sum of squares");
    }
    return r;
  }

  static square_type square(value_type v) noexcept {
    return static_cast<square_type>(v) * static_cast<square_type>(v);
  }

  static void check_input(value_type) noexcept {}

  template <typename U>
  static bool same_total(U stored, U fresh, long double /*scale*/) noexcept {
    return stored == fresh;
  }

  static long double to_real(int128_t v) noexcept { return static_cast<long double>(v); }
};

template <>
struct value_traits<double> {
  using value_type = double;
  using sum_type = double;
  using square_type = double;
  static constexpr bool exact = false;
  static constexpr double relative_tolerance = 1e-9;

  static value_type narrow(sum_type s) noexcept { return s; }
  static square_type checked_add(square_type a, square_type b) noexcept { return a + b; }
  static square_type square(value_type v) noexcept { return v * v; }

  static void check_input(value_type v) {
    if (!std::isfinite(v)) {
      throw domain_error("non-finite element value");
    }
  }

  // Incrementally maintained aggregates drift; compare against a fresh total
  // with a tolerance relative to the absolute mass of the covered values.
  static bool same_total(value_type stored, value_type fresh, long double scale) noexcept {
    return std::fabs(stored - fresh) <= relative_tolerance * static_cast<double>(scale);
  }

  static long double to_real(value_type v) noexcept { return v; }
};

template <typename T>
concept element_value = requires { typename value_traits<T>::square_type; };

/// Decimal rendering of a 128-bit integer (no std::to_chars overload exists).
inline std::string to_decimal(int128_t v) {
  if (v == 0) {
    return "0";
  }
  const bool negative = v < 0;
  std::string digits;
  while (v != 0) {
    const int d = static_cast<int>(v % 10);
    digits.push_back(static_cast<char>('0' + (negative ? -d : d)));
    v /= 10;
  }
  if (negative) {
    digits.push_back('-');
  }
  return {digits.rbegin(), digits.rend()};
}

} // namespace sumtree
