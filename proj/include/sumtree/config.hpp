#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sumtree {

// Error hierarchy. The CLI maps these onto its exit-code contract.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class config_error : public error {
public:
  using error::error;
};

/// Non-finite input in floating-point mode.
class domain_error : public error {
public:
  using error::error;
};

/// Rank or bounds outside the valid interval.
class range_error : public error {
public:
  using error::error;
};

/// Checked integer arithmetic overflowed.
class arithmetic_error : public error {
public:
  using error::error;
};

class stale_cursor_error : public error {
public:
  using error::error;
};

/// Cursor stepped past either end of the sequence.
class boundary_error : public error {
public:
  using error::error;
};

class ownership_error : public error {
public:
  using error::error;
};

/// Query needs sums of squares but the sequence was built without them.
class capability_error : public error {
public:
  using error::error;
};

class empty_range_error : public error {
public:
  using error::error;
};

/// Shape parameters of the tree. Immutable once a sequence is built.
///
/// `max_group` bounds the children of every internal node; `min_group()` is
/// the lower bound that updates restore (groups directly below the top level
/// only need one child, like the root of a B-tree).
struct tree_config {
  std::size_t max_group = 8;
  bool track_squares = true;

  [[nodiscard]] constexpr std::size_t min_group() const noexcept {
    return (max_group + 1) / 2;
  }

  void check() const {
    if (max_group < 3) {
      throw config_error("max_group must be at least 3, got " +
                         std::to_string(max_group));
    }
  }
};

} // namespace sumtree
