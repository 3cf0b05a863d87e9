#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <memory>
#include <ranges>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "query_stats.hpp"
#include "value_traits.hpp"

namespace sumtree {

template <element_value T>
class sum_sequence;

namespace detail {

// One tree node. Deepest-level nodes hold a single element (count 1, sum is
// the element value). Only the first child of a group is linked to its parent.
template <element_value T>
struct node {
  using traits = value_traits<T>;

  node* next = nullptr;
  node* prev = nullptr;
  node* down = nullptr;
  node* up = nullptr;
  bool group_head = false;
  std::uint64_t count = 0;
  typename traits::sum_type sum{};
  typename traits::square_type sum_sq{};
};

// Nodes live in chunks owned by the sequence; freed nodes are reused
// before the current chunk is extended. Build reserves whole levels so
// each level sits in one contiguous block.
template <typename Node>
class node_pool {
public:
  Node* make() {
    if (free_ != nullptr) {
      Node* n = std::exchange(free_, free_->next);
      *n = Node{};
      return n;
    }
    if (used_ == capacity_) {
      grow(std::clamp<std::size_t>(total_ / 2, 64, max_chunk));
    }
    return &chunks_.back()[used_++];
  }

  void release(Node* n) noexcept {
    n->next = free_;
    free_ = n;
  }

  // Makes the next k calls to make() come from one contiguous block.
  void reserve(std::size_t k) {
    if (free_ == nullptr && capacity_ - used_ < k) {
      grow(std::min(k, max_chunk));
    }
  }

  void clear() noexcept {
    chunks_.clear();
    free_ = nullptr;
    used_ = capacity_ = total_ = 0;
  }

private:
  // Large enough to amortise allocation, small enough to stay off the
  // allocator's fresh-mapping path.
  static constexpr std::size_t max_chunk = std::size_t{1} << 15;

  void grow(std::size_t k) {
    chunks_.push_back(std::make_unique<Node[]>(k));
    used_ = 0;
    capacity_ = k;
    total_ += k;
  }

  std::vector<std::unique_ptr<Node[]>> chunks_;
  Node* free_ = nullptr;
  std::size_t used_ = 0;
  std::size_t capacity_ = 0;
  std::size_t total_ = 0;
};

template <element_value T>
struct aggregate {
  std::uint64_t count = 0;
  typename value_traits<T>::sum_type sum{};
  typename value_traits<T>::square_type sum_sq{};

  void add(const node<T>& n) noexcept {
    count += n.count;
    sum += n.sum;
    sum_sq += n.sum_sq;
  }
};

template <element_value T>
void apply_plus(node<T>& n, const aggregate<T>& d) noexcept {
  n.count += d.count;
  n.sum += d.sum;
  n.sum_sq += d.sum_sq;
}

template <element_value T>
void apply_minus(node<T>& n, const aggregate<T>& d) noexcept {
  n.count -= d.count;
  n.sum -= d.sum;
  n.sum_sq -= d.sum_sq;
}

struct tree_access;

} // namespace detail

struct validation_issue {
  std::size_t level = 0;
  std::size_t ordinal = 0;
  std::string rule;
  std::string description;
};

struct validation_report {
  std::vector<validation_issue> violations;

  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

/// Finger into a sum_sequence: refers to one element. Any mutation of the
/// owner invalidates every cursor; using a stale cursor throws.
template <element_value T>
class cursor {
public:
  cursor() = default;

  [[nodiscard]] bool valid() const noexcept;
  [[nodiscard]] T value() const;
  [[nodiscard]] std::size_t rank() const;
  [[nodiscard]] cursor next() const;
  [[nodiscard]] cursor prev() const;
  [[nodiscard]] const sum_sequence<T>* owner() const noexcept { return owner_; }

  friend bool operator==(const cursor&, const cursor&) = default;

private:
  friend class sum_sequence<T>;
  friend struct detail::tree_access;

  cursor(const detail::node<T>* n, const sum_sequence<T>* owner, std::uint64_t epoch) noexcept
      : node_(n), owner_(owner), epoch_(epoch) {}

  void check() const;

  const detail::node<T>* node_ = nullptr;
  const sum_sequence<T>* owner_ = nullptr;
  std::uint64_t epoch_ = 0;
};

/// Indexed sequence stored in a level-linked B+ tree whose nodes carry
/// element counts, sums and (optionally) sums of squares.
///
/// Level 0 is the deepest level: a doubly linked list of the elements in
/// rank order. Every higher level is a doubly linked list of parents, each
/// covering a contiguous group of children. Ranks are 0-based and ranges
/// half-open throughout.
template <element_value T>
class sum_sequence {
public:
  using value_type = T;
  using traits = value_traits<T>;
  using sum_type = typename traits::sum_type;
  using square_type = typename traits::square_type;
  using node_type = detail::node<T>;
  using cursor_type = cursor<T>;

  class const_iterator {
  public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = T;
    using difference_type = std::ptrdiff_t;

    const_iterator() = default;
    explicit const_iterator(const node_type* n) noexcept : node_(n) {}

    T operator*() const { return leaf_value(node_); }
    const_iterator& operator++() noexcept {
      node_ = node_->next;
      return *this;
    }
    const_iterator operator++(int) noexcept {
      auto tmp = *this;
      ++*this;
      return tmp;
    }
    friend bool operator==(const const_iterator&, const const_iterator&) = default;

  private:
    const node_type* node_ = nullptr;
  };

  explicit sum_sequence(tree_config config = {}) : config_(config) {
    config_.check();
    levels_.push_back({});
  }

  sum_sequence(std::span<const T> values, tree_config config = {}) : config_(config) {
    config_.check();
    try {
      build(values);
    } catch (...) {
      destroy();
      throw;
    }
  }

  sum_sequence(std::initializer_list<T> values, tree_config config = {})
      : sum_sequence(std::span<const T>(values.begin(), values.size()), config) {}

  sum_sequence(const sum_sequence&) = delete;
  sum_sequence& operator=(const sum_sequence&) = delete;

  sum_sequence(sum_sequence&& other) noexcept { steal(other); }
  sum_sequence& operator=(sum_sequence&& other) noexcept {
    if (this != &other) {
      destroy();
      steal(other);
    }
    return *this;
  }

  ~sum_sequence() { destroy(); }

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] bool empty() const noexcept { return size_ == 0; }
  [[nodiscard]] const tree_config& config() const noexcept { return config_; }
  [[nodiscard]] std::size_t level_count() const noexcept { return levels_.size(); }
  [[nodiscard]] std::size_t level_size(std::size_t level) const { return levels_.at(level).count; }
  /// Live nodes on all levels; right after construction this is the number
  /// of nodes the bottom-up build created.
  [[nodiscard]] std::size_t node_count() const noexcept { return live_nodes_; }
  /// Mutation counter; cursors remember the value they were created under.
  [[nodiscard]] std::uint64_t epoch() const noexcept { return epoch_; }

  [[nodiscard]] const_iterator begin() const noexcept { return const_iterator(first_); }
  [[nodiscard]] const_iterator end() const noexcept { return const_iterator(nullptr); }

  /// Cursor to the element of the given rank, found by a top-down count search.
  [[nodiscard]] cursor_type select(std::size_t rank, query_stats* stats = nullptr) const {
    check_rank(rank);
    return cursor_type(locate(rank, stats), this, epoch_);
  }

  [[nodiscard]] T value_at(std::size_t rank) const {
    check_rank(rank);
    return leaf_value(locate(rank, nullptr));
  }

  [[nodiscard]] std::size_t rank_of(const cursor_type& c) const {
    c.check();
    if (c.owner_ != this) {
      throw ownership_error("cursor belongs to another sequence");
    }
    return rank_from(c.node_);
  }

  /// Elements at ranks [from, to) in order.
  [[nodiscard]] std::ranges::subrange<const_iterator> iterate(std::size_t from, std::size_t to) const {
    check_bounds(from, to);
    if (from == to) {
      return {end(), end()};
    }
    const_iterator last = to == size_ ? end() : const_iterator(locate(to, nullptr));
    return {const_iterator(locate(from, nullptr)), last};
  }

  [[nodiscard]] std::vector<T> to_vector() const {
    std::vector<T> out;
    out.reserve(size_);
    for (T v : *this) {
      out.push_back(v);
    }
    return out;
  }

  /// Replaces the element at `rank`, returning the previous value.
  T set_value(std::size_t rank, T value) {
    check_rank(rank);
    traits::check_input(value);
    node_type* leaf = locate(rank, nullptr);
    const T old = leaf_value(leaf);
    const square_type old_sq = leaf->sum_sq;
    const square_type new_sq = config_.track_squares ? traits::square(value) : square_type{};
    if constexpr (traits::exact) {
      if (config_.track_squares) {
        (void)traits::checked_add(total_squares() - old_sq, new_sq);
      }
    }
    ++epoch_;
    detail::aggregate<T> delta{0, static_cast<sum_type>(value) - static_cast<sum_type>(old),
                               new_sq - old_sq};
    leaf->sum = value;
    leaf->sum_sq = new_sq;
    for (node_type* p = parent_of(leaf); p != nullptr; p = parent_of(p)) {
      detail::apply_plus(*p, delta);
    }
    return old;
  }

  /// Inserts `value` so that it ends up at `rank`; later ranks shift by one.
  void insert(std::size_t rank, T value) {
    if (rank > size_) {
      throw range_error("insert rank " + std::to_string(rank) + " exceeds size " +
                        std::to_string(size_));
    }
    traits::check_input(value);
    const square_type sq = config_.track_squares ? traits::square(value) : square_type{};
    if constexpr (traits::exact) {
      if (config_.track_squares) {
        (void)traits::checked_add(total_squares(), sq);
      }
    }
    ++epoch_;
    node_type* leaf = make_node();
    leaf->count = 1;
    leaf->sum = value;
    leaf->sum_sq = sq;

    if (size_ == 0) {
      leaf->group_head = true;
      levels_[0] = {leaf, 1};
      first_ = last_ = leaf;
      size_ = 1;
      return;
    }

    if (rank < size_) {
      node_type* target = locate(rank, nullptr);
      leaf->prev = target->prev;
      leaf->next = target;
      if (target->prev != nullptr) {
        target->prev->next = leaf;
      }
      target->prev = leaf;
      if (target->group_head) {
        // The new leaf takes over the head role of target's group.
        leaf->group_head = true;
        leaf->up = target->up;
        if (leaf->up != nullptr) {
          leaf->up->down = leaf;
        }
        target->group_head = false;
        target->up = nullptr;
      }
      if (target == first_) {
        first_ = leaf;
        levels_[0].head = leaf;
      }
    } else {
      leaf->prev = last_;
      last_->next = leaf;
      last_ = leaf;
    }
    ++levels_[0].count;
    ++size_;

    const detail::aggregate<T> delta{1, leaf->sum, leaf->sum_sq};
    for (node_type* p = parent_of(leaf); p != nullptr; p = parent_of(p)) {
      detail::apply_plus(*p, delta);
    }
    grow_fixup(leaf, 0);
  }

  void push_back(T value) { insert(size_, value); }

  /// Removes and returns the element at `rank`; later ranks shift down.
  T remove(std::size_t rank) {
    check_rank(rank);
    ++epoch_;
    node_type* leaf = locate(rank, nullptr);
    const T value = leaf_value(leaf);
    if (size_ == 1) {
      destroy();
      levels_.push_back({});
      return value;
    }
    const detail::aggregate<T> delta{1, leaf->sum, leaf->sum_sq};
    for (node_type* p = parent_of(leaf); p != nullptr; p = parent_of(p)) {
      detail::apply_minus(*p, delta);
    }
    node_type* parent = unlink(leaf, 0);
    --size_;
    shrink_fixup(parent, 1);
    return value;
  }

  /// Recomputes every aggregate from the elements. Remedy for floating-point
  /// drift after long update histories.
  void rebuild() {
    std::vector<T> values = to_vector();
    destroy();
    build(values);
    ++epoch_;
  }

  /// Exhaustive structural check of links, group sizes and aggregates.
  [[nodiscard]] validation_report validate() const;

private:
  friend class cursor<T>;
  friend struct detail::tree_access;

  struct level {
    node_type* head = nullptr;
    std::size_t count = 0;
  };

  struct fresh_totals {
    std::uint64_t count = 0;
    sum_type sum{};
    square_type sum_sq{};
    long double mass = 0;  // sum of |value|
  };

  static T leaf_value(const node_type* n) { return static_cast<T>(n->sum); }

  [[nodiscard]] bool is_top(std::size_t level) const noexcept { return level + 1 == levels_.size(); }

  void check_rank(std::size_t rank) const {
    if (rank >= size_) {
      throw range_error("rank " + std::to_string(rank) + " out of range for size " +
                        std::to_string(size_));
    }
  }

  void check_bounds(std::size_t from, std::size_t to) const {
    if (from > to || to > size_) {
      throw range_error("range [" + std::to_string(from) + ", " + std::to_string(to) +
                        ") invalid for size " + std::to_string(size_));
    }
  }

  node_type* make_node() {
    ++live_nodes_;
    return pool_.make();
  }

  void free_node(node_type* n) noexcept {
    --live_nodes_;
    pool_.release(n);
  }

  void destroy() noexcept {
    pool_.clear();
    live_nodes_ = 0;
    levels_.clear();
    first_ = last_ = nullptr;
    size_ = 0;
  }

  void steal(sum_sequence& other) noexcept {
    config_ = other.config_;
    levels_ = std::move(other.levels_);
    first_ = std::exchange(other.first_, nullptr);
    last_ = std::exchange(other.last_, nullptr);
    size_ = std::exchange(other.size_, 0);
    live_nodes_ = std::exchange(other.live_nodes_, 0);
    pool_ = std::exchange(other.pool_, {});
    epoch_ = std::max(epoch_, other.epoch_) + 1;
    other.levels_.assign(1, level{});
    ++other.epoch_;
  }

  // Group sizes for a level of k >= max_group nodes. Groups are filled left
  // to right; a short tail is evened out with its left neighbour. A level of
  // exactly max_group nodes becomes two groups so the new top has two nodes.
  [[nodiscard]] std::vector<std::size_t> group_sizes(std::size_t k) const {
    const std::size_t m = config_.max_group;
    const std::size_t groups = (k + m - 1) / m;
    if (groups == 1) {
      return {k / 2, k - k / 2};
    }
    std::vector<std::size_t> sizes(groups - 1, m);
    const std::size_t tail = k - (groups - 1) * m;
    sizes.push_back(tail);
    if (tail < config_.min_group()) {
      const std::size_t both = m + tail;
      sizes[groups - 2] = both / 2;
      sizes[groups - 1] = both - both / 2;
    }
    return sizes;
  }

  void build(std::span<const T> values) {
    levels_.clear();
    for (const T& v : values) {
      traits::check_input(v);
    }
    if (values.empty()) {
      levels_.push_back({});
      return;
    }
    // Leaves and their parents are made in one pass, so every leaf is
    // folded into its parent while still in cache.
    const std::size_t n = values.size();
    const bool grouped = n >= config_.max_group;
    const std::vector<std::size_t> leaf_groups = grouped ? group_sizes(n) : std::vector<std::size_t>{};
    std::vector<node_type*> current;
    current.reserve(leaf_groups.size());
    pool_.reserve(n + leaf_groups.size());
    node_type* prev = nullptr;
    node_type* parent = nullptr;
    std::size_t group = 0;
    std::size_t left_in_group = 0;
    square_type total_sq{};
    for (const T& v : values) {
      node_type* x = make_node();
      x->count = 1;
      x->sum = v;
      if (config_.track_squares) {
        x->sum_sq = traits::square(v);
        if constexpr (traits::exact) {
          total_sq = traits::checked_add(total_sq, x->sum_sq);
        }
      }
      x->prev = prev;
      if (prev != nullptr) {
        prev->next = x;
      } else {
        first_ = x;
        x->group_head = true;
      }
      prev = x;
      if (grouped) {
        if (left_in_group == 0) {
          node_type* p = make_node();
          p->prev = parent;
          if (parent != nullptr) {
            parent->next = p;
          }
          parent = p;
          p->down = x;
          x->group_head = true;
          x->up = p;
          current.push_back(p);
          left_in_group = leaf_groups[group++];
        }
        --left_in_group;
        detail::aggregate<T> a;
        a.add(*x);
        detail::apply_plus(*parent, a);
      }
    }
    levels_.push_back({first_, n});
    last_ = prev;
    size_ = n;
    if (!grouped) {
      return;
    }
    current.front()->group_head = true;
    levels_.push_back({current.front(), current.size()});

    std::vector<node_type*> parents;
    while (current.size() >= config_.max_group) {
      parents.clear();
      std::size_t idx = 0;
      node_type* left = nullptr;
      const auto sizes = group_sizes(current.size());
      pool_.reserve(sizes.size());
      for (std::size_t g : sizes) {
        node_type* p = make_node();
        node_type* child = current[idx];
        child->group_head = true;
        child->up = p;
        p->down = child;
        for (std::size_t j = 0; j < g; ++j) {
          detail::aggregate<T> a;
          a.add(*current[idx + j]);
          detail::apply_plus(*p, a);
        }
        idx += g;
        p->prev = left;
        if (left != nullptr) {
          left->next = p;
        }
        left = p;
        parents.push_back(p);
      }
      parents.front()->group_head = true;
      levels_.push_back({parents.front(), parents.size()});
      std::swap(current, parents);
    }
  }

  node_type* locate(std::size_t rank, query_stats* stats) const {
    node_type* x = levels_.back().head;
    std::uint64_t acc = 0;
    for (std::size_t lv = levels_.size(); lv-- > 0;) {
      if (stats != nullptr) {
        ++stats->levels_touched;
      }
      for (;;) {
        if (stats != nullptr) {
          ++stats->nodes_visited;
        }
        if (acc + x->count <= rank) {
          acc += x->count;
          x = x->next;
        } else {
          break;
        }
      }
      if (lv == 0) {
        return x;
      }
      x = x->down;
    }
    return x;
  }

  std::size_t rank_from(const node_type* x) const noexcept {
    std::size_t r = 0;
    while (x != nullptr) {
      while (!x->group_head) {
        x = x->prev;
        r += x->count;
      }
      x = x->up;
    }
    return r;
  }

  static node_type* parent_of(const node_type* x) noexcept {
    while (!x->group_head) {
      x = x->prev;
    }
    return x->up;
  }

  static std::size_t group_size(const node_type* p) noexcept {
    std::size_t k = 1;
    for (const node_type* c = p->down; c->next != nullptr && !c->next->group_head; c = c->next) {
      ++k;
    }
    return k;
  }

  static node_type* advance(node_type* n, std::size_t k) noexcept {
    while (k-- > 0) {
      n = n->next;
    }
    return n;
  }

  static detail::aggregate<T> collect(const node_type* first, std::size_t k) noexcept {
    detail::aggregate<T> a;
    for (; k > 0; --k, first = first->next) {
      a.add(*first);
    }
    return a;
  }

  [[nodiscard]] square_type total_squares() const {
    square_type total{};
    for (const node_type* n = levels_.back().head; n != nullptr; n = n->next) {
      total = traits::checked_add(total, n->sum_sq);
    }
    return total;
  }

  // Moves `d` from the ancestors of `from` to the ancestors of `to` (same
  // level), stopping where the two ancestor chains meet.
  static void transfer_up(const node_type* from, const node_type* to, const detail::aggregate<T>& d) noexcept {
    node_type* a = parent_of(from);
    node_type* b = parent_of(to);
    while (a != b) {
      detail::apply_minus(*a, d);
      detail::apply_plus(*b, d);
      a = parent_of(a);
      b = parent_of(b);
    }
  }

  void link_after(node_type* p, node_type* q, std::size_t lv) noexcept {
    q->prev = p;
    q->next = p->next;
    if (p->next != nullptr) {
      p->next->prev = q;
    }
    p->next = q;
    ++levels_[lv].count;
  }

  // Unlinks and frees x at level lv. Returns the parent whose group lost a
  // member (nullptr at the top level); that parent has down == nullptr when
  // its group became empty.
  node_type* unlink(node_type* x, std::size_t lv) noexcept {
    node_type* parent = nullptr;
    if (!is_top(lv)) {
      parent = parent_of(x);
      if (x->group_head) {
        node_type* nx = x->next;
        if (nx != nullptr && !nx->group_head) {
          nx->group_head = true;
          nx->up = parent;
          parent->down = nx;
        } else {
          parent->down = nullptr;
        }
      }
    } else if (x->group_head && x->next != nullptr) {
      x->next->group_head = true;
    }
    if (x->prev != nullptr) {
      x->prev->next = x->next;
    } else {
      levels_[lv].head = x->next;
    }
    if (x->next != nullptr) {
      x->next->prev = x->prev;
    }
    --levels_[lv].count;
    if (lv == 0) {
      if (x == first_) {
        first_ = x->next;
      }
      if (x == last_) {
        last_ = x->prev;
      }
    }
    free_node(x);
    return parent;
  }

  // Splits p's child group, keeping the first floor(k/2) children.
  void split(node_type* p, std::size_t lv, std::size_t k) {
    node_type* moved = advance(p->down, k / 2);
    const detail::aggregate<T> a = collect(moved, k - k / 2);
    node_type* q = make_node();
    moved->group_head = true;
    moved->up = q;
    q->down = moved;
    detail::apply_minus(*p, a);
    detail::apply_plus(*q, a);
    link_after(p, q, lv);
  }

  // Appends b's children to a (b == a->next) and unlinks b.
  node_type* merge(node_type* a, node_type* b, std::size_t lv) noexcept {
    node_type* head = b->down;
    head->group_head = false;
    head->up = nullptr;
    detail::aggregate<T> d{b->count, b->sum, b->sum_sq};
    detail::apply_plus(*a, d);
    transfer_up(b, a, d);
    return unlink(b, lv);
  }

  // Moves the first k children of b (== a->next) to the end of a.
  static void shift_left(node_type* a, node_type* b, std::size_t k) noexcept {
    node_type* old_head = b->down;
    const detail::aggregate<T> d = collect(old_head, k);
    node_type* new_head = advance(old_head, k);
    old_head->group_head = false;
    old_head->up = nullptr;
    new_head->group_head = true;
    new_head->up = b;
    b->down = new_head;
    detail::apply_plus(*a, d);
    detail::apply_minus(*b, d);
    transfer_up(b, a, d);
  }

  // Moves the last k children of a to the front of b (== a->next).
  static void shift_right(node_type* a, node_type* b, std::size_t k) noexcept {
    node_type* first_moved = advance(a->down, group_size(a) - k);
    const detail::aggregate<T> d = collect(first_moved, k);
    node_type* old_head = b->down;
    old_head->group_head = false;
    old_head->up = nullptr;
    first_moved->group_head = true;
    first_moved->up = b;
    b->down = first_moved;
    detail::apply_minus(*a, d);
    detail::apply_plus(*b, d);
    transfer_up(a, b, d);
  }

  // Rebalances adjacent top-level nodes a and b so the short one ends with
  // at least min_group children. Returns false when they were merged.
  bool even_out(node_type* a, node_type* b, bool left_short, std::size_t lv) {
    const std::size_t ka = group_size(a);
    const std::size_t kb = group_size(b);
    if (ka + kb <= config_.max_group) {
      merge(a, b, lv);
      return false;
    }
    if (left_short) {
      shift_left(a, b, config_.min_group() - ka);
    } else {
      shift_right(a, b, config_.min_group() - kb);
    }
    return true;
  }

  void grow_fixup(node_type* child, std::size_t lv) {
    while (!is_top(lv)) {
      node_type* p = parent_of(child);
      const std::size_t k = group_size(p);
      if (k <= config_.max_group) {
        return;
      }
      split(p, lv + 1, k);
      child = p;
      ++lv;
    }
    settle_top();
  }

  // g lives at level lv and its child group may have shrunk.
  void shrink_fixup(node_type* g, std::size_t lv) {
    while (g != nullptr) {
      if (g->down == nullptr) {
        g = unlink(g, lv);
        ++lv;
        continue;
      }
      if (is_top(lv)) {
        break;
      }
      const std::size_t k = group_size(g);
      if (k >= config_.min_group()) {
        break;
      }
      // Prefer a sibling under the same parent; fall back to the level
      // neighbour, which can sit under a different (top-level) parent.
      node_type* a = nullptr;
      node_type* b = nullptr;
      if (g->next != nullptr && !g->next->group_head) {
        a = g, b = g->next;
      } else if (!g->group_head) {
        a = g->prev, b = g;
      } else if (g->next != nullptr) {
        a = g, b = g->next;
      } else if (g->prev != nullptr) {
        a = g->prev, b = g;
      } else {
        break;
      }
      const std::size_t ka = group_size(a);
      const std::size_t kb = group_size(b);
      if (ka + kb <= config_.max_group) {
        g = merge(a, b, lv);
        ++lv;
        continue;
      }
      if (g == a) {
        shift_left(a, b, config_.min_group() - ka);
      } else {
        shift_right(a, b, config_.min_group() - kb);
      }
      break;
    }
    settle_top();
  }

  // Restores the top-level rules: fewer than max_group nodes, and at least
  // two whenever there is more than one level.
  void settle_top() {
    for (;;) {
      const std::size_t t = levels_.size() - 1;
      if (t > 0 && levels_[t].count == 1) {
        collapse_top();
        continue;
      }
      if (levels_[t].count < config_.max_group) {
        return;
      }
      if (t > 0) {
        normalise_top_children(t);
        if (levels_[t].count < config_.max_group) {
          continue;
        }
      }
      raise_top();
    }
  }

  // Groups under the top level are exempt from min_group; before they become
  // ordinary groups under a new top level, bring each up to min_group.
  void normalise_top_children(std::size_t t) {
    node_type* x = levels_[t].head;
    while (x != nullptr && levels_[t].count > 1) {
      if (group_size(x) >= config_.min_group()) {
        x = x->next;
        continue;
      }
      if (x->next != nullptr) {
        if (even_out(x, x->next, true, t)) {
          x = x->next;
        }
      } else {
        node_type* left = x->prev;
        if (even_out(left, x, false, t)) {
          x = x->next;
        } else {
          x = left;
        }
      }
    }
  }

  void raise_top() {
    const std::size_t t = levels_.size() - 1;
    const std::size_t k = levels_[t].count;
    node_type* head = levels_[t].head;
    node_type* second = advance(head, k / 2);
    node_type* a = make_node();
    node_type* b = make_node();
    detail::apply_plus(*a, collect(head, k / 2));
    detail::apply_plus(*b, collect(second, k - k / 2));
    head->group_head = true;
    head->up = a;
    a->down = head;
    second->group_head = true;
    second->up = b;
    b->down = second;
    a->group_head = true;
    a->next = b;
    b->prev = a;
    levels_.push_back({a, 2});
  }

  void collapse_top() {
    node_type* top = levels_.back().head;
    node_type* child = top->down;
    child->up = nullptr;
    free_node(top);
    levels_.pop_back();
  }

  tree_config config_{};
  std::vector<level> levels_;
  node_type* first_ = nullptr;
  node_type* last_ = nullptr;
  std::size_t size_ = 0;
  std::size_t live_nodes_ = 0;
  std::uint64_t epoch_ = 0;
  detail::node_pool<node_type> pool_;
};

template <element_value T>
validation_report sum_sequence<T>::validate() const {
  validation_report report;
  auto fail = [&report](std::size_t lv, std::size_t ord, std::string rule, std::string what) {
    report.violations.push_back({lv, ord, std::move(rule), std::move(what)});
  };

  const std::size_t m = config_.max_group;
  const std::size_t lo = config_.min_group();
  if (levels_.empty()) {
    fail(0, 0, "levels", "no levels");
    return report;
  }
  const std::size_t top = levels_.size() - 1;

  if (size_ == 0) {
    if (levels_.size() != 1 || levels_[0].head != nullptr || levels_[0].count != 0 ||
        first_ != nullptr || last_ != nullptr) {
      fail(0, 0, "empty-shape", "empty sequence must be one empty level");
    }
    return report;
  }

  // Level-count bound: ceil(log_min(max(size, 2))) + 1.
  {
    std::size_t bound = 1;
    long double reach = 1;
    const long double target = static_cast<long double>(std::max<std::size_t>(size_, 2));
    while (reach < target) {
      reach *= static_cast<long double>(lo);
      ++bound;
    }
    if (levels_.size() > bound) {
      fail(top, 0, "level-bound",
           std::to_string(levels_.size()) + " levels exceed bound " + std::to_string(bound));
    }
  }

  if (top > 0 && (levels_[top].count < 2 || levels_[top].count >= m)) {
    fail(top, 0, "top-size", "top level has " + std::to_string(levels_[top].count) + " nodes");
  }
  if (top == 0 && levels_[0].count >= m) {
    fail(0, 0, "top-size", "single level holds max_group or more elements");
  }

  const std::size_t node_cap = live_nodes_ + 1;
  std::vector<fresh_totals> below;
  std::vector<fresh_totals> here;

  for (std::size_t lv = 0; lv <= top; ++lv) {
    here.clear();
    const node_type* x = levels_[lv].head;
    if (x == nullptr) {
      fail(lv, 0, "level-size", "level has no nodes");
      return report;
    }
    if (x->prev != nullptr) {
      fail(lv, 0, "link-symmetry", "first node has a prev link");
    }
    if (!x->group_head) {
      fail(lv, 0, "group-head", "first node of a level must be a group head");
    }
    const node_type* child = lv > 0 ? levels_[lv - 1].head : nullptr;
    std::size_t child_ord = 0;
    std::uint64_t level_count = 0;
    std::size_t ord = 0;
    for (; x != nullptr && ord < node_cap; x = x->next, ++ord) {
      if (x->next != nullptr && x->next->prev != x) {
        fail(lv, ord, "link-symmetry", "next->prev does not point back");
      }
      if (lv == top) {
        if (x->up != nullptr) {
          fail(lv, ord, "up-link", "top-level node has an up link");
        }
        if (ord > 0 && x->group_head) {
          fail(lv, ord, "group-head", "only the first top-level node is a group head");
        }
      } else {
        if (x->group_head != (x->up != nullptr)) {
          fail(lv, ord, "up-link", "up link present iff group head");
        } else if (x->up != nullptr && x->up->down != x) {
          fail(lv, ord, "up-link", "parent's down link does not target this head");
        }
      }

      fresh_totals f;
      if (lv == 0) {
        if (x->down != nullptr) {
          fail(lv, ord, "leaf", "deepest-level node has a down link");
        }
        if (x->count != 1) {
          fail(lv, ord, "leaf", "deepest-level count must be 1");
        }
        const square_type sq = config_.track_squares ? traits::square(leaf_value(x)) : square_type{};
        if (x->sum_sq != sq) {
          fail(lv, ord, "leaf", "sum_sq must equal the squared value");
        }
        f = {1, x->sum, sq, std::fabs(static_cast<long double>(x->sum))};
      } else {
        if (x->down == nullptr) {
          fail(lv, ord, "down-link", "internal node without children");
          return report;
        }
        if (x->down != child) {
          fail(lv, ord, "down-link", "children do not tile the level below in order");
          return report;
        }
        if (!x->down->group_head || x->down->up != x) {
          fail(lv, ord, "down-link", "down link must target a group head linked back up");
        }
        std::size_t k = 0;
        do {
          const fresh_totals& c = below[child_ord];
          f.count += c.count;
          f.sum += c.sum;
          f.sum_sq += c.sum_sq;
          f.mass += c.mass;
          ++k;
          ++child_ord;
          child = child->next;
        } while (child != nullptr && !child->group_head && child_ord < below.size());
        const std::size_t min_k = lv == top ? 1 : lo;
        if (k < min_k || k > m) {
          fail(lv, ord, "group-size",
               std::to_string(k) + " children outside [" + std::to_string(min_k) + ", " +
                   std::to_string(m) + "]");
        }
        if (x->count != f.count) {
          fail(lv, ord, "count-aggregate", "count differs from children total");
        }
        if (!traits::same_total(x->sum, f.sum, f.mass)) {
          fail(lv, ord, "sum-aggregate", "sum differs from recomputed total");
        }
        if (config_.track_squares &&
            !traits::same_total(x->sum_sq, f.sum_sq, traits::to_real(f.sum_sq))) {
          fail(lv, ord, "sumsq-aggregate", "sum_sq differs from recomputed total");
        }
      }
      level_count += f.count;
      here.push_back(f);
    }
    if (ord != levels_[lv].count) {
      fail(lv, 0, "level-size",
           "descriptor says " + std::to_string(levels_[lv].count) + " nodes, found " +
               std::to_string(ord));
    }
    if (lv > 0 && child != nullptr) {
      fail(lv, 0, "down-link", "level below has nodes not covered by any parent");
    }
    if (level_count != size_) {
      fail(lv, 0, "size", "level covers " + std::to_string(level_count) + " elements, size is " +
                              std::to_string(size_));
    }
    if (lv == 0) {
      const node_type* tail = levels_[0].head;
      while (tail->next != nullptr) {
        tail = tail->next;
      }
      if (first_ != levels_[0].head || last_ != tail) {
        fail(0, 0, "ends", "first/last do not match the deepest level");
      }
    }
    std::swap(below, here);
  }
  return report;
}

template <element_value T>
void cursor<T>::check() const {
  if (owner_ == nullptr || owner_->epoch() != epoch_) {
    throw stale_cursor_error("cursor invalidated by a mutation");
  }
}

template <element_value T>
bool cursor<T>::valid() const noexcept {
  return owner_ != nullptr && owner_->epoch() == epoch_;
}

template <element_value T>
T cursor<T>::value() const {
  check();
  return static_cast<T>(node_->sum);
}

template <element_value T>
std::size_t cursor<T>::rank() const {
  check();
  return owner_->rank_of(*this);
}

template <element_value T>
cursor<T> cursor<T>::next() const {
  check();
  if (node_->next == nullptr) {
    throw boundary_error("no element after the last one");
  }
  return cursor(node_->next, owner_, epoch_);
}

template <element_value T>
cursor<T> cursor<T>::prev() const {
  check();
  if (node_->prev == nullptr) {
    throw boundary_error("no element before the first one");
  }
  return cursor(node_->prev, owner_, epoch_);
}

using sequence_i64 = sum_sequence<std::int64_t>;
using sequence_f64 = sum_sequence<double>;

} // namespace sumtree
