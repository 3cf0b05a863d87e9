#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bench.hpp"
#include "io.hpp"
#include "statistics.hpp"
#include "summation.hpp"
#include "testing.hpp"

// Command implementations behind the `sumtree` executable. Each command
// rebuilds the sequence from its input file, writes records to `out`,
// diagnostics to `err`, and returns the process exit code.
namespace sumtree::cli {

enum exit_code : int {
  exit_ok = 0,
  exit_parse = 2,
  exit_usage = 3,
  exit_arithmetic = 4,
  exit_invalid = 5,
};

struct common_options {
  std::string input;
  std::size_t fanout = 8;
  std::string mode = "f64";
  bool no_squares = false;

  [[nodiscard]] tree_config config() const { return {fanout, !no_squares}; }
};

struct sum_options : common_options {
  std::size_t from = 0;
  std::size_t to = 0;
  bool prefix = false;
};

struct stats_options : common_options {
  std::size_t from = 0;
  std::size_t to = 0;
};

struct select_options : common_options {
  std::size_t rank = 0;
};

struct validate_options : common_options {
  std::size_t mutations = 0;
  std::uint64_t seed = 1;
  // Test hook: corrupt the stored sum of (level, ordinal) before validating.
  std::optional<std::pair<std::size_t, std::size_t>> corrupt;
};

struct bench_cli_options {
  std::vector<std::size_t> sizes;
  std::size_t trials = 1000;
  std::size_t distance = 64;
  std::uint64_t seed = 1;
  std::size_t fanout = 8;
  std::string mode = "f64";
  bool no_squares = false;
};

namespace detail {

template <typename V>
void add_value(io::record& r, std::string_view key, V v) {
  if constexpr (std::is_same_v<V, double>) {
    r.add(key, v);
  } else if constexpr (std::is_same_v<V, int128_t>) {
    r.add(key, v);
  } else {
    r.add(key, static_cast<std::int64_t>(v));
  }
}

// Runs `body` with the element type chosen by --mode and maps library
// errors onto exit codes.
template <typename Body>
int guarded(const std::string& mode, std::ostream& err, Body&& body) {
  try {
    if (mode == "i64") {
      return body(std::int64_t{});
    }
    if (mode == "f64") {
      return body(double{});
    }
    err << "error: unknown mode '" << mode << "' (expected i64 or f64)\n";
    return exit_usage;
  } catch (const io::parse_error& e) {
    err << "parse error: " << e.what() << '\n';
    return exit_parse;
  } catch (const domain_error& e) {
    err << "parse error: " << e.what() << '\n';
    return exit_parse;
  } catch (const arithmetic_error& e) {
    err << "arithmetic error: " << e.what() << '\n';
    return exit_arithmetic;
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
}

} // namespace detail

inline int cmd_sum(const sum_options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(opt.mode, err, [&]<typename T>(T) {
    const auto values = io::read_values<T>(opt.input);
    const sum_sequence<T> seq(values, opt.config());
    if (opt.prefix && opt.from != 0) {
      throw range_error("--prefix requires --from 0");
    }
    const auto r = opt.prefix ? prefix_sum(seq, opt.to) : range_sum(seq, opt.from, opt.to);
    io::record rec;
    detail::add_value(rec, "sum", r.value);
    rec.add("from", static_cast<std::uint64_t>(opt.from))
        .add("to", static_cast<std::uint64_t>(opt.to))
        .add("nodes_visited", r.stats.nodes_visited)
        .add("additions", r.stats.additions);
    out << rec.str() << '\n';
    return exit_ok;
  });
}

inline int cmd_stats(const stats_options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(opt.mode, err, [&]<typename T>(T) {
    const auto values = io::read_values<T>(opt.input);
    const sum_sequence<T> seq(values, opt.config());
    const auto s = stats_report(seq, opt.from, opt.to);
    io::record rec;
    rec.add("count", static_cast<std::uint64_t>(s.count));
    detail::add_value(rec, "sum", s.sum);
    detail::add_value(rec, "sum_sq", s.sum_sq);
    rec.add("mean", s.mean).add("variance", s.variance).add("stddev", s.stddev);
    out << rec.str() << '\n';
    return exit_ok;
  });
}

inline int cmd_select(const select_options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(opt.mode, err, [&]<typename T>(T) {
    const auto values = io::read_values<T>(opt.input);
    const sum_sequence<T> seq(values, opt.config());
    const T v = seq.value_at(opt.rank);
    io::record rec;
    rec.add("rank", static_cast<std::uint64_t>(opt.rank));
    detail::add_value(rec, "value", v);
    out << rec.str() << '\n';
    return exit_ok;
  });
}

/// Seeded random insert/remove/set script applied to both the sequence and
/// a plain vector. Returns false if the contents diverge.
template <element_value T>
bool apply_mutations(sum_sequence<T>& seq, std::vector<T>& shadow, std::size_t count,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> op(0, 2);
  auto value = [&rng] {
    if constexpr (std::is_integral_v<T>) {
      return std::uniform_int_distribution<T>(-1000, 1000)(rng);
    } else {
      return std::uniform_real_distribution<T>(-1000.0, 1000.0)(rng);
    }
  };
  for (std::size_t i = 0; i < count; ++i) {
    const int kind = shadow.empty() ? 0 : op(rng);
    if (kind == 0) {
      const std::size_t r = std::uniform_int_distribution<std::size_t>(0, shadow.size())(rng);
      const T v = value();
      seq.insert(r, v);
      shadow.insert(shadow.begin() + static_cast<std::ptrdiff_t>(r), v);
    } else if (kind == 1) {
      const std::size_t r = std::uniform_int_distribution<std::size_t>(0, shadow.size() - 1)(rng);
      seq.remove(r);
      shadow.erase(shadow.begin() + static_cast<std::ptrdiff_t>(r));
    } else {
      const std::size_t r = std::uniform_int_distribution<std::size_t>(0, shadow.size() - 1)(rng);
      const T v = value();
      seq.set_value(r, v);
      shadow[r] = v;
    }
  }
  return seq.to_vector() == shadow;
}

inline int cmd_validate(const validate_options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(opt.mode, err, [&]<typename T>(T) {
    std::vector<T> shadow = io::read_values<T>(opt.input);
    sum_sequence<T> seq(shadow, opt.config());
    validation_report report;
    if (opt.mutations > 0 && !apply_mutations(seq, shadow, opt.mutations, opt.seed)) {
      report.violations.push_back({0, 0, "shadow", "contents differ from the shadow array"});
    }
    if (opt.corrupt) {
      const auto [level, ordinal] = *opt.corrupt;
      if (!testing::corrupt_sum(seq, level, ordinal, T{1})) {
        throw range_error("no node at the requested corruption site");
      }
    }
    for (auto& v : seq.validate().violations) {
      report.violations.push_back(std::move(v));
    }
    io::record summary;
    summary.add("ok", report.ok())
        .add("size", static_cast<std::uint64_t>(seq.size()))
        .add("levels", static_cast<std::uint64_t>(seq.level_count()))
        .add("nodes", static_cast<std::uint64_t>(seq.node_count()))
        .add("violations", static_cast<std::uint64_t>(report.violations.size()));
    out << summary.str() << '\n';
    for (const auto& v : report.violations) {
      io::record rec;
      rec.add("level", static_cast<std::uint64_t>(v.level))
          .add("ordinal", static_cast<std::uint64_t>(v.ordinal))
          .add("rule", v.rule)
          .add("description", v.description);
      out << rec.str() << '\n';
    }
    return report.ok() ? exit_ok : exit_invalid;
  });
}

inline int cmd_bench(const bench_cli_options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(opt.mode, err, [&]<typename T>(T) {
    bench::bench_options b;
    b.sizes = opt.sizes;
    b.trials = opt.trials;
    b.distance = opt.distance;
    b.seed = opt.seed;
    b.config = {opt.fanout, !opt.no_squares};
    bench::write_csv(out, bench::run<T>(b));
    return exit_ok;
  });
}

} // namespace sumtree::cli
