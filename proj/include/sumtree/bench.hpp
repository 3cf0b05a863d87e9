#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "statistics.hpp"
#include "summation.hpp"

namespace sumtree::bench {

enum class query_kind { prefix, range_fixed_d, stats };

inline const char* to_string(query_kind k) noexcept {
  switch (k) {
    case query_kind::prefix: return "prefix";
    case query_kind::range_fixed_d: return "range_fixed_d";
    case query_kind::stats: return "stats";
  }
  return "?";
}

struct bench_row {
  std::size_t size = 0;
  query_kind kind = query_kind::prefix;
  std::size_t trials = 0;
  double mean_nodes_visited = 0;
  double mean_additions = 0;
  // Elements a plain loop would touch: the whole sequence for prefix sums,
  // the window length for the fixed-distance kinds.
  std::size_t naive_ops = 0;
};

struct bench_options {
  std::vector<std::size_t> sizes;
  std::size_t trials = 1000;
  std::size_t distance = 64;
  std::uint64_t seed = 1;
  tree_config config;
};

template <element_value T>
std::vector<T> random_values(std::size_t n, std::mt19937_64& rng) {
  std::vector<T> v(n);
  if constexpr (std::is_integral_v<T>) {
    std::uniform_int_distribution<T> dist(-1000, 1000);
    for (auto& x : v) x = dist(rng);
  } else {
    std::uniform_real_distribution<T> dist(-1000.0, 1000.0);
    for (auto& x : v) x = dist(rng);
  }
  return v;
}

/// Operation counts per query kind for each size. Sizes must be strictly
/// increasing, nonzero, and at least `distance`.
template <element_value T>
std::vector<bench_row> run(const bench_options& opt) {
  if (opt.sizes.empty() || opt.trials == 0 || opt.distance == 0) {
    throw range_error("bench needs sizes, trials > 0 and distance > 0");
  }
  for (std::size_t i = 0; i < opt.sizes.size(); ++i) {
    if (opt.sizes[i] == 0 || (i > 0 && opt.sizes[i] <= opt.sizes[i - 1])) {
      throw range_error("bench sizes must be nonzero and strictly increasing");
    }
    if (opt.sizes[i] < opt.distance) {
      throw range_error("bench size " + std::to_string(opt.sizes[i]) + " is below distance " +
                        std::to_string(opt.distance));
    }
  }

  std::vector<bench_row> rows;
  std::mt19937_64 rng(opt.seed);
  for (std::size_t size : opt.sizes) {
    const std::vector<T> values = random_values<T>(size, rng);
    const sum_sequence<T> seq(values, opt.config);
    const double trials = static_cast<double>(opt.trials);

    bench_row prefix{size, query_kind::prefix, opt.trials, 0, 0, size};
    std::uniform_int_distribution<std::size_t> any_n(0, size);
    for (std::size_t t = 0; t < opt.trials; ++t) {
      const auto r = prefix_sum(seq, any_n(rng));
      prefix.mean_nodes_visited += static_cast<double>(r.stats.nodes_visited);
      prefix.mean_additions += static_cast<double>(r.stats.additions);
    }

    // Cursors are placed before measuring, so only the finger path counts.
    bench_row ranged{size, query_kind::range_fixed_d, opt.trials, 0, 0, opt.distance};
    std::uniform_int_distribution<std::size_t> start(0, size - opt.distance);
    for (std::size_t t = 0; t < opt.trials; ++t) {
      const std::size_t m = start(rng);
      const auto a = seq.select(m);
      const auto b = seq.select(m + opt.distance - 1);
      const auto r = range_sum_between(a, b);
      ranged.mean_nodes_visited += static_cast<double>(r.stats.nodes_visited);
      ranged.mean_additions += static_cast<double>(r.stats.additions);
    }

    prefix.mean_nodes_visited /= trials;
    prefix.mean_additions /= trials;
    ranged.mean_nodes_visited /= trials;
    ranged.mean_additions /= trials;
    rows.push_back(prefix);
    rows.push_back(ranged);

    if (opt.config.track_squares) {
      bench_row st{size, query_kind::stats, opt.trials, 0, 0, opt.distance};
      for (std::size_t t = 0; t < opt.trials; ++t) {
        const std::size_t m = start(rng);
        const auto r = stats_report(seq, m, m + opt.distance);
        st.mean_nodes_visited += static_cast<double>(r.stats.nodes_visited);
        st.mean_additions += static_cast<double>(r.stats.additions);
      }
      st.mean_nodes_visited /= trials;
      st.mean_additions /= trials;
      rows.push_back(st);
    }
  }
  return rows;
}

inline void write_csv(std::ostream& out, const std::vector<bench_row>& rows) {
  out << "size,query_kind,trials,mean_nodes_visited,mean_additions,naive_ops\n";
  for (const auto& r : rows) {
    out << r.size << ',' << to_string(r.kind) << ',' << r.trials << ',' << r.mean_nodes_visited
        << ',' << r.mean_additions << ',' << r.naive_ops << '\n';
  }
}

} // namespace sumtree::bench
