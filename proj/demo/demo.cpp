// Small tour of the library: build, query, mutate, check.
#include <cstdint>
#include <iostream>
#include <vector>

#include "sumtree/sumtree.hpp"

int main() {
  using namespace sumtree;

  const std::vector<std::int64_t> values{3, 1, 4, 1, 5, 9, 2, 6};
  sequence_i64 seq(values, tree_config{.max_group = 3});

  std::cout << "size " << seq.size() << ", levels " << seq.level_count() << '\n';
  std::cout << "value_at(5) = " << seq.value_at(5) << '\n';
  std::cout << "prefix_sum(4) = " << prefix_sum(seq, 4).value << '\n';

  const auto r = range_sum(seq, 2, 5);
  std::cout << "range_sum(2, 5) = " << r.value << " (" << r.stats.nodes_visited
            << " nodes visited)\n";

  const auto a = seq.select(2);
  const auto b = seq.select(4);
  std::cout << "between ranks " << a.rank() << " and " << b.rank() << ": "
            << range_sum_between(a, b).value << '\n';

  const auto s = stats_report(seq, 2, 5);
  std::cout << "mean " << s.mean << ", variance " << s.variance << ", stddev " << s.stddev << '\n';

  seq.insert(1, 9);
  seq.remove(0);
  seq.set_value(0, 7);
  std::cout << "after updates:";
  for (auto v : seq) {
    std::cout << ' ' << v;
  }
  std::cout << "\nvalid: " << std::boolalpha << seq.validate().ok() << '\n';
}
