#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sumtree/cli.hpp"

namespace {

void add_common(CLI::App* cmd, sumtree::cli::common_options& opt) {
  cmd->add_option("input", opt.input, "Data file: one number per line, '#' comments")->required();
  cmd->add_option("--fanout", opt.fanout, "Maximum children per node (>= 3)")->capture_default_str();
  cmd->add_option("--mode", opt.mode, "Element type: i64 or f64")
      ->check(CLI::IsMember({"i64", "f64"}))
      ->capture_default_str();
  cmd->add_flag("--no-squares", opt.no_squares, "Do not maintain sums of squares");
}

std::pair<std::size_t, std::size_t> parse_site(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw CLI::ValidationError("--corrupt", "expected LEVEL,ORDINAL");
  }
  return {std::stoul(text.substr(0, comma)), std::stoul(text.substr(comma + 1))};
}

} // namespace

int main(int argc, char** argv) {
  namespace cli = sumtree::cli;
  CLI::App app{"Range sums, rank access and range statistics over a level-linked B+ tree"};
  app.require_subcommand(1);

  cli::sum_options sum;
  auto* sum_cmd = app.add_subcommand("sum", "Sum of the elements at ranks [from, to)");
  add_common(sum_cmd, sum);
  sum_cmd->add_option("--from", sum.from, "First rank (inclusive)")->required();
  sum_cmd->add_option("--to", sum.to, "Last rank (exclusive)")->required();
  sum_cmd->add_flag("--prefix", sum.prefix, "Use the top-down prefix sum (needs --from 0)");

  cli::stats_options stats;
  auto* stats_cmd = app.add_subcommand("stats", "Count, mean, variance and stddev over [from, to)");
  add_common(stats_cmd, stats);
  stats_cmd->add_option("--from", stats.from, "First rank (inclusive)")->required();
  stats_cmd->add_option("--to", stats.to, "Last rank (exclusive)")->required();

  cli::select_options select;
  auto* select_cmd = app.add_subcommand("select", "Element at a rank");
  add_common(select_cmd, select);
  select_cmd->add_option("--rank", select.rank, "0-based rank")->required();

  cli::validate_options validate;
  std::string corrupt;
  auto* validate_cmd = app.add_subcommand("validate", "Build, optionally mutate, and check invariants");
  add_common(validate_cmd, validate);
  validate_cmd->add_option("--mutations", validate.mutations, "Seeded insert/remove/set operations");
  validate_cmd->add_option("--seed", validate.seed, "Seed for the mutation script")->capture_default_str();
  validate_cmd->add_option("--corrupt", corrupt, "Testing: corrupt the sum at LEVEL,ORDINAL")
      ->group("Testing");

  cli::bench_cli_options bench;
  auto* bench_cmd = app.add_subcommand("bench", "Per-query node visits and additions as CSV");
  bench_cmd->add_option("--sizes", bench.sizes, "Strictly increasing sequence sizes")
      ->required()
      ->delimiter(',');
  bench_cmd->add_option("--trials", bench.trials, "Queries per kind and size")->capture_default_str();
  bench_cmd->add_option("--distance", bench.distance, "Window length for fixed-distance queries")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Seed for data and queries")->capture_default_str();
  bench_cmd->add_option("--fanout", bench.fanout, "Maximum children per node (>= 3)")->capture_default_str();
  bench_cmd->add_option("--mode", bench.mode, "Element type: i64 or f64")
      ->check(CLI::IsMember({"i64", "f64"}))
      ->capture_default_str();
  bench_cmd->add_flag("--no-squares", bench.no_squares, "Skip sums of squares (and stats rows)");

  try {
    app.parse(argc, argv);
    if (!corrupt.empty()) {
      validate.corrupt = parse_site(corrupt);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_usage;
  }

  if (*sum_cmd) return cli::cmd_sum(sum, std::cout, std::cerr);
  if (*stats_cmd) return cli::cmd_stats(stats, std::cout, std::cerr);
  if (*select_cmd) return cli::cmd_select(select, std::cout, std::cerr);
  if (*validate_cmd) return cli::cmd_validate(validate, std::cout, std::cerr);
  if (*bench_cmd) return cli::cmd_bench(bench, std::cout, std::cerr);
  return cli::exit_usage;
}
