#include <cstdint>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sumtree/oracle.hpp"
#include "test_util.hpp"

namespace sumtree {
namespace {

using I = std::int64_t;
const std::vector<I> kPi{3, 1, 4, 1, 5, 9, 2, 6};

TEST(NaiveSum, EmptyAndHandChecked) {
  EXPECT_EQ(oracle::naive_sum<I>(std::vector<I>{}, 0, 0), 0);
  EXPECT_EQ(oracle::naive_sum<I>(kPi, 0, 4), 9);
  EXPECT_EQ(oracle::naive_sum<I>(kPi, 2, 5), 10);
  EXPECT_THROW((void)oracle::naive_sum<I>(kPi, 3, 2), range_error);
  EXPECT_THROW((void)oracle::naive_sum<I>(kPi, 0, 9), range_error);
}

TEST(NaiveSum, SplitsAtEveryPoint) {
  std::mt19937_64 rng(7);
  const auto v = test::random_ints(200, rng);
  const I whole = oracle::naive_sum<I>(v, 0, v.size());
  for (std::size_t k = 0; k <= v.size(); ++k) {
    EXPECT_EQ(whole, oracle::naive_sum<I>(v, 0, k) + oracle::naive_sum<I>(v, k, v.size()));
  }
}

TEST(PairwiseSum, SixteenOnes) {
  const std::vector<I> ones(16, 1);
  const auto r = oracle::pairwise_sum<I>(ones);
  EXPECT_EQ(r.total, 16);
  EXPECT_EQ(r.rounds, 4u);
  EXPECT_EQ(r.additions, 15u);
}

TEST(PairwiseSum, SingleAndEmpty) {
  const auto one = oracle::pairwise_sum<I>(std::vector<I>{42});
  EXPECT_EQ(one.total, 42);
  EXPECT_EQ(one.rounds, 0u);
  EXPECT_EQ(one.additions, 0u);
  const auto none = oracle::pairwise_sum<I>(std::vector<I>{});
  EXPECT_EQ(none.total, 0);
  EXPECT_EQ(none.additions, 0u);
}

TEST(PairwiseSum, RoundsAndAdditionsForEveryLength) {
  std::mt19937_64 rng(11);
  for (std::size_t k = 1; k <= 300; ++k) {
    const auto v = test::random_ints(k, rng);
    const auto r = oracle::pairwise_sum<I>(v);
    EXPECT_EQ(r.additions, k - 1);
    std::size_t ceil_log2 = 0;
    while ((std::size_t{1} << ceil_log2) < k) ++ceil_log2;
    EXPECT_EQ(r.rounds, ceil_log2) << "k=" << k;
    EXPECT_EQ(r.total, oracle::naive_sum<I>(v, 0, k));
  }
}

TEST(PairwiseSum, ThousandRandomMatchesNaive) {
  std::mt19937_64 rng(3);
  const auto v = test::random_ints(1000, rng, -1'000'000'000, 1'000'000'000);
  EXPECT_EQ(oracle::pairwise_sum<I>(v).total, oracle::naive_sum<I>(v, 0, v.size()));
}

TEST(NaiveStats, HandTwoPass) {
  const auto s = oracle::naive_stats<I>(kPi, 2, 5);
  EXPECT_EQ(s.count, 3u);
  EXPECT_DOUBLE_EQ(s.mean, 10.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.variance, 26.0 / 9.0);
}

TEST(NaiveStats, ConstantRangeAndErrors) {
  const std::vector<double> c(10, 2.5);
  EXPECT_EQ(oracle::naive_stats<double>(c, 0, 10).variance, 0.0);
  EXPECT_THROW((void)oracle::naive_stats<double>(c, 4, 4), empty_range_error);
  EXPECT_THROW((void)oracle::naive_stats<double>(c, 4, 11), range_error);
}

} // namespace
} // namespace sumtree
