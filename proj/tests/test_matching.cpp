#include <gtest/gtest.h>

#include <vector>

#include "sectornet/matching.hpp"
#include "test_support.hpp"

using namespace sectornet;

namespace {

WeightedGraph triangle(double a, double b, double c) { return {3, {{0, 1, a}, {1, 2, b}, {0, 2, c}}}; }

}  // namespace

TEST(MwmGeneral, TrianglePicksHeaviestEdge) {
  const auto m = mwm_general(triangle(3, 2, 2));
  EXPECT_EQ(m.edges, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(m.weight, 3.0);
}

TEST(MwmGeneral, PathPrefersMiddleEdge) {
  const WeightedGraph path{4, {{0, 1, 1}, {1, 2, 5}, {2, 3, 1}}};
  const auto m = mwm_general(path);
  EXPECT_EQ(m.edges, std::vector<int>{1});
  EXPECT_DOUBLE_EQ(m.weight, 5.0);
}

TEST(MwmGeneral, AllZeroWeightsGiveZero) {
  const auto m = mwm_general(triangle(0, 0, 0));
  EXPECT_DOUBLE_EQ(m.weight, 0.0);
  EXPECT_TRUE(m.edges.empty());
}

TEST(MwmGeneral, RejectsNegativeWeightAndParallelEdges) {
  EXPECT_THROW(mwm_general(triangle(-1, 2, 2)), Error);
  const WeightedGraph parallel{2, {{0, 1, 1}, {1, 0, 2}}};
  EXPECT_THROW(mwm_general(parallel), Error);
}

TEST(MwmGeneral, BlossomInstances) {
  // Five-cycle with a pendant: optimum needs blossom shrinking.
  const WeightedGraph g{6, {{0, 1, 8}, {1, 2, 9}, {2, 3, 10}, {3, 4, 7}, {4, 0, 6}, {2, 5, 12}}};
  const auto m = mwm_general(g);
  EXPECT_DOUBLE_EQ(m.weight, oracle::brute_force_matching_weight(g));
  EXPECT_TRUE(is_matching(g, m.edges));
}

TEST(MwmGeneral, MatchesBruteForceOnRandomGraphs) {
  Rng rng(20240501);
  for (int trial = 0; trial < 400; ++trial) {
    const auto g = oracle::random_weighted_graph(rng, 10, 20, trial % 3 == 0 ? 3 : 50);
    const auto m = mwm_general(g);
    ASSERT_TRUE(is_matching(g, m.edges)) << "trial " << trial;
    ASSERT_DOUBLE_EQ(m.weight, oracle::brute_force_matching_weight(g)) << "trial " << trial;
  }
}

TEST(MwmGeneral, ScalingKeepsOptimalSet) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = oracle::random_weighted_graph(rng, 9, 16, 20);
    const auto base = mwm_general(g);
    for (auto& e : g.edges) e.w *= 4.0;
    const auto scaled = mwm_general(g);
    EXPECT_DOUBLE_EQ(scaled.weight, 4.0 * base.weight);
  }
}

TEST(MwmBipartite, PerfectPattern) {
  const WeightedGraph g{4, {{0, 2, 4}, {0, 3, 1}, {1, 2, 1}, {1, 3, 4}}};
  const std::vector<int> side{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(mwm_bipartite(g, side).weight, 8.0);
}

TEST(MwmBipartite, StarPicksHeaviestSpoke) {
  WeightedGraph g{6, {}};
  for (int i = 1; i <= 5; ++i) g.edges.push_back({0, i, static_cast<double>(i)});
  const std::vector<int> side{0, 1, 1, 1, 1, 1};
  const auto m = mwm_bipartite(g, side);
  EXPECT_EQ(m.edges, std::vector<int>{4});
  EXPECT_DOUBLE_EQ(m.weight, 5.0);
}

TEST(MwmBipartite, RejectsMonochromaticEdge) {
  const WeightedGraph g{3, {{0, 1, 1}, {1, 2, 1}}};
  const std::vector<int> side{0, 0, 1};
  try {
    mwm_bipartite(g, side);
    FAIL() << "expected InvalidBipartition";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidBipartition);
  }
}

TEST(MwmBipartite, AgreesWithGeneralAndBruteForce) {
  Rng rng(99);
  std::vector<int> side;
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = oracle::random_bipartite_graph(rng, 6, 20, trial % 2 ? 5 : 100, side);
    const auto b = mwm_bipartite(g, side);
    ASSERT_TRUE(is_matching(g, b.edges));
    ASSERT_DOUBLE_EQ(b.weight, mwm_general(g).weight) << "trial " << trial;
    ASSERT_DOUBLE_EQ(b.weight, oracle::brute_force_matching_weight(g)) << "trial " << trial;
  }
}

TEST(EnumerateMatchings, Counts) {
  EXPECT_EQ(enumerate_matchings(triangle(1, 1, 1)).size(), 4u);
  const WeightedGraph path{4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}}};
  EXPECT_EQ(enumerate_matchings(path).size(), 5u);
  const WeightedGraph single{2, {{0, 1, 1}}};
  EXPECT_EQ(enumerate_matchings(single).size(), 2u);
}

TEST(EnumerateMatchings, GuardAndValidity) {
  WeightedGraph big{24, {}};
  for (int i = 0; i < 23; ++i) big.edges.push_back({i, i + 1, 1});
  try {
    enumerate_matchings(big);
    FAIL() << "expected SearchSpaceTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SearchSpaceTooLarge);
  }
  Rng rng(3);
  const auto g = oracle::random_weighted_graph(rng, 8, 12, 9);
  for (const auto& m : enumerate_matchings(g)) EXPECT_TRUE(is_matching(g, m.edges));
}
