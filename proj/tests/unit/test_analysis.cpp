#include <gtest/gtest.h>

#include <limits>

#include "dpgnn/analysis.hpp"
#include "dpgnn/rng.hpp"

using namespace dpgnn;

namespace {

LabeledGraph random_labeled(std::size_t n, double p, int classes, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) edges.emplace_back(i, j);
  std::vector<int> labels(n);
  for (int& y : labels) y = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  return LabeledGraph(n, edges, labels, classes);
}

std::vector<std::vector<int>> floyd_warshall(const LabeledGraph& g) {
  const std::size_t n = g.num_nodes();
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& [i, j] : g.edges()) d[i][j] = d[j][i] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  for (auto& row : d)
    for (int& v : row)
      if (v == inf) v = -1;
  return d;
}

}  // namespace

TEST(ShortestPaths, Examples) {
  const LabeledGraph path(3, {{0, 1}, {1, 2}}, {0, 0, 1}, 2);
  EXPECT_EQ(shortest_paths_up_to(path, 4).distance(0, 2), 2);
  EXPECT_EQ(shortest_paths_up_to(path, 1).distance(0, 2), DistanceProfile::kUnreachable);

  const LabeledGraph apart(2, {}, {0, 1}, 2);
  EXPECT_EQ(shortest_paths_up_to(apart, 3).distance(0, 1), DistanceProfile::kUnreachable);
  EXPECT_THROW(shortest_paths_up_to(apart, 0), std::invalid_argument);
}

TEST(ShortestPaths, MatchFloydWarshall) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto g = random_labeled(12, 0.18, 3, seed);
    const auto oracle = floyd_warshall(g);
    const auto profile = shortest_paths_up_to(g, 12);
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 12; ++j) {
        ASSERT_EQ(profile.distance(i, j), oracle[i][j]) << seed << ": " << i << "," << j;
        ASSERT_EQ(profile.distance(i, j), profile.distance(j, i));
      }
  }
}

TEST(ShortestPaths, TruncationIsMonotone) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_labeled(20, 0.1, 2, seed);
    for (std::size_t cap = 1; cap < 8; ++cap) {
      const auto a = shortest_paths_up_to(g, cap);
      const auto b = shortest_paths_up_to(g, cap + 1);
      for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 20; ++j) {
          if (a.distance(i, j) != DistanceProfile::kUnreachable) {
            EXPECT_EQ(a.distance(i, j), b.distance(i, j));
          } else if (b.distance(i, j) != DistanceProfile::kUnreachable) {
            EXPECT_EQ(b.distance(i, j), static_cast<std::int16_t>(cap + 1));
          }
        }
    }
  }
}

TEST(InterClassRate, Examples) {
  const LabeledGraph triangle(3, {{0, 1}, {0, 2}, {1, 2}}, {0, 0, 1}, 2);
  const auto tp = shortest_paths_up_to(triangle, 2);
  EXPECT_DOUBLE_EQ(*inter_class_rate(tp, triangle.labels(), 1), 2.0 / 3.0);
  EXPECT_FALSE(inter_class_rate(tp, triangle.labels(), 2).has_value());

  const auto same = random_labeled(15, 0.2, 2, 4);
  const std::vector<int> zeros(15, 0);
  const auto sp = shortest_paths_up_to(same, 6);
  for (std::size_t l = 1; l <= 6; ++l) {
    const auto r = inter_class_rate(sp, zeros, l);
    if (r) {
      EXPECT_EQ(*r, 0.0);
    }
  }

  const LabeledGraph star(3, {{0, 1}, {0, 2}}, {0, 1, 1}, 2);
  const auto st = shortest_paths_up_to(star, 3);
  EXPECT_EQ(*inter_class_rate(st, star.labels(), 1), 1.0);
  EXPECT_EQ(*inter_class_rate(st, star.labels(), 2), 0.0);

  EXPECT_THROW(inter_class_rate(st, star.labels(), 0), std::invalid_argument);
  EXPECT_THROW(inter_class_rate(st, star.labels(), 4), std::invalid_argument);
}

TEST(PairCounts, PartitionAllPairs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_labeled(25, 0.08, 3, seed);
    const auto report = graph_summary(g, 4);
    std::uint64_t total = report.unreachable_pairs;
    for (const auto& c : report.per_hop) {
      total += c.pairs;
      if (c.rate()) {
        EXPECT_GE(*c.rate(), 0.0);
        EXPECT_LE(*c.rate(), 1.0);
      }
    }
    EXPECT_EQ(total, 25u * 24u / 2u);
  }
}

TEST(GraphSummary, Examples) {
  const LabeledGraph triangle(3, {{0, 1}, {0, 2}, {1, 2}}, {0, 0, 1}, 2);
  const auto t = graph_summary(triangle);
  EXPECT_EQ(t.nodes, 3u);
  EXPECT_EQ(t.edges, 3u);
  EXPECT_EQ(t.average_degree, 2.0);
  EXPECT_EQ(t.component_count(), 1u);

  const LabeledGraph empty(5, {}, {0, 1, 0, 1, 0}, 2);
  const auto e = graph_summary(empty);
  EXPECT_EQ(e.average_degree, 0.0);
  EXPECT_EQ(e.component_count(), 5u);
  EXPECT_EQ(e.unreachable_pairs, 10u);
  EXPECT_EQ(e.max_hops, 6u);
}

TEST(Components, SizesDescending) {
  const LabeledGraph g(7, {{0, 1}, {1, 2}, {4, 5}}, std::vector<int>(7, 0), 2);
  EXPECT_EQ(connected_components(g), (std::vector<std::size_t>{3, 2, 1, 1}));
}
