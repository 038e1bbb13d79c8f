#include <algorithm>
#include <random>

#include "test_util.hpp"
#include "unseg/affinity.hpp"

namespace unseg {
namespace {

TEST(Affinity, CollinearPointsSymmetrize) {
  Eigen::MatrixXd p(3, 1);
  p << 0.0, 1.0, 2.5;
  const auto g = build_knn_affinity(p, 1);
  EXPECT_EQ(g.weight(1, 0), 1.0);
  EXPECT_EQ(g.weight(1, 2), 1.0);
  EXPECT_EQ(g.weight(0, 2), 0.0);
  EXPECT_EQ(g.degree(1), 2.0);
  EXPECT_EQ(g.edge_count(), 2u);
}

TEST(Affinity, KEqualsNMinusOneIsComplete) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 1);
  Eigen::MatrixXd p(7, 3);
  for (int i = 0; i < p.size(); ++i) p.data()[i] = g(rng);
  const auto graph = build_knn_affinity(p, 6);
  EXPECT_EQ(graph.edge_count(), 21u);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(graph.weight(i, i), 0.0);
}

TEST(Affinity, OversizedKIsReduced) {
  Eigen::MatrixXd p(4, 2);
  p << 0, 0, 1, 0, 0, 1, 1, 1;
  const auto g = build_knn_affinity(p, 30);
  EXPECT_EQ(g.k_requested, 30);
  EXPECT_EQ(g.k_used, 3);
  EXPECT_TRUE(g.k_reduced());
  EXPECT_EQ(g.edge_count(), 6u);
}

TEST(Affinity, TooFewPoints) {
  EXPECT_ERRC(build_knn_affinity(Eigen::MatrixXd(1, 2), 1), Errc::invalid_argument);
}

TEST(Affinity, NeighbourSetsMatchBruteForce) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 1);
  const int n = 200, k = 5;
  Eigen::MatrixXd p(n, 4);
  for (int i = 0; i < p.size(); ++i) p.data()[i] = g(rng);
  const auto knn = knn_indices(p, k, 3);
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> all;
    for (int j = 0; j < n; ++j) {
      if (j != i) all.push_back({(p.row(i) - p.row(j)).squaredNorm(), j});
    }
    std::sort(all.begin(), all.end());
    std::vector<std::uint32_t> expect;
    for (int t = 0; t < k; ++t) expect.push_back(all[t].second);
    ASSERT_EQ(knn[i], expect) << "row " << i;
  }
  const auto graph = build_knn_affinity(p, k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const bool linked = std::count(knn[i].begin(), knn[i].end(), j) ||
                          std::count(knn[j].begin(), knn[j].end(), i);
      ASSERT_EQ(graph.weight(i, j), linked ? 1.0 : 0.0);
      ASSERT_EQ(graph.weight(i, j), graph.weight(j, i));
    }
  }
}

TEST(Affinity, DuplicateRowsTieToLowerIndex) {
  Eigen::MatrixXd p(4, 1);
  p << 0.0, 1.0, 1.0, 1.0;
  const auto knn = knn_indices(p, 1);
  EXPECT_EQ(knn[0][0], 1u);
  EXPECT_EQ(knn[1][0], 2u);
  EXPECT_EQ(knn[3][0], 1u);
}

TEST(Affinity, WorkerCountDoesNotMatter) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  Eigen::MatrixXd p(64, 5);
  for (int i = 0; i < p.size(); ++i) p.data()[i] = g(rng);
  EXPECT_EQ(build_knn_affinity(p, 8, 1).adjacency, build_knn_affinity(p, 8, 4).adjacency);
}

TEST(Affinity, FromTensor) {
  FeatureTensor t({3, 1}, {0, 1, 2.5});
  const auto g = build_knn_affinity(t, 1);
  EXPECT_EQ(g.edge_count(), 2u);
}

TEST(Affinity, FromEdges) {
  const auto g = graph_from_edges(4, {{0, 1, 0.5}, {1, 0, 2.0}, {2, 1, 1.0}});
  EXPECT_EQ(g.weight(0, 1), 2.0);
  EXPECT_EQ(g.degree(1), 3.0);
  const auto iso = g.isolated();
  EXPECT_TRUE(iso[3]);
  EXPECT_FALSE(iso[0]);
  EXPECT_ERRC(graph_from_edges(2, {{1, 1, 1.0}}), Errc::invalid_argument);
  EXPECT_ERRC(graph_from_edges(2, {{0, 1, -1.0}}), Errc::invalid_argument);
}

}  // namespace
}  // namespace unseg
