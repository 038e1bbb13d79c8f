#include <random>
#include <set>

#include "oracles.hpp"
#include "test_util.hpp"
#include "unseg/kmeans.hpp"

namespace unseg {
namespace {

Eigen::MatrixXd random_points(std::mt19937_64& rng, int n, int d) {
  std::normal_distribution<double> g(0, 1);
  Eigen::MatrixXd p(n, d);
  for (int i = 0; i < p.size(); ++i) p.data()[i] = g(rng);
  return p;
}

TEST(KMeans, TwoSeparatedBlobs) {
  const auto blobs = testing::make_blobs(2, 100, 12.0, 3, 1);
  KMeansOptions opt;
  opt.n_clusters = 2;
  const auto m = kmeans(blobs.points, opt);
  EXPECT_DOUBLE_EQ(testing::adjusted_rand_index(m.assignments, blobs.labels), 1.0);
}

TEST(KMeans, KEqualsNHasZeroInertia) {
  std::mt19937_64 rng(2);
  const auto p = random_points(rng, 9, 2);
  KMeansOptions opt;
  opt.n_clusters = 9;
  const auto m = kmeans(p, opt);
  EXPECT_EQ(m.inertia, 0.0);
  EXPECT_EQ(std::set<int>(m.assignments.begin(), m.assignments.end()).size(), 9u);
}

TEST(KMeans, LloydInertiaNonIncreasing) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_points(rng, 60, 3);
    KMeansOptions opt;
    opt.n_clusters = 5;
    opt.n_init = 1;
    opt.seed = trial;
    const auto m = kmeans(p, opt);
    for (std::size_t i = 1; i < m.inertia_trace.size(); ++i) {
      ASSERT_LE(m.inertia_trace[i], m.inertia_trace[i - 1] * (1 + 1e-12) + 1e-12);
    }
  }
}

TEST(KMeans, ModelInvariants) {
  std::mt19937_64 rng(4);
  const auto p = random_points(rng, 80, 4);
  KMeansOptions opt;
  opt.n_clusters = 6;
  const auto m = kmeans(p, opt);
  double sq = 0.0;
  for (std::size_t i = 0; i < m.assignments.size(); ++i) {
    ASSERT_GE(m.assignments[i], 0);
    ASSERT_LT(m.assignments[i], 6);
    ASSERT_GE(m.distances[i], 0.0);
    EXPECT_NEAR(m.distances[i], (p.row(i) - m.centroids.row(m.assignments[i])).norm(), 1e-12);
    sq += m.distances[i] * m.distances[i];
  }
  EXPECT_NEAR(m.inertia, sq, 1e-9);
  EXPECT_EQ(m.centroids.rows(), 6);
}

TEST(KMeans, SeedReproducibleAndWorkerIndependent) {
  std::mt19937_64 rng(5);
  const auto p = random_points(rng, 150, 5);
  KMeansOptions opt;
  opt.n_clusters = 7;
  opt.seed = 99;
  const auto a = kmeans(p, opt);
  const auto b = kmeans(p, opt);
  opt.workers = 4;
  const auto c = kmeans(p, opt);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.distances, b.distances);
  EXPECT_EQ(a.assignments, c.assignments);
  EXPECT_EQ(a.distances, c.distances);
  EXPECT_EQ(a.inertia, c.inertia);
}

TEST(KMeans, BestOfRestartsIsNoWorse) {
  std::mt19937_64 rng(6);
  const auto p = random_points(rng, 100, 2);
  KMeansOptions one;
  one.n_clusters = 8;
  one.n_init = 1;
  KMeansOptions ten = one;
  ten.n_init = 10;
  EXPECT_LE(kmeans(p, ten).inertia, kmeans(p, one).inertia);
}

TEST(KMeans, IdenticalPointsTerminate) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Ones(6, 2);
  KMeansOptions opt;
  opt.n_clusters = 3;
  const auto m = kmeans(p, opt);
  EXPECT_EQ(m.inertia, 0.0);
  for (int a : m.assignments) EXPECT_TRUE(a >= 0 && a < 3);
}

TEST(KMeans, Errors) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(3, 2);
  KMeansOptions opt;
  opt.n_clusters = 4;
  EXPECT_ERRC(kmeans(p, opt), Errc::invalid_argument);
  opt.n_clusters = 2;
  opt.n_init = 0;
  EXPECT_ERRC(kmeans(p, opt), Errc::invalid_argument);
  opt.n_init = 1;
  p(0, 0) = std::nan("");
  EXPECT_ERRC(kmeans(p, opt), Errc::non_finite);
}

TEST(KMeans, NormalizeRows) {
  Eigen::MatrixXd p(3, 2);
  p << 3, 4, 0, 0, -2, 0;
  const auto n = normalize_rows(p);
  EXPECT_DOUBLE_EQ(n(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(n(0, 1), 0.8);
  EXPECT_EQ(n.row(1).norm(), 0.0);
  EXPECT_DOUBLE_EQ(n(2, 0), -1.0);
}

TEST(KMeans, ClusterOnNormalizedEmbedding) {
  SpectralEmbedding e;
  e.vectors.resize(6, 2);
  e.vectors << 1, 0, 5, 0, 0.1, 0, 0, 2, 0, 0.3, 0, 9;
  KMeansOptions opt;
  opt.n_clusters = 2;
  const auto m = cluster_kmeans(e, opt);
  EXPECT_EQ(m.assignments[0], m.assignments[1]);
  EXPECT_EQ(m.assignments[0], m.assignments[2]);
  EXPECT_EQ(m.assignments[3], m.assignments[5]);
  EXPECT_NE(m.assignments[0], m.assignments[3]);
  EXPECT_NEAR(m.inertia, 0.0, 1e-24);
}

TEST(KMeans, Uniform01Range) {
  EXPECT_EQ(uniform01(0), 0.0);
  EXPECT_LT(uniform01(~std::uint64_t{0}), 1.0);
  EXPECT_EQ(uniform01(std::uint64_t{1} << 63), 0.5);
}

}  // namespace
}  // namespace unseg
