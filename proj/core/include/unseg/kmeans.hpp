#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "unseg/spectral.hpp"

namespace unseg {

inline constexpr int kDefaultClusters = 20;

struct KMeansOptions {
  int n_clusters = kDefaultClusters;
  int n_init = 10;
  int max_iter = 300;
  double tol = 1e-6;  // stop when no centroid moves further than this
  std::uint64_t seed = 0;
  int workers = 1;
};

struct ClusterModel {
  std::vector<int> assignments;      // cluster id per point
  Eigen::MatrixXd centroids;         // K x d
  std::vector<double> distances;     // Euclidean distance to own centroid
  double inertia = 0.0;              // sum of squared distances
  int iterations = 0;
  int best_run = 0;
  std::vector<double> inertia_trace; // per Lloyd iteration, best run
};

// Best-inertia result of n_init k-means++ seeded Lloyd runs. Run r draws from
// mt19937_64 seeded with seed_seq{seed_lo, seed_hi, r}, so results depend only
// on the seed. A cluster left empty by an update is re-seeded at the point
// farthest from its centroid.
ClusterModel kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options);

// k-means on the row-normalized embedding.
ClusterModel cluster_kmeans(const SpectralEmbedding& embedding, const KMeansOptions& options);

// Rows scaled to unit length; zero rows stay zero.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& m);

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
double uniform01(std::uint64_t draw);

}  // namespace unseg
