#include "unseg/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "unseg/error.hpp"
#include "unseg/parallel.hpp"

namespace unseg {
namespace {

using Index = Eigen::Index;

double squared_distance(const Eigen::MatrixXd& a, Index i, const Eigen::MatrixXd& b, Index j) {
  double s = 0.0;
  for (Index c = 0; c < a.cols(); ++c) {
    const double diff = a(i, c) - b(j, c);
    s += diff * diff;
  }
  return s;
}

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
  const Index n = points.rows();
  Eigen::MatrixXd centroids(k, points.cols());
  std::vector<double> closest(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);

  auto take = [&](Index idx, int slot) {
    centroids.row(slot) = points.row(idx);
    chosen[idx] = true;
    for (Index i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], squared_distance(points, i, centroids, slot));
    }
  };

  take(static_cast<Index>(uniform01(rng()) * static_cast<double>(n)), 0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += closest[i];
    Index pick = -1;
    if (total > 0.0) {
      const double target = uniform01(rng()) * total;
      double cum = 0.0;
      for (Index i = 0; i < n; ++i) {
        cum += closest[i];
        if (cum > target && closest[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (Index i = n - 1; i >= 0; --i) {
          if (closest[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every remaining point coincides with a centroid.
      for (Index i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    take(pick, c);
  }
  return centroids;
}

// Assigns each point to its nearest centroid (ties to the lower id) and
// returns the inertia, summed in point order.
double assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
              std::vector<int>& labels, std::vector<double>& sq_dist, int workers) {
  const Index n = points.rows();
  const Index k = centroids.rows();
  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t ii) {
    const auto i = static_cast<Index>(ii);
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (Index c = 0; c < k; ++c) {
      const double d = squared_distance(points, i, centroids, c);
      if (d < best) {
        best = d;
        best_c = static_cast<int>(c);
      }
    }
    labels[ii] = best_c;
    sq_dist[ii] = best;
  });
  double inertia = 0.0;
  for (double d : sq_dist) inertia += d;
  return inertia;
}

ClusterModel lloyd(const Eigen::MatrixXd& points, const KMeansOptions& opt, std::mt19937_64& rng) {
  const Index n = points.rows();
  const int k = opt.n_clusters;
  ClusterModel model;
  Eigen::MatrixXd centroids = seed_plus_plus(points, k, rng);
  std::vector<int> labels(n);
  std::vector<double> sq(n);

  for (int it = 0; it < opt.max_iter; ++it) {
    model.inertia_trace.push_back(assign(points, centroids, labels, sq, opt.workers));
    model.iterations = it + 1;

    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Index> counts(k, 0);
    for (Index i = 0; i < n; ++i) {
      next.row(labels[i]) += points.row(i);
      ++counts[labels[i]];
    }
    std::vector<double> far = sq;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        next.row(c) /= static_cast<double>(counts[c]);
        continue;
      }
      Index farthest = 0;
      for (Index i = 1; i < n; ++i) {
        if (far[i] > far[farthest]) farthest = i;
      }
      next.row(c) = points.row(farthest);
      far[farthest] = -1.0;
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) shift = std::max(shift, (next.row(c) - centroids.row(c)).norm());
    centroids = std::move(next);
    if (shift < opt.tol) break;
  }

  model.inertia = assign(points, centroids, labels, sq, opt.workers);
  model.assignments = std::move(labels);
  model.distances.resize(n);
  for (Index i = 0; i < n; ++i) model.distances[i] = std::sqrt(sq[i]);
  model.centroids = std::move(centroids);
  return model;
}

}  // namespace

double uniform01(std::uint64_t draw) {
  return static_cast<double>(draw >> 11) * 0x1.0p-53;
}

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0.0) out.row(i) /= norm;
  }
  return out;
}

ClusterModel kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options) {
  const Index n = points.rows();
  if (options.n_clusters < 1 || options.n_clusters > n) {
    throw Error(Errc::invalid_argument, "number of clusters must lie in [1, n]; got " +
                                            std::to_string(options.n_clusters) + " for " +
                                            std::to_string(n) + " points");
  }
  if (options.n_init < 1 || options.max_iter < 1) {
    throw Error(Errc::invalid_argument, "n_init and max_iter must be >= 1");
  }
  if (!points.allFinite()) throw Error(Errc::non_finite, "k-means input must be finite");

  std::vector<ClusterModel> runs(options.n_init);
  KMeansOptions inner = options;
  const int run_workers = std::min(options.workers, options.n_init);
  inner.workers = std::max(1, options.workers / std::max(1, run_workers));
  parallel_for(static_cast<std::size_t>(options.n_init), run_workers, [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                      static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    runs[r] = lloyd(points, inner, rng);
    runs[r].best_run = static_cast<int>(r);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].inertia < runs[best].inertia) best = r;
  }
  return std::move(runs[best]);
}

ClusterModel cluster_kmeans(const SpectralEmbedding& embedding, const KMeansOptions& options) {
  return kmeans(normalize_rows(embedding.vectors), options);
}

}  // namespace unseg
