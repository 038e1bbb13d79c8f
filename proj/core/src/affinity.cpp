#include "unseg/affinity.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <tuple>

#include "unseg/error.hpp"
#include "unseg/parallel.hpp"

namespace unseg {

double AffinityGraph::weight(std::size_t i, std::size_t j) const {
  const auto& row = adjacency.at(i);
  auto it = std::lower_bound(row.begin(), row.end(), static_cast<std::uint32_t>(j),
                             [](const Edge& e, std::uint32_t v) { return e.first < v; });
  return it != row.end() && it->first == j ? it->second : 0.0;
}

double AffinityGraph::degree(std::size_t i) const {
  double d = 0.0;
  for (const auto& e : adjacency.at(i)) d += e.second;
  return d;
}

std::size_t AffinityGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& row : adjacency) total += row.size();
  return total / 2;
}

std::vector<bool> AffinityGraph::isolated() const {
  std::vector<bool> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = degree(i) <= 0.0;
  return out;
}

Eigen::MatrixXd to_matrix(const FeatureTensor& features) {
  if (features.ndim() != 2) {
    throw Error(Errc::dimension_mismatch, "expected an [n, D] feature tensor");
  }
  const auto n = static_cast<Eigen::Index>(features.dim(0));
  const auto d = static_cast<Eigen::Index>(features.dim(1));
  Eigen::MatrixXd m(n, d);
  const auto data = features.data();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = data[i * d + j];
  }
  return m;
}

std::vector<std::vector<std::uint32_t>> knn_indices(const Eigen::MatrixXd& points,
                                                    int k, int workers) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k < 1 || static_cast<std::size_t>(k) >= n) {
    throw Error(Errc::invalid_argument, "k must lie in [1, n - 1]");
  }
  if (!points.allFinite()) throw Error(Errc::non_finite, "feature rows must be finite");
  std::vector<std::vector<std::uint32_t>> out(n);
  parallel_for(n, workers, [&](std::size_t i) {
    std::vector<std::pair<double, std::uint32_t>> dist;
    dist.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist.emplace_back((points.row(i) - points.row(j)).squaredNorm(),
                        static_cast<std::uint32_t>(j));
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    out[i].reserve(k);
    for (int t = 0; t < k; ++t) out[i].push_back(dist[t].second);
  });
  return out;
}

AffinityGraph build_knn_affinity(const Eigen::MatrixXd& points, int k, int workers) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2) throw Error(Errc::invalid_argument, "need at least 2 points for a k-NN graph");
  if (k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
  AffinityGraph g;
  g.n = n;
  g.k_requested = k;
  g.k_used = static_cast<std::size_t>(k) >= n ? static_cast<int>(n - 1) : k;

  const auto nn = knn_indices(points, g.k_used, workers);
  g.adjacency.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : nn[i]) {
      g.adjacency[i].emplace_back(j, 1.0);
      g.adjacency[j].emplace_back(static_cast<std::uint32_t>(i), 1.0);
    }
  }
  for (auto& row : g.adjacency) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              row.end());
  }
  return g;
}

AffinityGraph build_knn_affinity(const FeatureTensor& features, int k, int workers) {
  return build_knn_affinity(to_matrix(features), k, workers);
}

AffinityGraph graph_from_edges(
    std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges) {
  AffinityGraph g;
  g.n = n;
  g.adjacency.assign(n, {});
  for (const auto& [i, j, w] : edges) {
    if (i >= n || j >= n) throw Error(Errc::invalid_argument, "edge endpoint out of range");
    if (i == j) throw Error(Errc::invalid_argument, "self loops are not allowed");
    if (!(w >= 0.0)) throw Error(Errc::invalid_argument, "edge weights must be nonnegative");
    if (w == 0.0) continue;
    g.adjacency[i].emplace_back(static_cast<std::uint32_t>(j), w);
    g.adjacency[j].emplace_back(static_cast<std::uint32_t>(i), w);
  }
  for (auto& row : g.adjacency) {
    // Sort by neighbour, heaviest first, then keep the first of each run.
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second > b.second;
    });
    row.erase(std::unique(row.begin(), row.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              row.end());
  }
  return g;
}

}  // namespace unseg
