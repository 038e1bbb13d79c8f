#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "unseg/tensor.hpp"

namespace unseg {

inline constexpr int kDefaultNeighbors = 30;

// Sparse symmetric nonnegative weights with zero diagonal. Adjacency lists
// are sorted by neighbour index.
struct AffinityGraph {
  using Edge = std::pair<std::uint32_t, double>;

  std::size_t n = 0;
  std::vector<std::vector<Edge>> adjacency;
  int k_requested = 0;
  int k_used = 0;  // < k_requested when n <= k_requested

  double weight(std::size_t i, std::size_t j) const;
  double degree(std::size_t i) const;
  std::size_t edge_count() const;  // undirected edges
  std::vector<bool> isolated() const;
  bool k_reduced() const { return k_used < k_requested; }
};

// Indices of the k nearest neighbours of every row (Euclidean, self excluded,
// ties to the lower index), each list ordered nearest first.
std::vector<std::vector<std::uint32_t>> knn_indices(const Eigen::MatrixXd& points,
                                                    int k, int workers = 1);

// Connectivity affinity: w_ij = 1 if j is among the k nearest neighbours of i
// or i among those of j. k is reduced to n - 1 when n <= k; n < 2 throws.
AffinityGraph build_knn_affinity(const Eigen::MatrixXd& points,
                                 int k = kDefaultNeighbors, int workers = 1);
AffinityGraph build_knn_affinity(const FeatureTensor& features,
                                 int k = kDefaultNeighbors, int workers = 1);

// Builds a graph from an undirected weighted edge list; duplicate edges keep
// the larger weight. Self loops and negative weights are rejected.
AffinityGraph graph_from_edges(
    std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges);

// [n, D] tensor as a double matrix.
Eigen::MatrixXd to_matrix(const FeatureTensor& features);

}  // namespace unseg
