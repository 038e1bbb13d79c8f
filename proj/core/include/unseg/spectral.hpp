#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "unseg/affinity.hpp"

namespace unseg {

struct SpectralOptions {
  // Connected components up to this size use a dense symmetric eigensolver;
  // larger ones use Lanczos with full reorthogonalization and locking.
  std::size_t dense_limit = 4096;
  double tolerance = 1e-10;
  int max_restarts = 200;
  std::uint64_t seed = 0;
};

// Eigenvectors of L_sym = I - D^-1/2 W D^-1/2 for the d smallest eigenvalues.
// Columns are orthonormal and sign-normalized (first nonzero entry positive).
// Isolated nodes get zero rows.
struct SpectralEmbedding {
  Eigen::MatrixXd vectors;      // n x d
  Eigen::VectorXd eigenvalues;  // ascending
  std::vector<bool> isolated;
  std::size_t components = 0;  // connected components among non-isolated nodes
};

SpectralEmbedding spectral_embed(const AffinityGraph& graph, int d,
                                 const SpectralOptions& options = {});

// Dense L_sym; isolated nodes get a zero row and column.
Eigen::MatrixXd normalized_laplacian(const AffinityGraph& graph);

// Component id per node (isolated nodes get their own id), numbered in order
// of first appearance.
std::vector<int> connected_components(const AffinityGraph& graph, int* count = nullptr);

// Flips each column so its first entry with |v| > 1e-12 is positive.
void normalize_signs(Eigen::MatrixXd& vectors);

}  // namespace unseg
