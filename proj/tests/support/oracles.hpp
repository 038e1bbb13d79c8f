#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "unseg/image.hpp"
#include "unseg/tensor.hpp"

namespace unseg::testing {

// Cyclic Jacobi rotations on a dense symmetric matrix. Eigenvalues ascending,
// eigenvectors in the matching columns.
struct JacobiResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  int sweeps = 0;
};
JacobiResult jacobi_eigen(const Eigen::MatrixXd& a, double tol = 1e-15, int max_sweeps = 100);

// Maximum of sum_i m(i, perm[i]) over all permutations (std::next_permutation).
double brute_force_max_assignment(const Eigen::MatrixXd& m, std::vector<int>* best = nullptr);

// C x K counts by a plain double loop over every pixel of every pair.
std::vector<std::vector<std::uint64_t>> naive_overlap(const std::vector<LabelMask>& preds,
                                                      const std::vector<LabelMask>& gts, int c,
                                                      int k);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// Ranks by counting (less-than plus half the ties) and a two-pass Pearson.
double rank_pearson(const std::vector<double>& x, const std::vector<double>& y);

// k isotropic Gaussian blobs with centres `separation` sigmas apart along
// distinct axes; labels are the planted blob ids.
struct Blobs {
  Eigen::MatrixXd points;
  std::vector<int> labels;
};
Blobs make_blobs(int k, int n, double separation, int dim, std::uint64_t seed);

LabelMask random_mask(std::mt19937_64& rng, int w, int h, int labels, double ignore_rate = 0.0);

// Noisy-label benchmark: dense [h, w, d] maps whose pixels carry a planted
// class (0..classes) drawn as prototype + noise, the clean masks, and copies
// with `corruption` of the pixels relabelled uniformly to a different class.
struct NoisyDataset {
  std::vector<FeatureTensor> features;
  std::vector<LabelMask> clean;
  std::vector<LabelMask> noisy;
  int classes = 0;  // foreground classes
};
NoisyDataset make_noisy_dataset(int images, int classes, int w, int h, int d, double corruption,
                                double noise, std::uint64_t seed);

}  // namespace unseg::testing
