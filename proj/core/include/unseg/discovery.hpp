#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "unseg/affinity.hpp"
#include "unseg/image.hpp"
#include "unseg/kmeans.hpp"
#include "unseg/proposals.hpp"
#include "unseg/spectral.hpp"

namespace unseg {

inline constexpr double kDefaultFilterFraction = 0.2;

struct ClusterFilterStats {
  int cluster_id = 0;
  std::size_t size = 0;
  std::size_t kept = 0;
  std::vector<std::size_t> dropped;  // proposal indices, largest distance first
  double mean_distance = 0.0;        // over all members before filtering
  bool emptied = false;              // non-empty cluster with nothing kept
};

struct FilterResult {
  std::vector<bool> keep;                 // per proposal
  std::vector<std::size_t> kept_indices;  // ascending
  std::vector<ClusterFilterStats> clusters;
};

// ceil(p * n), tolerant of the representation error in p (0.3 * 10 is 3).
std::size_t drop_count(std::size_t n, double p);

// Drops the drop_count(n_c, p) members of every cluster with the largest
// centroid distance; equal distances drop the higher index first.
FilterResult filter_uncertain(const ClusterModel& model, double p = kDefaultFilterFraction);

struct PseudoMask {
  std::string image_id;
  int cluster_id = 0;
  LabelMask mask;  // cluster_id + 1 inside the proposal, 0 elsewhere
};

// One mask per kept proposal, in proposal order.
std::vector<PseudoMask> synthesize_pseudo_masks(const std::vector<ProposalRecord>& proposals,
                                                const std::vector<int>& assignments,
                                                const std::vector<bool>& keep);

struct DiscoveryOptions {
  int k_neighbors = kDefaultNeighbors;
  int n_components = kDefaultClusters;
  KMeansOptions kmeans;
  double filter_fraction = kDefaultFilterFraction;
  SpectralOptions spectral;
};

struct DiscoveryResult {
  AffinityGraph graph;
  SpectralEmbedding embedding;
  ClusterModel model;
  FilterResult filter;
  std::vector<PseudoMask> pseudo_masks;
};

// k-NN affinity -> spectral embedding -> k-means -> filtering -> pseudo-masks.
// `features` row i belongs to proposals[i].
DiscoveryResult discover_categories(const std::vector<ProposalRecord>& proposals,
                                    const Eigen::MatrixXd& features,
                                    const DiscoveryOptions& options);

// [{cluster_id, size, kept, dropped_ids, mean_distance, emptied}, ...]
nlohmann::json cluster_report_json(const FilterResult& filter,
                                   const std::vector<std::string>& ids);

}  // namespace unseg
