#include "unseg/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>

#include "unseg/error.hpp"

namespace unseg {

std::size_t drop_count(std::size_t n, double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw Error(Errc::invalid_argument, "filter fraction must lie in [0, 1)");
  }
  const double x = p * static_cast<double>(n);
  const double snapped = std::nearbyint(x);
  if (std::abs(x - snapped) <= 1e-9 * std::max(1.0, x)) return static_cast<std::size_t>(snapped);
  return static_cast<std::size_t>(std::ceil(x));
}

FilterResult filter_uncertain(const ClusterModel& model, double p) {
  const std::size_t n = model.assignments.size();
  const int k = model.centroids.rows() > 0
                    ? static_cast<int>(model.centroids.rows())
                    : (n ? *std::max_element(model.assignments.begin(), model.assignments.end()) + 1
                         : 0);
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) members.at(model.assignments[i]).push_back(i);

  FilterResult out;
  out.keep.assign(n, true);
  for (int c = 0; c < k; ++c) {
    auto& m = members[c];
    ClusterFilterStats stats;
    stats.cluster_id = c;
    stats.size = m.size();
    double sum = 0.0;
    for (auto i : m) sum += model.distances[i];
    stats.mean_distance = m.empty() ? 0.0 : sum / static_cast<double>(m.size());

    std::sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) {
      if (model.distances[a] != model.distances[b]) {
        return model.distances[a] > model.distances[b];
      }
      return a > b;
    });
    const std::size_t drop = drop_count(m.size(), p);
    for (std::size_t t = 0; t < drop; ++t) {
      out.keep[m[t]] = false;
      stats.dropped.push_back(m[t]);
    }
    stats.kept = m.size() - drop;
    stats.emptied = !m.empty() && stats.kept == 0;
    out.clusters.push_back(std::move(stats));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.keep[i]) out.kept_indices.push_back(i);
  }
  return out;
}

std::vector<PseudoMask> synthesize_pseudo_masks(const std::vector<ProposalRecord>& proposals,
                                                const std::vector<int>& assignments,
                                                const std::vector<bool>& keep) {
  if (assignments.size() != proposals.size() || keep.size() != proposals.size()) {
    throw Error(Errc::dimension_mismatch, "assignments and keep flags must cover every proposal");
  }
  std::vector<PseudoMask> out;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (!keep[i]) continue;
    const int t = assignments[i];
    if (t < 0 || t + 1 > kMaxClasses) {
      throw Error(Errc::label_out_of_range, "cluster id " + std::to_string(t) +
                                                " does not fit an 8-bit label");
    }
    const auto& src = proposals[i].binary_mask;
    PseudoMask pm;
    pm.image_id = proposals[i].image_id;
    pm.cluster_id = t;
    pm.mask = LabelMask(src.width, src.height);
    for (std::size_t p = 0; p < src.labels.size(); ++p) {
      if (src.labels[p] != 0) pm.mask.labels[p] = static_cast<std::uint8_t>(t + 1);
    }
    out.push_back(std::move(pm));
  }
  return out;
}

DiscoveryResult discover_categories(const std::vector<ProposalRecord>& proposals,
                                    const Eigen::MatrixXd& features,
                                    const DiscoveryOptions& options) {
  if (static_cast<std::size_t>(features.rows()) != proposals.size()) {
    throw Error(Errc::dimension_mismatch, "one feature row per proposal is required");
  }
  DiscoveryResult r;
  r.graph = build_knn_affinity(features, options.k_neighbors, options.kmeans.workers);
  r.embedding = spectral_embed(r.graph, options.n_components, options.spectral);
  r.model = cluster_kmeans(r.embedding, options.kmeans);
  r.filter = filter_uncertain(r.model, options.filter_fraction);
  r.pseudo_masks = synthesize_pseudo_masks(proposals, r.model.assignments, r.filter.keep);
  return r;
}

nlohmann::json cluster_report_json(const FilterResult& filter,
                                   const std::vector<std::string>& ids) {
  auto out = nlohmann::json::array();
  for (const auto& c : filter.clusters) {
    auto dropped = nlohmann::json::array();
    for (auto i : c.dropped) dropped.push_back(ids.at(i));
    out.push_back({{"cluster_id", c.cluster_id},
                   {"size", c.size},
                   {"kept", c.kept},
                   {"dropped_ids", dropped},
                   {"mean_distance", c.mean_distance},
                   {"emptied", c.emptied}});
  }
  return out;
}

}  // namespace unseg
