#include "unseg/selftrain.hpp"

#include <set>

#include "unseg/error.hpp"
#include "unseg/parallel.hpp"

namespace unseg {

RoundResult self_train_round(const std::vector<DenseSample>& train, const MaskSet& pseudo_masks,
                             const std::vector<DenseSample>& extend, int num_classes,
                             const TrainConfig& config) {
  std::vector<FeatureTensor> feats;
  std::vector<LabelMask> masks;
  for (const auto& s : train) {
    auto it = pseudo_masks.find(s.image_id);
    if (it == pseudo_masks.end()) continue;
    if (s.features.ndim() != 3) {
      throw Error(Errc::dimension_mismatch, s.image_id + ": dense features must be [H, W, D]");
    }
    const auto& m = it->second;
    if (m.width != s.width || m.height != s.height) {
      throw Error(Errc::dimension_mismatch,
                  s.image_id + ": pseudo-mask size differs from the image size");
    }
    feats.push_back(s.features);
    masks.push_back(resize_nearest(m, static_cast<int>(s.features.dim(1)),
                                   static_cast<int>(s.features.dim(0))));
  }
  if (feats.empty()) {
    throw Error(Errc::invalid_argument, "no train image has a pseudo-mask");
  }

  RoundResult result;
  result.teacher = train_head(feats, masks, num_classes, config);

  std::vector<const DenseSample*> targets;
  std::set<std::string> seen;
  for (const auto* set : {&train, &extend}) {
    for (const auto& s : *set) {
      if (seen.insert(s.image_id).second) targets.push_back(&s);
    }
  }
  result.masks.resize(targets.size());
  parallel_for(targets.size(), config.workers, [&](std::size_t i) {
    const auto& s = *targets[i];
    result.masks[i] = {s.image_id, predict_mask(result.teacher.model, s.features, s.width,
                                                s.height)};
  });
  return result;
}

std::vector<RoundResult> self_train(const std::vector<DenseSample>& train,
                                    const MaskSet& pseudo_masks,
                                    const std::vector<DenseSample>& extend, int num_classes,
                                    const std::vector<TrainConfig>& configs) {
  if (configs.empty()) throw Error(Errc::invalid_argument, "at least one round is required");
  std::vector<RoundResult> rounds;
  rounds.push_back(self_train_round(train, pseudo_masks, extend, num_classes, configs[0]));
  if (configs.size() == 1) return rounds;

  std::vector<DenseSample> all = train;
  std::set<std::string> ids;
  for (const auto& s : train) ids.insert(s.image_id);
  for (const auto& s : extend) {
    if (ids.insert(s.image_id).second) all.push_back(s);
  }
  for (std::size_t r = 1; r < configs.size(); ++r) {
    MaskSet current(rounds.back().masks.begin(), rounds.back().masks.end());
    rounds.push_back(self_train_round(all, current, {}, num_classes, configs[r]));
  }
  return rounds;
}

double pixel_accuracy(const LabelMask& mask, const LabelMask& truth) {
  if (mask.width != truth.width || mask.height != truth.height) {
    throw Error(Errc::dimension_mismatch, "mask sizes differ");
  }
  std::size_t hit = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    if (truth.labels[i] == kIgnoreLabel) continue;
    ++total;
    hit += mask.labels[i] == truth.labels[i];
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

}  // namespace unseg
