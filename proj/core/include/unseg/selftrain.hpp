#pragma once

#include <map>
#include <string>
#include <vector>

#include "unseg/head.hpp"
#include "unseg/image.hpp"
#include "unseg/tensor.hpp"

namespace unseg {

// Dense [H', W', D] features of one image plus the image resolution that
// masks are expressed in.
struct DenseSample {
  std::string image_id;
  FeatureTensor features;
  int width = 0;
  int height = 0;
};

using MaskSet = std::map<std::string, LabelMask>;

struct RoundResult {
  TrainResult teacher;
  // One mask per image of train followed by extend (ids already in train are
  // not repeated), at image resolution.
  std::vector<std::pair<std::string, LabelMask>> masks;
};

// One teacher/student step: trains a fresh head on the train images that
// have a pseudo-mask (masks are downsampled to feature resolution by nearest
// neighbour), then predicts new masks for train and extend.
RoundResult self_train_round(const std::vector<DenseSample>& train, const MaskSet& pseudo_masks,
                             const std::vector<DenseSample>& extend, int num_classes,
                             const TrainConfig& config);

// Iterated rounds: the first trains on `pseudo_masks` over `train`, each later
// round trains from scratch on the previous round's masks over train and
// extend. configs[i] drives round i.
std::vector<RoundResult> self_train(const std::vector<DenseSample>& train,
                                    const MaskSet& pseudo_masks,
                                    const std::vector<DenseSample>& extend, int num_classes,
                                    const std::vector<TrainConfig>& configs);

// Fraction of non-ignore pixels of `truth` that `mask` labels identically.
double pixel_accuracy(const LabelMask& mask, const LabelMask& truth);

}  // namespace unseg
