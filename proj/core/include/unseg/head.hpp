#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "unseg/image.hpp"
#include "unseg/tensor.hpp"

namespace unseg {

enum class Optimizer { adam, sgd };

struct TrainConfig {
  double learning_rate = 6e-5;
  int batch_images = 56;
  int epochs = 10;
  std::uint64_t seed = 0;
  std::uint8_t ignore_label = kIgnoreLabel;
  Optimizer optimizer = Optimizer::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Area fraction range for random sub-window sampling of each feature map.
  // [1, 1] trains on whole maps.
  double crop_scale_min = 1.0;
  double crop_scale_max = 1.0;
  int workers = 1;

  void validate() const;
};

// Linear per-pixel classifier: logits = W f + b over C foreground classes
// plus background (row 0).
struct HeadModel {
  int num_classes = 0;  // C
  int dim = 0;          // D
  Eigen::MatrixXd weights;  // (C + 1) x D
  Eigen::VectorXd bias;     // C + 1

  static HeadModel zeros(int num_classes, int dim);
  int predict(std::span<const float> feature) const;
};

struct LossGradient {
  double loss = 0.0;  // mean cross-entropy over the counted pixels
  Eigen::MatrixXd grad_weights;
  Eigen::VectorXd grad_bias;
  std::size_t pixels = 0;
};

// Mean softmax cross-entropy and its gradient over rows of `features`
// (P x D) with integer targets in [0, C].
LossGradient loss_and_gradient(const HeadModel& model, const Eigen::MatrixXd& features,
                               std::span<const int> targets);

struct TrainResult {
  HeadModel model;
  std::vector<double> epoch_loss;  // pixel-weighted mean of pre-update batch losses
  std::vector<double> step_loss;
};

// Trains a zero-initialized head. masks[i] must match the spatial size of
// features[i] ([H, W, D]); ignore-labelled pixels do not contribute. Batches
// hold batch_images whole (or sub-windowed) maps from a seeded shuffle.
TrainResult train_head(std::span<const FeatureTensor> features, std::span<const LabelMask> masks,
                       int num_classes, const TrainConfig& config);

// Argmax per feature pixel (ties to the lowest class), upsampled to
// width x height by nearest neighbour.
LabelMask predict_mask(const HeadModel& model, const FeatureTensor& features, int width,
                       int height);

void save_head(const HeadModel& model, const std::filesystem::path& dir);
HeadModel load_head(const std::filesystem::path& dir);

}  // namespace unseg
