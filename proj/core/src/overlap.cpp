#include "unseg/overlap.hpp"

#include <string>

#include "unseg/error.hpp"

namespace unseg {

OverlapTable::OverlapTable(int num_classes, int num_predictions)
    : classes_(num_classes),
      predictions_(num_predictions),
      counts_(static_cast<std::size_t>(num_classes) * num_predictions, 0),
      class_totals_(num_classes, 0),
      prediction_totals_(num_predictions, 0) {
  if (num_classes < 1 || num_predictions < 1 || num_classes > kMaxClasses + 1 ||
      num_predictions > kMaxClasses + 1) {
    throw Error(Errc::invalid_argument, "class and prediction counts must lie in [1, 255]");
  }
}

void OverlapTable::add(const LabelMask& prediction, const LabelMask& ground_truth) {
  if (prediction.width != ground_truth.width || prediction.height != ground_truth.height) {
    throw Error(Errc::dimension_mismatch,
                "prediction is " + std::to_string(prediction.width) + "x" +
                    std::to_string(prediction.height) + ", ground truth is " +
                    std::to_string(ground_truth.width) + "x" + std::to_string(ground_truth.height));
  }
  // Validate first so a rejected pair leaves the table untouched.
  for (std::size_t i = 0; i < ground_truth.labels.size(); ++i) {
    const int g = ground_truth.labels[i];
    if (g == kIgnoreLabel) continue;
    if (g >= classes_) {
      throw Error(Errc::label_out_of_range, "ground-truth label " + std::to_string(g) +
                                                " outside [0, " + std::to_string(classes_) + ")");
    }
    if (prediction.labels[i] >= predictions_) {
      throw Error(Errc::label_out_of_range,
                  "prediction label " + std::to_string(prediction.labels[i]) + " outside [0, " +
                      std::to_string(predictions_) + ")");
    }
  }
  for (std::size_t i = 0; i < ground_truth.labels.size(); ++i) {
    const int g = ground_truth.labels[i];
    if (g == kIgnoreLabel) continue;
    const int p = prediction.labels[i];
    ++counts_[index(g, p)];
    ++class_totals_[g];
    ++prediction_totals_[p];
  }
}

double OverlapTable::iou(int c, int k) const {
  const auto inter = intersection(c, k);
  const auto uni = class_totals_[c] + prediction_totals_[k] - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Eigen::MatrixXd OverlapTable::iou_matrix() const {
  Eigen::MatrixXd m(classes_, predictions_);
  for (int c = 0; c < classes_; ++c) {
    for (int k = 0; k < predictions_; ++k) m(c, k) = iou(c, k);
  }
  return m;
}

OverlapTable& OverlapTable::operator+=(const OverlapTable& other) {
  if (other.classes_ != classes_ || other.predictions_ != predictions_) {
    throw Error(Errc::dimension_mismatch, "cannot merge overlap tables of different shape");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  for (int c = 0; c < classes_; ++c) class_totals_[c] += other.class_totals_[c];
  for (int k = 0; k < predictions_; ++k) prediction_totals_[k] += other.prediction_totals_[k];
  return *this;
}

OverlapTable accumulate_overlaps(std::span<const LabelMask> predictions,
                                 std::span<const LabelMask> ground_truths, int num_classes,
                                 int num_predictions) {
  if (predictions.size() != ground_truths.size()) {
    throw Error(Errc::dimension_mismatch, "prediction and ground-truth lists differ in length");
  }
  OverlapTable table(num_classes, num_predictions);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    try {
      table.add(predictions[i], ground_truths[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "image " + std::to_string(i) + ": " + e.what());
    }
  }
  return table;
}

}  // namespace unseg
