#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "unseg/image.hpp"

namespace unseg {

// Dataset-level pixel counts between C ground-truth classes (rows, background
// included) and K prediction labels (columns, background included). Pixels
// whose ground truth is the ignore label are never counted.
class OverlapTable {
 public:
  OverlapTable() = default;
  OverlapTable(int num_classes, int num_predictions);

  // Throws Errc::dimension_mismatch for differing sizes and
  // Errc::label_out_of_range for gt >= C (other than ignore) or pred >= K.
  void add(const LabelMask& prediction, const LabelMask& ground_truth);

  int num_classes() const { return classes_; }
  int num_predictions() const { return predictions_; }
  std::uint64_t intersection(int c, int k) const { return counts_[index(c, k)]; }
  std::uint64_t class_total(int c) const { return class_totals_[c]; }
  std::uint64_t prediction_total(int k) const { return prediction_totals_[k]; }

  double iou(int c, int k) const;
  Eigen::MatrixXd iou_matrix() const;  // C x K

  OverlapTable& operator+=(const OverlapTable& other);
  friend bool operator==(const OverlapTable&, const OverlapTable&) = default;

 private:
  std::size_t index(int c, int k) const { return static_cast<std::size_t>(c) * predictions_ + k; }

  int classes_ = 0;
  int predictions_ = 0;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> class_totals_;
  std::vector<std::uint64_t> prediction_totals_;
};

OverlapTable accumulate_overlaps(std::span<const LabelMask> predictions,
                                 std::span<const LabelMask> ground_truths, int num_classes,
                                 int num_predictions);

}  // namespace unseg
