#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "unseg/matching.hpp"
#include "unseg/overlap.hpp"

namespace unseg {

inline constexpr double kDiscoveredIoU = 0.20;

struct EvalOptions {
  // Average over background too (C classes) or foreground only (C - 1).
  bool include_background = true;
  double discovered_threshold = kDiscoveredIoU;  // IoU >= threshold
};

struct ClassScore {
  int class_id = 0;
  std::string name;
  std::uint64_t intersection = 0;
  std::uint64_t union_pixels = 0;
  double iou = 0.0;
  // False when the class occurs in neither ground truth nor its matched
  // predictions; such classes are left out of every mean and count.
  bool defined = false;
  std::vector<int> predictions;  // labels merged into this class
};

struct EvalReport {
  MatchMode mode = MatchMode::hungarian;
  std::vector<int> mapping;  // prediction label -> class
  std::vector<ClassScore> classes;
  int evaluated = 0;  // classes entering the means
  double miou = 0.0;
  int discovered = 0;
  int has_cluster = 0;  // IoU > 0
  double miou_discovered = 0.0;
  double miou_has_cluster = 0.0;
};

// Applies the matching (merging predictions that share a class) and derives
// per-class IoU and summary statistics.
EvalReport make_report(const OverlapTable& table, const Matching& matching,
                       const std::vector<std::string>& class_names = {},
                       const EvalOptions& options = {});

nlohmann::json report_json(const EvalReport& report);
// Two aligned rows (class names, IoU x 100) followed by the summary lines.
std::string report_text(const EvalReport& report);

}  // namespace unseg
