#include "unseg/report.hpp"

#include <algorithm>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "unseg/error.hpp"

namespace unseg {

EvalReport make_report(const OverlapTable& table, const Matching& matching,
                       const std::vector<std::string>& class_names, const EvalOptions& options) {
  const int c_count = table.num_classes();
  const int k_count = table.num_predictions();
  if (static_cast<int>(matching.map.size()) != k_count) {
    throw Error(Errc::dimension_mismatch, "matching does not cover every prediction label");
  }
  EvalReport r;
  r.mode = matching.mode;
  r.mapping = matching.map;
  std::vector<std::uint64_t> merged_inter(c_count, 0), merged_pred(c_count, 0);
  std::vector<std::vector<int>> merged_from(c_count);
  for (int k = 0; k < k_count; ++k) {
    const int cls = matching.map[k];
    if (cls < 0 || cls >= c_count) {
      throw Error(Errc::label_out_of_range, "matching maps to an unknown class");
    }
    merged_inter[cls] += table.intersection(cls, k);
    merged_pred[cls] += table.prediction_total(k);
    merged_from[cls].push_back(k);
  }

  double sum = 0.0, sum_disc = 0.0, sum_has = 0.0;
  for (int c = 0; c < c_count; ++c) {
    ClassScore s;
    s.class_id = c;
    s.name = c < static_cast<int>(class_names.size()) ? class_names[c] : "class" + std::to_string(c);
    s.intersection = merged_inter[c];
    s.union_pixels = table.class_total(c) + merged_pred[c] - merged_inter[c];
    s.defined = s.union_pixels > 0;
    s.iou = s.defined ? static_cast<double>(s.intersection) / static_cast<double>(s.union_pixels)
                      : 0.0;
    s.predictions = merged_from[c];
    const bool counted = s.defined && (options.include_background || c != 0);
    if (counted) {
      ++r.evaluated;
      sum += s.iou;
      if (s.iou >= options.discovered_threshold) {
        ++r.discovered;
        sum_disc += s.iou;
      }
      if (s.iou > 0.0) {
        ++r.has_cluster;
        sum_has += s.iou;
      }
    }
    r.classes.push_back(std::move(s));
  }
  r.miou = r.evaluated ? sum / r.evaluated : 0.0;
  r.miou_discovered = r.discovered ? sum_disc / r.discovered : 0.0;
  r.miou_has_cluster = r.has_cluster ? sum_has / r.has_cluster : 0.0;
  return r;
}

nlohmann::json report_json(const EvalReport& r) {
  auto classes = nlohmann::json::array();
  for (const auto& s : r.classes) {
    classes.push_back({{"class_id", s.class_id},
                       {"name", s.name},
                       {"iou", s.iou},
                       {"intersection", s.intersection},
                       {"union", s.union_pixels},
                       {"defined", s.defined},
                       {"predictions", s.predictions}});
  }
  return {{"mode", std::string(to_string(r.mode))},
          {"mapping", r.mapping},
          {"classes", classes},
          {"evaluated_classes", r.evaluated},
          {"miou", r.miou},
          {"discovered", r.discovered},
          {"has_cluster", r.has_cluster},
          {"miou_discovered", r.miou_discovered},
          {"miou_has_cluster", r.miou_has_cluster}};
}

std::string report_text(const EvalReport& r) {
  std::vector<std::string> head, vals;
  for (const auto& s : r.classes) {
    head.push_back(s.name);
    char buf[32];
    if (s.defined) {
      std::snprintf(buf, sizeof buf, "%.1f", 100.0 * s.iou);
    } else {
      std::snprintf(buf, sizeof buf, "-");
    }
    vals.emplace_back(buf);
  }
  std::ostringstream out;
  auto row = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto width = std::max(head[i].size(), vals[i].size());
      if (i) out << "  ";
      out << std::string(width - cells[i].size(), ' ') << cells[i];
    }
    out << '\n';
  };
  row(head);
  row(vals);
  char line[160];
  std::snprintf(line, sizeof line,
                "mode %s | mIoU %.1f over %d classes | discovered (IoU>=20%%) %d, mIoU %.1f | "
                "with cluster (IoU>0) %d, mIoU %.1f\n",
                std::string(to_string(r.mode)).c_str(), 100.0 * r.miou, r.evaluated, r.discovered,
                100.0 * r.miou_discovered, r.has_cluster, 100.0 * r.miou_has_cluster);
  out << line;
  return out.str();
}

}  // namespace unseg
