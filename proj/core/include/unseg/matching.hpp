#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "unseg/overlap.hpp"

namespace unseg {

enum class MatchMode { hungarian, majority };

std::string_view to_string(MatchMode mode);
MatchMode parse_match_mode(std::string_view text);

// Prediction label -> ground-truth class. Background is pinned: map[0] == 0.
struct Matching {
  MatchMode mode = MatchMode::hungarian;
  std::vector<int> map;
};

// Minimum-cost perfect assignment on a square matrix (Kuhn-Munkres with
// potentials, O(n^3)). Returns the column assigned to every row.
std::vector<int> linear_assignment(const Eigen::MatrixXd& cost);

// One-to-one matching of foreground predictions to foreground classes that
// maximizes total IoU. Requires K == C; otherwise throws
// Errc::invalid_argument pointing at majority voting.
Matching hungarian_match(const OverlapTable& table);

// Each foreground prediction goes to the class (background included) it has
// the highest IoU with; ties to the lowest class index.
Matching majority_vote(const OverlapTable& table);

Matching match(const OverlapTable& table, MatchMode mode);

// Sum over foreground predictions of IoU(map[k], k) on the unmerged table.
double matched_iou_total(const OverlapTable& table, const Matching& matching);

}  // namespace unseg
