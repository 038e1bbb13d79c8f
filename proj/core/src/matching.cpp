#include "unseg/matching.hpp"

#include <limits>
#include <string>

#include "unseg/error.hpp"

namespace unseg {

std::string_view to_string(MatchMode mode) {
  return mode == MatchMode::hungarian ? "hungarian" : "majority";
}

MatchMode parse_match_mode(std::string_view text) {
  if (text == "hungarian") return MatchMode::hungarian;
  if (text == "majority") return MatchMode::majority;
  throw Error(Errc::invalid_argument,
              "unknown match mode '" + std::string(text) + "' (hungarian|majority)");
}

std::vector<int> linear_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw Error(Errc::invalid_argument, "assignment matrix must be square");
  if (!cost.allFinite()) throw Error(Errc::non_finite, "assignment costs must be finite");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials formulation; column 0 is a virtual start column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> row_of(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    row_of[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = row_of[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const int j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (row_of[j] > 0) assignment[row_of[j] - 1] = j - 1;
  }
  return assignment;
}

Matching hungarian_match(const OverlapTable& table) {
  const int c = table.num_classes();
  const int k = table.num_predictions();
  if (k != c) {
    throw Error(Errc::invalid_argument,
                "Hungarian matching needs as many prediction labels as classes (" +
                    std::to_string(k) + " vs " + std::to_string(c) +
                    "); use majority voting for over-clustering");
  }
  Matching m;
  m.mode = MatchMode::hungarian;
  m.map.assign(k, 0);
  const int fg = c - 1;
  if (fg == 0) return m;
  Eigen::MatrixXd cost(fg, fg);
  for (int p = 0; p < fg; ++p) {
    for (int cls = 0; cls < fg; ++cls) cost(p, cls) = -table.iou(cls + 1, p + 1);
  }
  const auto assignment = linear_assignment(cost);
  for (int p = 0; p < fg; ++p) m.map[p + 1] = assignment[p] + 1;
  return m;
}

Matching majority_vote(const OverlapTable& table) {
  Matching m;
  m.mode = MatchMode::majority;
  m.map.assign(table.num_predictions(), 0);
  for (int p = 1; p < table.num_predictions(); ++p) {
    int best = 0;
    double best_iou = -1.0;
    for (int cls = 0; cls < table.num_classes(); ++cls) {
      const double v = table.iou(cls, p);
      if (v > best_iou) {
        best_iou = v;
        best = cls;
      }
    }
    m.map[p] = best;
  }
  return m;
}

Matching match(const OverlapTable& table, MatchMode mode) {
  return mode == MatchMode::hungarian ? hungarian_match(table) : majority_vote(table);
}

double matched_iou_total(const OverlapTable& table, const Matching& matching) {
  double total = 0.0;
  for (int p = 1; p < table.num_predictions(); ++p) total += table.iou(matching.map.at(p), p);
  return total;
}

}  // namespace unseg
