#pragma once

#include <span>
#include <vector>

namespace unseg {

// 1-based ranks; tied values share the average of their positions.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman rank correlation with average-rank ties. Needs >= 3 pairs and
// non-constant inputs.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace unseg
