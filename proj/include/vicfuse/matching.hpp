#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vicfuse/geometry.hpp"

namespace vicfuse {

using CostMatrix = Eigen::MatrixXd;

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), sorted by row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  double total_cost = 0.0;
};

// Entry (i, j) is the BEV center distance between a[i] and b[j].
CostMatrix cost_matrix(std::span<const BBox3D> a, std::span<const BBox3D> b);

// Minimum-cost matching of size min(rows, cols). Among equal-cost optima the
// lexicographically smallest pair list is returned. Throws NonFiniteCost.
Assignment hungarian(const CostMatrix& cost);

// hungarian() followed by moving every pair with cost > max_dist into the
// unmatched sets. total_cost sums the surviving pairs only.
Assignment match_with_threshold(const CostMatrix& cost, double max_dist);
Assignment match_with_threshold(std::span<const BBox3D> a, std::span<const BBox3D> b,
                                double max_dist);

}  // namespace vicfuse
