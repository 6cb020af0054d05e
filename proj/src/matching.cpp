#include "vicfuse/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vicfuse/errors.hpp"

namespace vicfuse {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct DualSolution {
  std::vector<std::size_t> row_to_col;
  std::vector<double> u;
  std::vector<double> v;
};

// Shortest-augmenting-path Hungarian on a square matrix with row and column
// potentials. On return a(i,j) - u[i] - v[j] >= 0 everywhere, with equality
// on the matching.
DualSolution solve_square(const Eigen::MatrixXd& a) {
  const std::size_t n = static_cast<std::size_t>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  DualSolution sol;
  sol.row_to_col.assign(n, kNone);
  for (std::size_t j = 1; j <= n; ++j) sol.row_to_col[p[j] - 1] = j - 1;
  sol.u.assign(u.begin() + 1, u.end());
  sol.v.assign(v.begin() + 1, v.end());
  return sol;
}

// Walks rows in order and pins each to the smallest column that still admits
// a perfect matching on tight edges. Every optimum is tight against the dual,
// so the result is the lexicographically smallest optimum.
class LexRefiner {
 public:
  LexRefiner(const Eigen::MatrixXd& a, const DualSolution& dual, double tol)
      : n_(static_cast<std::size_t>(a.rows())),
        tight_(n_ * n_, 0),
        row_to_col_(dual.row_to_col),
        col_to_row_(n_, kNone),
        pinned_col_(n_, 0) {
    for (std::size_t i = 0; i < n_; ++i) {
      col_to_row_[row_to_col_[i]] = i;
      for (std::size_t j = 0; j < n_; ++j) {
        const double reduced =
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - dual.u[i] - dual.v[j];
        tight_[i * n_ + j] = reduced <= tol ? 1 : 0;
      }
    }
    // The solver's own matching must count as tight whatever the rounding.
    for (std::size_t i = 0; i < n_; ++i) tight_[i * n_ + row_to_col_[i]] = 1;
  }

  std::vector<std::size_t> refine(std::size_t real_rows) {
    for (std::size_t i = 0; i < real_rows; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (pinned_col_[j] || !tight(i, j)) continue;
        if (try_pin(i, j)) break;
      }
      pinned_col_[row_to_col_[i]] = 1;
    }
    return row_to_col_;
  }

 private:
  bool tight(std::size_t i, std::size_t j) const { return tight_[i * n_ + j] != 0; }

  bool try_pin(std::size_t i, std::size_t j) {
    const std::size_t old_col = row_to_col_[i];
    if (old_col == j) return true;
    const std::size_t displaced = col_to_row_[j];
    const auto saved_r2c = row_to_col_;
    const auto saved_c2r = col_to_row_;

    row_to_col_[i] = j;
    col_to_row_[j] = i;
    row_to_col_[displaced] = kNone;
    col_to_row_[old_col] = kNone;
    pinned_col_[j] = 1;
    std::vector<char> visited(n_, 0);
    const bool ok = augment(displaced, visited);
    pinned_col_[j] = 0;
    if (!ok) {
      row_to_col_ = saved_r2c;
      col_to_row_ = saved_c2r;
    }
    return ok;
  }

  bool augment(std::size_t row, std::vector<char>& visited) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (pinned_col_[j] || visited[j] || !tight(row, j)) continue;
      visited[j] = 1;
      const std::size_t holder = col_to_row_[j];
      if (holder == kNone || augment(holder, visited)) {
        row_to_col_[row] = j;
        col_to_row_[j] = row;
        return true;
      }
    }
    return false;
  }

  std::size_t n_;
  std::vector<char> tight_;
  std::vector<std::size_t> row_to_col_;
  std::vector<std::size_t> col_to_row_;
  std::vector<char> pinned_col_;
};

}  // namespace

CostMatrix cost_matrix(std::span<const BBox3D> a, std::span<const BBox3D> b) {
  CostMatrix m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = bev_distance(a[i], b[j]);
    }
  }
  return m;
}

Assignment hungarian(const CostMatrix& cost) {
  if (!cost.allFinite()) throw NonFiniteCost("cost matrix has NaN or infinite entries");
  const auto rows = static_cast<std::size_t>(cost.rows());
  const auto cols = static_cast<std::size_t>(cost.cols());
  Assignment out;
  if (rows == 0 || cols == 0) {
    for (std::size_t i = 0; i < rows; ++i) out.unmatched_rows.push_back(i);
    for (std::size_t j = 0; j < cols; ++j) out.unmatched_cols.push_back(j);
    return out;
  }

  const std::size_t n = std::max(rows, cols);
  const double scale = cost.cwiseAbs().maxCoeff();
  const double sentinel = 2.0 * scale + 1.0;
  Eigen::MatrixXd square = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n),
                                                     static_cast<Eigen::Index>(n), sentinel);
  square.topLeftCorner(cost.rows(), cost.cols()) = cost;

  const DualSolution dual = solve_square(square);
  const double tol = 1e-9 * (1.0 + sentinel);
  LexRefiner refiner(square, dual, tol);
  const std::vector<std::size_t> row_to_col = refiner.refine(rows);

  std::vector<char> col_used(cols, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t j = row_to_col[i];
    if (j < cols) {
      out.pairs.emplace_back(i, j);
      out.total_cost += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      col_used[j] = 1;
    } else {
      out.unmatched_rows.push_back(i);
    }
  }
  for (std::size_t j = 0; j < cols; ++j) {
    if (!col_used[j]) out.unmatched_cols.push_back(j);
  }
  return out;
}

Assignment match_with_threshold(const CostMatrix& cost, double max_dist) {
  if (!(max_dist > 0.0)) throw InvalidArgument("max_dist must be positive");
  Assignment full = hungarian(cost);
  Assignment out;
  out.unmatched_rows = full.unmatched_rows;
  out.unmatched_cols = full.unmatched_cols;
  for (const auto& [i, j] : full.pairs) {
    const double c = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    if (c > max_dist) {
      out.unmatched_rows.push_back(i);
      out.unmatched_cols.push_back(j);
    } else {
      out.pairs.emplace_back(i, j);
      out.total_cost += c;
    }
  }
  std::sort(out.unmatched_rows.begin(), out.unmatched_rows.end());
  std::sort(out.unmatched_cols.begin(), out.unmatched_cols.end());
  return out;
}

Assignment match_with_threshold(std::span<const BBox3D> a, std::span<const BBox3D> b,
                                double max_dist) {
  return match_with_threshold(cost_matrix(a, b), max_dist);
}

}  // namespace vicfuse
