#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cmot {

struct AssignmentResult {
  // (row, col) in indices of the full cost matrix, sorted by row.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  double total_cost = 0.0;
};

namespace detail {

// Shortest augmenting path Hungarian method on a square matrix. Leaves
// row/column potentials with a(i, j) - u[i] - v[j] >= 0 and equality on the
// matched edges.
struct SquareHungarian {
  std::vector<double> u, v;
  std::vector<std::size_t> col_of_row;  // 0-based

  explicit SquareHungarian(const Eigen::MatrixXd& a) {
    const std::size_t n = static_cast<std::size_t>(a.rows());
    const double inf = std::numeric_limits<double>::infinity();
    u.assign(n + 1, 0.0);
    v.assign(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<double> minv(n + 1);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
      p[0] = i;
      std::size_t j0 = 0;
      std::fill(minv.begin(), minv.end(), inf);
      std::fill(used.begin(), used.end(), 0);
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
    col_of_row.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
  }
};

// Among all optimal perfect matchings of the padded square problem, walks
// rows in order and moves each onto the smallest column that still admits an
// optimal completion. Optimal matchings are exactly the perfect matchings of
// the tight-edge subgraph, so every move is an alternating cycle on tight
// edges.
class LexicographicRefiner {
 public:
  LexicographicRefiner(const Eigen::MatrixXd& a, const SquareHungarian& h, std::size_t real_cols)
      : a_(a), h_(h), n_(static_cast<std::size_t>(a.rows())), real_cols_(real_cols) {
    double scale = 1.0;
    if (a.size() > 0) scale = std::max(scale, a.cwiseAbs().maxCoeff());
    tol_ = 1e-9 * scale;
    mate_row_ = h.col_of_row;
    mate_col_.assign(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) mate_col_[mate_row_[i]] = i;
    fixed_row_.assign(n_, 0);
    fixed_col_.assign(n_, 0);
  }

  std::vector<std::size_t> run(std::size_t real_rows) {
    for (std::size_t i = 0; i < real_rows; ++i) {
      const std::size_t cur = mate_row_[i];
      const std::size_t limit = cur < real_cols_ ? cur : real_cols_;
      for (std::size_t c = 0; c < limit; ++c) {
        if (fixed_col_[c] || !tight(i, c)) continue;
        if (reroute(i, c)) break;
      }
      fixed_row_[i] = 1;
      fixed_col_[mate_row_[i]] = 1;
    }
    return mate_row_;
  }

 private:
  bool tight(std::size_t i, std::size_t j) const {
    const double reduced = a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                           h_.u[i + 1] - h_.v[j + 1];
    return reduced <= tol_;
  }

  // Forces row i onto column c and repairs the matching with an alternating
  // path from the displaced row to the freed column. Restores on failure.
  bool reroute(std::size_t i, std::size_t c) {
    const std::size_t freed = mate_row_[i];
    const std::size_t displaced = mate_col_[c];

    // BFS over rows; column `freed` is the only free column once i takes c.
    std::vector<std::size_t> parent_col(n_, n_);  // column through which a row was reached
    std::vector<std::size_t> from_row(n_, n_);     // row that reached a column
    std::vector<char> seen_row(n_, 0), seen_col(n_, 0);
    std::vector<std::size_t> queue{displaced};
    seen_row[displaced] = 1;
    seen_col[c] = 1;
    seen_row[i] = 1;
    std::size_t found = n_;
    for (std::size_t head = 0; head < queue.size() && found == n_; ++head) {
      const std::size_t r = queue[head];
      for (std::size_t j = 0; j < n_; ++j) {
        if (seen_col[j] || fixed_col_[j] || !tight(r, j)) continue;
        seen_col[j] = 1;
        from_row[j] = r;
        if (j == freed) {
          found = j;
          break;
        }
        const std::size_t next = mate_col_[j];
        if (seen_row[next] || fixed_row_[next]) continue;
        seen_row[next] = 1;
        parent_col[next] = j;
        queue.push_back(next);
      }
    }
    if (found == n_) return false;

    std::size_t j = found;
    while (true) {
      const std::size_t r = from_row[j];
      const std::size_t prev = parent_col[r];
      mate_row_[r] = j;
      mate_col_[j] = r;
      if (r == displaced) break;
      j = prev;
    }
    mate_row_[i] = c;
    mate_col_[c] = i;
    return true;
  }

  const Eigen::MatrixXd& a_;
  const SquareHungarian& h_;
  std::size_t n_;
  std::size_t real_cols_;
  double tol_ = 0.0;
  std::vector<std::size_t> mate_row_, mate_col_;
  std::vector<char> fixed_row_, fixed_col_;
};

inline std::vector<std::size_t> sorted_subset(std::span<const std::size_t> subset, Eigen::Index bound,
                                              const char* what) {
  std::vector<std::size_t> out(subset.begin(), subset.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw std::invalid_argument(std::string("duplicate index in ") + what + " subset");
  }
  if (!out.empty() && out.back() >= static_cast<std::size_t>(bound)) {
    throw std::invalid_argument(std::string(what) + " index out of range");
  }
  return out;
}

inline std::vector<std::size_t> iota_indices(Eigen::Index n) {
  std::vector<std::size_t> out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

}  // namespace detail

/// Exact minimum-cost matching on the submatrix cost(rows, cols).
///
/// Always returns a maximum-cardinality matching (min(|rows|, |cols|) pairs)
/// and, among those, one of minimum total cost. Ties are broken towards the
/// lexicographically smallest pair list, so the result depends only on the
/// matrix values and never on input ordering of the subsets.
template <typename Derived>
AssignmentResult min_cost_matching(const Eigen::MatrixBase<Derived>& cost,
                                   std::span<const std::size_t> rows,
                                   std::span<const std::size_t> cols) {
  const auto row_ids = detail::sorted_subset(rows, cost.rows(), "row");
  const auto col_ids = detail::sorted_subset(cols, cost.cols(), "column");
  AssignmentResult result;
  const std::size_t n = row_ids.size();
  const std::size_t m = col_ids.size();
  if (n == 0 || m == 0) {
    result.unmatched_rows = row_ids;
    result.unmatched_cols = col_ids;
    return result;
  }

  const std::size_t k = std::max(n, m);
  Eigen::MatrixXd square = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = static_cast<double>(
          cost(static_cast<Eigen::Index>(row_ids[i]), static_cast<Eigen::Index>(col_ids[j])));
      if (!std::isfinite(c)) throw std::invalid_argument("cost matrix entry is not finite");
      square(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
    }
  }

  const detail::SquareHungarian hungarian(square);
  detail::LexicographicRefiner refiner(square, hungarian, m);
  const std::vector<std::size_t> col_of_row = refiner.run(n);

  std::vector<char> col_used(m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = col_of_row[i];
    if (j < m) {
      result.pairs.emplace_back(row_ids[i], col_ids[j]);
      result.total_cost += square(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      col_used[j] = 1;
    } else {
      result.unmatched_rows.push_back(row_ids[i]);
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!col_used[j]) result.unmatched_cols.push_back(col_ids[j]);
  }
  return result;
}

template <typename Derived>
AssignmentResult min_cost_matching(const Eigen::MatrixBase<Derived>& cost) {
  const auto rows = detail::iota_indices(cost.rows());
  const auto cols = detail::iota_indices(cost.cols());
  return min_cost_matching(cost, std::span<const std::size_t>(rows), std::span<const std::size_t>(cols));
}

}  // namespace cmot
