#include <cmath>
#include <limits>
#include <stdexcept>

#include "motlab/assoc.hpp"

namespace motlab {

// Classic O(n^3) potentials algorithm for min-cost perfect matching on a
// square matrix.
std::vector<int> hungarian_min_cost(const std::vector<double>& cost, int n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
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
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> match(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) match[p[j] - 1] = j - 1;
  return match;
}

Assignment solve_assignment(const ScoreMatrix& m, double threshold) {
  for (double x : m.s)
    if (!std::isfinite(x)) throw std::invalid_argument("score matrix: non-finite entry");

  Assignment out;
  const int n = std::max(m.rows, m.cols);
  std::vector<char> row_matched(m.rows, 0), col_matched(m.cols, 0);
  if (n > 0 && m.rows > 0 && m.cols > 0) {
    // Maximum-sum partial matching equals perfect matching on the square
    // matrix padded with zeros where negative scores are floored at zero;
    // pairs contributing nothing are dropped afterwards.
    std::vector<double> cost(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < m.rows; ++i)
      for (int j = 0; j < m.cols; ++j)
        cost[static_cast<std::size_t>(i) * n + j] = -std::max(m.at(i, j), 0.0);
    const auto match = hungarian_min_cost(cost, n);
    for (int i = 0; i < m.rows; ++i) {
      const int j = match[i];
      if (j >= 0 && j < m.cols && m.at(i, j) > 0.0 && m.at(i, j) >= threshold) {
        out.matches.emplace_back(i, j);
        row_matched[i] = 1;
        col_matched[j] = 1;
      }
    }
  }
  for (int i = 0; i < m.rows; ++i)
    if (!row_matched[i]) out.unmatched_rows.push_back(i);
  for (int j = 0; j < m.cols; ++j)
    if (!col_matched[j]) out.unmatched_cols.push_back(j);
  return out;
}

}  // namespace motlab
