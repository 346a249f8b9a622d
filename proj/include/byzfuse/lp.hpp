#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace byzfuse::lp {

using Matrix = std::vector<std::vector<double>>;

struct Solution {
  std::vector<double> x;     // primal
  std::vector<double> dual;  // one per constraint
  double objective = 0;
  std::size_t pivots = 0;
};

/// maximize c.x subject to A x <= b, x >= 0, with b >= 0 so the slack basis is
/// feasible. Dense tableau, Bland's rule.
inline Solution maximize(const Matrix &A, const std::vector<double> &b, const std::vector<double> &c,
                         double tol = 1e-12) {
  const std::size_t rows = A.size(), cols = c.size();
  for (std::size_t i = 0; i < rows; ++i) {
    if (A[i].size() != cols) throw ParameterError("lp: ragged constraint matrix");
    if (b[i] < 0) throw ParameterError("lp: right-hand side must be nonnegative");
  }
  const std::size_t width = cols + rows + 1;
  std::vector<double> T((rows + 1) * width, 0.0);
  auto at = [&](std::size_t r, std::size_t k) -> double & { return T[r * width + k]; };
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) at(i, j) = A[i][j];
    at(i, cols + i) = 1.0;
    at(i, width - 1) = b[i];
  }
  for (std::size_t j = 0; j < cols; ++j) at(rows, j) = -c[j];
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) basis[i] = cols + i;

  Solution sol;
  const std::size_t max_pivots = 50 * (rows + cols) + 1000;
  while (true) {
    std::size_t enter = width;
    for (std::size_t k = 0; k + 1 < width; ++k)
      if (at(rows, k) < -tol) {
        enter = k;
        break;
      }
    if (enter == width) break;
    std::size_t leave = rows;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i) {
      const double a = at(i, enter);
      if (a > tol) {
        const double ratio = at(i, width - 1) / a;
        if (leave == rows || ratio < best - tol || (std::abs(ratio - best) <= tol && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave == rows) throw NumericError("lp: unbounded problem");
    const double piv = at(leave, enter);
    for (std::size_t k = 0; k < width; ++k) at(leave, k) /= piv;
    for (std::size_t i = 0; i <= rows; ++i) {
      if (i == leave) continue;
      const double f = at(i, enter);
      if (f == 0) continue;
      for (std::size_t k = 0; k < width; ++k) at(i, k) -= f * at(leave, k);
    }
    basis[leave] = enter;
    if (++sol.pivots > max_pivots) throw NumericError("lp: pivot limit reached");
  }
  sol.x.assign(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    if (basis[i] < cols) sol.x[basis[i]] = at(i, width - 1);
  sol.dual.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) sol.dual[i] = at(rows, cols + i);
  sol.objective = at(rows, width - 1);
  return sol;
}

}  // namespace byzfuse::lp
