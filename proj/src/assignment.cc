#include "corefdec/assignment.h"

#include <algorithm>
#include <limits>

namespace corefdec {

std::vector<int> MaxWeightAssignment(const Matrix &weights) {
  const bool transposed = weights.rows() > weights.cols();
  const int n = transposed ? weights.cols() : weights.rows();
  const int m = transposed ? weights.rows() : weights.cols();
  std::vector<int> result(weights.rows(), -1);
  if (n == 0) return result;

  double top = 0.0;
  for (int r = 0; r < weights.rows(); ++r) {
    for (double w : weights.row(r)) top = std::max(top, w);
  }
  // Minimize top - w over an n x m cost matrix with n <= m, 1-based.
  auto cost = [&](int i, int j) {
    return top - (transposed ? weights(j - 1, i - 1) : weights(i - 1, j - 1));
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> match(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> min_v(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      int i0 = match[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < min_v[j]) {
          min_v[j] = cur;
          way[j] = j0;
        }
        if (min_v[j] < delta) {
          delta = min_v[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_v[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (int j = 1; j <= m; ++j) {
    if (match[j] == 0) continue;
    if (transposed) {
      result[j - 1] = match[j] - 1;
    } else {
      result[match[j] - 1] = j - 1;
    }
  }
  return result;
}

}  // namespace corefdec
