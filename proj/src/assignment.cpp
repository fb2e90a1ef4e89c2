#include "dmaloc/assignment.hpp"

#include <limits>

#include "dmaloc/errors.hpp"

namespace dmaloc {

std::vector<int> max_benefit_assignment(const Eigen::MatrixXd& benefit) {
  const int n = static_cast<int>(benefit.rows());
  const int m = static_cast<int>(benefit.cols());
  if (n == 0) return {};
  if (n > m) throw ConfigError("assignment needs at least as many columns as rows");
  if (!benefit.allFinite()) throw NumericalError("assignment benefit matrix has non-finite entries");

  // Minimize cost = max - benefit. Potentials u (rows), v (cols); 1-based with
  // column 0 as the virtual source.
  const double top = benefit.maxCoeff();
  auto cost = [&](int i, int j) { return top - benefit(i - 1, j - 1); };
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> owner(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    owner[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = owner[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const int j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> cols(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= m; ++j) {
    if (owner[j] != 0) cols[static_cast<std::size_t>(owner[j] - 1)] = j - 1;
  }
  return cols;
}

}  // namespace dmaloc
