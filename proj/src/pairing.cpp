#include "risd2d/pairing.hpp"

#include <limits>

namespace risd2d {

Pairing Matching::to_pairing(int num_cu) const {
  return Pairing(num_cu, assignment);
}

WeightMatrix
build_weight_matrix(const std::vector<std::vector<PairSolution>> &pair_solutions,
                    const RVector &cu_only_rates) {
  const int J = static_cast<int>(pair_solutions.size());
  const int K = static_cast<int>(cu_only_rates.size());
  WeightMatrix wm;
  wm.weights = Eigen::MatrixXd::Zero(J, K);
  wm.ok.setConstant(J, K, false);
  wm.base = cu_only_rates.sum();
  for (int j = 0; j < J; ++j) {
    if (static_cast<int>(pair_solutions[j].size()) != K) {
      throw ConfigError("pair solution table is not J x K");
    }
    for (int k = 0; k < K; ++k) {
      const PairSolution &s = pair_solutions[j][k];
      if (!s.feasible) continue;
      wm.ok(j, k) = true;
      wm.weights(j, k) = s.rate_sum - cu_only_rates(k);
    }
  }
  return wm;
}

std::vector<int> solve_assignment(const Eigen::MatrixXd &cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  if (n > m) throw ConfigError("assignment needs rows <= cols");
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // Shortest augmenting path with row/column potentials, 1-based.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
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
      for (int j = 0; j <= m; ++j) {
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
  std::vector<int> col_of(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) col_of[p[j] - 1] = j - 1;
  }
  return col_of;
}

double matching_value(const WeightMatrix &wm,
                      const std::vector<int> &assignment) {
  double v = wm.base;
  for (int j = 0; j < static_cast<int>(assignment.size()); ++j) {
    const int k = assignment[j];
    if (k >= 0) v += wm.weights(j, k);
  }
  return v;
}

Matching hungarian_match(const WeightMatrix &wm) {
  const int J = wm.num_d2d();
  const int K = wm.num_cu();
  if (J > K) throw ConfigError("hungarian_match needs J <= K");

  // Infeasible edges cost more than any complete feasible assignment could
  // gain, so the solver first maximizes the number of feasible edges.
  double span = 0.0;
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < K; ++k)
      if (wm.ok(j, k)) span = std::max(span, std::abs(wm.weights(j, k)));
  const double sentinel = 2.0 * (J + 1) * (span + 1.0);

  // Square padding with zero-weight dummy rows.
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(K, K);
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < K; ++k)
      cost(j, k) = wm.ok(j, k) ? -wm.weights(j, k) : sentinel;

  const std::vector<int> cols = solve_assignment(cost);
  Matching m;
  m.assignment.assign(J, -1);
  for (int j = 0; j < J; ++j) {
    if (wm.ok(j, cols[j])) m.assignment[j] = cols[j];
  }
  m.value = matching_value(wm, m.assignment);
  return m;
}

} // namespace risd2d
