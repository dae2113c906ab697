#pragma once

#include "risd2d/link_opt.hpp"

namespace risd2d {

/// Marginal-gain assignment weights: entry (j, k) is R_jk^opt - R_k^C,opt
/// when the pair can share a subchannel.
struct WeightMatrix {
  Eigen::MatrixXd weights;                               // J x K
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> ok; // feasible edges
  double base = 0.0; // sum of CU-only rates

  int num_d2d() const { return static_cast<int>(weights.rows()); }
  int num_cu() const { return static_cast<int>(weights.cols()); }
};

struct Matching {
  std::vector<int> assignment; // D2D -> CU, -1 when unmatched
  double value = 0.0;          // base + selected weights

  Pairing to_pairing(int num_cu) const;
};

/// pair_solutions is indexed [j][k].
WeightMatrix
build_weight_matrix(const std::vector<std::vector<PairSolution>> &pair_solutions,
                    const RVector &cu_only_rates);

/// Maximum-weight assignment of every D2D pair to a distinct CU. Infeasible
/// edges are used only when no complete feasible assignment exists, and are
/// then dropped, leaving that D2D pair unmatched.
Matching hungarian_match(const WeightMatrix &weights);

/// Sum of selected feasible weights plus base, accumulated in row order.
double matching_value(const WeightMatrix &weights,
                      const std::vector<int> &assignment);

/// Minimum-cost assignment of each row to a distinct column of a square or
/// wide cost matrix. Returns the column per row.
std::vector<int> solve_assignment(const Eigen::MatrixXd &cost);

} // namespace risd2d
