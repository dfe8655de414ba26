#pragma once

#include <Eigen/Dense>
#include <vector>

namespace uwot {

// min c'x  s.t.  a_eq x = b_eq,  a_ub x <= b_ub,  x_j >= 0 unless is_free[j].
// Empty constraint blocks are allowed (zero-row matrices).
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  std::vector<bool> is_free;  // empty means all variables nonnegative

  int num_vars() const { return static_cast<int>(c.size()); }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kFailed };

// Sign conventions, enforced by tests:
//   optimal:    objective = dual_eq' b_eq + dual_ub' b_ub, dual_ub <= 0, and
//               c - a_eq' dual_eq - a_ub' dual_ub >= 0 on nonnegative
//               variables (= 0 on free ones).
//   infeasible: y = (farkas_eq, farkas_ub) satisfies farkas_ub <= 0,
//               y'A <= 0 on nonnegative columns (= 0 on free columns) and
//               y'b > 0.
struct LpSolution {
  LpStatus status = LpStatus::kFailed;
  Eigen::VectorXd x;
  Eigen::VectorXd dual_eq;
  Eigen::VectorXd dual_ub;
  double objective = 0.0;
  Eigen::VectorXd farkas_eq;
  Eigen::VectorXd farkas_ub;
  int iterations = 0;
};

// Dense two-phase revised simplex. Dantzig pricing, falling back to Bland's
// rule once a degeneracy counter trips. Deterministic for fixed input.
LpSolution solve_lp(const LinearProgram& lp);

// Classical transport LP: min sum_ik cost(i,k) pi_ik with row sums `a`,
// column sums `b` (masses must agree), pi >= 0. Returns the plan in
// `solution.x` laid out row-major; dual_eq holds the n row potentials
// followed by the m column potentials.
struct TransportResult {
  LpStatus status = LpStatus::kFailed;
  Eigen::MatrixXd plan;
  double value = 0.0;
  Eigen::VectorXd row_potential;
  Eigen::VectorXd col_potential;
};

TransportResult solve_transport(const Eigen::MatrixXd& cost,
                                const Eigen::VectorXd& a,
                                const Eigen::VectorXd& b);

}  // namespace uwot
