#pragma once

#include <Eigen/Dense>
#include <functional>

namespace uwot {

// Feasible set: n x m tables Q >= 0 with sum_i mu_i Q_ij = nu_j for every
// column j (row sums are free). All mu_i must be positive; rows of zero
// mass carry no variables and must be stripped by the caller.

enum class FwStepRule {
  kHarmonic,    // 2 / (t + 2)
  kLineSearch,  // exact line search on the segment (secant on the derivative)
};

struct FwOptions {
  int max_iters = 50000;
  double gap_tol = 1e-9;  // absolute Frank-Wolfe gap
  FwStepRule step_rule = FwStepRule::kLineSearch;
  // Pairwise (swap) steps between the per-column away row and the oracle
  // row. Keeps iterates feasible by construction and restores the fast
  // local rate that plain FW lacks near faces.
  bool pairwise = true;
};

struct FwState {
  Eigen::MatrixXd q;
  double fw_gap = 0.0;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

using FwValueFn = std::function<double(const Eigen::MatrixXd&)>;
using FwGradFn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

// Minimizes a convex differentiable `value` over the set above. The linear
// minimization oracle picks, per column j, the row i* minimizing
// grad_ij / mu_i (lowest index on ties) and places nu_j / mu_{i*} there.
// Returns once the FW gap drops below gap_tol or max_iters is hit.
FwState fw_minimize(const FwValueFn& value, const FwGradFn& grad,
                    const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                    const FwOptions& options = {});

// Same, but starting from a caller-provided feasible iterate.
FwState fw_minimize_from(const FwValueFn& value, const FwGradFn& grad,
                         const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                         Eigen::MatrixXd q0, const FwOptions& options = {});

}  // namespace uwot
