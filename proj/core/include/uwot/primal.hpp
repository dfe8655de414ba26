#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "uwot/costs.hpp"
#include "uwot/geometry.hpp"

namespace uwot {

// Discrete unnormalized kernel: q^{x_i} = sum_j Q_ij delta_{y_j}. Rows with
// mu_i = 0 carry no mass. Bound to (mu, nu) it is feasible when
// sum_i mu_i Q_ij = nu_j.
struct KernelPlan {
  Eigen::MatrixXd q;

  int num_x() const { return static_cast<int>(q.rows()); }
  int num_y() const { return static_cast<int>(q.cols()); }

  // N_i = q^{x_i}(Y), the size outcome per X atom.
  Eigen::VectorXd sizes() const { return q.rowwise().sum(); }
  // S_i = sum_j Q_ij y_j, one row per X atom.
  Eigen::MatrixXd barycenters(const Eigen::MatrixXd& y_atoms) const {
    return q * y_atoms;
  }
  // Max |sum_i mu_i Q_ij - nu_j|.
  double feasibility_error(const Eigen::VectorXd& mu,
                           const Eigen::VectorXd& nu) const;
};

// A coupling pi on X x Y (entries sum to 1, column sums nu). The first
// marginal splits into the part carried by atoms with mu_i > 0 and the
// singular part carried by the zero-weight atoms.
struct CouplingPlan {
  Eigen::MatrixXd pi;

  Eigen::VectorXd first_marginal() const { return pi.rowwise().sum(); }
};

enum class SolveMethod { kAuto, kLp, kFw, kClosedForm };
enum class SolveStatus { kSuccess, kInfeasible, kNumericalFailure };

// Dual potential attached to a report: either values per Y atom (f) or a
// finite set of directions (phi(z) = max_k u_k . z).
struct ReportPotential {
  bool conical = false;
  Eigen::VectorXd f;           // per Y atom, when !conical
  Eigen::MatrixXd directions;  // K x d, when conical
};

struct SolveReport {
  SolveStatus status = SolveStatus::kNumericalFailure;
  double primal_value = 0.0;
  KernelPlan plan;
  double dual_value = 0.0;
  ReportPotential potential;
  double gap = 0.0;
  std::string method;
  int iterations = 0;
  std::string message;
};

// sum over rows with mu_i > 0 of mu_i c(x_i, Q_i).
double primal_objective(const Cost& cost, const DiscreteMeasure& mu,
                        const KernelPlan& plan);

struct SolveOptions {
  SolveMethod method = SolveMethod::kAuto;
  double gap_tol = 1e-9;
  int max_iters = 200000;
  double mass_tol = 1e-9;
};

// Computes I_c(mu, nu) with a feasible plan and a dual certificate. The
// cost must admit the chosen method (lp: AffineSup or PiecewiseLinear;
// fw: differentiable conical / composite; closed_form: Power).
SolveReport solve_primal(const Cost& cost, const DiscreteMeasure& mu,
                         const DiscreteMeasure& nu,
                         const SolveOptions& options = {});

// Extended functional on couplings: rows with mu_i > 0 contribute
// mu_i c(x_i, row_i / mu_i); zero-weight rows contribute
// pi1_i * recession(x_i, row_i / pi1_i). Equals primal_objective of the
// associated kernel when the singular part is empty. May return +inf.
double eval_bar_i(const Cost& cost, const DiscreteMeasure& mu,
                  const CouplingPlan& pi);

// Strong solution of the power cost: Q_ij = (x_i^{1/(1-eta)} / Z) nu_j,
// value -Z^{1-eta} (sum_j y_j nu_j)^eta with Z = sum_i mu_i x_i^{1/(1-eta)}.
// Throws if all x_i vanish.
struct PowerClosedForm {
  KernelPlan plan;
  double value = 0.0;
  double wage = 0.0;  // slope of the linear dual optimizer phi(z) = wage * z
};

PowerClosedForm closed_form_power(const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu, double eta);

// The three strong solutions for mu = nu = uniform on [0,1] (midpoint grid
// of size n): random sorting, positive and negative assortative matching.
// Cell masses use exact integrals of the continuum densities and columns
// are filled by the (reversed, for NAM) corner rule, so the nu-marginal is
// preserved exactly.
struct UniformTriple {
  KernelPlan random_sorting;
  KernelPlan positive_assortative;
  KernelPlan negative_assortative;
  DiscreteMeasure grid;  // the shared mu = nu midpoint grid
};

UniformTriple closed_form_uniform_triple(double eta, int n);

}  // namespace uwot
