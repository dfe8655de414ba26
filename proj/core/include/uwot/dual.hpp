#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "uwot/costs.hpp"
#include "uwot/geometry.hpp"
#include "uwot/lp.hpp"
#include "uwot/primal.hpp"

namespace uwot {

// Values per Y atom.
struct DualPotential {
  Eigen::VectorXd f;
};

// phi(z) = max_k u_k . z on the cone Z: convex, positively 1-homogeneous
// and lsc by construction. Finite LP duals always produce potentials of
// this form, so the finite restriction is exact at this scale.
struct ConicalPotential {
  Eigen::MatrixXd directions;  // K x d

  double operator()(const Eigen::VectorXd& z) const {
    return (directions * z).maxCoeff();
  }
  int dim() const { return static_cast<int>(directions.cols()); }
};

// K_c f(x) = inf over w >= 0 of sum_j f_j w_j + c(x, w). Returns -inf
// (a first-class value, not an error) when the infimum is unbounded below.
double apply_kc(const Cost& cost, const DualPotential& f, int x_index);

// Greatest convex positively 1-homogeneous minorant of f on Y, evaluated
// by one LP per query: fbar(z) = min { f'w : w >= 0, sum_j w_j y_j = z }.
// Queries outside the cone return +inf.
class MinorantOracle {
 public:
  MinorantOracle(Eigen::VectorXd f, Eigen::MatrixXd y_atoms);

  double operator()(const Eigen::VectorXd& z) const;
  const Eigen::VectorXd& f() const { return f_; }

 private:
  Eigen::VectorXd f_;
  Eigen::MatrixXd y_atoms_;
};

MinorantOracle minorant(const DualPotential& f, const Eigen::MatrixXd& y_atoms);

// Q_F phi(x) = inf_{z in Z} phi(z) + F(x, z) for a conical cost. Returns
// -inf when unbounded below. Always <= F(x, 0).
double apply_qf(const ConicalCost& cost, const ConicalPotential& phi,
                int x_index);

// sum_i mu_i K_c f(x_i) - sum_j nu_j f_j; -inf propagates.
double dual_value(const Cost& cost, const DualPotential& f,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Conical analogue: sum_i mu_i Q_F phi(x_i) - sum_j nu_j phi(y_j).
double dual_value(const ConicalCost& cost, const ConicalPotential& phi,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Reads the potential off the duals of the nu-marginal constraints of a
// solved primal LP. The sign convention is fixed by the invariant
// dual_value(f) = primal value at optimality (tested).
DualPotential extract_dual_certificate(const LpSolution& solution,
                                       int nu_row_offset, int num_y);

// M = max_j sum_i mu_i F(x_i, lambda y_j) and the bound -M / (lambda - 1)
// below which conical potentials can be discarded from the dual supremum.
struct ConicalDualBound {
  double m = 0.0;
  double lower_bound = 0.0;
};

ConicalDualBound dual_bound_conical(const ConicalCost& cost,
                                    const DiscreteMeasure& mu, double lambda);

// First-order optimality for composite costs: with U_i = sum_j F_ij Q_ij,
// G'(U_i) F(x_i, y_j) + f_j >= 0 for all j and = 0 where Q_ij > tol,
// for every row with mu_i > 0.
struct OptimalityReport {
  bool pass = false;
  double worst_inequality = 0.0;  // most negative slack seen
  double worst_equality = 0.0;    // largest |slack| on the support
  std::string message;
};

OptimalityReport optimality_conditions_gf(const KernelPlan& plan,
                                          const DualPotential& f,
                                          const CompositeCost& cost,
                                          const DiscreteMeasure& mu,
                                          double tol);

// For nonpositive conical costs with vanishing recession: checks that the
// potential is nonnegative on the generators, strictly positive on the
// unit-normalized ones, and that its dual value matches the primal within
// tol.
struct NonpositiveConicalReport {
  bool pass = false;
  double min_on_generators = 0.0;  // over unit-normalized generators
  double dual = 0.0;
  double primal = 0.0;
  double gap = 0.0;
  std::string message;
};

NonpositiveConicalReport check_nonpositive_conical_dual(
    const ConicalCost& cost, const ConicalPotential& phi,
    const DiscreteMeasure& mu, const DiscreteMeasure& nu, double primal_value,
    double tol);

}  // namespace uwot
