#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "uwot/costs.hpp"
#include "uwot/dual.hpp"
#include "uwot/geometry.hpp"
#include "uwot/primal.hpp"

namespace uwot {

// Strassen-type witness for the positively 1-homogeneous convex order.
// Dominated: a kernel with barycenter x_i per row and a decomposition
// nu = nu1 + nu2 with sum_j y_j nu2_j = 0 (nu2 = 0 when 0 is outside
// co(supp nu)). Not dominated: a separating potential, re-validated by
// direct evaluation, with margin = integral difference.
struct PhcWitness {
  bool dominated = false;
  KernelPlan kernel;       // rows over all X atoms; zero rows for mu_i = 0
  Eigen::VectorXd nu1;
  Eigen::VectorXd nu2;
  std::optional<ConicalPotential> separator;
  double margin = 0.0;     // sum phi dmu - sum phi dnu when not dominated
  bool certified = false;  // false: infeasible but no re-validated witness
  std::string message;
};

PhcWitness check_phc_order(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           double tol = 1e-9);

// d = 1 shortcut: equal means plus dominated positive and negative parts.
bool phc_order_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  double tol = 1e-9);

// I_c(mu, nu) as the shortest F-transport distance to the phc-order ball:
// solves the primal, pushes mu through the barycenter map S, and compares
// T_F(mu, S#mu) with I_c.
struct ProjectionReport {
  bool pass = false;
  DiscreteMeasure gamma;  // law of S under mu
  double transport_value = 0.0;
  double primal_value = 0.0;
  double mismatch = 0.0;
  bool order_ok = false;  // gamma <=_phc nu, re-checked by the oracle
  std::string message;
};

ProjectionReport project_phc(const ConicalCost& cost, const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu, double tol = 1e-7);

// d = 1 reduction: minimizes sum_i mu_i F(x_i, s_i) over s >= 0 with
// sum_i mu_i s_i = mean(nu), then returns Q_ij = (s_i / mean) nu_j.
// Supported F: piecewise linear (LP) and quadratic (shifted threshold).
KernelPlan dim1_reduce(const ConicalCost& cost, const DiscreteMeasure& mu,
                       const DiscreteMeasure& nu);

// Quadratic-cost structure check: p_i = x_i - S_i must behave like values
// of a projection map, i.e. (x_i - p_i) . (p_k - p_i) <= tol for all i, k.
struct BrenierReport {
  bool pass = false;
  Eigen::MatrixXd p;         // one row per X atom with mu_i > 0
  Eigen::MatrixXd s;         // matching barycenters
  double max_violation = 0.0;
  std::string message;
};

BrenierReport brenier_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            double tol = 1e-6);

// d = 1: supports S_i = { j : Q_ij > mass_tol } must be ordered across the
// positive-mass rows; sign +1 requires nondecreasing, -1 nonincreasing.
bool monotone_support_check(const KernelPlan& plan, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu, int sign,
                            double mass_tol);
// mass_tol defaulted to 1e-8 * max(Q).
bool monotone_support_check(const KernelPlan& plan, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu, int sign);

// Barycentric-projection identity for a strong solution pi: with
// eta_i = pi1_i, N_i = eta_i / mu_i, T_i the row barycenter and
// G(x, y) = F(x, N(x) y) / N(x), checks I_c = sum_i G(x_i, T_i) eta_i and
// that `trials` random couplings in Pi(eta, nu) never beat it by more
// than tol (one-sided certification of the inf).
struct StructureBisReport {
  bool identity_ok = false;
  bool inf_ok = false;
  double identity_error = 0.0;
  double worst_trial_slack = 0.0;  // min over trials of (trial - I_c)
  std::string message;
};

StructureBisReport verify_structure_bis(const ConicalCost& cost,
                                        const CouplingPlan& pi,
                                        const DiscreteMeasure& mu,
                                        const DiscreteMeasure& nu,
                                        double primal_value, int trials,
                                        double tol, std::uint64_t seed = 17);

// Primal-dual articulation: |Q_F phi(x_i) - (phi(S_i) + F(x_i, S_i))| <= tol
// for every row with mu_i > 0, given a gap-certified pair (plan, phi).
struct ArticulationReport {
  bool pass = false;
  double max_error = 0.0;
  std::string message;
};

ArticulationReport articulation_check(const KernelPlan& plan,
                                      const ConicalPotential& phi,
                                      const ConicalCost& cost,
                                      const DiscreteMeasure& mu, double tol);

}  // namespace uwot
