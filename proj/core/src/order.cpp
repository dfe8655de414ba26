#include "uwot/order.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "uwot/lp.hpp"

namespace uwot {
namespace {

std::vector<int> positive_rows(const DiscreteMeasure& mu) {
  std::vector<int> act;
  for (int i = 0; i < mu.size(); ++i)
    if (mu.weight(i) > 0) act.push_back(i);
  return act;
}

}  // namespace

PhcWitness check_phc_order(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           double tol) {
  if (mu.dim() != nu.dim())
    throw std::invalid_argument("phc_order: dimension mismatch");
  const int d = mu.dim();
  const int m = nu.size();
  const auto act = positive_rows(mu);
  const int na = static_cast<int>(act.size());

  const ConeModel cone(nu);
  const bool allow_nu2 = cone.zero_in_convex_hull(tol);

  // Feasibility LP in Q >= 0 (and nu2 >= 0 in the general case):
  //   sum_r mu_r Q_rj (+ nu2_j) = nu_j,  sum_j Q_rj y_j = x_r,
  //   sum_j nu2_j y_j = 0.
  const int nq = na * m;
  const int nvars = nq + (allow_nu2 ? m : 0);
  const int rows = m + na * d + (allow_nu2 ? d : 0);
  LinearProgram lp;
  lp.c = Eigen::VectorXd::Zero(nvars);
  lp.a_eq = Eigen::MatrixXd::Zero(rows, nvars);
  lp.b_eq = Eigen::VectorXd::Zero(rows);
  for (int j = 0; j < m; ++j) {
    for (int r = 0; r < na; ++r)
      lp.a_eq(j, r * m + j) = mu.weight(act[r]);
    if (allow_nu2) lp.a_eq(j, nq + j) = 1.0;
    lp.b_eq[j] = nu.weight(j);
  }
  for (int r = 0; r < na; ++r) {
    for (int k = 0; k < d; ++k) {
      const int row = m + r * d + k;
      for (int j = 0; j < m; ++j)
        lp.a_eq(row, r * m + j) = nu.atom(j)[k];
      lp.b_eq[row] = mu.atom(act[r])[k];
    }
  }
  if (allow_nu2) {
    for (int k = 0; k < d; ++k) {
      const int row = m + na * d + k;
      for (int j = 0; j < m; ++j) lp.a_eq(row, nq + j) = nu.atom(j)[k];
    }
  }

  PhcWitness witness;
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kOptimal) {
    witness.dominated = true;
    witness.certified = true;
    witness.kernel.q = Eigen::MatrixXd::Zero(mu.size(), m);
    for (int r = 0; r < na; ++r)
      for (int j = 0; j < m; ++j)
        witness.kernel.q(act[r], j) = std::max(0.0, sol.x[r * m + j]);
    witness.nu2 = Eigen::VectorXd::Zero(m);
    if (allow_nu2)
      for (int j = 0; j < m; ++j) witness.nu2[j] = std::max(0.0, sol.x[nq + j]);
    witness.nu1 = nu.weights() - witness.nu2;
    return witness;
  }
  if (sol.status != LpStatus::kInfeasible)
    throw std::runtime_error("phc_order: feasibility LP failed");

  witness.dominated = false;
  // Farkas components attached to the barycenter rows give the directions
  // of a candidate separating potential phi(z) = max_r (alpha_r / mu_r) . z,
  // always re-validated by direct evaluation.
  ConicalPotential phi;
  phi.directions = Eigen::MatrixXd(na, d);
  for (int r = 0; r < na; ++r)
    for (int k = 0; k < d; ++k)
      phi.directions(r, k) = sol.farkas_eq[m + r * d + k] / mu.weight(act[r]);

  double lhs = 0.0, rhs = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) <= 0) continue;
    const Eigen::VectorXd x = mu.atom(i);
    lhs += mu.weight(i) * phi(x);
  }
  for (int j = 0; j < m; ++j) {
    const Eigen::VectorXd y = nu.atom(j);
    rhs += nu.weight(j) * phi(y);
  }
  witness.margin = lhs - rhs;
  if (witness.margin > tol) {
    witness.separator = phi;
    witness.certified = true;
  } else {
    witness.certified = false;
    witness.message = "infeasible, no certified witness";
  }
  return witness;
}

bool phc_order_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  double tol) {
  if (mu.dim() != 1 || nu.dim() != 1)
    throw std::invalid_argument("phc_order_1d: d = 1 only");
  const Moments a = moments(mu);
  const Moments b = moments(nu);
  return std::abs(a.first_moment[0] - b.first_moment[0]) <= tol &&
         a.pos_part[0] <= b.pos_part[0] + tol &&
         a.neg_part[0] <= b.neg_part[0] + tol;
}

ProjectionReport project_phc(const ConicalCost& cost, const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu, double tol) {
  ProjectionReport report;
  SolveOptions options;
  options.gap_tol = std::min(tol, 1e-8);
  const SolveReport solved = solve_primal(cost, mu, nu, options);
  if (solved.status == SolveStatus::kInfeasible) {
    report.message = "primal infeasible";
    return report;
  }
  report.primal_value = solved.primal_value;

  const auto act = positive_rows(mu);
  const Eigen::MatrixXd s = solved.plan.barycenters(cost.y_atoms());
  std::vector<Point> atoms;
  Eigen::VectorXd weights(act.size());
  for (size_t r = 0; r < act.size(); ++r) {
    atoms.push_back(s.row(act[r]).transpose());
    weights[r] = mu.weight(act[r]);
  }
  const double merge_tol = 1e-12 * (1.0 + s.cwiseAbs().maxCoeff());
  report.gamma = DiscreteMeasure::merged(atoms, weights, merge_tol);

  Eigen::MatrixXd transport_cost(act.size(), report.gamma.size());
  for (size_t r = 0; r < act.size(); ++r)
    for (int k = 0; k < report.gamma.size(); ++k)
      transport_cost(r, k) = cost.f_value(act[r], report.gamma.atom(k));
  Eigen::VectorXd mu_act(act.size());
  for (size_t r = 0; r < act.size(); ++r) mu_act[r] = mu.weight(act[r]);
  const TransportResult tf =
      solve_transport(transport_cost, mu_act, report.gamma.weights());
  if (tf.status != LpStatus::kOptimal) {
    report.message = "transport LP failed";
    return report;
  }
  report.transport_value = tf.value;
  report.mismatch = std::abs(report.transport_value - report.primal_value);

  const PhcWitness order = check_phc_order(report.gamma, nu);
  report.order_ok = order.dominated;
  report.pass = report.mismatch <= tol && report.order_ok;
  if (!report.order_ok)
    report.message = "barycenter image not dominated by nu (invariant breach)";
  return report;
}

KernelPlan dim1_reduce(const ConicalCost& cost, const DiscreteMeasure& mu,
                       const DiscreteMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1)
    throw std::invalid_argument("dim1_reduce: d = 1 only");
  const Moments nu_m = moments(nu);
  const double mean = nu_m.first_moment[0];
  if (mean <= 0) throw std::invalid_argument("dim1_reduce: nu mean must be positive");

  const auto act = positive_rows(mu);
  const int na = static_cast<int>(act.size());
  Eigen::VectorXd s(na);

  if (cost.kind() == CostKind::kQuadratic) {
    const auto& c = static_cast<const QuadraticCost&>(cost);
    // s_i = max(0, x_i + theta) with the multiplier theta solving the mass
    // constraint; the sum is monotone in theta.
    auto mass_at = [&](double theta) {
      double total = 0.0;
      for (int r = 0; r < na; ++r)
        total += mu.weight(act[r]) *
                 std::max(0.0, c.x_atoms()(act[r], 0) + theta);
      return total;
    };
    double lo = -c.x_atoms().col(0).maxCoeff() - 1.0;
    double hi = mean + 1.0;
    while (mass_at(hi) < mean) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mass_at(mid) < mean)
        lo = mid;
      else
        hi = mid;
    }
    const double theta = 0.5 * (lo + hi);
    for (int r = 0; r < na; ++r)
      s[r] = std::max(0.0, c.x_atoms()(act[r], 0) + theta);
  } else if (cost.kind() == CostKind::kPiecewiseLinear) {
    const auto& c = static_cast<const PiecewiseLinearCost&>(cost);
    const int k = static_cast<int>(c.pieces().size());
    // Variables (s_r, t_r): min sum mu_r t_r, u_k(r) s_r + a_k(r) <= t_r,
    // sum mu_r s_r = mean, s >= 0.
    LinearProgram lp;
    lp.c = Eigen::VectorXd::Zero(2 * na);
    lp.is_free.assign(2 * na, false);
    for (int r = 0; r < na; ++r) {
      lp.c[na + r] = mu.weight(act[r]);
      lp.is_free[na + r] = true;
    }
    lp.a_eq = Eigen::MatrixXd::Zero(1, 2 * na);
    for (int r = 0; r < na; ++r) lp.a_eq(0, r) = mu.weight(act[r]);
    lp.b_eq = Eigen::VectorXd::Constant(1, mean);
    lp.a_ub = Eigen::MatrixXd::Zero(k * na, 2 * na);
    lp.b_ub = Eigen::VectorXd(k * na);
    for (int p = 0; p < k; ++p)
      for (int r = 0; r < na; ++r) {
        lp.a_ub(p * na + r, r) = c.pieces()[p].u(act[r], 0);
        lp.a_ub(p * na + r, na + r) = -1.0;
        lp.b_ub[p * na + r] = -c.pieces()[p].a[act[r]];
      }
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::kOptimal)
      throw std::runtime_error("dim1_reduce: LP failed");
    for (int r = 0; r < na; ++r) s[r] = std::max(0.0, sol.x[r]);
  } else {
    throw std::invalid_argument(
        "dim1_reduce: supported costs are quadratic and piecewise linear");
  }

  KernelPlan plan;
  plan.q = Eigen::MatrixXd::Zero(mu.size(), nu.size());
  for (int r = 0; r < na; ++r)
    for (int j = 0; j < nu.size(); ++j)
      plan.q(act[r], j) = s[r] / mean * nu.weight(j);
  return plan;
}

BrenierReport brenier_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            double tol) {
  BrenierReport report;
  const QuadraticCost cost(mu.atom_matrix(), nu.atom_matrix());
  SolveOptions options;
  options.gap_tol = 1e-9;
  const SolveReport solved = solve_primal(cost, mu, nu, options);
  if (solved.status != SolveStatus::kSuccess) {
    report.message = "quadratic solve failed";
    return report;
  }
  const auto act = positive_rows(mu);
  const int na = static_cast<int>(act.size());
  const Eigen::MatrixXd s_full = solved.plan.barycenters(cost.y_atoms());
  report.p = Eigen::MatrixXd(na, mu.dim());
  report.s = Eigen::MatrixXd(na, mu.dim());
  for (int r = 0; r < na; ++r) {
    report.s.row(r) = s_full.row(act[r]);
    report.p.row(r) = mu.atom(act[r]).transpose() - s_full.row(act[r]);
  }
  report.max_violation = 0.0;
  for (int i = 0; i < na; ++i)
    for (int k = 0; k < na; ++k) {
      const double v = report.s.row(i).dot(report.p.row(k) - report.p.row(i));
      report.max_violation = std::max(report.max_violation, v);
    }
  report.pass = report.max_violation <= tol;
  return report;
}

bool monotone_support_check(const KernelPlan& plan, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu, int sign,
                            double mass_tol) {
  if (mu.dim() != 1 || nu.dim() != 1)
    throw std::invalid_argument("monotone_support_check: d = 1 only");
  const auto act = positive_rows(mu);
  std::vector<int> order(act.begin(), act.end());
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return mu.atom(a)[0] < mu.atom(b)[0];
  });

  double running_extreme = sign > 0 ? -kInf : kInf;
  for (int i : order) {
    double lo = kInf, hi = -kInf;
    for (int j = 0; j < nu.size(); ++j) {
      if (plan.q(i, j) > mass_tol) {
        lo = std::min(lo, nu.atom(j)[0]);
        hi = std::max(hi, nu.atom(j)[0]);
      }
    }
    if (lo > hi) continue;  // empty support row
    if (sign > 0) {
      if (lo < running_extreme - 1e-12) return false;
      running_extreme = std::max(running_extreme, hi);
    } else {
      if (hi > running_extreme + 1e-12) return false;
      running_extreme = std::min(running_extreme, lo);
    }
  }
  return true;
}

bool monotone_support_check(const KernelPlan& plan, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu, int sign) {
  const double mass_tol = 1e-8 * std::max(1e-300, plan.q.maxCoeff());
  return monotone_support_check(plan, mu, nu, sign, mass_tol);
}

namespace {

// Random coupling with marginals (a, b): Sinkhorn scaling of a positive
// random matrix. Converges geometrically for strictly positive kernels.
Eigen::MatrixXd random_coupling(const Eigen::VectorXd& a,
                                const Eigen::VectorXd& b,
                                std::mt19937_64& rng) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  std::uniform_real_distribution<double> unif(0.2, 1.8);
  Eigen::MatrixXd k(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) k(i, j) = unif(rng);
  for (int it = 0; it < 500; ++it) {
    for (int i = 0; i < n; ++i) {
      const double row = k.row(i).sum();
      if (row > 0) k.row(i) *= a[i] / row;
    }
    for (int j = 0; j < m; ++j) {
      const double col = k.col(j).sum();
      if (col > 0) k.col(j) *= b[j] / col;
    }
  }
  return k;
}

}  // namespace

StructureBisReport verify_structure_bis(const ConicalCost& cost,
                                        const CouplingPlan& pi,
                                        const DiscreteMeasure& mu,
                                        const DiscreteMeasure& nu,
                                        double primal_value, int trials,
                                        double tol, std::uint64_t seed) {
  StructureBisReport report;
  const int n = mu.size();
  const Eigen::VectorXd eta = pi.first_marginal();
  const Eigen::MatrixXd y = nu.atom_matrix();

  // G(x_i, t) = F(x_i, N_i t) / N_i on rows with N_i > 0.
  std::vector<double> density(n, 0.0);
  for (int i = 0; i < n; ++i)
    if (mu.weight(i) > 0) density[i] = eta[i] / mu.weight(i);

  auto g_cost = [&](int i, const Eigen::VectorXd& t) {
    return cost.f_value(i, density[i] * t) / density[i];
  };

  double identity_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (eta[i] <= 0 || mu.weight(i) <= 0) continue;
    const Eigen::VectorXd t = y.transpose() * pi.pi.row(i).transpose() / eta[i];
    identity_sum += eta[i] * g_cost(i, t);
  }
  report.identity_error = std::abs(identity_sum - primal_value);
  report.identity_ok = report.identity_error <= tol * (1.0 + std::abs(primal_value));

  std::mt19937_64 rng(seed);
  report.worst_trial_slack = kInf;
  report.inf_ok = true;
  std::vector<int> carriers;
  for (int i = 0; i < n; ++i)
    if (eta[i] > 0 && mu.weight(i) > 0) carriers.push_back(i);
  Eigen::VectorXd eta_c(carriers.size());
  for (size_t r = 0; r < carriers.size(); ++r) eta_c[r] = eta[carriers[r]];
  for (int trial = 0; trial < trials; ++trial) {
    const Eigen::MatrixXd coupling = random_coupling(eta_c, nu.weights(), rng);
    double value = 0.0;
    for (size_t r = 0; r < carriers.size(); ++r) {
      const int i = carriers[r];
      const Eigen::VectorXd t =
          y.transpose() * coupling.row(r).transpose() / eta_c[r];
      value += eta_c[r] * g_cost(i, t);
    }
    const double slack = value - primal_value;
    report.worst_trial_slack = std::min(report.worst_trial_slack, slack);
    if (slack < -tol * (1.0 + std::abs(primal_value))) report.inf_ok = false;
  }
  if (trials == 0) report.worst_trial_slack = 0.0;
  if (!report.identity_ok) report.message = "barycentric identity failed";
  else if (!report.inf_ok) report.message = "a trial coupling beat the optimum";
  return report;
}

ArticulationReport articulation_check(const KernelPlan& plan,
                                      const ConicalPotential& phi,
                                      const ConicalCost& cost,
                                      const DiscreteMeasure& mu, double tol) {
  ArticulationReport report;
  const Eigen::MatrixXd s = plan.barycenters(cost.y_atoms());
  report.max_error = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) <= 0) continue;
    const Eigen::VectorXd si = s.row(i);
    const double lhs = apply_qf(cost, phi, i);
    const double rhs = phi(si) + cost.f_value(i, si);
    report.max_error = std::max(report.max_error, std::abs(lhs - rhs));
  }
  report.pass = report.max_error <= tol;
  return report;
}

}  // namespace uwot
