#include "uwot/order.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "uwot/primal.hpp"

using namespace uwot;

namespace {

Point pt1(double v) {
  Point p(1);
  p[0] = v;
  return p;
}

Point pt2(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

DiscreteMeasure dirac(const Point& p) {
  return DiscreteMeasure({p}, Eigen::VectorXd::Ones(1));
}

}  // namespace

TEST_CASE("order oracle: representable barycenter is dominated") {
  const DiscreteMeasure mu = dirac(pt2(1.0, 1.0));
  const DiscreteMeasure nu({pt2(2.0, 0.0), pt2(0.0, 2.0)},
                           Eigen::VectorXd::Constant(2, 0.5));
  const PhcWitness w = check_phc_order(mu, nu);
  REQUIRE(w.dominated);
  CHECK(w.kernel.q(0, 0) == doctest::Approx(0.5));
  CHECK(w.kernel.q(0, 1) == doctest::Approx(0.5));
  CHECK(w.nu2.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("order oracle: shifted dirac is separated by a linear potential") {
  const PhcWitness w = check_phc_order(dirac(pt1(1.0)), dirac(pt1(2.0)));
  REQUIRE_FALSE(w.dominated);
  REQUIRE(w.certified);
  CHECK(w.margin > 1e-9);
  // phi(z) = -z separates by hand: -1 > -2.
  REQUIRE(w.separator.has_value());
  const ConicalPotential& phi = *w.separator;
  CHECK(phi(pt1(1.0)) > phi(pt1(2.0)));
}

TEST_CASE("order oracle: a measure dominates itself") {
  const DiscreteMeasure mu({pt1(0.5), pt1(1.5)},
                           Eigen::VectorXd::Constant(2, 0.5));
  CHECK(check_phc_order(mu, mu).dominated);
}

TEST_CASE("1-d shortcut on spec instances and against the LP oracle") {
  CHECK(phc_order_1d(dirac(pt1(1.0)),
                     DiscreteMeasure({pt1(0.5), pt1(1.5)},
                                     Eigen::VectorXd::Constant(2, 0.5))));
  CHECK_FALSE(phc_order_1d(dirac(pt1(1.0)), dirac(pt1(2.0))));

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(0.2, 1.4);
  int agreements = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 3, m = 2 + (t / 2) % 3;
    std::vector<Point> xa(n), ya(m);
    Eigen::VectorXd wm(n), wn(m);
    for (int i = 0; i < n; ++i) {
      xa[i] = pt1(unif(rng));
      wm[i] = unif(rng);
    }
    for (int j = 0; j < m; ++j) {
      ya[j] = pt1(0.3 + unif(rng));
      wn[j] = unif(rng);
    }
    DiscreteMeasure mu(xa, wm / wm.sum());
    DiscreteMeasure nu(ya, wn / wn.sum());
    if (t % 2 == 0) {
      // Rescale mu so the means match: such instances are dominated in d=1
      // when the supports sit in R_+.
      const double scale = moments(nu).mean[0] / moments(mu).mean[0];
      std::vector<Point> scaled(n);
      for (int i = 0; i < n; ++i) scaled[i] = pt1(xa[i][0] * scale);
      mu = DiscreteMeasure(scaled, mu.weights());
    }
    if (check_phc_order(mu, nu, 1e-9).dominated == phc_order_1d(mu, nu, 1e-9))
      ++agreements;
  }
  CHECK(agreements == 100);
}

TEST_CASE("transitivity on sampled chains") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> unif(0.3, 1.3);
  for (int t = 0; t < 20; ++t) {
    const int m = 3;
    std::vector<Point> ya(m);
    Eigen::VectorXd wn(m);
    for (int j = 0; j < m; ++j) {
      ya[j] = pt2(unif(rng), unif(rng));
      wn[j] = unif(rng);
    }
    const DiscreteMeasure rho(ya, wn / wn.sum());
    // Build nu <= rho and mu <= nu through explicit kernels.
    auto shrink = [&](const DiscreteMeasure& target, int count) {
      std::uniform_real_distribution<double> mass(0.1, 1.0);
      Eigen::VectorXd w(count);
      for (int i = 0; i < count; ++i) w[i] = mass(rng);
      w /= w.sum();
      Eigen::MatrixXd q(count, target.size());
      for (int i = 0; i < count; ++i)
        for (int j = 0; j < target.size(); ++j) q(i, j) = mass(rng);
      for (int j = 0; j < target.size(); ++j) {
        const double col = w.dot(q.col(j));
        q.col(j) *= target.weight(j) / col;
      }
      const Eigen::MatrixXd s = q * target.atom_matrix();
      std::vector<Point> atoms(count);
      for (int i = 0; i < count; ++i) atoms[i] = s.row(i).transpose();
      return DiscreteMeasure(atoms, w);
    };
    const DiscreteMeasure nu = shrink(rho, 3);
    const DiscreteMeasure mu = shrink(nu, 2);
    CHECK(check_phc_order(mu, nu).dominated);
    CHECK(check_phc_order(nu, rho).dominated);
    CHECK(check_phc_order(mu, rho).dominated);
  }
}

TEST_CASE("zero transport cost characterizes domination for the norm cost") {
  // F(x, z) = ||x - z||: I_c = 0 iff mu <=_phc nu. Model the Euclidean norm
  // in d = 1 as a two-piece linear conical cost: |x - z| = max(x-z, z-x).
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> unif(0.3, 1.3);
  for (int t = 0; t < 12; ++t) {
    const int n = 2 + t % 2, m = 3;
    std::vector<Point> ya(m);
    Eigen::VectorXd wn(m);
    for (int j = 0; j < m; ++j) {
      ya[j] = pt1(unif(rng));
      wn[j] = unif(rng);
    }
    const DiscreteMeasure nu(ya, wn / wn.sum());
    std::vector<Point> xa(n);
    Eigen::VectorXd wm(n);
    for (int i = 0; i < n; ++i) {
      xa[i] = pt1(unif(rng));
      wm[i] = unif(rng);
    }
    DiscreteMeasure mu(xa, wm / wm.sum());
    if (t % 2 == 0) {
      const double scale = moments(nu).mean[0] / moments(mu).mean[0];
      std::vector<Point> scaled(n);
      for (int i = 0; i < n; ++i) scaled[i] = pt1(xa[i][0] * scale);
      mu = DiscreteMeasure(scaled, mu.weights());
    }
    std::vector<PiecewiseLinearCost::Piece> pieces(2);
    pieces[0].u = Eigen::MatrixXd::Constant(n, 1, -1.0);
    pieces[0].a = Eigen::VectorXd(n);
    pieces[1].u = Eigen::MatrixXd::Constant(n, 1, 1.0);
    pieces[1].a = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) {
      pieces[0].a[i] = mu.atom(i)[0];
      pieces[1].a[i] = -mu.atom(i)[0];
    }
    const PiecewiseLinearCost cost(pieces, nu.atom_matrix());
    const SolveReport report = solve_primal(cost, mu, nu);
    REQUIRE(report.status == SolveStatus::kSuccess);
    const bool zero_cost = report.primal_value <= 1e-9;
    CHECK(zero_cost == check_phc_order(mu, nu).dominated);
  }
}

TEST_CASE("projection identity collapses for a dirac source") {
  const DiscreteMeasure mu = dirac(pt2(0.2, 0.9));
  const DiscreteMeasure nu({pt2(0.5, 1.0), pt2(1.2, 0.4)},
                           Eigen::VectorXd::Constant(2, 0.5));
  const QuadraticCost cost(mu.atom_matrix(), nu.atom_matrix());
  const ProjectionReport report = project_phc(cost, mu, nu, 1e-7);
  CHECK(report.pass);
  CHECK(report.gamma.size() == 1);
  // T_F(mu, delta_S) = F(x, S) = I_c for a single source atom.
  CHECK(report.transport_value ==
        doctest::Approx(report.primal_value).epsilon(1e-9));
}

TEST_CASE("dim1 reduction: quadratic closed form and PL cross-check") {
  const DiscreteMeasure mu({pt1(0.25), pt1(0.75)},
                           Eigen::VectorXd::Constant(2, 0.5));
  const DiscreteMeasure nu = dirac(pt1(1.0));
  const QuadraticCost quad(mu.atom_matrix(), nu.atom_matrix());
  const KernelPlan plan = dim1_reduce(quad, mu, nu);
  // Lagrange shift: s_i = x_i + 1/2.
  const Eigen::MatrixXd s = plan.barycenters(nu.atom_matrix());
  CHECK(s(0, 0) == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(s(1, 0) == doctest::Approx(1.25).epsilon(1e-9));
  CHECK(primal_objective(quad, mu, plan) == doctest::Approx(0.125).epsilon(1e-9));

  // Single atom: s = mean, value F(x, mean).
  const DiscreteMeasure single = dirac(pt1(0.4));
  const QuadraticCost q2(single.atom_matrix(), nu.atom_matrix());
  const KernelPlan p2 = dim1_reduce(q2, single, nu);
  CHECK(primal_objective(q2, single, p2) ==
        doctest::Approx(0.5 * 0.36).epsilon(1e-9));

  // Reduction agrees with the LP solver on random PL instances.
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (int t = 0; t < 10; ++t) {
    const int n = 2 + t % 3, m = 2 + (t / 2) % 2;
    std::vector<Point> xa(n), ya(m);
    Eigen::VectorXd wm(n), wn(m);
    for (int i = 0; i < n; ++i) {
      xa[i] = pt1(unif(rng));
      wm[i] = unif(rng);
    }
    for (int j = 0; j < m; ++j) {
      ya[j] = pt1(0.3 + unif(rng));
      wn[j] = unif(rng);
    }
    const DiscreteMeasure rmu(xa, wm / wm.sum());
    const DiscreteMeasure rnu(ya, wn / wn.sum());
    std::vector<PiecewiseLinearCost::Piece> pieces(2);
    for (auto& piece : pieces) {
      piece.u = Eigen::MatrixXd(n, 1);
      piece.a = Eigen::VectorXd(n);
      for (int i = 0; i < n; ++i) {
        piece.u(i, 0) = unif(rng);
        piece.a[i] = unif(rng) - 0.5;
      }
    }
    const PiecewiseLinearCost cost(pieces, rnu.atom_matrix());
    const KernelPlan reduced = dim1_reduce(cost, rmu, rnu);
    const SolveReport direct = solve_primal(cost, rmu, rnu);
    REQUIRE(direct.status == SolveStatus::kSuccess);
    CHECK(reduced.feasibility_error(rmu.weights(), rnu.weights()) < 1e-10);
    CHECK(primal_objective(cost, rmu, reduced) ==
          doctest::Approx(direct.primal_value).epsilon(1e-7));
  }
}

TEST_CASE("projection-form check on forced and structured instances") {
  // Single feasible plan: p = x - S = (-1, 0), nothing to violate.
  const BrenierReport forced =
      brenier_check(dirac(pt2(0.0, 0.0)), dirac(pt2(1.0, 0.0)), 1e-8);
  CHECK(forced.pass);
  CHECK(forced.p(0, 0) == doctest::Approx(-1.0));
  CHECK(forced.p(0, 1) == doctest::Approx(0.0));

  // Spec's two-atom instance: barycenters match the sources, p = 0.
  const DiscreteMeasure mu({pt2(0.0, 0.0), pt2(2.0, 2.0)},
                           Eigen::VectorXd::Constant(2, 0.5));
  const BrenierReport two = brenier_check(mu, dirac(pt2(1.0, 1.0)), 1e-6);
  CHECK(two.pass);
  CHECK(two.p.cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("monotone support checks on the explicit kernels") {
  const UniformTriple triple = closed_form_uniform_triple(0.5, 50);
  CHECK(monotone_support_check(triple.positive_assortative, triple.grid,
                               triple.grid, +1));
  CHECK(monotone_support_check(triple.negative_assortative, triple.grid,
                               triple.grid, -1));
  CHECK_FALSE(monotone_support_check(triple.negative_assortative, triple.grid,
                                     triple.grid, +1));

  // Two crossing rows violate both orientations.
  const DiscreteMeasure mu({pt1(0.2), pt1(0.8)},
                           Eigen::VectorXd::Constant(2, 0.5));
  const DiscreteMeasure nu({pt1(0.3), pt1(0.9)},
                           Eigen::VectorXd::Constant(2, 0.5));
  KernelPlan crossing;
  crossing.q = (Eigen::MatrixXd(2, 2) << 0.3, 0.7, 0.7, 0.3).finished();
  CHECK_FALSE(monotone_support_check(crossing, mu, nu, +1));
  CHECK_FALSE(monotone_support_check(crossing, mu, nu, -1));
}

TEST_CASE("barycentric-projection identity and one-sided infimum") {
  // Single atom: exact identity.
  const DiscreteMeasure mu1 = dirac(pt2(0.4, 0.6));
  const DiscreteMeasure nu1({pt2(0.8, 0.6), pt2(0.4, 1.0)},
                            Eigen::VectorXd::Constant(2, 0.5));
  const QuadraticCost cost1(mu1.atom_matrix(), nu1.atom_matrix());
  const SolveReport rep1 = solve_primal(cost1, mu1, nu1);
  REQUIRE(rep1.status == SolveStatus::kSuccess);
  CouplingPlan pi1;
  pi1.pi = rep1.plan.q;  // mu has a single unit-weight atom
  const StructureBisReport sb1 = verify_structure_bis(
      cost1, pi1, mu1, nu1, rep1.primal_value, 10, 1e-7);
  CHECK(sb1.identity_ok);
  CHECK(sb1.inf_ok);

  // 3x3 quadratic instance with randomized alternative couplings.
  std::mt19937_64 rng(90);
  std::uniform_real_distribution<double> unif(0.2, 1.2);
  std::vector<Point> xa(3), ya(3);
  Eigen::VectorXd wm(3), wn(3);
  for (int i = 0; i < 3; ++i) {
    xa[i] = pt2(unif(rng), unif(rng));
    ya[i] = pt2(0.3 + unif(rng), 0.3 + unif(rng));
    wm[i] = unif(rng);
    wn[i] = unif(rng);
  }
  const DiscreteMeasure mu(xa, wm / wm.sum());
  const DiscreteMeasure nu(ya, wn / wn.sum());
  const QuadraticCost cost(mu.atom_matrix(), nu.atom_matrix());
  SolveOptions options;
  options.gap_tol = 1e-10;
  const SolveReport report = solve_primal(cost, mu, nu, options);
  REQUIRE(report.status == SolveStatus::kSuccess);
  CouplingPlan pi;
  pi.pi = report.plan.q;
  for (int i = 0; i < 3; ++i) pi.pi.row(i) *= mu.weight(i);
  const StructureBisReport sb = verify_structure_bis(
      cost, pi, mu, nu, report.primal_value, 50, 1e-7);
  CHECK(sb.identity_ok);
  CHECK(sb.inf_ok);
  CHECK(sb.worst_trial_slack >= -1e-7);

  // Scaling both atom sets rescales the quadratic cost by s^2; the verdict
  // must not change.
  const double s = 2.5;
  std::vector<Point> xs(3), ys(3);
  for (int i = 0; i < 3; ++i) {
    xs[i] = s * mu.atom(i);
    ys[i] = s * nu.atom(i);
  }
  const DiscreteMeasure mu_s(xs, mu.weights());
  const DiscreteMeasure nu_s(ys, nu.weights());
  const QuadraticCost cost_s(mu_s.atom_matrix(), nu_s.atom_matrix());
  const StructureBisReport sb_s = verify_structure_bis(
      cost_s, pi, mu_s, nu_s, s * s * report.primal_value, 50, 1e-7);
  CHECK(sb_s.identity_ok == sb.identity_ok);
  CHECK(sb_s.inf_ok == sb.inf_ok);
}

TEST_CASE("articulation between primal and dual optimizers") {
  // Single atom: Q_F phi equals phi(S) + F(x, S) exactly.
  const DiscreteMeasure mu = dirac(pt2(0.6, 0.8));
  const DiscreteMeasure nu({pt2(0.9, 0.5), pt2(0.4, 1.1)},
                           Eigen::VectorXd::Constant(2, 0.5));
  const QuadraticCost cost(mu.atom_matrix(), nu.atom_matrix());
  SolveOptions options;
  options.gap_tol = 1e-10;
  const SolveReport report = solve_primal(cost, mu, nu, options);
  REQUIRE(report.status == SolveStatus::kSuccess);
  REQUIRE(report.potential.conical);
  ConicalPotential phi;
  phi.directions = report.potential.directions;
  const ArticulationReport ok =
      articulation_check(report.plan, phi, cost, mu, 1e-6);
  CHECK(ok.pass);

  // Perturbing the plan breaks the equality.
  KernelPlan shifted = report.plan;
  shifted.q(0, 0) += 0.1;
  const ArticulationReport bad =
      articulation_check(shifted, phi, cost, mu, 1e-6);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("articulation on random quadratic instances") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unif(0.2, 1.2);
  for (int t = 0; t < 8; ++t) {
    const int n = 2 + t % 3, m = 2 + (t / 2) % 3;
    std::vector<Point> xa(n), ya(m);
    Eigen::VectorXd wm(n), wn(m);
    for (int i = 0; i < n; ++i) {
      xa[i] = pt2(unif(rng) - 0.4, unif(rng));
      wm[i] = unif(rng);
    }
    for (int j = 0; j < m; ++j) {
      ya[j] = pt2(0.3 + unif(rng), 0.3 + unif(rng));
      wn[j] = unif(rng);
    }
    const DiscreteMeasure mu(xa, wm / wm.sum());
    const DiscreteMeasure nu(ya, wn / wn.sum());
    const QuadraticCost cost(mu.atom_matrix(), nu.atom_matrix());
    SolveOptions options;
    options.gap_tol = 1e-11;
    const SolveReport report = solve_primal(cost, mu, nu, options);
    REQUIRE(report.status == SolveStatus::kSuccess);
    ConicalPotential phi;
    phi.directions = report.potential.directions;
    const ArticulationReport check =
        articulation_check(report.plan, phi, cost, mu, 1e-6);
    CHECK(check.pass);
  }
}
