#include "uwot/dual.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "uwot/order.hpp"

using namespace uwot;

namespace {

Point pt1(double v) {
  Point p(1);
  p[0] = v;
  return p;
}

DiscreteMeasure dirac1(double v) {
  return DiscreteMeasure({pt1(v)}, Eigen::VectorXd::Ones(1));
}

// Brute-force oracle for K_c over a single Y atom: grid over the mass w.
double kc_grid_oracle(const std::function<double(double)>& objective,
                      double hi, int steps) {
  double best = objective(0.0);
  for (int i = 1; i <= steps; ++i)
    best = std::min(best, objective(hi * i / steps));
  return best;
}

}  // namespace

TEST_CASE("K_c against a 1-d grid oracle (quadratic, single atom)") {
  const QuadraticCost cost((Eigen::MatrixXd(1, 1) << 1.0).finished(),
                           (Eigen::MatrixXd(1, 1) << 2.0).finished());
  DualPotential f;
  f.f = Eigen::VectorXd::Ones(1);
  const double oracle = kc_grid_oracle(
      [](double w) { return w + 0.5 * std::pow(1.0 - 2.0 * w, 2); }, 2.0,
      2000000);
  CHECK(oracle == doctest::Approx(0.375).epsilon(1e-5));
  CHECK(apply_kc(cost, f, 0) == doctest::Approx(0.375).epsilon(1e-8));

  DualPotential zero;
  zero.f = Eigen::VectorXd::Zero(1);
  CHECK(apply_kc(cost, zero, 0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("K_c hits -inf when mass can be scaled up for free") {
  const PowerCost cost((Eigen::VectorXd(1) << 1.0).finished(),
                       (Eigen::VectorXd(1) << 0.5).finished(), 0.5);
  DualPotential f;
  f.f = -Eigen::VectorXd::Ones(1);
  CHECK(apply_kc(cost, f, 0) == -kInf);
  // Even f = 0 is unbounded for a strictly negative power cost.
  f.f.setZero();
  CHECK(apply_kc(cost, f, 0) == -kInf);
}

TEST_CASE("K_c for power costs matches the scale-reduction closed form") {
  Eigen::VectorXd xs(2), ys(2);
  xs << 0.6, 1.0;
  ys << 0.5, 1.5;
  const PowerCost cost(xs, ys, 0.5);
  DualPotential f;
  f.f = (Eigen::VectorXd(2) << 0.8, 0.9).finished();
  // rho = min_j f_j / y_j; value = -(1-eta) x^{1/(1-eta)} (eta/rho)^{eta/(1-eta)}.
  const double rho = std::min(0.8 / 0.5, 0.9 / 1.5);
  for (int i = 0; i < 2; ++i) {
    const double expected =
        -0.5 * std::pow(xs[i], 2.0) * std::pow(0.5 / rho, 1.0);
    CHECK(apply_kc(cost, f, i) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("minorant: rate comparison across atoms") {
  const Eigen::MatrixXd y = (Eigen::MatrixXd(2, 1) << 1.0, 2.0).finished();
  DualPotential f;
  f.f = (Eigen::VectorXd(2) << 3.0, 4.0).finished();
  const MinorantOracle fbar = minorant(f, y);
  CHECK(fbar(pt1(1.0)) == doctest::Approx(2.0));  // rate 4/2 beats 3/1
  CHECK(fbar(pt1(2.5)) == doctest::Approx(5.0));
  // fbar(y_j) <= f_j and +inf outside the cone.
  CHECK(fbar(pt1(1.0)) <= 3.0 + 1e-12);
  CHECK(fbar(pt1(2.0)) <= 4.0 + 1e-12);
  CHECK(fbar(pt1(-1.0)) == kInf);

  DualPotential zero;
  zero.f = Eigen::VectorXd::Zero(2);
  CHECK(minorant(zero, y)(pt1(1.7)) == doctest::Approx(0.0));
}

TEST_CASE("Q_F for the quadratic cost: interior and boundary minimizers") {
  ConicalPotential phi;
  phi.directions = (Eigen::MatrixXd(1, 1) << 2.0).finished();
  const QuadraticCost at3((Eigen::MatrixXd(1, 1) << 3.0).finished(),
                          (Eigen::MatrixXd(1, 1) << 1.0).finished());
  CHECK(apply_qf(at3, phi, 0) == doctest::Approx(4.0).epsilon(1e-9));
  const QuadraticCost at1((Eigen::MatrixXd(1, 1) << 1.0).finished(),
                          (Eigen::MatrixXd(1, 1) << 1.0).finished());
  CHECK(apply_qf(at1, phi, 0) == doctest::Approx(0.5).epsilon(1e-9));

  ConicalPotential flat;
  flat.directions = Eigen::MatrixXd::Zero(1, 1);
  CHECK(apply_qf(at3, flat, 0) <= at3.f_value(0, Eigen::VectorXd::Zero(1)));
  CHECK(apply_qf(at3, flat, 0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("LP duality: extracted certificate closes the gap") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (int t = 0; t < 10; ++t) {
    const int n = 2 + t % 3, m = 2 + (t / 2) % 3;
    std::vector<Point> xa(n), ya(m);
    Eigen::VectorXd wmu(n), wnu(m);
    for (int i = 0; i < n; ++i) {
      xa[i] = pt1(unif(rng));
      wmu[i] = unif(rng);
    }
    for (int j = 0; j < m; ++j) {
      ya[j] = pt1(0.3 + unif(rng));
      wnu[j] = unif(rng);
    }
    const DiscreteMeasure mu(xa, wmu / wmu.sum());
    const DiscreteMeasure nu(ya, wnu / wnu.sum());
    AffineSupCost::Piece p1, p2;
    p1.a = Eigen::VectorXd::Zero(n);
    p1.b = Eigen::MatrixXd(n, m);
    p2.a = Eigen::VectorXd::Constant(n, -0.1);
    p2.b = Eigen::MatrixXd(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        p1.b(i, j) = unif(rng);
        p2.b(i, j) = unif(rng);
      }
    const AffineSupCost cost({p1, p2});
    const SolveReport report = solve_primal(cost, mu, nu);
    REQUIRE(report.status == SolveStatus::kSuccess);
    CHECK(report.gap <= 1e-8 * (1.0 + std::abs(report.primal_value)));

    // The potential is a true dual point: weak duality from any feasible plan.
    DualPotential f;
    f.f = report.potential.f;
    const double dual = dual_value(cost, f, mu, nu);
    CHECK(dual == doctest::Approx(report.primal_value).epsilon(1e-8));
  }
}

TEST_CASE("single-atom duality is exact") {
  const DiscreteMeasure mu = dirac1(0.3);
  const DiscreteMeasure nu = dirac1(1.1);
  AffineSupCost::Piece piece;
  piece.a = (Eigen::VectorXd(1) << 0.2).finished();
  piece.b = (Eigen::MatrixXd(1, 1) << 0.9).finished();
  const AffineSupCost cost({piece});
  const SolveReport report = solve_primal(cost, mu, nu);
  REQUIRE(report.status == SolveStatus::kSuccess);
  DualPotential f;
  f.f = report.potential.f;
  // K_c f(x) - f(y) = c(x, delta_y).
  const double target = eval_cost(cost, 0, Eigen::VectorXd::Ones(1));
  CHECK(apply_kc(cost, f, 0) - f.f[0] == doctest::Approx(target).epsilon(1e-9));
}

TEST_CASE("dual value at f = 0 lower-bounds the optimum") {
  const DiscreteMeasure mu = dirac1(0.5);
  const DiscreteMeasure nu = dirac1(1.0);
  const QuadraticCost cost(mu.atom_matrix(), nu.atom_matrix());
  DualPotential zero;
  zero.f = Eigen::VectorXd::Zero(1);
  const double lower = dual_value(cost, zero, mu, nu);
  const SolveReport report = solve_primal(cost, mu, nu);
  CHECK(lower <= report.primal_value + 1e-10);
}

TEST_CASE("a coarse potential search almost attains the one-atom cost") {
  // mu = delta_x, nu = delta_y: sup_f K_c f(x) - f(y) reaches c(x, delta_y).
  const DiscreteMeasure mu = dirac1(0.4);
  const DiscreteMeasure nu = dirac1(1.2);
  const QuadraticCost cost(mu.atom_matrix(), nu.atom_matrix());
  const double target = eval_cost(cost, 0, Eigen::VectorXd::Ones(1));
  double best = -kInf;
  for (double fv = -2.0; fv <= 2.0; fv += 0.001) {
    DualPotential f;
    f.f = Eigen::VectorXd::Constant(1, fv);
    best = std::max(best, dual_value(cost, f, mu, nu));
    CHECK(best <= target + 1e-9);  // weak duality throughout
  }
  CHECK(best == doctest::Approx(target).epsilon(1e-4));
}

TEST_CASE("conical dual bound") {
  // Quadratic, mu = delta_0, Y = {1}, lambda = 2: M = 1/2 |0-2|^2 = 2.
  const QuadraticCost cost((Eigen::MatrixXd(1, 1) << 0.0).finished(),
                           (Eigen::MatrixXd(1, 1) << 1.0).finished());
  const DiscreteMeasure mu = dirac1(0.0);
  const ConicalDualBound bound = dual_bound_conical(cost, mu, 2.0);
  CHECK(bound.m == doctest::Approx(2.0));
  CHECK(bound.lower_bound == doctest::Approx(-2.0));
  CHECK_THROWS_AS(dual_bound_conical(cost, mu, 1.0), std::invalid_argument);

  // Nonpositive costs give nonnegative bounds.
  const PowerCost power((Eigen::VectorXd(1) << 1.0).finished(),
                        (Eigen::VectorXd(1) << 1.0).finished(), 0.5);
  const ConicalDualBound nb = dual_bound_conical(power, mu, 2.0);
  CHECK(nb.m <= 0.0);
  CHECK(nb.lower_bound >= 0.0);
  // Large scales push the bound toward zero: |bound| ~ lambda^{eta - 1}.
  const ConicalDualBound far = dual_bound_conical(power, dirac1(1.0), 1e6);
  CHECK(std::abs(far.lower_bound) < 2e-3);
  const ConicalDualBound farther = dual_bound_conical(power, dirac1(1.0), 1e8);
  CHECK(std::abs(farther.lower_bound) < std::abs(far.lower_bound));
}

TEST_CASE("composite optimality conditions") {
  // One atom each: f(y) = -G'(F) F passes with equality.
  Eigen::MatrixXd fxy(1, 1);
  fxy << 1.5;
  const CompositeCost cost(
      fxy, [](double u) { return u * u; }, [](double u) { return 2 * u; }, 0.0,
      kInf);
  const DiscreteMeasure mu = dirac1(0.5);
  KernelPlan plan;
  plan.q = Eigen::MatrixXd::Ones(1, 1);
  const double u = 1.5;
  DualPotential f;
  f.f = Eigen::VectorXd::Constant(1, -2.0 * u * 1.5);
  const OptimalityReport ok = optimality_conditions_gf(plan, f, cost, mu, 1e-9);
  CHECK(ok.pass);

  DualPotential bumped;
  bumped.f = f.f.array() + 1.0;
  const OptimalityReport bad =
      optimality_conditions_gf(plan, bumped, cost, mu, 1e-9);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("composite optimality holds at a solver optimum") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  const int n = 4, m = 3;
  std::vector<Point> xa(n), ya(m);
  Eigen::VectorXd wmu(n), wnu(m);
  for (int i = 0; i < n; ++i) {
    xa[i] = pt1(0.1 + 0.25 * i);
    wmu[i] = unif(rng);
  }
  for (int j = 0; j < m; ++j) {
    ya[j] = pt1(0.2 + 0.4 * j);
    wnu[j] = unif(rng);
  }
  const DiscreteMeasure mu(xa, wmu / wmu.sum());
  const DiscreteMeasure nu(ya, wnu / wnu.sum());
  Eigen::MatrixXd fxy(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      fxy(i, j) = std::exp(-xa[i][0] * ya[j][0]);
  const CompositeCost cost(
      fxy, [](double u) { return u * u; }, [](double u) { return 2 * u; }, 0.0,
      kInf);
  SolveOptions options;
  options.gap_tol = 1e-10;
  const SolveReport report = solve_primal(cost, mu, nu, options);
  REQUIRE(report.status == SolveStatus::kSuccess);
  DualPotential f;
  f.f = report.potential.f;
  const OptimalityReport check =
      optimality_conditions_gf(report.plan, f, cost, mu, 1e-6);
  CHECK(check.pass);
}

TEST_CASE("nonpositive conical dual certificate for the power cost") {
  const int n = 32;
  std::vector<Point> atoms(n);
  for (int i = 0; i < n; ++i) atoms[i] = pt1((i + 0.5) / n);
  const DiscreteMeasure grid(atoms, Eigen::VectorXd::Constant(n, 1.0 / n));
  const PowerCost cost(grid.atom_matrix().col(0), grid.atom_matrix().col(0),
                       0.5);
  const SolveReport report = solve_primal(cost, grid, grid);
  REQUIRE(report.status == SolveStatus::kSuccess);
  REQUIRE(report.potential.conical);
  ConicalPotential phi;
  phi.directions = report.potential.directions;
  const NonpositiveConicalReport check = check_nonpositive_conical_dual(
      cost, phi, grid, grid, report.primal_value, 1e-7);
  CHECK(check.pass);
  CHECK(check.min_on_generators > 0.0);

  // Doubling the potential must keep weak duality.
  ConicalPotential doubled;
  doubled.directions = 2.0 * phi.directions;
  CHECK(dual_value(cost, doubled, grid, grid) <= report.primal_value + 1e-9);
}

TEST_CASE("nonpositive conical dual certificate for a sigma-norm instance") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> aval(1.0, 2.0);
  const DiscreteMeasure mu(
      {(Eigen::Vector2d() << 0.4, 0.8).finished(),
       (Eigen::Vector2d() << 1.0, 0.5).finished()},
      Eigen::VectorXd::Constant(2, 0.5));
  const DiscreteMeasure nu(
      {(Eigen::Vector2d() << 0.5, 1.0).finished(),
       (Eigen::Vector2d() << 1.2, 0.6).finished()},
      (Eigen::VectorXd(2) << 0.4, 0.6).finished());
  std::vector<Eigen::MatrixXd> mats;
  for (int i = 0; i < 2; ++i) {
    Eigen::MatrixXd a(2, 2);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) a(r, c) = aval(rng);
    mats.push_back(a);
  }
  const SigmaNormCost cost(mats, nu.atom_matrix(), 1.0, 0.5);
  SolveOptions options;
  options.gap_tol = 1e-9;
  const SolveReport report = solve_primal(cost, mu, nu, options);
  REQUIRE(report.status == SolveStatus::kSuccess);
  ConicalPotential phi;
  phi.directions = report.potential.directions;
  const NonpositiveConicalReport check = check_nonpositive_conical_dual(
      cost, phi, mu, nu, report.primal_value, 1e-6);
  CHECK(check.pass);
  CHECK(check.gap < 1e-6);
}
