#include "uwot/lp.hpp"

#include <functional>
#include <random>

#include "doctest.h"

using namespace uwot;

namespace {

// Independent oracle for the 2x2 transportation polytope: with marginals
// (a, 1-a) and (b, 1-b) the feasible plans are the segment between the two
// corner fillings, so the optimum sits at one of the segment endpoints.
double transport_2x2_oracle(const Eigen::MatrixXd& cost, double a1, double b1) {
  const double lo = std::max(0.0, a1 + b1 - 1.0);
  const double hi = std::min(a1, b1);
  auto value = [&](double t) {
    return cost(0, 0) * t + cost(0, 1) * (a1 - t) + cost(1, 0) * (b1 - t) +
           cost(1, 1) * (1.0 - a1 - b1 + t);
  };
  return std::min(value(lo), value(hi));
}

LinearProgram empty_constraints(int nvars) {
  LinearProgram lp;
  lp.c = Eigen::VectorXd::Zero(nvars);
  lp.a_eq = Eigen::MatrixXd::Zero(0, nvars);
  lp.b_eq = Eigen::VectorXd::Zero(0);
  lp.a_ub = Eigen::MatrixXd::Zero(0, nvars);
  lp.b_ub = Eigen::VectorXd::Zero(0);
  return lp;
}

}  // namespace

TEST_CASE("simple bound: min x subject to x >= 3") {
  LinearProgram lp = empty_constraints(1);
  lp.c[0] = 1.0;
  lp.a_ub = Eigen::MatrixXd::Constant(1, 1, -1.0);
  lp.b_ub = Eigen::VectorXd::Constant(1, -3.0);
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sol.x[0] == doctest::Approx(3.0));
  // Dual convention: objective = dual_ub' b_ub with dual_ub <= 0.
  CHECK(sol.dual_ub[0] <= 0.0);
  CHECK(sol.dual_ub.dot(lp.b_ub) == doctest::Approx(3.0));
}

TEST_CASE("infeasible system carries a Farkas certificate") {
  LinearProgram lp = empty_constraints(2);
  lp.a_eq = Eigen::MatrixXd(2, 2);
  lp.a_eq << 1, 1, 1, -1;
  lp.b_eq = Eigen::VectorXd(2);
  lp.b_eq << 1, 3;  // forces x2 = -1 < 0
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kInfeasible);
  const Eigen::VectorXd yta = lp.a_eq.transpose() * sol.farkas_eq;
  CHECK(yta.maxCoeff() <= 1e-9);
  CHECK(sol.farkas_eq.dot(lp.b_eq) > 1e-10);
}

TEST_CASE("unbounded below is detected") {
  LinearProgram lp = empty_constraints(1);
  lp.c[0] = -1.0;
  const LpSolution sol = solve_lp(lp);
  CHECK(sol.status == LpStatus::kUnbounded);
}

TEST_CASE("2x2 transportation against the vertex-enumeration oracle") {
  Eigen::MatrixXd cost(2, 2);
  cost << 0.0, 1.0, 1.0, 0.0;  // identity-favoring
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(2, 0.5);
  const TransportResult res = solve_transport(cost, a, a);
  REQUIRE(res.status == LpStatus::kOptimal);
  CHECK(res.value == doctest::Approx(transport_2x2_oracle(cost, 0.5, 0.5)));
  CHECK(res.plan(0, 0) == doctest::Approx(0.5));
  CHECK(res.plan(1, 1) == doctest::Approx(0.5));
  CHECK(res.plan(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("random transportation: strong duality and oracle agreement") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    Eigen::MatrixXd cost(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) cost(i, j) = unif(rng);
    const double a1 = 0.1 + 0.8 * unif(rng);
    const double b1 = 0.1 + 0.8 * unif(rng);
    Eigen::VectorXd a(2), b(2);
    a << a1, 1 - a1;
    b << b1, 1 - b1;
    const TransportResult res = solve_transport(cost, a, b);
    REQUIRE(res.status == LpStatus::kOptimal);
    CHECK(res.value ==
          doctest::Approx(transport_2x2_oracle(cost, a1, b1)).epsilon(1e-9));
    // Potentials reconstruct the value.
    CHECK(res.row_potential.dot(a) + res.col_potential.dot(b) ==
          doctest::Approx(res.value).epsilon(1e-9));
  }
}

TEST_CASE("dual feasibility conventions on random dense LPs") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  int optimal_seen = 0;
  for (int t = 0; t < 60; ++t) {
    const int n = 2 + t % 4;
    const int me = 1 + t % 2;
    const int mu = 1 + (t / 2) % 3;
    LinearProgram lp = empty_constraints(n);
    for (int j = 0; j < n; ++j) lp.c[j] = unif(rng) + 1.2;  // bounded below
    lp.a_eq = Eigen::MatrixXd(me, n);
    lp.b_eq = Eigen::VectorXd(me);
    for (int r = 0; r < me; ++r) {
      for (int j = 0; j < n; ++j) lp.a_eq(r, j) = unif(rng) + 1.5;
      lp.b_eq[r] = 1.0;
    }
    lp.a_ub = Eigen::MatrixXd(mu, n);
    lp.b_ub = Eigen::VectorXd(mu);
    for (int r = 0; r < mu; ++r) {
      for (int j = 0; j < n; ++j) lp.a_ub(r, j) = unif(rng);
      lp.b_ub[r] = 1.0 + unif(rng);
    }
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::kOptimal) continue;
    ++optimal_seen;
    // Primal feasibility.
    CHECK((lp.a_eq * sol.x - lp.b_eq).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((lp.a_ub * sol.x - lp.b_ub).maxCoeff() <= 1e-8);
    CHECK(sol.x.minCoeff() >= -1e-9);
    // Dual: objective match, sign, reduced-cost nonnegativity.
    CHECK(sol.dual_eq.dot(lp.b_eq) + sol.dual_ub.dot(lp.b_ub) ==
          doctest::Approx(sol.objective).epsilon(1e-8));
    CHECK(sol.dual_ub.maxCoeff() <= 1e-9);
    const Eigen::VectorXd reduced = lp.c - lp.a_eq.transpose() * sol.dual_eq -
                                    lp.a_ub.transpose() * sol.dual_ub;
    CHECK(reduced.minCoeff() >= -1e-8);
  }
  CHECK(optimal_seen > 30);
}

TEST_CASE("fuzz: equality LPs against basic-solution enumeration") {
  // Independent oracle: the optimum of a bounded feasible LP sits at a
  // basic solution, so enumerating all bases is exact for small sizes.
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  int checked = 0;
  for (int t = 0; t < 400; ++t) {
    const int n = 3 + t % 4;
    const int me = 1 + t % 2;
    LinearProgram lp = empty_constraints(n);
    for (int j = 0; j < n; ++j) lp.c[j] = unif(rng);
    lp.a_eq = Eigen::MatrixXd(me, n);
    lp.b_eq = Eigen::VectorXd(me);
    for (int r = 0; r < me; ++r) {
      for (int j = 0; j < n; ++j) lp.a_eq(r, j) = unif(rng) + 1.2;
      lp.b_eq[r] = 0.5 + std::abs(unif(rng));
    }

    double best = 1e300;
    std::vector<int> columns(n);
    for (int j = 0; j < n; ++j) columns[j] = j;
    std::vector<int> pick(me);
    std::function<void(int, int)> enumerate = [&](int offset, int depth) {
      if (depth == me) {
        Eigen::MatrixXd basis(me, me);
        for (int r = 0; r < me; ++r)
          for (int c = 0; c < me; ++c) basis(r, c) = lp.a_eq(r, pick[c]);
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
        if (!lu.isInvertible()) return;
        const Eigen::VectorXd xb = lu.solve(lp.b_eq);
        if (xb.minCoeff() < -1e-10) return;
        double value = 0.0;
        for (int c = 0; c < me; ++c) value += lp.c[pick[c]] * xb[c];
        best = std::min(best, value);
        return;
      }
      for (int j = offset; j < n; ++j) {
        pick[depth] = j;
        enumerate(j + 1, depth + 1);
      }
    };
    enumerate(0, 0);
    if (best >= 1e300) continue;  // enumeration found nothing usable

    const LpSolution sol = solve_lp(lp);
    // Negative costs can still be unbounded via null directions; only
    // compare when the solver reports an optimum.
    if (sol.status != LpStatus::kOptimal) continue;
    ++checked;
    CHECK(sol.objective == doctest::Approx(best).epsilon(1e-8));
    CHECK((lp.a_eq * sol.x - lp.b_eq).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(sol.x.minCoeff() >= -1e-9);
  }
  CHECK(checked > 200);
}

TEST_CASE("free variables round-trip through the split") {
  // The free variable must go negative to satisfy the constraint.
  LinearProgram lp = empty_constraints(2);
  lp.is_free = {true, false};
  lp.c << 1.0, 2.0;
  lp.a_eq = Eigen::MatrixXd(1, 2);
  lp.a_eq << 1.0, 1.0;
  lp.b_eq = Eigen::VectorXd::Constant(1, -2.0);
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(-2.0));
  CHECK(sol.x[1] == doctest::Approx(0.0));
}
