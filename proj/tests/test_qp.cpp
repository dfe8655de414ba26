#include "uwot/qp.hpp"

#include <random>

#include "doctest.h"

using namespace uwot;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// Brute-force projection onto a triangle via a fine barycentric grid;
// independent of the implementation path.
Eigen::VectorXd triangle_grid_oracle(const std::vector<Eigen::VectorXd>& pts,
                                     const Eigen::VectorXd& query, int steps) {
  Eigen::VectorXd best;
  double best_dist = 1e300;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j + i <= steps; ++j) {
      const double a = static_cast<double>(i) / steps;
      const double b = static_cast<double>(j) / steps;
      const Eigen::VectorXd p =
          a * pts[0] + b * pts[1] + (1 - a - b) * pts[2];
      const double d = (p - query).squaredNorm();
      if (d < best_dist) {
        best_dist = d;
        best = p;
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("projection onto a single point") {
  const Eigen::VectorXd p = project_onto_polytope({vec2(0, 0)}, vec2(3, 4));
  CHECK(p.norm() == doctest::Approx(0.0));
}

TEST_CASE("projection onto a segment") {
  const Eigen::VectorXd p =
      project_onto_polytope({vec2(0, 0), vec2(2, 0)}, vec2(1, 5));
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.0));
}

TEST_CASE("projection onto a triangle matches the grid oracle") {
  const std::vector<Eigen::VectorXd> pts = {vec2(0, 0), vec2(1, 0), vec2(0, 1)};
  const Eigen::VectorXd oracle = triangle_grid_oracle(pts, vec2(1, 1), 2000);
  CHECK(oracle[0] == doctest::Approx(0.5).epsilon(1e-3));

  const Eigen::VectorXd p = project_onto_polytope(pts, vec2(1, 1));
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK((p - oracle).norm() <= 2e-3);
}

TEST_CASE("variational inequality and idempotence on random hulls") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int t = 0; t < 60; ++t) {
    const int d = 1 + t % 3;
    const int k = 1 + t % 5;
    std::vector<Eigen::VectorXd> pts(k);
    for (int i = 0; i < k; ++i) {
      pts[i] = Eigen::VectorXd(d);
      for (int c = 0; c < d; ++c) pts[i][c] = unif(rng);
    }
    Eigen::VectorXd query(d);
    for (int c = 0; c < d; ++c) query[c] = 2.0 * unif(rng);
    const Eigen::VectorXd p = project_onto_polytope(pts, query);
    for (const auto& v : pts)
      CHECK((query - p).dot(v - p) <= 1e-8);
    const Eigen::VectorXd again = project_onto_polytope(pts, p);
    CHECK((p - again).norm() <= 1e-8);
  }
}

TEST_CASE("hull weights reproduce the projection") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Eigen::VectorXd> pts(4);
  for (auto& p : pts) {
    p = Eigen::VectorXd(3);
    for (int c = 0; c < 3; ++c) p[c] = unif(rng);
  }
  Eigen::VectorXd w;
  const Eigen::VectorXd p =
      project_onto_polytope(pts, Eigen::VectorXd::Zero(3), 1e-10, &w);
  CHECK(w.sum() == doctest::Approx(1.0));
  CHECK(w.minCoeff() >= 0.0);
  Eigen::VectorXd combo = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < 4; ++i) combo += w[i] * pts[i];
  CHECK((combo - p).norm() <= 1e-9);
}

TEST_CASE("interior-point QP: scalar and bound-constrained cases") {
  // min 1/2 u^2 - u over u >= 0: optimum u = 1, value -1/2.
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(1, 1);
  Eigen::VectorXd q = -Eigen::VectorXd::Ones(1);
  Eigen::MatrixXd g = -Eigen::MatrixXd::Identity(1, 1);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(1);
  const QpResult res = solve_qp(p, q, g, h, Eigen::VectorXd::Ones(1));
  REQUIRE(res.status == QpStatus::kOptimal);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(res.value == doctest::Approx(-0.5).epsilon(1e-8));

  // Active bound: min 1/2 u^2 + u over u >= 0 pins u = 0.
  const QpResult res2 = solve_qp(p, -q, g, h, Eigen::VectorXd::Ones(1));
  REQUIRE(res2.status == QpStatus::kOptimal);
  CHECK(res2.x[0] == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("interior-point QP satisfies KKT on random instances") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + t % 3;
    Eigen::MatrixXd r(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(i, j) = unif(rng);
    const Eigen::MatrixXd p = r.transpose() * r + 0.1 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd q(n);
    for (int i = 0; i < n; ++i) q[i] = unif(rng);
    const Eigen::MatrixXd g = -Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
    const QpResult res = solve_qp(p, q, g, h, Eigen::VectorXd::Ones(n));
    REQUIRE(res.status == QpStatus::kOptimal);
    CHECK(res.x.minCoeff() >= -1e-9);
    // Stationarity with complementarity: grad_i >= 0, = 0 where x_i > 0.
    const Eigen::VectorXd grad = p * res.x + q;
    for (int i = 0; i < n; ++i) {
      CHECK(grad[i] >= -1e-7);
      if (res.x[i] > 1e-6) CHECK(std::abs(grad[i]) <= 1e-6);
    }
  }
}
