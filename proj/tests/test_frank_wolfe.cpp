#include "uwot/frank_wolfe.hpp"

#include <random>

#include "doctest.h"

using namespace uwot;

namespace {

// Separable quadratic pulled toward a target table.
FwValueFn pull_value(const Eigen::MatrixXd& target) {
  return [target](const Eigen::MatrixXd& q) {
    return 0.5 * (q - target).squaredNorm();
  };
}
FwGradFn pull_grad(const Eigen::MatrixXd& target) {
  return [target](const Eigen::MatrixXd& q) -> Eigen::MatrixXd {
    return q - target;
  };
}

}  // namespace

TEST_CASE("constant objective converges immediately with zero gap") {
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(3, 1.0 / 3);
  const Eigen::VectorXd nu = Eigen::VectorXd::Constant(2, 0.5);
  const FwState state = fw_minimize(
      [](const Eigen::MatrixXd&) { return 1.0; },
      [](const Eigen::MatrixXd& q) { return Eigen::MatrixXd::Zero(q.rows(), q.cols()); },
      mu, nu);
  CHECK(state.converged);
  CHECK(state.fw_gap == doctest::Approx(0.0));
  CHECK(state.iterations == 0);
}

TEST_CASE("single row: the unique feasible point is reached in one step") {
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(1, 1.0);
  Eigen::VectorXd nu(3);
  nu << 0.2, 0.3, 0.5;
  FwOptions options;
  options.step_rule = FwStepRule::kHarmonic;
  options.pairwise = false;
  const FwState state = fw_minimize(
      [](const Eigen::MatrixXd& q) { return q.squaredNorm(); },
      [](const Eigen::MatrixXd& q) -> Eigen::MatrixXd { return 2 * q; }, mu, nu,
      options);
  for (int j = 0; j < 3; ++j) CHECK(state.q(0, j) == doctest::Approx(nu[j]));
}

TEST_CASE("vertex minimizer is found against closed-form comparison") {
  // Target the vertex that parks each column on row 0; the minimizer over
  // the polytope is that vertex itself.
  const int n = 3, m = 2;
  Eigen::VectorXd mu(n), nu(m);
  mu << 0.5, 0.25, 0.25;
  nu << 0.4, 0.6;
  Eigen::MatrixXd vertex = Eigen::MatrixXd::Zero(n, m);
  for (int j = 0; j < m; ++j) vertex(0, j) = nu[j] / mu[0];
  FwOptions options;
  options.gap_tol = 1e-10;
  const FwState state =
      fw_minimize(pull_value(vertex), pull_grad(vertex), mu, nu, options);
  CHECK(state.converged);
  CHECK(state.fw_gap < 1e-6);
  CHECK((state.q - vertex).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("iterates stay feasible and the gap certifies optimality") {
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (int t = 0; t < 10; ++t) {
    const int n = 2 + t % 4, m = 2 + (t / 2) % 3;
    Eigen::VectorXd mu(n), nu(m);
    for (int i = 0; i < n; ++i) mu[i] = unif(rng);
    for (int j = 0; j < m; ++j) nu[j] = unif(rng);
    mu /= mu.sum();
    nu /= nu.sum();
    Eigen::MatrixXd target(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) target(i, j) = unif(rng);

    FwOptions options;
    options.gap_tol = 1e-9;
    const FwState state =
        fw_minimize(pull_value(target), pull_grad(target), mu, nu, options);
    CHECK(state.converged);
    CHECK((state.q.transpose() * mu - nu).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(state.q.minCoeff() >= 0.0);
    // Gap bounds the suboptimality of a convex objective.
    const FwState longer = fw_minimize(pull_value(target), pull_grad(target),
                                       mu, nu, FwOptions{200000, 1e-12});
    CHECK(state.value <= longer.value + state.fw_gap + 1e-12);
  }
}

TEST_CASE("harmonic steps also converge, just more slowly") {
  Eigen::VectorXd mu(2), nu(2);
  mu << 0.5, 0.5;
  nu << 0.5, 0.5;
  Eigen::MatrixXd target(2, 2);
  target << 0.7, 0.2, 0.3, 0.8;
  FwOptions options;
  options.step_rule = FwStepRule::kHarmonic;
  options.pairwise = false;
  options.gap_tol = 1e-6;
  options.max_iters = 200000;
  const FwState state =
      fw_minimize(pull_value(target), pull_grad(target), mu, nu, options);
  CHECK(state.fw_gap <= 1e-6);
}
