#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "uwot/costs.hpp"
#include "uwot/order.hpp"
#include "uwot/primal.hpp"

namespace {

using namespace uwot;

DiscreteMeasure random_measure(std::mt19937_64& rng, int n, int d, double lo,
                               double hi) {
  std::uniform_real_distribution<double> unif(lo, hi);
  std::vector<Point> atoms(n);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    atoms[i] = Point(d);
    for (int k = 0; k < d; ++k) atoms[i][k] = unif(rng);
    w[i] = 0.2 + unif(rng);
  }
  return DiscreteMeasure(atoms, w / w.sum());
}

void BM_SolveLpEpigraph(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  const DiscreteMeasure nu = random_measure(rng, n, 2, 0.3, 1.3);
  const DiscreteMeasure mu = random_measure(rng, n, 2, 0.0, 1.0);
  std::uniform_real_distribution<double> c(0.05, 1.0);
  std::vector<PiecewiseLinearCost::Piece> pieces(2);
  for (auto& piece : pieces) {
    piece.u = Eigen::MatrixXd(n, 2);
    piece.a = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) {
      piece.u(i, 0) = c(rng);
      piece.u(i, 1) = c(rng);
      piece.a[i] = c(rng) - 0.5;
    }
  }
  const PiecewiseLinearCost cost(pieces, nu.atom_matrix());
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_primal(cost, mu, nu));
  }
}
BENCHMARK(BM_SolveLpEpigraph)->Arg(4)->Arg(8)->Arg(16);

void BM_SolveQuadraticFw(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  const DiscreteMeasure nu = random_measure(rng, n, 2, 0.3, 1.3);
  const DiscreteMeasure mu = random_measure(rng, n, 2, 0.0, 1.0);
  const QuadraticCost cost(mu.atom_matrix(), nu.atom_matrix());
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_primal(cost, mu, nu));
  }
}
BENCHMARK(BM_SolveQuadraticFw)->Arg(4)->Arg(8)->Arg(16);

void BM_PowerClosedForm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<Point> atoms(n);
  for (int i = 0; i < n; ++i) {
    atoms[i] = Point(1);
    atoms[i][0] = (i + 0.5) / n;
  }
  const DiscreteMeasure grid(atoms, Eigen::VectorXd::Constant(n, 1.0 / n));
  for (auto _ : state) {
    benchmark::DoNotOptimize(closed_form_power(grid, grid, 0.5));
  }
}
BENCHMARK(BM_PowerClosedForm)->Arg(200)->Arg(1000);

void BM_PhcOrderOracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  const DiscreteMeasure nu = random_measure(rng, n, 2, 0.3, 1.3);
  const DiscreteMeasure mu = random_measure(rng, n, 2, 0.2, 1.4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_phc_order(mu, nu));
  }
}
BENCHMARK(BM_PhcOrderOracle)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
