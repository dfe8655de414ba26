#include "uwot/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "uwot/costs.hpp"
#include "uwot/dual.hpp"
#include "uwot/frank_wolfe.hpp"
#include "uwot/geometry.hpp"
#include "uwot/lp.hpp"
#include "uwot/order.hpp"
#include "uwot/primal.hpp"
#include "uwot/qp.hpp"

namespace uwot {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// --------------------------------------------------------------------------
// Instance generators (all draws go through the caller's engine, so suites
// are reproducible under a fixed seed).

DiscreteMeasure midpoint_grid(int n) {
  std::vector<Point> atoms(n);
  for (int i = 0; i < n; ++i) {
    Point p(1);
    p[0] = (i + 0.5) / n;
    atoms[i] = p;
  }
  return DiscreteMeasure(atoms, Eigen::VectorXd::Constant(n, 1.0 / n));
}

DiscreteMeasure inclusive_grid(int n) {  // contains both endpoints of [0,1]
  std::vector<Point> atoms(n);
  for (int i = 0; i < n; ++i) {
    Point p(1);
    p[0] = static_cast<double>(i) / (n - 1);
    atoms[i] = p;
  }
  return DiscreteMeasure(atoms, Eigen::VectorXd::Constant(n, 1.0 / n));
}

DiscreteMeasure dirac(const Point& p) {
  return DiscreteMeasure({p}, Eigen::VectorXd::Ones(1));
}

Point point1(double v) {
  Point p(1);
  p[0] = v;
  return p;
}

Eigen::VectorXd random_simplex(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = unif(rng);
  return w / w.sum();
}

DiscreteMeasure random_measure(std::mt19937_64& rng, int n, int d, double lo,
                               double hi) {
  std::uniform_real_distribution<double> unif(lo, hi);
  std::vector<Point> atoms(n);
  for (int i = 0; i < n; ++i) {
    Point p(d);
    for (int k = 0; k < d; ++k) p[k] = unif(rng);
    atoms[i] = p;
  }
  return DiscreteMeasure(atoms, random_simplex(rng, n));
}

std::unique_ptr<PiecewiseLinearCost> random_pl_cost(std::mt19937_64& rng, int n,
                                                    int d,
                                                    const Eigen::MatrixXd& y) {
  std::uniform_int_distribution<int> npieces(1, 3);
  std::uniform_real_distribution<double> ucoef(0.05, 1.0);
  std::uniform_real_distribution<double> acoef(-0.5, 0.5);
  const int k = npieces(rng);
  std::vector<PiecewiseLinearCost::Piece> pieces(k);
  for (int p = 0; p < k; ++p) {
    pieces[p].u = Eigen::MatrixXd(n, d);
    pieces[p].a = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < d; ++c) pieces[p].u(i, c) = ucoef(rng);
      pieces[p].a[i] = acoef(rng);
    }
  }
  return std::make_unique<PiecewiseLinearCost>(std::move(pieces), y);
}

std::unique_ptr<AffineSupCost> random_affine_cost(std::mt19937_64& rng, int n,
                                                  int m) {
  std::uniform_int_distribution<int> npieces(1, 3);
  std::uniform_real_distribution<double> bcoef(0.05, 1.0);
  std::uniform_real_distribution<double> acoef(-0.5, 0.5);
  const int k = npieces(rng);
  std::vector<AffineSupCost::Piece> pieces(k);
  for (int p = 0; p < k; ++p) {
    pieces[p].a = Eigen::VectorXd(n);
    pieces[p].b = Eigen::MatrixXd(n, m);
    for (int i = 0; i < n; ++i) {
      pieces[p].a[i] = acoef(rng);
      for (int j = 0; j < m; ++j) pieces[p].b(i, j) = bcoef(rng);
    }
  }
  return std::make_unique<AffineSupCost>(std::move(pieces));
}

std::unique_ptr<CompositeCost> make_exp_composite(const DiscreteMeasure& mu,
                                                  const DiscreteMeasure& nu,
                                                  double sign) {
  Eigen::MatrixXd fxy(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j)
      fxy(i, j) = std::exp(sign * mu.atom(i)[0] * nu.atom(j)[0]);
  return std::make_unique<CompositeCost>(
      fxy, [](double u) { return u * u; }, [](double u) { return 2 * u; }, 0.0,
      kInf);
}

// Feasible plan with randomized support: scale a positive random table to
// the nu column sums.
Eigen::MatrixXd random_feasible_plan(std::mt19937_64& rng,
                                     const Eigen::VectorXd& mu,
                                     const Eigen::VectorXd& nu) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  Eigen::MatrixXd q(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) q(i, j) = unif(rng);
  for (int j = 0; j < nu.size(); ++j) {
    const double col = mu.dot(q.col(j));
    q.col(j) *= nu[j] / col;
  }
  return q;
}

// mu constructed as the barycenter image of a random kernel, so that
// mu <=_phc nu holds by construction.
DiscreteMeasure dominated_measure(std::mt19937_64& rng,
                                  const DiscreteMeasure& nu, int n) {
  const Eigen::VectorXd w = random_simplex(rng, n);
  const Eigen::MatrixXd q = random_feasible_plan(rng, w, nu.weights());
  const Eigen::MatrixXd s = q * nu.atom_matrix();
  std::vector<Point> atoms(n);
  for (int i = 0; i < n; ++i) atoms[i] = s.row(i).transpose();
  return DiscreteMeasure(atoms, w);
}

// --------------------------------------------------------------------------
// Acceptance criteria.

CheckResult criterion_power_closed_form() {
  CheckResult result{"1 power closed form (n=200, eta=1/2)", false, ""};
  const auto t0 = Clock::now();
  const double eta = 0.5;
  const int n = 200;
  const UniformTriple triple = closed_form_uniform_triple(eta, n);
  const DiscreteMeasure& grid = triple.grid;
  const PowerCost cost(grid.atom_matrix().col(0), grid.atom_matrix().col(0),
                       eta);

  const SolveReport report = solve_primal(cost, grid, grid);
  double z = 0.0, mean_y = 0.0;
  for (int i = 0; i < n; ++i) {
    z += grid.weight(i) * grid.atom(i)[0] * grid.atom(i)[0];
    mean_y += grid.weight(i) * grid.atom(i)[0];
  }
  const double formula = -std::sqrt(z) * std::sqrt(mean_y);
  const double dev = std::abs(report.primal_value - formula);

  const double v0 = primal_objective(cost, grid, triple.random_sorting);
  const double v1 = primal_objective(cost, grid, triple.positive_assortative);
  const double v2 = primal_objective(cost, grid, triple.negative_assortative);
  const double spread = std::max({std::abs(v0 - v1), std::abs(v0 - v2),
                                  std::abs(v1 - v2)});
  const double elapsed = seconds_since(t0);
  result.pass = report.status == SolveStatus::kSuccess && dev <= 5e-3 &&
                spread <= 5e-3 && elapsed < 5.0;
  result.detail = "value " + num(report.primal_value) + " vs formula " +
                  num(formula) + ", kernel spread " + num(spread) + ", " +
                  num(elapsed) + "s";
  return result;
}

CheckResult criterion_squared_mean() {
  CheckResult result{"2 squared-mean cost vs discrete identity (n=100)", false,
                     ""};
  const int n = 100;
  const DiscreteMeasure mu = midpoint_grid(n);
  const DiscreteMeasure nu = dirac(point1(2.0));
  Eigen::MatrixXd fxy(n, 1);
  for (int i = 0; i < n; ++i) fxy(i, 0) = 2.0 - mu.atom(i)[0];
  const CompositeCost cost(
      fxy, [](double u) { return u * u; }, [](double u) { return 2 * u; }, 0.0,
      kInf);

  SolveOptions options;
  options.gap_tol = 1e-10;
  const SolveReport report = solve_primal(cost, mu, nu, options);
  double denom = 0.0;
  for (int i = 0; i < n; ++i)
    denom += mu.weight(i) / std::pow(2.0 - mu.atom(i)[0], 2.0);
  const double closed = 1.0 / denom;
  const double dev = std::abs(report.primal_value - closed);

  const Eigen::VectorXd sizes = report.plan.sizes();
  double worst_rel = 0.0;
  for (int i = 0; i < n; ++i) {
    const double expected = closed / std::pow(2.0 - mu.atom(i)[0], 2.0);
    worst_rel = std::max(worst_rel,
                         std::abs(sizes[i] - expected) / std::abs(expected));
  }
  result.pass = report.status == SolveStatus::kSuccess && dev <= 1e-8 &&
                std::abs(report.primal_value - 2.0) <= 0.01 &&
                worst_rel <= 1e-6;
  result.detail = "value " + num(report.primal_value) + " vs " + num(closed) +
                  ", size profile rel err " + num(worst_rel);
  return result;
}

CheckResult criterion_linear_cost_grid() {
  CheckResult result{"3 linear-in-m cost and extended functional", false, ""};
  const int n = 101;  // inclusive grid contains the atom x = 1
  const DiscreteMeasure mu = inclusive_grid(n);
  const DiscreteMeasure nu = dirac(point1(2.0));
  AffineSupCost::Piece piece;
  piece.a = Eigen::VectorXd::Zero(n);
  piece.b = Eigen::MatrixXd(n, 1);
  for (int i = 0; i < n; ++i)
    piece.b(i, 0) = std::pow(mu.atom(i)[0] - 2.0, 2.0);
  const AffineSupCost cost({piece});

  const SolveReport report = solve_primal(cost, mu, nu);
  const double dev = std::abs(report.primal_value - 1.0);

  // Extended functional on delta_1 x delta_2 with a zero-weight atom at 1.
  const DiscreteMeasure mu2({point1(0.0), point1(1.0)},
                            (Eigen::VectorXd(2) << 1.0, 0.0).finished());
  AffineSupCost::Piece piece2;
  piece2.a = Eigen::VectorXd::Zero(2);
  piece2.b = Eigen::MatrixXd(2, 1);
  piece2.b(0, 0) = 4.0;  // |0 - 2|^2
  piece2.b(1, 0) = 1.0;  // |1 - 2|^2
  const AffineSupCost cost2({piece2});
  CouplingPlan pi;
  pi.pi = (Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished();
  const double bar = eval_bar_i(cost2, mu2, pi);

  result.pass =
      report.status == SolveStatus::kSuccess && dev <= 1e-8 && bar == 1.0;
  result.detail = "value " + num(report.primal_value) + ", bar-I " + num(bar);
  return result;
}

CheckResult criterion_lp_duality(std::uint64_t seed) {
  CheckResult result{"4 finite duality on random LP instances", false, ""};
  const auto t0 = Clock::now();
  std::mt19937_64 rng(seed + 4);
  std::uniform_int_distribution<int> size(2, 10);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = size(rng), m = size(rng);
    const int d = 1 + t % 2;
    const DiscreteMeasure nu = random_measure(rng, m, d, 0.3, 1.3);
    const DiscreteMeasure mu = random_measure(rng, n, d, 0.0, 1.0);
    std::unique_ptr<Cost> cost;
    if (t % 2 == 0)
      cost = random_pl_cost(rng, n, d, nu.atom_matrix());
    else
      cost = random_affine_cost(rng, n, m);
    const SolveReport report = solve_primal(*cost, mu, nu);
    if (report.status != SolveStatus::kSuccess) {
      result.detail = "instance " + std::to_string(t) + " failed to solve";
      return result;
    }
    worst = std::max(worst, report.gap / (1.0 + std::abs(report.primal_value)));
  }
  const double elapsed = seconds_since(t0);
  result.pass = worst <= 1e-8 && elapsed < 10.0;
  result.detail = "worst relative gap " + num(worst) + ", " + num(elapsed) + "s";
  return result;
}

CheckResult criterion_strassen(std::uint64_t seed) {
  CheckResult result{"5 phc-order oracle on random instances", false, ""};
  std::mt19937_64 rng(seed + 5);
  std::uniform_int_distribution<int> size(2, 8);
  int dominated_count = 0, separated_count = 0;
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + t % 2;
    const int m = size(rng);
    const int n = size(rng);
    const DiscreteMeasure nu = random_measure(rng, m, d, 0.3, 1.3);
    const DiscreteMeasure mu = (t % 4 < 2)
                                   ? dominated_measure(rng, nu, n)
                                   : random_measure(rng, n, d, 0.2, 1.5);
    const PhcWitness witness = check_phc_order(mu, nu, 1e-9);
    if (d == 1) {
      const bool oracle = phc_order_1d(mu, nu, 1e-9);
      if (witness.dominated != oracle) {
        result.detail = "instance " + std::to_string(t) +
                        ": 1-d oracle disagrees with the LP verdict";
        return result;
      }
    }
    if (witness.dominated) {
      ++dominated_count;
      const double feas =
          (witness.kernel.q.transpose() * mu.weights() - witness.nu1)
              .cwiseAbs()
              .maxCoeff();
      double bary = 0.0;
      for (int i = 0; i < mu.size(); ++i) {
        if (mu.weight(i) <= 0) continue;
        bary = std::max(
            bary, (nu.atom_matrix().transpose() *
                       witness.kernel.q.row(i).transpose() -
                   mu.atom(i))
                      .cwiseAbs()
                      .maxCoeff());
      }
      if (feas > 1e-8 || bary > 1e-8) {
        result.detail = "instance " + std::to_string(t) + ": kernel residual " +
                        num(std::max(feas, bary));
        return result;
      }
    } else {
      ++separated_count;
      if (!witness.certified || witness.margin <= 1e-9) {
        result.detail = "instance " + std::to_string(t) +
                        ": missing or weak separator, margin " +
                        num(witness.margin);
        return result;
      }
    }
  }
  result.pass = dominated_count > 0 && separated_count > 0;
  result.detail = std::to_string(dominated_count) + " dominated / " +
                  std::to_string(separated_count) + " separated";
  return result;
}

CheckResult criterion_projection_identity(std::uint64_t seed) {
  CheckResult result{"6 shortest-distance identity on PL instances", false, ""};
  std::mt19937_64 rng(seed + 6);
  std::uniform_int_distribution<int> size(2, 8);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + t % 2;
    const int n = size(rng), m = size(rng);
    const DiscreteMeasure nu = random_measure(rng, m, d, 0.3, 1.3);
    const DiscreteMeasure mu = random_measure(rng, n, d, 0.0, 1.0);
    const auto cost = random_pl_cost(rng, n, d, nu.atom_matrix());
    const ProjectionReport report = project_phc(*cost, mu, nu, 1e-7);
    if (!report.pass) {
      result.detail = "instance " + std::to_string(t) + ": mismatch " +
                      num(report.mismatch) +
                      (report.order_ok ? "" : " (order oracle failed)");
      return result;
    }
    worst = std::max(worst, report.mismatch);
  }
  result.pass = true;
  result.detail = "worst |I_c - T_F| = " + num(worst);
  return result;
}

CheckResult criterion_brenier(std::uint64_t seed) {
  CheckResult result{"7 projection form of quadratic solutions", false, ""};
  std::mt19937_64 rng(seed + 7);
  std::uniform_int_distribution<int> size(2, 8);
  double worst_vi = 0.0, worst_s = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = size(rng), m = size(rng);
    const DiscreteMeasure nu = random_measure(rng, m, 2, 0.3, 1.3);
    const DiscreteMeasure mu = random_measure(rng, n, 2, 0.0, 1.2);
    const BrenierReport report = brenier_check(mu, nu, 1e-6);
    if (!report.pass) {
      result.detail = "instance " + std::to_string(t) + ": VI violation " +
                      num(report.max_violation);
      return result;
    }
    worst_vi = std::max(worst_vi, report.max_violation);

    // Second, independent solve through a permuted instance; the barycenter
    // map must agree after undoing the permutation.
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Point> atoms(n);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) {
      atoms[i] = mu.atom(perm[i]);
      w[i] = mu.weight(perm[i]);
    }
    const DiscreteMeasure mu_perm(atoms, w);
    const BrenierReport second = brenier_check(mu_perm, nu, 1e-6);
    if (!second.pass) {
      result.detail = "instance " + std::to_string(t) + ": permuted solve failed";
      return result;
    }
    for (int i = 0; i < n; ++i) {
      const double dev = (second.s.row(i) - report.s.row(perm[i])).norm();
      worst_s = std::max(worst_s, dev);
    }
    if (worst_s > 1e-6) {
      result.detail = "instance " + std::to_string(t) +
                      ": barycenter maps differ by " + num(worst_s);
      return result;
    }
  }
  result.pass = true;
  result.detail = "worst VI " + num(worst_vi) + ", worst S deviation " +
                  num(worst_s);
  return result;
}

CheckResult criterion_monotone(std::uint64_t seed) {
  CheckResult result{"8 monotone supports for composite costs", false, ""};
  std::mt19937_64 rng(seed + 8);
  std::uniform_int_distribution<int> size(4, 30);
  for (int t = 0; t < 20; ++t) {
    const int n = size(rng);
    const int m = size(rng);
    const DiscreteMeasure mu = random_measure(rng, n, 1, 0.1, 1.1);
    const DiscreteMeasure nu = random_measure(rng, m, 1, 0.1, 1.1);
    for (const double sign : {-1.0, 1.0}) {
      const auto cost = make_exp_composite(mu, nu, sign);
      SolveOptions options;
      options.gap_tol = 1e-10;
      const SolveReport report = solve_primal(*cost, mu, nu, options);
      if (report.status != SolveStatus::kSuccess) {
        result.detail = "instance " + std::to_string(t) + " failed to solve";
        return result;
      }
      // d2 ln F / dx dy = sign, so supports are increasing for sign < 0
      // (G increasing) and decreasing for sign > 0.
      const int expected = sign < 0 ? +1 : -1;
      if (!monotone_support_check(report.plan, mu, nu, expected)) {
        result.detail = "instance " + std::to_string(t) + " sign " +
                        num(sign) + ": support not monotone";
        return result;
      }
    }
  }
  result.pass = true;
  result.detail = "20 instances, both orientations";
  return result;
}

// --------------------------------------------------------------------------
// Property batteries (criterion 9 and the CLI property suite).

struct PropertyStats {
  int violations = 0;
  double worst = 0.0;
};

std::unique_ptr<Cost> random_cost_family(std::mt19937_64& rng, int which,
                                         const DiscreteMeasure& mu,
                                         const DiscreteMeasure& nu) {
  const int n = mu.size(), m = nu.size();
  switch (which % 5) {
    case 0:
      return random_affine_cost(rng, n, m);
    case 1:
      return random_pl_cost(rng, n, nu.dim(), nu.atom_matrix());
    case 2:
      return std::make_unique<QuadraticCost>(mu.atom_matrix(), nu.atom_matrix());
    case 3: {
      if (nu.dim() == 1)
        return std::make_unique<PowerCost>(mu.atom_matrix().col(0).cwiseAbs(),
                                           nu.atom_matrix().col(0), 0.5);
      return std::make_unique<QuadraticCost>(mu.atom_matrix(), nu.atom_matrix());
    }
    default: {
      std::uniform_real_distribution<double> f(0.5, 2.0);
      Eigen::MatrixXd fxy(n, m);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) fxy(i, j) = f(rng);
      return std::make_unique<CompositeCost>(
          fxy, [](double u) { return u * u; }, [](double u) { return 2 * u; },
          0.0, kInf);
    }
  }
}

Eigen::VectorXd random_mass(std::mt19937_64& rng, int m, double hi = 2.0) {
  std::uniform_real_distribution<double> unif(0.0, hi);
  Eigen::VectorXd v(m);
  for (int j = 0; j < m; ++j) v[j] = unif(rng);
  return v;
}

CheckResult property_convexity(std::mt19937_64& rng, int checks) {
  PropertyStats stats;
  for (int t = 0; t < checks; ++t) {
    const int n = 2 + t % 3, m = 2 + (t / 2) % 3, d = 1 + t % 2;
    const DiscreteMeasure nu = random_measure(rng, m, d, 0.3, 1.3);
    const DiscreteMeasure mu = random_measure(rng, n, d, 0.1, 1.1);
    const auto cost = random_cost_family(rng, t, mu, nu);
    const Eigen::VectorXd m1 = random_mass(rng, m);
    const Eigen::VectorXd m2 = random_mass(rng, m);
    const int x = t % n;
    for (const double lam : {0.25, 0.5, 0.75}) {
      const double mix = cost->eval(x, lam * m1 + (1 - lam) * m2);
      const double bound =
          lam * cost->eval(x, m1) + (1 - lam) * cost->eval(x, m2);
      const double slack = mix - bound;
      stats.worst = std::max(stats.worst, slack);
      if (slack > 1e-9 * (1.0 + std::abs(bound))) ++stats.violations;
    }
  }
  return {"convexity in the mass argument", stats.violations == 0,
          std::to_string(checks) + " checks, worst slack " + num(stats.worst)};
}

CheckResult property_subadditivity(std::mt19937_64& rng, int checks) {
  PropertyStats stats;
  for (int t = 0; t < checks; ++t) {
    const int n = 2 + t % 3, m = 2 + (t / 2) % 3, d = 1 + t % 2;
    const DiscreteMeasure nu = random_measure(rng, m, d, 0.3, 1.3);
    const DiscreteMeasure mu = random_measure(rng, n, d, 0.1, 1.1);
    const auto cost = random_cost_family(rng, t, mu, nu);
    const Eigen::VectorXd m1 = random_mass(rng, m);
    const Eigen::VectorXd m2 = random_mass(rng, m);
    const int x = t % n;
    const double rec = cost->recession(x, m2);
    if (rec == kInf) continue;
    const double lhs = cost->eval(x, m1 + m2);
    const double rhs = cost->eval(x, m1) + rec;
    const double slack = lhs - rhs;
    stats.worst = std::max(stats.worst, slack);
    if (slack > 1e-9 * (1.0 + std::abs(rhs))) ++stats.violations;
  }
  return {"recession subadditivity", stats.violations == 0,
          std::to_string(checks) + " checks, worst slack " + num(stats.worst)};
}

CheckResult property_growth_bound(std::mt19937_64& rng, int checks) {
  PropertyStats stats;
  for (int t = 0; t < checks; ++t) {
    const int n = 2 + t % 3, m = 2 + (t / 2) % 3, d = 1 + t % 2;
    const DiscreteMeasure nu = random_measure(rng, m, d, 0.3, 1.3);
    const DiscreteMeasure mu = random_measure(rng, n, d, 0.1, 1.1);
    const int which[] = {0, 1, 3};  // families with bounded recession
    const auto cost = random_cost_family(rng, which[t % 3], mu, nu);
    const ConditionReport report = cost->conditions();
    if (!report.holds_c.value_or(false)) continue;
    const double a = report.recession_bound.value();
    double b = -kInf;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) b = std::max(b, cost->eval(i, zero));
    const Eigen::VectorXd mass = random_mass(rng, m);
    const int x = t % n;
    const double lhs = cost->eval(x, mass);
    const double rhs = b + a * mass.sum();
    const double slack = lhs - rhs;
    stats.worst = std::max(stats.worst, slack);
    if (slack > 1e-9 * (1.0 + std::abs(rhs))) ++stats.violations;

    // The certified lower bound must hold on the same draws.
    if (report.lower_bound) {
      const auto [r0, r1] = *report.lower_bound;
      if (lhs < r0 + r1 * mass.sum() - 1e-9 * (1.0 + std::abs(lhs)))
        ++stats.violations;
    }
  }
  return {"growth bounds under bounded recession", stats.violations == 0,
          std::to_string(checks) + " checks, worst slack " + num(stats.worst)};
}

CheckResult property_weak_duality(std::mt19937_64& rng, int checks) {
  PropertyStats stats;
  for (int t = 0; t < checks; ++t) {
    const int n = 2 + t % 3, m = 2 + (t / 2) % 3, d = 1 + t % 2;
    const DiscreteMeasure nu = random_measure(rng, m, d, 0.3, 1.3);
    const DiscreteMeasure mu = random_measure(rng, n, d, 0.1, 1.1);
    const auto cost = random_cost_family(rng, t, mu, nu);
    KernelPlan plan;
    plan.q = random_feasible_plan(rng, mu.weights(), nu.weights());
    const double primal = primal_objective(*cost, mu, plan);
    std::uniform_real_distribution<double> fval(-0.2, 1.5);
    DualPotential f;
    f.f = Eigen::VectorXd(m);
    for (int j = 0; j < m; ++j) f.f[j] = fval(rng);
    const double dual = dual_value(*cost, f, mu, nu);
    if (dual == -kInf) continue;
    const double slack = dual - primal;
    stats.worst = std::max(stats.worst, slack);
    if (slack > 1e-8 * (1.0 + std::abs(primal))) ++stats.violations;
  }
  return {"weak duality for arbitrary potentials", stats.violations == 0,
          std::to_string(checks) + " checks, worst slack " + num(stats.worst)};
}

CheckResult property_kc_shape(std::mt19937_64& rng, int checks) {
  // Monotonicity (f <= g implies K_c f <= K_c g) and midpoint concavity.
  PropertyStats stats;
  for (int t = 0; t < checks; ++t) {
    const int n = 2 + t % 2, m = 2 + (t / 2) % 3, d = 1 + t % 2;
    const DiscreteMeasure nu = random_measure(rng, m, d, 0.3, 1.3);
    const DiscreteMeasure mu = random_measure(rng, n, d, 0.1, 1.1);
    const int family[] = {0, 1, 4};
    const auto cost = random_cost_family(rng, family[t % 3], mu, nu);
    std::uniform_real_distribution<double> fval(-0.3, 1.2);
    std::uniform_real_distribution<double> bump(0.0, 0.7);
    DualPotential f, g;
    f.f = Eigen::VectorXd(m);
    g.f = Eigen::VectorXd(m);
    for (int j = 0; j < m; ++j) {
      f.f[j] = fval(rng);
      g.f[j] = f.f[j] + bump(rng);
    }
    const int x = t % n;
    const double kf = apply_kc(*cost, f, x);
    const double kg = apply_kc(*cost, g, x);
    if (kf != -kInf && kg != -kInf) {
      const double slack = kf - kg;
      stats.worst = std::max(stats.worst, slack);
      if (slack > 1e-8 * (1.0 + std::abs(kg))) ++stats.violations;
    } else if (kg == -kInf && kf != -kInf) {
      ++stats.violations;  // monotonicity forces K_c f = -inf too
    }

    DualPotential mid;
    mid.f = 0.5 * (f.f + g.f);
    const double kmid = apply_kc(*cost, mid, x);
    if (kf != -kInf && kg != -kInf && kmid != -kInf) {
      const double slack = 0.5 * kf + 0.5 * kg - kmid;
      stats.worst = std::max(stats.worst, slack);
      if (slack > 1e-8 * (1.0 + std::abs(kmid))) ++stats.violations;
    }
  }
  return {"K_c monotonicity and concavity", stats.violations == 0,
          std::to_string(checks) + " checks, worst slack " + num(stats.worst)};
}

CheckResult criterion_properties(std::uint64_t seed) {
  std::mt19937_64 rng(seed + 9);
  const int checks = 1000;
  const CheckResult parts[] = {
      property_convexity(rng, checks), property_subadditivity(rng, checks),
      property_growth_bound(rng, checks), property_weak_duality(rng, checks),
      property_kc_shape(rng, checks)};
  CheckResult result{"9 property batteries (1000 checks each)", true, ""};
  for (const auto& part : parts) {
    if (!part.pass) {
      result.pass = false;
      result.detail += part.name + " FAILED (" + part.detail + "); ";
    }
  }
  if (result.pass) result.detail = "convexity, subadditivity, growth, weak duality, K_c shape";
  return result;
}

}  // namespace

std::vector<CheckResult> run_golden_suite() {
  std::vector<CheckResult> results;
  results.push_back(criterion_linear_cost_grid());
  results.push_back(criterion_squared_mean());
  results.push_back(criterion_power_closed_form());

  // Monotone structure of the explicit kernels.
  {
    CheckResult r{"uniform triple kernels are sorted as announced", false, ""};
    const UniformTriple triple = closed_form_uniform_triple(0.5, 64);
    const bool pam = monotone_support_check(triple.positive_assortative,
                                            triple.grid, triple.grid, +1);
    const bool nam = monotone_support_check(triple.negative_assortative,
                                            triple.grid, triple.grid, -1);
    const double feas_pam =
        triple.positive_assortative.feasibility_error(triple.grid.weights(),
                                                      triple.grid.weights());
    const double feas_nam =
        triple.negative_assortative.feasibility_error(triple.grid.weights(),
                                                      triple.grid.weights());
    r.pass = pam && nam && feas_pam < 1e-12 && feas_nam < 1e-12;
    r.detail = "marginal error " + num(std::max(feas_pam, feas_nam));
    results.push_back(r);
  }

  // Small projection-form and shortest-distance checks.
  {
    CheckResult r{"projection form on a two-atom quadratic instance", false, ""};
    const DiscreteMeasure mu(
        {(Eigen::Vector2d() << 0.0, 0.0).finished(),
         (Eigen::Vector2d() << 2.0, 2.0).finished()},
        Eigen::VectorXd::Constant(2, 0.5));
    const DiscreteMeasure nu({(Eigen::Vector2d() << 1.0, 1.0).finished()},
                             Eigen::VectorXd::Ones(1));
    const BrenierReport report = brenier_check(mu, nu, 1e-6);
    r.pass = report.pass && report.p.cwiseAbs().maxCoeff() < 1e-6;
    r.detail = "max VI violation " + num(report.max_violation);
    results.push_back(r);
  }
  {
    CheckResult r{"shortest-distance identity on a PL instance", false, ""};
    std::mt19937_64 rng(7);
    const DiscreteMeasure nu = random_measure(rng, 5, 2, 0.3, 1.3);
    const DiscreteMeasure mu = random_measure(rng, 5, 2, 0.0, 1.0);
    const auto cost = random_pl_cost(rng, 5, 2, nu.atom_matrix());
    const ProjectionReport report = project_phc(*cost, mu, nu, 1e-7);
    r.pass = report.pass;
    r.detail = "|I_c - T_F| = " + num(report.mismatch);
    results.push_back(r);
  }
  return results;
}

std::vector<CheckResult> run_property_suite(std::uint64_t seed, int checks) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> results;
  results.push_back(property_convexity(rng, checks));
  results.push_back(property_subadditivity(rng, checks));
  results.push_back(property_growth_bound(rng, checks));
  results.push_back(property_weak_duality(rng, checks));
  results.push_back(property_kc_shape(rng, checks));

  // Cross-oracle agreement in one dimension.
  {
    PropertyStats stats;
    const int rounds = std::max(20, checks / 5);
    for (int t = 0; t < rounds; ++t) {
      const int n = 2 + t % 4, m = 2 + (t / 2) % 4;
      const DiscreteMeasure nu = random_measure(rng, m, 1, 0.3, 1.3);
      const DiscreteMeasure mu = (t % 2 == 0)
                                     ? dominated_measure(rng, nu, n)
                                     : random_measure(rng, n, 1, 0.2, 1.4);
      if (check_phc_order(mu, nu, 1e-9).dominated != phc_order_1d(mu, nu, 1e-9))
        ++stats.violations;
    }
    results.push_back({"1-d order oracle agreement", stats.violations == 0,
                       std::to_string(rounds) + " instances"});
  }

  // Joint convexity of the transport value on common atoms.
  {
    PropertyStats stats;
    const int rounds = std::max(10, checks / 20);
    for (int t = 0; t < rounds; ++t) {
      const int n = 3, m = 3, d = 1 + t % 2;
      const DiscreteMeasure nu_atoms = random_measure(rng, m, d, 0.3, 1.3);
      const DiscreteMeasure mu_atoms = random_measure(rng, n, d, 0.1, 1.1);
      const auto cost = random_pl_cost(rng, n, d, nu_atoms.atom_matrix());
      const Eigen::VectorXd mu0 = random_simplex(rng, n);
      const Eigen::VectorXd mu1 = random_simplex(rng, n);
      const Eigen::VectorXd nu0 = random_simplex(rng, m);
      const Eigen::VectorXd nu1 = random_simplex(rng, m);
      auto value = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        const DiscreteMeasure mu(mu_atoms.atoms(), a);
        const DiscreteMeasure nu(nu_atoms.atoms(), b);
        return solve_primal(*cost, mu, nu).primal_value;
      };
      const double v0 = value(mu0, nu0);
      const double v1 = value(mu1, nu1);
      for (const double lam : {0.25, 0.5, 0.75}) {
        const double vt = value(((1 - lam) * mu0 + lam * mu1).eval(),
                                ((1 - lam) * nu0 + lam * nu1).eval());
        const double bound = (1 - lam) * v0 + lam * v1;
        const double slack = vt - bound;
        stats.worst = std::max(stats.worst, slack);
        if (slack > 1e-7 * (1.0 + std::abs(bound))) ++stats.violations;
      }
    }
    results.push_back({"joint convexity of the transport value",
                       stats.violations == 0,
                       std::to_string(rounds) + " instances, worst slack " +
                           num(stats.worst)});
  }

  // Classical transport dominates the unnormalized value for linear costs.
  {
    PropertyStats stats;
    const int rounds = std::max(10, checks / 20);
    for (int t = 0; t < rounds; ++t) {
      const int n = 3 + t % 3, m = 3 + (t / 2) % 3;
      const DiscreteMeasure nu = random_measure(rng, m, 1, 0.3, 1.3);
      const DiscreteMeasure mu = random_measure(rng, n, 1, 0.1, 1.1);
      std::uniform_real_distribution<double> bcoef(0.1, 1.0);
      AffineSupCost::Piece piece;
      piece.a = Eigen::VectorXd::Zero(n);
      piece.b = Eigen::MatrixXd(n, m);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) piece.b(i, j) = bcoef(rng);
      const AffineSupCost cost({piece});
      const SolveReport free_rows = solve_primal(cost, mu, nu);
      const TransportResult restricted =
          solve_transport(piece.b, mu.weights(), nu.weights());
      const double slack = free_rows.primal_value - restricted.value;
      stats.worst = std::max(stats.worst, slack);
      if (slack > 1e-8 * (1.0 + std::abs(restricted.value)))
        ++stats.violations;
    }
    results.push_back({"row-normalized restriction only raises the value",
                       stats.violations == 0,
                       std::to_string(rounds) + " instances, worst slack " +
                           num(stats.worst)});
  }

  // Minorant: fixed point on the cone and domination on the atoms.
  {
    PropertyStats stats;
    const int rounds = std::max(20, checks / 10);
    for (int t = 0; t < rounds; ++t) {
      const int m = 2 + t % 4, d = 1 + t % 2;
      const DiscreteMeasure nu = random_measure(rng, m, d, 0.3, 1.3);
      std::uniform_real_distribution<double> fval(-1.0, 1.0);
      DualPotential f;
      f.f = Eigen::VectorXd(m);
      for (int j = 0; j < m; ++j) f.f[j] = fval(rng);
      const MinorantOracle fbar = minorant(f, nu.atom_matrix());
      Eigen::VectorXd on_atoms(m);
      for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd y = nu.atom(j);
        on_atoms[j] = fbar(y);
        if (on_atoms[j] > f.f[j] + 1e-9) ++stats.violations;
      }
      const MinorantOracle fixed = minorant(DualPotential{on_atoms},
                                            nu.atom_matrix());
      const Eigen::VectorXd w = random_mass(rng, m, 1.0);
      const Eigen::VectorXd z = nu.atom_matrix().transpose() * w;
      const double a = fbar(z), b = fixed(z);
      if (std::abs(a - b) > 1e-8 * (1.0 + std::abs(a))) ++stats.violations;
      // Positive 1-homogeneity on the sampled point.
      if (std::abs(fbar((2.0 * z).eval()) - 2.0 * a) >
          1e-8 * (1.0 + std::abs(a)))
        ++stats.violations;
    }
    results.push_back({"minorant fixed point and homogeneity",
                       stats.violations == 0, std::to_string(rounds) + " instances"});
  }

  // Cone membership invariances and projection idempotence.
  {
    PropertyStats stats;
    const int rounds = std::max(20, checks / 10);
    std::uniform_real_distribution<double> scale(0.1, 5.0);
    for (int t = 0; t < rounds; ++t) {
      const int m = 2 + t % 4, d = 1 + t % 2;
      const DiscreteMeasure nu = random_measure(rng, m, d, 0.3, 1.3);
      ConeModel cone(nu);
      const Eigen::VectorXd w = random_mass(rng, m, 1.0);
      const Eigen::VectorXd z = nu.atom_matrix().transpose() * w;
      if (!cone.contains(z)) ++stats.violations;
      if (!cone.contains((scale(rng) * z).eval())) ++stats.violations;
      std::vector<Point> shuffled = nu.atoms();
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      if (!ConeModel(shuffled).contains(z)) ++stats.violations;

      Eigen::VectorXd query(d);
      for (int k = 0; k < d; ++k) query[k] = scale(rng) - 2.0;
      const Eigen::VectorXd proj = project_onto_polytope(nu.atoms(), query);
      const Eigen::VectorXd again = project_onto_polytope(nu.atoms(), proj);
      if ((proj - again).norm() > 1e-7) ++stats.violations;
    }
    results.push_back({"cone invariances and projection idempotence",
                       stats.violations == 0, std::to_string(rounds) + " instances"});
  }
  return results;
}

std::vector<CheckResult> run_acceptance_criteria(std::uint64_t seed) {
  std::vector<CheckResult> results;
  results.push_back(criterion_power_closed_form());
  results.push_back(criterion_squared_mean());
  results.push_back(criterion_linear_cost_grid());
  results.push_back(criterion_lp_duality(seed));
  results.push_back(criterion_strassen(seed));
  results.push_back(criterion_projection_identity(seed));
  results.push_back(criterion_brenier(seed));
  results.push_back(criterion_monotone(seed));
  results.push_back(criterion_properties(seed));
  return results;
}

}  // namespace uwot
