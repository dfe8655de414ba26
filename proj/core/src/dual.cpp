#include "uwot/dual.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "uwot/parallel.hpp"
#include "uwot/qp.hpp"

namespace uwot {
namespace {

// Epigraph LP for costs that are finite maxima of affine families:
// min f'w + t  s.t.  b_k.row(i) w - t <= -a_k(i), w >= 0. Unbounded means
// K_c f = -inf.
double kc_epigraph_lp(const std::vector<Eigen::VectorXd>& a,
                      const std::vector<Eigen::MatrixXd>& b,
                      const Eigen::VectorXd& f, int x_index) {
  const int m = static_cast<int>(f.size());
  const int k = static_cast<int>(a.size());
  LinearProgram lp;
  lp.c = Eigen::VectorXd(m + 1);
  lp.c.head(m) = f;
  lp.c[m] = 1.0;
  lp.is_free.assign(m + 1, false);
  lp.is_free[m] = true;
  lp.a_ub = Eigen::MatrixXd::Zero(k, m + 1);
  lp.b_ub = Eigen::VectorXd(k);
  for (int r = 0; r < k; ++r) {
    lp.a_ub.block(r, 0, 1, m) = b[r].row(x_index);
    lp.a_ub(r, m) = -1.0;
    lp.b_ub[r] = -a[r][x_index];
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kUnbounded) return -kInf;
  if (sol.status != LpStatus::kOptimal)
    throw std::runtime_error("K_c: epigraph LP failed");
  return sol.objective;
}

// 1-d convex minimization of rho * u + G(u) over u >= 0 by bisection on
// the nondecreasing derivative.
double kc_scalar_convex(const CompositeCost& cost, double rho) {
  // Unbounded below iff the slope stays negative at every scale.
  if (cost.g_prime_inf() != kInf && rho + cost.g_prime_inf() < 0) return -kInf;
  if (cost.g_prime_zero() != -kInf && rho + cost.g_prime_zero() >= 0)
    return cost.g(0.0);
  double hi = 1.0;
  int guard = 0;
  while (rho + cost.g_prime(hi) < 0) {
    hi *= 2.0;
    if (++guard > 200) return -kInf;  // slope never turns: treat as -inf
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rho + cost.g_prime(mid) < 0)
      lo = mid;
    else
      hi = mid;
  }
  const double u = 0.5 * (lo + hi);
  return rho * u + cost.g(u);
}

// Shared cross-section machinery for eta-homogeneous nonpositive conical
// costs: inf over directions v in co(Y) of the closed-form scale minimum
//   inf_{M >= 0} M * rho(v) - M^eta * fhat(v)
// with fhat = -F >= 0. Scale invariance means only the direction of v
// matters, so a coarse simplex search plus golden refinement along the best
// edge is accurate for the small atom counts used here.
struct CrossSection {
  double eta;
  std::function<double(const Eigen::VectorXd&)> rho;   // linear-ish rate
  std::function<double(const Eigen::VectorXd&)> fhat;  // -F(x, v) >= 0
};

double scale_min(double eta, double rho, double fhat) {
  if (fhat <= 0.0) return rho >= 0 ? 0.0 : -kInf;
  if (rho <= 0.0) return -kInf;
  // M* = (eta fhat / rho)^{1/(1-eta)} gives
  // h(M*) = -(1-eta) fhat^{1/(1-eta)} (eta/rho)^{eta/(1-eta)}.
  return -(1.0 - eta) * std::pow(fhat, 1.0 / (1.0 - eta)) *
         std::pow(eta / rho, eta / (1.0 - eta));
}

double cross_section_min(const CrossSection& cs, const Eigen::MatrixXd& y_atoms) {
  const int m = static_cast<int>(y_atoms.rows());
  auto eval_dir = [&](const Eigen::VectorXd& p) {
    const Eigen::VectorXd v = y_atoms.transpose() * p;
    return scale_min(cs.eta, cs.rho(v), cs.fhat(v));
  };

  if (m == 1) return eval_dir(Eigen::VectorXd::Ones(1));

  // Coarse pass over atoms, edges and seeded interior samples.
  double best = kInf;
  Eigen::VectorXd best_p;
  auto consider = [&](const Eigen::VectorXd& p) {
    const double v = eval_dir(p);
    if (v < best) {
      best = v;
      best_p = p;
    }
  };
  for (int j = 0; j < m; ++j) consider(Eigen::VectorXd::Unit(m, j));
  std::mt19937_64 rng(9001);
  std::exponential_distribution<double> expo(1.0);
  for (int s = 0; s < 128; ++s) {
    Eigen::VectorXd p(m);
    for (int j = 0; j < m; ++j) p[j] = expo(rng);
    consider(p / p.sum());
  }
  if (best == -kInf || !best_p.size()) return best;

  // Golden refinement along segments from the incumbent to each vertex.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int pass = 0; pass < 2; ++pass) {
    for (int j = 0; j < m; ++j) {
      const Eigen::VectorXd target = Eigen::VectorXd::Unit(m, j);
      double lo = 0.0, hi = 1.0;
      auto at = [&](double t) {
        return eval_dir(((1 - t) * best_p + t * target).eval());
      };
      double t1 = hi - gr * (hi - lo), t2 = lo + gr * (hi - lo);
      double f1 = at(t1), f2 = at(t2);
      for (int it = 0; it < 80; ++it) {
        if (f1 <= f2) {
          hi = t2;
          t2 = t1;
          f2 = f1;
          t1 = hi - gr * (hi - lo);
          f1 = at(t1);
        } else {
          lo = t1;
          t1 = t2;
          f1 = f2;
          t2 = lo + gr * (hi - lo);
          f2 = at(t2);
        }
      }
      const double t = 0.5 * (lo + hi);
      const Eigen::VectorXd cand = ((1 - t) * best_p + t * target).eval();
      const double v = eval_dir(cand);
      if (v < best) {
        best = v;
        best_p = cand;
      }
    }
  }
  return best;
}

// Generic 1-d convex scale search for oracle costs (F convex along rays).
double ray_convex_min(const std::function<double(double)>& h) {
  // h(M) = M rho + F(x, M v); convex in M.
  double hi = 1.0;
  int guard = 0;
  while (h(hi * 2.0) < h(hi)) {
    hi *= 2.0;
    if (++guard > 90) return -kInf;
  }
  double lo = 0.0;
  hi *= 2.0;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double t1 = hi - gr * hi, t2 = gr * hi;
  double f1 = h(t1), f2 = h(t2);
  for (int it = 0; it < 120; ++it) {
    if (f1 <= f2) {
      hi = t2;
      t2 = t1;
      f2 = f1;
      t1 = hi - gr * (hi - lo);
      f1 = h(t1);
    } else {
      lo = t1;
      t1 = t2;
      f1 = f2;
      t2 = lo + gr * (hi - lo);
      f2 = h(t2);
    }
  }
  return std::min({h(0.0), h(0.5 * (lo + hi))});
}

double kc_quadratic(const QuadraticCost& cost, const Eigen::VectorXd& f,
                    int x_index) {
  const Eigen::MatrixXd& y = cost.y_atoms();
  const int m = static_cast<int>(y.rows());
  const int d = cost.dim();

  // Unbounded iff some convex combination has zero barycenter and negative
  // f-cost: min f'w s.t. Y'w = 0, sum w = 1, w >= 0.
  LinearProgram ray;
  ray.c = f;
  ray.a_eq = Eigen::MatrixXd::Zero(d + 1, m);
  ray.a_eq.topRows(d) = y.transpose();
  ray.a_eq.row(d).setOnes();
  ray.b_eq = Eigen::VectorXd::Zero(d + 1);
  ray.b_eq[d] = 1.0;
  const LpSolution ray_sol = solve_lp(ray);
  if (ray_sol.status == LpStatus::kOptimal && ray_sol.objective < -1e-11)
    return -kInf;

  const Eigen::VectorXd x = cost.x_atoms().row(x_index);
  const Eigen::MatrixXd p = y * y.transpose();
  const Eigen::VectorXd q = f - y * x;
  const Eigen::MatrixXd g = -Eigen::MatrixXd::Identity(m, m);
  const Eigen::VectorXd h = Eigen::VectorXd::Zero(m);
  const QpResult res = solve_qp(p, q, g, h, Eigen::VectorXd::Ones(m));
  if (res.status == QpStatus::kFailed)
    throw std::runtime_error("K_c: quadratic QP failed");
  return res.value + 0.5 * x.squaredNorm();
}

}  // namespace

double apply_kc(const Cost& cost, const DualPotential& f, int x_index) {
  if (f.f.size() != cost.num_y())
    throw std::invalid_argument("K_c: potential size mismatch");
  switch (cost.kind()) {
    case CostKind::kAffineSup: {
      const auto& c = static_cast<const AffineSupCost&>(cost);
      std::vector<Eigen::VectorXd> a;
      std::vector<Eigen::MatrixXd> b;
      for (const auto& p : c.pieces()) {
        a.push_back(p.a);
        b.push_back(p.b);
      }
      return kc_epigraph_lp(a, b, f.f, x_index);
    }
    case CostKind::kPiecewiseLinear: {
      const auto& c = static_cast<const PiecewiseLinearCost&>(cost);
      std::vector<Eigen::VectorXd> a;
      std::vector<Eigen::MatrixXd> b;
      for (const auto& p : c.pieces()) {
        a.push_back(p.a);
        b.push_back(p.u * c.y_atoms().transpose());
      }
      return kc_epigraph_lp(a, b, f.f, x_index);
    }
    case CostKind::kQuadratic:
      return kc_quadratic(static_cast<const QuadraticCost&>(cost), f.f, x_index);
    case CostKind::kPower: {
      const auto& c = static_cast<const PowerCost&>(cost);
      const double x = c.x_values()[x_index];
      double rho = kInf;
      for (int j = 0; j < c.num_y(); ++j) {
        const double yj = c.y_atoms()(j, 0);
        if (yj > 0) {
          rho = std::min(rho, f.f[j] / yj);
        } else if (f.f[j] < 0) {
          return -kInf;
        }
      }
      if (x == 0.0) return rho == kInf || rho >= 0 ? 0.0 : -kInf;
      if (rho == kInf) return 0.0;  // no mass can move the barycenter
      if (rho <= 0.0) return -kInf;
      const double eta = c.eta();
      return -(1.0 - eta) * std::pow(x, 1.0 / (1.0 - eta)) *
             std::pow(eta / rho, eta / (1.0 - eta));
    }
    case CostKind::kSigmaNorm: {
      const auto& c = static_cast<const SigmaNormCost&>(cost);
      for (int j = 0; j < c.num_y(); ++j) {
        const bool zero_atom = c.y_atoms().row(j).norm() == 0.0;
        if (!zero_atom && f.f[j] <= 0) return -kInf;
        if (zero_atom && f.f[j] < 0) return -kInf;
      }
      CrossSection cs;
      cs.eta = c.eta();
      const Eigen::MatrixXd y = c.y_atoms();
      const Eigen::VectorXd fv = f.f;
      // rho over the cross-section: f-cost of the representing weights.
      // Minimizing over representations is itself part of the infimum, so
      // parametrize by simplex weights directly.
      const int m = c.num_y();
      auto eval_p = [&, x_index](const Eigen::VectorXd& p) {
        const double rho = fv.dot(p);
        const double fhat = -c.f_value(x_index, y.transpose() * p);
        return scale_min(c.eta(), rho, fhat);
      };
      // Reuse the cross-section search but in p-space.
      double best = kInf;
      Eigen::VectorXd best_p;
      auto consider = [&](const Eigen::VectorXd& p) {
        const double v = eval_p(p);
        if (v < best) {
          best = v;
          best_p = p;
        }
      };
      for (int j = 0; j < m; ++j) consider(Eigen::VectorXd::Unit(m, j));
      std::mt19937_64 rng(4242);
      std::exponential_distribution<double> expo(1.0);
      for (int s = 0; s < 128; ++s) {
        Eigen::VectorXd p(m);
        for (int j = 0; j < m; ++j) p[j] = expo(rng);
        consider(p / p.sum());
      }
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int pass = 0; pass < 2 && best > -kInf; ++pass) {
        for (int j = 0; j < m; ++j) {
          const Eigen::VectorXd target = Eigen::VectorXd::Unit(m, j);
          double lo = 0.0, hi = 1.0;
          auto at = [&](double t) {
            return eval_p(((1 - t) * best_p + t * target).eval());
          };
          double t1 = hi - gr * (hi - lo), t2 = lo + gr * (hi - lo);
          double f1 = at(t1), f2 = at(t2);
          for (int it = 0; it < 80; ++it) {
            if (f1 <= f2) {
              hi = t2; t2 = t1; f2 = f1;
              t1 = hi - gr * (hi - lo); f1 = at(t1);
            } else {
              lo = t1; t1 = t2; f1 = f2;
              t2 = lo + gr * (hi - lo); f2 = at(t2);
            }
          }
          const double t = 0.5 * (lo + hi);
          consider(((1 - t) * best_p + t * target).eval());
        }
      }
      return std::min(best, 0.0);
    }
    case CostKind::kComposite: {
      const auto& c = static_cast<const CompositeCost&>(cost);
      // Only the F-mass matters: for a target mass u, the cheapest carrier
      // is the atom minimizing f_j / F_ij, so the problem is scalar.
      double rho = kInf;
      for (int j = 0; j < c.num_y(); ++j)
        rho = std::min(rho, f.f[j] / c.fxy()(x_index, j));
      return kc_scalar_convex(c, rho);
    }
    case CostKind::kOracle: {
      const auto& c = static_cast<const OracleCost&>(cost);
      const int m = c.num_y();
      const Eigen::MatrixXd y = c.y_atoms();
      double best = c.f_value(x_index, Eigen::VectorXd::Zero(c.dim()));
      std::mt19937_64 rng(777);
      std::exponential_distribution<double> expo(1.0);
      for (int s = 0; s < 64 + 8 * m; ++s) {
        Eigen::VectorXd p(m);
        if (s < m) {
          p = Eigen::VectorXd::Unit(m, s);
        } else {
          for (int j = 0; j < m; ++j) p[j] = expo(rng);
          p /= p.sum();
        }
        const double rho = f.f.dot(p);
        const Eigen::VectorXd v = y.transpose() * p;
        const double val = ray_convex_min(
            [&](double scale) { return scale * rho + c.f_value(x_index, scale * v); });
        best = std::min(best, val);
        if (best == -kInf) break;
      }
      return best;
    }
  }
  throw std::logic_error("K_c: unreachable");
}

MinorantOracle::MinorantOracle(Eigen::VectorXd f, Eigen::MatrixXd y_atoms)
    : f_(std::move(f)), y_atoms_(std::move(y_atoms)) {
  if (f_.size() != y_atoms_.rows())
    throw std::invalid_argument("minorant: size mismatch");
}

double MinorantOracle::operator()(const Eigen::VectorXd& z) const {
  if (z.size() != y_atoms_.cols())
    throw std::invalid_argument("minorant: dimension mismatch");
  LinearProgram lp;
  lp.c = f_;
  lp.a_eq = y_atoms_.transpose();
  lp.b_eq = z;
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible) return kInf;  // z outside the cone
  if (sol.status == LpStatus::kUnbounded) return -kInf;
  if (sol.status != LpStatus::kOptimal)
    throw std::runtime_error("minorant: LP failed");
  return sol.objective;
}

MinorantOracle minorant(const DualPotential& f, const Eigen::MatrixXd& y_atoms) {
  return MinorantOracle(f.f, y_atoms);
}

double apply_qf(const ConicalCost& cost, const ConicalPotential& phi,
                int x_index) {
  if (phi.dim() != cost.dim())
    throw std::invalid_argument("Q_F: potential dimension mismatch");
  const Eigen::MatrixXd& y = cost.y_atoms();
  const int m = cost.num_y();

  switch (cost.kind()) {
    case CostKind::kPiecewiseLinear: {
      // LP over (w, s, t): z = Y'w, s >= phi pieces, t >= F pieces.
      const auto& c = static_cast<const PiecewiseLinearCost&>(cost);
      const int kf = static_cast<int>(c.pieces().size());
      const int kp = static_cast<int>(phi.directions.rows());
      LinearProgram lp;
      lp.c = Eigen::VectorXd::Zero(m + 2);
      lp.c[m] = 1.0;
      lp.c[m + 1] = 1.0;
      lp.is_free.assign(m + 2, false);
      lp.is_free[m] = true;
      lp.is_free[m + 1] = true;
      lp.a_ub = Eigen::MatrixXd::Zero(kp + kf, m + 2);
      lp.b_ub = Eigen::VectorXd::Zero(kp + kf);
      for (int k = 0; k < kp; ++k) {
        lp.a_ub.block(k, 0, 1, m) =
            (y * phi.directions.row(k).transpose()).transpose();
        lp.a_ub(k, m) = -1.0;
      }
      for (int k = 0; k < kf; ++k) {
        lp.a_ub.block(kp + k, 0, 1, m) =
            (y * c.pieces()[k].u.row(x_index).transpose()).transpose();
        lp.a_ub(kp + k, m + 1) = -1.0;
        lp.b_ub[kp + k] = -c.pieces()[k].a[x_index];
      }
      const LpSolution sol = solve_lp(lp);
      if (sol.status == LpStatus::kUnbounded) return -kInf;
      if (sol.status != LpStatus::kOptimal)
        throw std::runtime_error("Q_F: LP failed");
      return sol.objective;
    }
    case CostKind::kQuadratic: {
      const auto& c = static_cast<const QuadraticCost&>(cost);
      const Eigen::VectorXd x = c.x_atoms().row(x_index);
      // Unconstrained Moreau shortcut: inf_z max_k u_k.z + 1/2|x-z|^2 =
      // 1/2|x|^2 - 1/2 d(x, conv{u_k})^2, with minimizer x - p(x). Valid
      // whenever that minimizer already lies in the cone.
      std::vector<Eigen::VectorXd> dirs;
      for (int k = 0; k < phi.directions.rows(); ++k)
        dirs.push_back(phi.directions.row(k));
      const Eigen::VectorXd proj = project_onto_polytope(dirs, x);
      const Eigen::VectorXd z_star = x - proj;
      std::vector<Point> gens;
      for (int j = 0; j < m; ++j) gens.push_back(y.row(j).transpose());
      ConeModel cone(std::move(gens));
      if (z_star.norm() <= cone.default_tol() || cone.contains(z_star)) {
        return 0.5 * x.squaredNorm() - 0.5 * (x - proj).squaredNorm();
      }
      // Constrained case: IPM on (w, t), z = Y'w.
      const int kp = static_cast<int>(phi.directions.rows());
      Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m + 1, m + 1);
      p.topLeftCorner(m, m) = y * y.transpose();
      Eigen::VectorXd q(m + 1);
      q.head(m) = -y * x;
      q[m] = 1.0;
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(kp + m, m + 1);
      Eigen::VectorXd h = Eigen::VectorXd::Zero(kp + m);
      for (int k = 0; k < kp; ++k) {
        g.block(k, 0, 1, m) =
            (y * phi.directions.row(k).transpose()).transpose();
        g(k, m) = -1.0;
      }
      g.block(kp, 0, m, m) = -Eigen::MatrixXd::Identity(m, m);
      Eigen::VectorXd u0 = Eigen::VectorXd::Ones(m + 1);
      double t0 = 0.0;
      for (int k = 0; k < kp; ++k)
        t0 = std::max(t0, (y * phi.directions.row(k).transpose()).sum());
      u0[m] = t0 + 1.0;
      const QpResult res = solve_qp(p, q, g, h, u0);
      if (res.status == QpStatus::kFailed)
        throw std::runtime_error("Q_F: quadratic QP failed");
      return res.value + 0.5 * x.squaredNorm();
    }
    case CostKind::kPower:
    case CostKind::kSigmaNorm: {
      const double eta = cost.kind() == CostKind::kPower
                             ? static_cast<const PowerCost&>(cost).eta()
                             : static_cast<const SigmaNormCost&>(cost).eta();
      CrossSection cs;
      cs.eta = eta;
      cs.rho = [&phi](const Eigen::VectorXd& v) { return phi(v); };
      cs.fhat = [&cost, x_index](const Eigen::VectorXd& v) {
        return -cost.f_value(x_index, v);
      };
      return std::min(0.0, cross_section_min(cs, y));
    }
    case CostKind::kOracle: {
      const auto& c = static_cast<const OracleCost&>(cost);
      double best = c.f_value(x_index, Eigen::VectorXd::Zero(c.dim()));
      std::mt19937_64 rng(31337);
      std::exponential_distribution<double> expo(1.0);
      for (int s = 0; s < 64 + 8 * m; ++s) {
        Eigen::VectorXd pweights(m);
        if (s < m) {
          pweights = Eigen::VectorXd::Unit(m, s);
        } else {
          for (int j = 0; j < m; ++j) pweights[j] = expo(rng);
          pweights /= pweights.sum();
        }
        const Eigen::VectorXd v = y.transpose() * pweights;
        const double rho = phi(v);
        const double val = ray_convex_min([&](double scale) {
          return scale * rho + c.f_value(x_index, scale * v);
        });
        best = std::min(best, val);
        if (best == -kInf) break;
      }
      return best;
    }
    default:
      throw std::invalid_argument("Q_F: cost is not conical");
  }
}

double dual_value(const Cost& cost, const DualPotential& f,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<double> kc(mu.size(), 0.0);
  std::vector<int> rows;
  for (int i = 0; i < mu.size(); ++i)
    if (mu.weight(i) > 0) rows.push_back(i);
  parallel_for(static_cast<int>(rows.size()),
               [&](int r) { kc[rows[r]] = apply_kc(cost, f, rows[r]); });
  double total = 0.0;
  for (int i : rows) {
    if (kc[i] == -kInf) return -kInf;
    total += mu.weight(i) * kc[i];
  }
  for (int j = 0; j < nu.size(); ++j) total -= nu.weight(j) * f.f[j];
  return total;
}

double dual_value(const ConicalCost& cost, const ConicalPotential& phi,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<double> qf(mu.size(), 0.0);
  std::vector<int> rows;
  for (int i = 0; i < mu.size(); ++i)
    if (mu.weight(i) > 0) rows.push_back(i);
  parallel_for(static_cast<int>(rows.size()),
               [&](int r) { qf[rows[r]] = apply_qf(cost, phi, rows[r]); });
  double total = 0.0;
  for (int i : rows) {
    if (qf[i] == -kInf) return -kInf;
    total += mu.weight(i) * qf[i];
  }
  for (int j = 0; j < nu.size(); ++j) {
    const Eigen::VectorXd y = nu.atom(j);
    total -= nu.weight(j) * phi(y);
  }
  return total;
}

DualPotential extract_dual_certificate(const LpSolution& solution,
                                       int nu_row_offset, int num_y) {
  if (solution.status != LpStatus::kOptimal)
    throw std::invalid_argument("extract_dual_certificate: LP not optimal");
  DualPotential f;
  f.f = -solution.dual_eq.segment(nu_row_offset, num_y);
  return f;
}

ConicalDualBound dual_bound_conical(const ConicalCost& cost,
                                    const DiscreteMeasure& mu, double lambda) {
  if (!(lambda > 1.0))
    throw std::invalid_argument("dual_bound_conical: lambda must exceed 1");
  ConicalDualBound out;
  out.m = -kInf;
  for (int j = 0; j < cost.num_y(); ++j) {
    const Eigen::VectorXd y = cost.y_atoms().row(j);
    double total = 0.0;
    for (int i = 0; i < mu.size(); ++i)
      total += mu.weight(i) * cost.f_value(i, lambda * y);
    out.m = std::max(out.m, total);
  }
  out.lower_bound = -out.m / (lambda - 1.0);
  return out;
}

OptimalityReport optimality_conditions_gf(const KernelPlan& plan,
                                          const DualPotential& f,
                                          const CompositeCost& cost,
                                          const DiscreteMeasure& mu,
                                          double tol) {
  OptimalityReport report;
  report.pass = true;
  const int m = cost.num_y();
  for (int i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) <= 0) continue;
    const double u = cost.f_mass(i, plan.q.row(i));
    if (u <= 0 && cost.g_prime_zero() == -kInf) {
      report.pass = false;
      report.message = "row with zero F-mass but G'(0) = -inf";
      return report;
    }
    const double gp = u > 0 ? cost.g_prime(u) : cost.g_prime_zero();
    for (int j = 0; j < m; ++j) {
      const double slack = gp * cost.fxy()(i, j) + f.f[j];
      report.worst_inequality = std::min(report.worst_inequality, slack);
      if (slack < -tol) report.pass = false;
      if (plan.q(i, j) > tol) {
        report.worst_equality = std::max(report.worst_equality, std::abs(slack));
        if (std::abs(slack) > tol) report.pass = false;
      }
    }
  }
  return report;
}

NonpositiveConicalReport check_nonpositive_conical_dual(
    const ConicalCost& cost, const ConicalPotential& phi,
    const DiscreteMeasure& mu, const DiscreteMeasure& nu, double primal_value,
    double tol) {
  NonpositiveConicalReport report;
  report.primal = primal_value;
  report.min_on_generators = kInf;
  bool nonnegative = true;
  for (int j = 0; j < cost.num_y(); ++j) {
    const Eigen::VectorXd y = cost.y_atoms().row(j);
    const double v = phi(y);
    if (v < -tol) nonnegative = false;
    const double norm = y.norm();
    if (norm > 0)
      report.min_on_generators = std::min(report.min_on_generators, v / norm);
  }
  report.dual = dual_value(cost, phi, mu, nu);
  report.gap = std::abs(report.dual - primal_value);
  const bool positive = report.min_on_generators > tol;
  const bool tight = report.gap <= tol * (1.0 + std::abs(primal_value));
  report.pass = nonnegative && positive && tight;
  if (!nonnegative) report.message = "potential negative on a generator";
  else if (!positive) report.message = "potential not strictly positive";
  else if (!tight) report.message = "dual value does not match the primal";
  return report;
}

}  // namespace uwot
