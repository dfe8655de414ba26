#include "uwot/costs.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace uwot {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_m(const Cost& cost, const Eigen::VectorXd& m) {
  require(static_cast<int>(m.size()) == cost.num_y(),
          "cost: weight vector length mismatch");
  require(m.minCoeff() >= 0.0, "cost: weights must be nonnegative");
}

void check_x(const Cost& cost, int x_index) {
  require(x_index >= 0 && x_index < cost.num_x(), "cost: x index out of range");
}

}  // namespace

double eval_cost(const Cost& cost, int x_index, const Eigen::VectorXd& m) {
  check_x(cost, x_index);
  check_m(cost, m);
  return cost.eval(x_index, m);
}

double recession(const Cost& cost, int x_index, const Eigen::VectorXd& m) {
  check_x(cost, x_index);
  check_m(cost, m);
  return cost.recession(x_index, m);
}

ConditionReport check_conditions(const Cost& cost, int sample_budget) {
  return cost.conditions(sample_budget);
}

// ---------------------------------------------------------------------------
// AffineSupCost

AffineSupCost::AffineSupCost(std::vector<Piece> pieces)
    : pieces_(std::move(pieces)) {
  require(!pieces_.empty(), "affine_sup: at least one piece required");
  const auto n = pieces_[0].a.size();
  const auto m = pieces_[0].b.cols();
  for (const auto& p : pieces_) {
    require(p.a.size() == n && p.b.rows() == n && p.b.cols() == m,
            "affine_sup: inconsistent piece dimensions");
    require(p.a.allFinite() && p.b.allFinite(),
            "affine_sup: non-finite coefficients");
  }
}

double AffineSupCost::eval(int x_index, const Eigen::VectorXd& m) const {
  double best = -kInf;
  for (const auto& p : pieces_)
    best = std::max(best, p.b.row(x_index).dot(m) + p.a[x_index]);
  return best;
}

double AffineSupCost::recession(int x_index, const Eigen::VectorXd& m) const {
  double best = -kInf;
  for (const auto& p : pieces_) best = std::max(best, p.b.row(x_index).dot(m));
  return best;
}

ConditionReport AffineSupCost::conditions(int) const {
  ConditionReport report;
  // Any single piece lower-bounds the sup; keep the best certified pair.
  double best_r0 = -kInf, best_r1 = 0.0;
  for (const auto& p : pieces_) {
    const double r0 = p.a.minCoeff();
    const double r1 = p.b.minCoeff();
    if (r0 > best_r0) {
      best_r0 = r0;
      best_r1 = r1;
    }
  }
  report.lower_bound = {best_r0, best_r1};
  double a = -kInf;
  for (const auto& p : pieces_) a = std::max(a, p.b.maxCoeff());
  report.holds_c = true;
  report.holds_b = false;
  report.recession_bound = std::max(a, 0.0);
  return report;
}

// ---------------------------------------------------------------------------
// PiecewiseLinearCost

PiecewiseLinearCost::PiecewiseLinearCost(std::vector<Piece> pieces,
                                         Eigen::MatrixXd y_atoms)
    : ConicalCost(std::move(y_atoms)), pieces_(std::move(pieces)) {
  require(!pieces_.empty(), "pl_conical: at least one piece required");
  const auto n = pieces_[0].a.size();
  for (const auto& p : pieces_) {
    require(p.a.size() == n && p.u.rows() == n && p.u.cols() == dim(),
            "pl_conical: inconsistent piece dimensions");
  }
}

double PiecewiseLinearCost::f_value(int x_index, const Eigen::VectorXd& z) const {
  double best = -kInf;
  for (const auto& p : pieces_)
    best = std::max(best, p.u.row(x_index).dot(z) + p.a[x_index]);
  return best;
}

double PiecewiseLinearCost::f_recession(int x_index,
                                        const Eigen::VectorXd& z) const {
  double best = -kInf;
  for (const auto& p : pieces_) best = std::max(best, p.u.row(x_index).dot(z));
  return best;
}

Eigen::VectorXd PiecewiseLinearCost::f_grad(int x_index,
                                            const Eigen::VectorXd& z) const {
  int arg = 0;
  double best = -kInf;
  for (size_t k = 0; k < pieces_.size(); ++k) {
    const double v = pieces_[k].u.row(x_index).dot(z) + pieces_[k].a[x_index];
    if (v > best) {
      best = v;
      arg = static_cast<int>(k);
    }
  }
  return pieces_[arg].u.row(x_index);
}

ConditionReport PiecewiseLinearCost::conditions(int) const {
  ConditionReport report;
  double r0 = -kInf, r1 = 0.0;
  // b_k(x, y_j) = u_k(x) . y_j.
  for (const auto& p : pieces_) {
    const Eigen::MatrixXd b = p.u * y_atoms().transpose();
    const double cand = p.a.minCoeff();
    if (cand > r0) {
      r0 = cand;
      r1 = b.minCoeff();
    }
  }
  report.lower_bound = {r0, r1};
  double a = -kInf;
  for (const auto& p : pieces_)
    a = std::max(a, (p.u * y_atoms().transpose()).maxCoeff());
  report.holds_c = true;
  report.holds_b = false;
  report.recession_bound = std::max(a, 0.0);
  return report;
}

// ---------------------------------------------------------------------------
// QuadraticCost

QuadraticCost::QuadraticCost(Eigen::MatrixXd x_atoms, Eigen::MatrixXd y_atoms)
    : ConicalCost(std::move(y_atoms)), x_atoms_(std::move(x_atoms)) {
  require(x_atoms_.cols() == dim(), "quadratic: x/y dimension mismatch");
}

double QuadraticCost::f_value(int x_index, const Eigen::VectorXd& z) const {
  return 0.5 * (x_atoms_.row(x_index).transpose() - z).squaredNorm();
}

double QuadraticCost::f_recession(int x_index, const Eigen::VectorXd& z) const {
  (void)x_index;
  // +inf off the origin; along z = 0 the quotient vanishes. Mass with a
  // zero barycenter only exists when 0 lies in the cone of Y.
  const double scale = 1.0 + x_atoms_.cwiseAbs().maxCoeff();
  return z.norm() > 1e-12 * scale ? kInf : 0.0;
}

Eigen::VectorXd QuadraticCost::f_grad(int x_index,
                                      const Eigen::VectorXd& z) const {
  return z - x_atoms_.row(x_index).transpose();
}

ConditionReport QuadraticCost::conditions(int) const {
  ConditionReport report;
  report.lower_bound = {0.0, 0.0};
  report.holds_b = true;
  report.holds_c = false;
  return report;
}

// ---------------------------------------------------------------------------
// PowerCost

PowerCost::PowerCost(Eigen::VectorXd x_values, Eigen::VectorXd y_values,
                     double eta, double grad_cap)
    : ConicalCost([&] {
        Eigen::MatrixXd y(y_values.size(), 1);
        y.col(0) = y_values;
        return y;
      }()),
      x_values_(std::move(x_values)),
      eta_(eta),
      grad_cap_(grad_cap) {
  require(eta_ > 0.0 && eta_ < 1.0, "power: eta must lie in (0,1)");
  require(x_values_.minCoeff() >= 0.0, "power: x values must be nonnegative");
  require(y_atoms().minCoeff() >= 0.0, "power: y values must be nonnegative");
}

double PowerCost::f_value(int x_index, const Eigen::VectorXd& z) const {
  require(z.size() == 1, "power: d = 1 cost");
  require(z[0] >= 0.0, "power: barycenter outside R_+");
  return -x_values_[x_index] * std::pow(z[0], eta_);
}

double PowerCost::f_recession(int, const Eigen::VectorXd&) const { return 0.0; }

Eigen::VectorXd PowerCost::f_grad(int x_index, const Eigen::VectorXd& z) const {
  require(z.size() == 1, "power: d = 1 cost");
  Eigen::VectorXd g(1);
  if (z[0] <= 0.0) {
    // Nonsmooth at 0: report the declared cap. Solvers must route this
    // cost to the closed-form path rather than generic descent.
    g[0] = -grad_cap_;
  } else {
    g[0] = std::max(-grad_cap_,
                    -x_values_[x_index] * eta_ * std::pow(z[0], eta_ - 1.0));
  }
  return g;
}

ConditionReport PowerCost::conditions(int) const {
  ConditionReport report;
  // Concavity of t^eta: c(x,m) >= -x(1 - eta + eta * integral of y dm)
  // >= -beta(1 - eta) - beta eta delta m(Y).
  const double beta = x_values_.maxCoeff();
  const double delta = y_atoms().col(0).maxCoeff();
  report.lower_bound = {-beta * (1.0 - eta_), -beta * eta_ * delta};
  report.holds_b = false;
  report.holds_c = true;
  report.recession_bound = 0.0;
  return report;
}

// ---------------------------------------------------------------------------
// SigmaNormCost

SigmaNormCost::SigmaNormCost(std::vector<Eigen::MatrixXd> a_matrices,
                             Eigen::MatrixXd y_atoms, double sigma, double eta)
    : ConicalCost(std::move(y_atoms)),
      a_matrices_(std::move(a_matrices)),
      sigma_(sigma),
      eta_(eta) {
  require(!a_matrices_.empty(), "sigma_norm: no A matrices");
  require(sigma_ > 0.0 && sigma_ <= 1.0, "sigma_norm: sigma in (0,1]");
  require(eta_ > 0.0 && eta_ < 1.0, "sigma_norm: eta in (0,1)");
  for (const auto& a : a_matrices_) {
    require(a.rows() == dim() && a.cols() == dim(),
            "sigma_norm: A must be d x d");
    require(a.minCoeff() > 0.0, "sigma_norm: A entries must be positive");
  }
  require(this->y_atoms().minCoeff() >= 0.0,
          "sigma_norm: Y must lie in the nonnegative orthant");
}

double SigmaNormCost::f_value(int x_index, const Eigen::VectorXd& z) const {
  require(z.minCoeff() >= 0.0, "sigma_norm: barycenter outside R_+^d");
  const Eigen::VectorXd v = a_matrices_[x_index] * z;
  const double norm_sigma =
      std::pow(v.array().pow(sigma_).sum(), 1.0 / sigma_);
  return -std::pow(norm_sigma, eta_);
}

double SigmaNormCost::f_recession(int, const Eigen::VectorXd&) const {
  return 0.0;
}

Eigen::VectorXd SigmaNormCost::f_grad(int x_index,
                                      const Eigen::VectorXd& z) const {
  const Eigen::MatrixXd& a = a_matrices_[x_index];
  const Eigen::VectorXd v = (a * z).cwiseMax(1e-300);
  const double pow_sum = v.array().pow(sigma_).sum();
  const double norm_sigma = std::pow(pow_sum, 1.0 / sigma_);
  // d/dz of -(||Az||_sigma)^eta.
  const Eigen::VectorXd dnorm_dv =
      std::pow(pow_sum, 1.0 / sigma_ - 1.0) *
      v.array().pow(sigma_ - 1.0).matrix();
  return -eta_ * std::pow(norm_sigma, eta_ - 1.0) * (a.transpose() * dnorm_dv);
}

ConditionReport SigmaNormCost::conditions(int) const {
  ConditionReport report;
  // ||v||_sigma <= d^{1/sigma - 1} ||v||_1 and t^eta <= 1 + eta t give
  // c(x, m) >= -1 - eta * kappa * m(Y) with kappa bounding ||A y||_1.
  const int d = dim();
  double col_sum = 0.0;
  for (const auto& a : a_matrices_)
    col_sum = std::max(col_sum, a.colwise().sum().maxCoeff());
  double y1 = 0.0;
  for (int j = 0; j < num_y(); ++j)
    y1 = std::max(y1, y_atoms().row(j).cwiseAbs().sum());
  const double kappa =
      std::pow(static_cast<double>(d), 1.0 / sigma_ - 1.0) * col_sum * y1;
  report.lower_bound = {-1.0, -eta_ * kappa};
  report.holds_b = false;
  report.holds_c = true;
  report.recession_bound = 0.0;
  return report;
}

// ---------------------------------------------------------------------------
// OracleCost

OracleCost::OracleCost(int num_x, Eigen::MatrixXd y_atoms, ValueFn f,
                       GradFn subgrad)
    : ConicalCost(std::move(y_atoms)),
      num_x_(num_x),
      f_(std::move(f)),
      subgrad_(std::move(subgrad)) {
  require(num_x_ > 0, "oracle: num_x must be positive");
  require(static_cast<bool>(f_), "oracle: value callback required");
}

double OracleCost::f_value(int x_index, const Eigen::VectorXd& z) const {
  return f_(x_index, z);
}

double OracleCost::f_recession(int x_index, const Eigen::VectorXd& z) const {
  if (z.norm() == 0.0) return 0.0;
  // The difference quotient is nondecreasing in the scale, so the largest
  // sampled quotient is a certified lower bound on the limit.
  const double f0 = f_(x_index, Eigen::VectorXd::Zero(z.size()));
  double quotient = -kInf;
  double lambda = 1.0;
  for (int k = 0; k < 48; ++k) {
    quotient = (f_(x_index, lambda * z) - f0) / lambda;
    if (!std::isfinite(quotient)) return kInf;
    lambda *= 2.0;
  }
  return quotient;
}

Eigen::VectorXd OracleCost::f_grad(int x_index, const Eigen::VectorXd& z) const {
  if (subgrad_) return subgrad_(x_index, z);
  // Central differences as a fallback oracle.
  const int d = static_cast<int>(z.size());
  Eigen::VectorXd g(d);
  const double h = 1e-6 * (1.0 + z.norm());
  for (int r = 0; r < d; ++r) {
    Eigen::VectorXd zp = z, zm = z;
    zp[r] += h;
    zm[r] -= h;
    g[r] = (f_(x_index, zp) - f_(x_index, zm)) / (2 * h);
  }
  return g;
}

ConditionReport OracleCost::conditions(int sample_budget) const {
  // Finitely many samples cannot certify (B) or (C); everything stays
  // unknown, the budget only exercises the callbacks.
  ConditionReport report;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < sample_budget; ++s) {
    Eigen::VectorXd m(num_y());
    for (int j = 0; j < num_y(); ++j) m[j] = unit(rng);
    (void)eval(s % num_x(), m);
  }
  return report;
}

// ---------------------------------------------------------------------------
// CompositeCost

CompositeCost::CompositeCost(Eigen::MatrixXd fxy, ScalarFn g, ScalarFn g_prime,
                             double g_prime_zero, double g_prime_inf)
    : fxy_(std::move(fxy)),
      g_(std::move(g)),
      g_prime_(std::move(g_prime)),
      g_prime_zero_(g_prime_zero),
      g_prime_inf_(g_prime_inf) {
  require(fxy_.size() > 0 && fxy_.minCoeff() > 0.0,
          "composite: F must be strictly positive");
  require(static_cast<bool>(g_) && static_cast<bool>(g_prime_),
          "composite: G and G' callbacks required");
  // Sampled midpoint inequality as a cheap convexity check on G.
  const double hi = 2.0 * fxy_.maxCoeff();
  for (int k = 1; k < 16; ++k) {
    const double u = hi * k / 16.0;
    const double v = hi * (16.0 - k) / 17.0;
    require(g_(0.5 * (u + v)) <= 0.5 * g_(u) + 0.5 * g_(v) + 1e-9 * (1 + std::abs(g_(u))),
            "composite: G failed the midpoint convexity check");
  }
}

double CompositeCost::eval(int x_index, const Eigen::VectorXd& m) const {
  return g_(f_mass(x_index, m));
}

double CompositeCost::recession(int x_index, const Eigen::VectorXd& m) const {
  const double u = f_mass(x_index, m);
  if (u == 0.0) return 0.0;
  if (g_prime_inf_ == kInf) return kInf;
  // Product convention: c'_inf(x, m) = G'(+inf) * sum_j F(x, y_j) m_j.
  return g_prime_inf_ * u;
}

ConditionReport CompositeCost::conditions(int) const {
  ConditionReport report;
  // Supporting line of G at u = 1: G(u) >= G(1) + G'(1)(u - 1), then bound
  // u = sum F m by min F * mass or max F * mass depending on the slope sign.
  const double g1 = g_(1.0);
  const double gp1 = g_prime_(1.0);
  const double fmin = fxy_.minCoeff();
  const double fmax = fxy_.maxCoeff();
  const double r1 = gp1 >= 0 ? gp1 * fmin : gp1 * fmax;
  report.lower_bound = {g1 - gp1, r1};
  if (g_prime_inf_ == kInf) {
    report.holds_b = true;
    report.holds_c = false;
  } else {
    report.holds_b = false;
    report.holds_c = true;
    report.recession_bound = std::max(0.0, g_prime_inf_ * fmax);
  }
  return report;
}

}  // namespace uwot
