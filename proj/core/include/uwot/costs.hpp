#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "uwot/geometry.hpp"

namespace uwot {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class CostKind {
  kAffineSup,
  kPiecewiseLinear,
  kQuadratic,
  kPower,
  kSigmaNorm,
  kOracle,
  kComposite,
};

// Certified classification of a cost functional.
//  - lower_bound (r0, r1): c(x, m) >= r0 + r1 * m(Y) on every queried point.
//  - holds_b: recession is +inf on nonzero mass; holds_c: recession bounded.
//  - recession_bound: the bound `a` on recession over probability masses,
//    present when holds_c is true.
// nullopt fields mean "unknown" (the verdict cannot be certified).
struct ConditionReport {
  std::optional<std::pair<double, double>> lower_bound;
  std::optional<bool> holds_b;
  std::optional<bool> holds_c;
  std::optional<double> recession_bound;
};

// A cost functional c(x_i, m) on weight vectors m >= 0 over the Y atoms,
// convex in m. Instances are immutable and evaluation is pure.
class Cost {
 public:
  virtual ~Cost() = default;

  virtual CostKind kind() const = 0;
  virtual int num_x() const = 0;
  virtual int num_y() const = 0;

  virtual double eval(int x_index, const Eigen::VectorXd& m) const = 0;

  // lim_{lambda -> inf} c(x, lambda m) / lambda; +inf is a valid result.
  virtual double recession(int x_index, const Eigen::VectorXd& m) const = 0;

  virtual ConditionReport conditions(int sample_budget = 0) const = 0;
};

double eval_cost(const Cost& cost, int x_index, const Eigen::VectorXd& m);
double recession(const Cost& cost, int x_index, const Eigen::VectorXd& m);
ConditionReport check_conditions(const Cost& cost, int sample_budget = 0);

// c(x,m) = max_k { sum_j b_k(x, y_j) m_j + a_k(x) }.
class AffineSupCost final : public Cost {
 public:
  struct Piece {
    Eigen::VectorXd a;  // one entry per X atom
    Eigen::MatrixXd b;  // n x m
  };

  explicit AffineSupCost(std::vector<Piece> pieces);

  CostKind kind() const override { return CostKind::kAffineSup; }
  int num_x() const override { return static_cast<int>(pieces_[0].a.size()); }
  int num_y() const override { return static_cast<int>(pieces_[0].b.cols()); }
  double eval(int x_index, const Eigen::VectorXd& m) const override;
  double recession(int x_index, const Eigen::VectorXd& m) const override;
  ConditionReport conditions(int sample_budget = 0) const override;

  const std::vector<Piece>& pieces() const { return pieces_; }

 private:
  std::vector<Piece> pieces_;
};

// Conical costs: c(x, m) = F(x, z) with z = sum_j m_j y_j.
class ConicalCost : public Cost {
 public:
  explicit ConicalCost(Eigen::MatrixXd y_atoms) : y_atoms_(std::move(y_atoms)) {}

  int num_y() const override { return static_cast<int>(y_atoms_.rows()); }
  int dim() const { return static_cast<int>(y_atoms_.cols()); }
  const Eigen::MatrixXd& y_atoms() const { return y_atoms_; }
  Eigen::VectorXd barycenter(const Eigen::VectorXd& m) const {
    return y_atoms_.transpose() * m;
  }

  virtual double f_value(int x_index, const Eigen::VectorXd& z) const = 0;
  // Recession of F(x, .) in direction z.
  virtual double f_recession(int x_index, const Eigen::VectorXd& z) const = 0;
  // A subgradient of F(x, .) at z (gradient wherever F is differentiable).
  virtual Eigen::VectorXd f_grad(int x_index, const Eigen::VectorXd& z) const = 0;

  double eval(int x_index, const Eigen::VectorXd& m) const override {
    return f_value(x_index, barycenter(m));
  }
  double recession(int x_index, const Eigen::VectorXd& m) const override {
    return f_recession(x_index, barycenter(m));
  }

 private:
  Eigen::MatrixXd y_atoms_;
};

// F(x, z) = max_k { u_k(x) . z + a_k(x) }.
class PiecewiseLinearCost final : public ConicalCost {
 public:
  struct Piece {
    Eigen::MatrixXd u;  // n x d, one direction row per X atom
    Eigen::VectorXd a;  // one entry per X atom
  };

  PiecewiseLinearCost(std::vector<Piece> pieces, Eigen::MatrixXd y_atoms);

  CostKind kind() const override { return CostKind::kPiecewiseLinear; }
  int num_x() const override { return static_cast<int>(pieces_[0].a.size()); }
  double f_value(int x_index, const Eigen::VectorXd& z) const override;
  double f_recession(int x_index, const Eigen::VectorXd& z) const override;
  Eigen::VectorXd f_grad(int x_index, const Eigen::VectorXd& z) const override;
  ConditionReport conditions(int sample_budget = 0) const override;

  const std::vector<Piece>& pieces() const { return pieces_; }

 private:
  std::vector<Piece> pieces_;
};

// F(x, z) = 1/2 ||x - z||_2^2.
class QuadraticCost final : public ConicalCost {
 public:
  QuadraticCost(Eigen::MatrixXd x_atoms, Eigen::MatrixXd y_atoms);

  CostKind kind() const override { return CostKind::kQuadratic; }
  int num_x() const override { return static_cast<int>(x_atoms_.rows()); }
  double f_value(int x_index, const Eigen::VectorXd& z) const override;
  double f_recession(int x_index, const Eigen::VectorXd& z) const override;
  Eigen::VectorXd f_grad(int x_index, const Eigen::VectorXd& z) const override;
  ConditionReport conditions(int sample_budget = 0) const override;

  const Eigen::MatrixXd& x_atoms() const { return x_atoms_; }
  Eigen::VectorXd x_atom(int i) const { return x_atoms_.row(i); }

 private:
  Eigen::MatrixXd x_atoms_;
};

// F(x, z) = -x z^eta on [alpha, beta] x [gamma, delta] in R_+, 0 < eta < 1.
// Nonsmooth at z = 0: the gradient oracle returns the declared cap there,
// and solvers must route this cost to the closed-form path.
class PowerCost final : public ConicalCost {
 public:
  PowerCost(Eigen::VectorXd x_values, Eigen::VectorXd y_values, double eta,
            double grad_cap = 1e12);

  CostKind kind() const override { return CostKind::kPower; }
  int num_x() const override { return static_cast<int>(x_values_.size()); }
  double f_value(int x_index, const Eigen::VectorXd& z) const override;
  double f_recession(int x_index, const Eigen::VectorXd& z) const override;
  Eigen::VectorXd f_grad(int x_index, const Eigen::VectorXd& z) const override;
  ConditionReport conditions(int sample_budget = 0) const override;

  double eta() const { return eta_; }
  const Eigen::VectorXd& x_values() const { return x_values_; }

 private:
  Eigen::VectorXd x_values_;
  double eta_;
  double grad_cap_;
};

// F(x, z) = -||A(x) z||_sigma^eta on R_+^d, A(x) with positive entries,
// 0 < sigma <= 1, 0 < eta < 1.
class SigmaNormCost final : public ConicalCost {
 public:
  SigmaNormCost(std::vector<Eigen::MatrixXd> a_matrices, Eigen::MatrixXd y_atoms,
                double sigma, double eta);

  CostKind kind() const override { return CostKind::kSigmaNorm; }
  int num_x() const override { return static_cast<int>(a_matrices_.size()); }
  double f_value(int x_index, const Eigen::VectorXd& z) const override;
  double f_recession(int x_index, const Eigen::VectorXd& z) const override;
  Eigen::VectorXd f_grad(int x_index, const Eigen::VectorXd& z) const override;
  ConditionReport conditions(int sample_budget = 0) const override;

  double sigma() const { return sigma_; }
  double eta() const { return eta_; }
  const std::vector<Eigen::MatrixXd>& a_matrices() const { return a_matrices_; }

 private:
  std::vector<Eigen::MatrixXd> a_matrices_;
  double sigma_;
  double eta_;
};

// Callback-backed conical cost. Conditions are never claimed: a finite
// sample cannot certify (B) or (C), so the report stays "unknown".
class OracleCost final : public ConicalCost {
 public:
  using ValueFn = std::function<double(int, const Eigen::VectorXd&)>;
  using GradFn = std::function<Eigen::VectorXd(int, const Eigen::VectorXd&)>;

  OracleCost(int num_x, Eigen::MatrixXd y_atoms, ValueFn f, GradFn subgrad);

  CostKind kind() const override { return CostKind::kOracle; }
  int num_x() const override { return num_x_; }
  double f_value(int x_index, const Eigen::VectorXd& z) const override;
  // Estimated from the monotone difference quotient at growing scales; a
  // lower bound on the true recession in general.
  double f_recession(int x_index, const Eigen::VectorXd& z) const override;
  Eigen::VectorXd f_grad(int x_index, const Eigen::VectorXd& z) const override;
  ConditionReport conditions(int sample_budget = 0) const override;

 private:
  int num_x_;
  ValueFn f_;
  GradFn subgrad_;
};

// c(x, m) = G(sum_j F(x, y_j) m_j), F > 0 continuous, G convex
// differentiable. G'(0) and G'(+inf) are declared, not computed: the
// classification drives solver dispatch and must be exact.
class CompositeCost final : public Cost {
 public:
  using ScalarFn = std::function<double(double)>;

  CompositeCost(Eigen::MatrixXd fxy, ScalarFn g, ScalarFn g_prime,
                double g_prime_zero, double g_prime_inf);

  CostKind kind() const override { return CostKind::kComposite; }
  int num_x() const override { return static_cast<int>(fxy_.rows()); }
  int num_y() const override { return static_cast<int>(fxy_.cols()); }
  double eval(int x_index, const Eigen::VectorXd& m) const override;
  double recession(int x_index, const Eigen::VectorXd& m) const override;
  ConditionReport conditions(int sample_budget = 0) const override;

  const Eigen::MatrixXd& fxy() const { return fxy_; }
  double g(double u) const { return g_(u); }
  double g_prime(double u) const { return g_prime_(u); }
  double g_prime_zero() const { return g_prime_zero_; }
  double g_prime_inf() const { return g_prime_inf_; }

  // Weighted F-mass U_i(m) = sum_j F(x_i, y_j) m_j.
  double f_mass(int x_index, const Eigen::VectorXd& m) const {
    return fxy_.row(x_index).dot(m);
  }

 private:
  Eigen::MatrixXd fxy_;
  ScalarFn g_;
  ScalarFn g_prime_;
  double g_prime_zero_;
  double g_prime_inf_;
};

}  // namespace uwot
