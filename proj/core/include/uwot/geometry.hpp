#pragma once

#include <Eigen/Dense>
#include <vector>

namespace uwot {

// Atoms live in R^d. Coordinates are dimensionless.
using Point = Eigen::VectorXd;

// Weighted atoms in R^d. Weights are nonnegative; zero-weight atoms are
// retained because they model support points that carry no mass of the
// absolutely continuous part (they matter for the extended functional).
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(std::vector<Point> atoms, Eigen::VectorXd weights);

  int size() const { return static_cast<int>(atoms_.size()); }
  int dim() const { return atoms_.empty() ? 0 : static_cast<int>(atoms_[0].size()); }
  const std::vector<Point>& atoms() const { return atoms_; }
  const Point& atom(int i) const { return atoms_[i]; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double weight(int i) const { return weights_[i]; }

  double total_mass() const { return weights_.sum(); }
  bool is_probability(double tol = 1e-9) const;

  // Atom matrix, one row per atom (size n x d).
  Eigen::MatrixXd atom_matrix() const;

  // Merges atoms closer than tol (coordinate-wise Euclidean), summing weights.
  static DiscreteMeasure merged(const std::vector<Point>& atoms,
                                const Eigen::VectorXd& weights, double tol);

 private:
  std::vector<Point> atoms_;
  Eigen::VectorXd weights_;
};

struct Moments {
  double mass = 0.0;
  Eigen::VectorXd first_moment;  // integral of x
  Eigen::VectorXd mean;          // first_moment / mass (zero vector if mass = 0)
  Eigen::VectorXd pos_part;      // integral of [x]_+, per coordinate
  Eigen::VectorXd neg_part;      // integral of [x]_-, per coordinate
};

Moments moments(const DiscreteMeasure& m);

// Conical hull Z of a finite generator set and the convex hull co(Y).
// Membership queries are decided by LP feasibility.
class ConeModel {
 public:
  explicit ConeModel(std::vector<Point> generators);
  explicit ConeModel(const DiscreteMeasure& y);

  int dim() const { return dim_; }
  const std::vector<Point>& generators() const { return generators_; }

  // Scale-aware default: 1e-9 * (1 + max generator norm).
  double default_tol() const;

  // True iff there is w >= 0 with sum_j w_j y_j = z within tol.
  bool contains(const Point& z, double tol) const;
  bool contains(const Point& z) const { return contains(z, default_tol()); }

  // True iff 0 lies in the convex hull of the generators within tol.
  bool zero_in_convex_hull(double tol) const;
  bool zero_in_convex_hull() const { return zero_in_convex_hull(default_tol()); }

  // alpha = min_{y in co(generators)} ||y||_2. Positive exactly when
  // zero_in_convex_hull is false; used as the lower bound in dual estimates.
  double min_hull_norm() const;

 private:
  std::vector<Point> generators_;
  int dim_ = 0;
};

}  // namespace uwot
