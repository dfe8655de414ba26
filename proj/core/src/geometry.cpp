#include "uwot/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "uwot/lp.hpp"
#include "uwot/qp.hpp"

namespace uwot {

DiscreteMeasure::DiscreteMeasure(std::vector<Point> atoms,
                                 Eigen::VectorXd weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.size() != static_cast<size_t>(weights_.size()))
    throw std::invalid_argument("measure: atom/weight count mismatch");
  if (atoms_.empty()) throw std::invalid_argument("measure: no atoms");
  const int d = static_cast<int>(atoms_[0].size());
  if (d < 1) throw std::invalid_argument("measure: dimension must be >= 1");
  for (const auto& a : atoms_) {
    if (static_cast<int>(a.size()) != d)
      throw std::invalid_argument("measure: inconsistent atom dimensions");
    if (!a.allFinite())
      throw std::invalid_argument("measure: non-finite atom coordinates");
  }
  for (int i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i]))
      throw std::invalid_argument("measure: weights must be nonnegative");
  }
  for (size_t i = 0; i < atoms_.size(); ++i)
    for (size_t j = i + 1; j < atoms_.size(); ++j)
      if (atoms_[i] == atoms_[j])
        throw std::invalid_argument("measure: atoms must be pairwise distinct");
}

bool DiscreteMeasure::is_probability(double tol) const {
  return std::abs(total_mass() - 1.0) <= tol;
}

Eigen::MatrixXd DiscreteMeasure::atom_matrix() const {
  Eigen::MatrixXd out(size(), dim());
  for (int i = 0; i < size(); ++i) out.row(i) = atoms_[i];
  return out;
}

DiscreteMeasure DiscreteMeasure::merged(const std::vector<Point>& atoms,
                                        const Eigen::VectorXd& weights,
                                        double tol) {
  std::vector<Point> out_atoms;
  std::vector<double> out_weights;
  for (size_t i = 0; i < atoms.size(); ++i) {
    bool found = false;
    for (size_t k = 0; k < out_atoms.size(); ++k) {
      if ((out_atoms[k] - atoms[i]).norm() <= tol) {
        out_weights[k] += weights[i];
        found = true;
        break;
      }
    }
    if (!found) {
      out_atoms.push_back(atoms[i]);
      out_weights.push_back(weights[i]);
    }
  }
  Eigen::VectorXd w(out_weights.size());
  for (size_t k = 0; k < out_weights.size(); ++k) w[k] = out_weights[k];
  return DiscreteMeasure(std::move(out_atoms), std::move(w));
}

Moments moments(const DiscreteMeasure& m) {
  Moments out;
  const int d = m.dim();
  out.mass = m.total_mass();
  out.first_moment = Eigen::VectorXd::Zero(d);
  out.pos_part = Eigen::VectorXd::Zero(d);
  out.neg_part = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < m.size(); ++i) {
    const double w = m.weight(i);
    out.first_moment += w * m.atom(i);
    out.pos_part += w * m.atom(i).cwiseMax(0.0);
    out.neg_part += w * (-m.atom(i)).cwiseMax(0.0);
  }
  out.mean = out.mass > 0 ? Eigen::VectorXd(out.first_moment / out.mass)
                          : Eigen::VectorXd::Zero(d);
  return out;
}

ConeModel::ConeModel(std::vector<Point> generators)
    : generators_(std::move(generators)) {
  if (generators_.empty())
    throw std::invalid_argument("cone: generators must be nonempty");
  dim_ = static_cast<int>(generators_[0].size());
  for (const auto& g : generators_)
    if (static_cast<int>(g.size()) != dim_)
      throw std::invalid_argument("cone: inconsistent generator dimensions");
}

ConeModel::ConeModel(const DiscreteMeasure& y) : ConeModel(y.atoms()) {}

double ConeModel::default_tol() const {
  double max_norm = 0.0;
  for (const auto& g : generators_) max_norm = std::max(max_norm, g.norm());
  return 1e-9 * (1.0 + max_norm);
}

namespace {

// Minimal L1 residual of { Y'w (+ sum w = 1) = target, w >= 0 }: residual
// columns r+ and r- absorb the mismatch, their total is minimized.
double feasibility_residual(const std::vector<Point>& generators, int dim,
                            const Eigen::VectorXd& target, bool affine) {
  const int k = static_cast<int>(generators.size());
  const int rows = dim + (affine ? 1 : 0);
  LinearProgram lp;
  lp.c = Eigen::VectorXd::Zero(k + 2 * rows);
  lp.c.tail(2 * rows).setOnes();
  lp.a_eq = Eigen::MatrixXd::Zero(rows, k + 2 * rows);
  lp.b_eq = Eigen::VectorXd::Zero(rows);
  for (int r = 0; r < dim; ++r) {
    for (int j = 0; j < k; ++j) lp.a_eq(r, j) = generators[j][r];
    lp.b_eq[r] = target[r];
  }
  if (affine) {
    for (int j = 0; j < k; ++j) lp.a_eq(dim, j) = 1.0;
    lp.b_eq[dim] = 1.0;
  }
  for (int r = 0; r < rows; ++r) {
    lp.a_eq(r, k + 2 * r) = 1.0;
    lp.a_eq(r, k + 2 * r + 1) = -1.0;
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal)
    throw std::runtime_error("cone: feasibility LP failed");
  return sol.objective;
}

}  // namespace

bool ConeModel::contains(const Point& z, double tol) const {
  if (static_cast<int>(z.size()) != dim_)
    throw std::invalid_argument("cone: dimension mismatch");
  return feasibility_residual(generators_, dim_, z, /*affine=*/false) <= tol;
}

bool ConeModel::zero_in_convex_hull(double tol) const {
  return feasibility_residual(generators_, dim_,
                              Eigen::VectorXd::Zero(dim_),
                              /*affine=*/true) <= tol;
}

double ConeModel::min_hull_norm() const {
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(dim_);
  return project_onto_polytope(generators_, origin).norm();
}

}  // namespace uwot
