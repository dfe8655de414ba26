#include "uwot/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uwot {
namespace {

// Standard form: min c'x, A x = b, x >= 0, b >= 0. Original variables map
// to one column (nonnegative) or a +/- pair (free); inequality rows carry a
// slack column. Row signs are flipped as needed to make b nonnegative.
struct StandardForm {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  std::vector<double> row_sign;   // original row multiplier (+1 or -1)
  std::vector<int> pos_col;       // original var -> + column
  std::vector<int> neg_col;       // original var -> - column (-1 if none)
  int num_rows = 0;
  int num_cols = 0;               // real columns (no artificials)
  int num_eq = 0;
};

StandardForm build_standard_form(const LinearProgram& lp) {
  const int n = lp.num_vars();
  const int me = static_cast<int>(lp.b_eq.size());
  const int mu = static_cast<int>(lp.b_ub.size());
  if (lp.a_eq.size() > 0 && (lp.a_eq.rows() != me || lp.a_eq.cols() != n))
    throw std::invalid_argument("lp: a_eq dimensions inconsistent");
  if (lp.a_ub.size() > 0 && (lp.a_ub.rows() != mu || lp.a_ub.cols() != n))
    throw std::invalid_argument("lp: a_ub dimensions inconsistent");
  if (!lp.is_free.empty() && static_cast<int>(lp.is_free.size()) != n)
    throw std::invalid_argument("lp: is_free size mismatch");

  StandardForm sf;
  sf.num_eq = me;
  sf.num_rows = me + mu;
  sf.pos_col.resize(n);
  sf.neg_col.assign(n, -1);

  int cols = 0;
  for (int j = 0; j < n; ++j) {
    sf.pos_col[j] = cols++;
    if (!lp.is_free.empty() && lp.is_free[j]) sf.neg_col[j] = cols++;
  }
  const int slack0 = cols;
  cols += mu;
  sf.num_cols = cols;

  sf.a = Eigen::MatrixXd::Zero(sf.num_rows, cols);
  sf.b = Eigen::VectorXd::Zero(sf.num_rows);
  sf.c = Eigen::VectorXd::Zero(cols);
  sf.row_sign.assign(sf.num_rows, 1.0);

  for (int j = 0; j < n; ++j) {
    sf.c[sf.pos_col[j]] = lp.c[j];
    if (sf.neg_col[j] >= 0) sf.c[sf.neg_col[j]] = -lp.c[j];
  }
  for (int r = 0; r < me; ++r) {
    for (int j = 0; j < n; ++j) {
      const double v = lp.a_eq(r, j);
      sf.a(r, sf.pos_col[j]) = v;
      if (sf.neg_col[j] >= 0) sf.a(r, sf.neg_col[j]) = -v;
    }
    sf.b[r] = lp.b_eq[r];
  }
  for (int r = 0; r < mu; ++r) {
    const int row = me + r;
    for (int j = 0; j < n; ++j) {
      const double v = lp.a_ub(r, j);
      sf.a(row, sf.pos_col[j]) = v;
      if (sf.neg_col[j] >= 0) sf.a(row, sf.neg_col[j]) = -v;
    }
    sf.a(row, slack0 + r) = 1.0;
    sf.b[row] = lp.b_ub[r];
  }
  for (int r = 0; r < sf.num_rows; ++r) {
    if (sf.b[r] < 0) {
      sf.a.row(r) *= -1.0;
      sf.b[r] *= -1.0;
      sf.row_sign[r] = -1.0;
    }
  }
  return sf;
}

struct SimplexResult {
  LpStatus status = LpStatus::kFailed;
  Eigen::VectorXd x;      // over real columns
  Eigen::VectorXd y;      // row duals (standard-form rows)
  double objective = 0.0;
  int iterations = 0;
};

// Revised simplex over [A | I] with artificial columns kept at the end.
// `phase1` minimizes the artificial mass; phase 2 prices only real columns
// and never lets artificials re-enter.
class Simplex {
 public:
  Simplex(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double scale)
      : a_(a),
        b_(b),
        m_(static_cast<int>(a.rows())),
        n_(static_cast<int>(a.cols())),
        tol_(1e-10 * std::max(1.0, scale)) {
    basis_.resize(m_);
    for (int r = 0; r < m_; ++r) basis_[r] = n_ + r;  // artificials
  }

  // Returns iterations used, or -1 on pivot-limit failure. In phase 2,
  // artificials left basic at zero by a degenerate phase 1 must never grow
  // again: rows carrying them block the ratio test at step zero.
  int run(const Eigen::VectorXd& cost_real, double artificial_cost,
          bool block_artificial_growth, int max_iters) {
    Eigen::VectorXd cost(n_ + m_);
    cost.head(n_) = cost_real;
    cost.tail(m_).setConstant(artificial_cost);

    int degenerate_streak = 0;
    bool bland = false;
    int iter = 0;
    for (; iter < max_iters; ++iter) {
      refactor();
      const Eigen::VectorXd xb = lu_.solve(b_);
      Eigen::VectorXd cb(m_);
      for (int r = 0; r < m_; ++r) cb[r] = cost[basis_[r]];
      const Eigen::VectorXd y = lu_.adjoint().solve(cb);

      // Pricing over real columns only (artificials start basic and may
      // only leave): most negative reduced cost (Dantzig), lowest index
      // under Bland once the degeneracy counter has tripped.
      int entering = -1;
      double best = -tol_;
      for (int j = 0; j < n_; ++j) {
        if (in_basis(j)) continue;
        const double rc = cost[j] - y.dot(a_col(j));
        if (bland) {
          if (rc < -tol_) { entering = j; break; }
        } else if (rc < best) {
          best = rc;
          entering = j;
        }
      }
      if (entering < 0) {
        x_ = Eigen::VectorXd::Zero(n_ + m_);
        for (int r = 0; r < m_; ++r) x_[basis_[r]] = xb[r];
        y_ = y;
        objective_ = cost.head(n_).dot(x_.head(n_)) +
                     cost.tail(m_).dot(x_.tail(m_));
        status_ = LpStatus::kOptimal;
        return iter;
      }

      const Eigen::VectorXd d = lu_.solve(a_col(entering));
      int leaving = -1;
      double min_ratio = 0.0;
      for (int r = 0; r < m_; ++r) {
        const bool artificial_blocks =
            block_artificial_growth && basis_[r] >= n_ && d[r] < -tol_;
        if (d[r] > tol_ || artificial_blocks) {
          const double ratio =
              artificial_blocks ? 0.0 : std::max(xb[r], 0.0) / d[r];
          const bool better =
              leaving < 0 || ratio < min_ratio - tol_ ||
              (ratio < min_ratio + tol_ &&
               tie_break(r, leaving, bland));
          if (better) {
            min_ratio = ratio;
            leaving = r;
          }
        }
      }
      if (leaving < 0) {
        status_ = LpStatus::kUnbounded;
        return iter;
      }
      if (min_ratio <= tol_) {
        if (++degenerate_streak > 2 * (m_ + n_)) bland = true;
      } else {
        degenerate_streak = 0;
      }
      basis_[leaving] = entering;
    }
    status_ = LpStatus::kFailed;
    return -1;
  }

  LpStatus status() const { return status_; }
  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  double objective() const { return objective_; }
  double tol() const { return tol_; }

 private:
  Eigen::VectorXd a_col(int j) const {
    if (j < n_) return a_.col(j);
    return Eigen::VectorXd::Unit(m_, j - n_);
  }

  bool in_basis(int j) const {
    return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
  }

  // Prefer evicting artificials; ties otherwise by lowest variable index
  // (Bland) or lowest row.
  bool tie_break(int r, int current, bool bland) const {
    const bool r_art = basis_[r] >= n_;
    const bool c_art = basis_[current] >= n_;
    if (r_art != c_art) return r_art;
    if (bland) return basis_[r] < basis_[current];
    return r < current;
  }

  void refactor() {
    Eigen::MatrixXd bmat(m_, m_);
    for (int r = 0; r < m_; ++r) bmat.col(r) = a_col(basis_[r]);
    lu_.compute(bmat);
  }

  const Eigen::MatrixXd& a_;
  const Eigen::VectorXd& b_;
  int m_, n_;
  double tol_;
  std::vector<int> basis_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::VectorXd x_, y_;
  double objective_ = 0.0;
  LpStatus status_ = LpStatus::kFailed;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  LpSolution out;
  const StandardForm sf = build_standard_form(lp);
  const int n = lp.num_vars();
  const int me = sf.num_eq;
  const int mu = sf.num_rows - me;

  double scale = std::max(sf.b.size() ? sf.b.cwiseAbs().maxCoeff() : 0.0,
                          sf.c.size() ? sf.c.cwiseAbs().maxCoeff() : 0.0);
  if (sf.a.size()) scale = std::max(scale, sf.a.cwiseAbs().maxCoeff());

  const int max_iters = 10000 + 50 * (sf.num_rows + sf.num_cols);
  Simplex simplex(sf.a, sf.b, scale);

  // Phase 1.
  const int it1 = simplex.run(Eigen::VectorXd::Zero(sf.num_cols), 1.0,
                              /*block_artificial_growth=*/false, max_iters);
  if (it1 < 0 || simplex.status() != LpStatus::kOptimal) {
    out.status = LpStatus::kFailed;
    return out;
  }
  out.iterations = it1;

  const double feas_tol = std::max(simplex.tol() * 100.0, 1e-9 * (1 + scale));
  if (simplex.objective() > feas_tol) {
    // Phase-1 duals certify infeasibility: y'A_j <= 0 for every real
    // column, y'b = phase-1 mass > 0.
    out.status = LpStatus::kInfeasible;
    const Eigen::VectorXd& y = simplex.y();
    out.farkas_eq = Eigen::VectorXd::Zero(me);
    out.farkas_ub = Eigen::VectorXd::Zero(mu);
    for (int r = 0; r < me; ++r) out.farkas_eq[r] = y[r] * sf.row_sign[r];
    for (int r = 0; r < mu; ++r)
      out.farkas_ub[r] = y[me + r] * sf.row_sign[me + r];
    return out;
  }

  // Phase 2.
  const int it2 = simplex.run(sf.c, 0.0,
                              /*block_artificial_growth=*/true, max_iters);
  out.iterations += std::max(it2, 0);
  if (it2 < 0 || simplex.status() == LpStatus::kFailed) {
    out.status = LpStatus::kFailed;
    return out;
  }
  if (simplex.status() == LpStatus::kUnbounded) {
    out.status = LpStatus::kUnbounded;
    return out;
  }

  out.status = LpStatus::kOptimal;
  out.x = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    double v = simplex.x()[sf.pos_col[j]];
    if (sf.neg_col[j] >= 0) v -= simplex.x()[sf.neg_col[j]];
    out.x[j] = v;
  }
  out.objective = lp.c.dot(out.x);
  out.dual_eq = Eigen::VectorXd::Zero(me);
  out.dual_ub = Eigen::VectorXd::Zero(mu);
  for (int r = 0; r < me; ++r)
    out.dual_eq[r] = simplex.y()[r] * sf.row_sign[r];
  for (int r = 0; r < mu; ++r)
    out.dual_ub[r] = simplex.y()[me + r] * sf.row_sign[me + r];
  return out;
}

TransportResult solve_transport(const Eigen::MatrixXd& cost,
                                const Eigen::VectorXd& a,
                                const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  LinearProgram lp;
  lp.c = Eigen::VectorXd(n * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) lp.c[i * m + j] = cost(i, j);
  lp.a_eq = Eigen::MatrixXd::Zero(n + m, n * m);
  lp.b_eq = Eigen::VectorXd(n + m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) lp.a_eq(i, i * m + j) = 1.0;
    lp.b_eq[i] = a[i];
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) lp.a_eq(n + j, i * m + j) = 1.0;
    lp.b_eq[n + j] = b[j];
  }

  TransportResult result;
  const LpSolution sol = solve_lp(lp);
  result.status = sol.status;
  if (sol.status != LpStatus::kOptimal) return result;
  result.plan = Eigen::MatrixXd(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) result.plan(i, j) = sol.x[i * m + j];
  result.value = sol.objective;
  result.row_potential = sol.dual_eq.head(n);
  result.col_potential = sol.dual_eq.tail(m);
  return result;
}

}  // namespace uwot
