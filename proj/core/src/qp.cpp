#include "uwot/qp.hpp"

#include <cmath>
#include <stdexcept>

namespace uwot {
namespace {

// Affine minimizer of ||P w||^2 subject to sum w = 1, w free, over the
// columns indexed by `active`. Rank-deficient systems get the min-norm
// solution.
Eigen::VectorXd affine_min_norm(const Eigen::MatrixXd& p,
                                const std::vector<int>& active) {
  const int k = static_cast<int>(active.size());
  Eigen::MatrixXd ps(p.rows(), k);
  for (int i = 0; i < k; ++i) ps.col(i) = p.col(active[i]);
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
  kkt.topLeftCorner(k, k) = ps.transpose() * ps;
  kkt.topRightCorner(k, 1).setOnes();
  kkt.bottomLeftCorner(1, k).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs[k] = 1.0;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
  return cod.solve(rhs).head(k);
}

}  // namespace

Eigen::VectorXd project_onto_polytope(const std::vector<Eigen::VectorXd>& points,
                                      const Eigen::VectorXd& query, double tol,
                                      Eigen::VectorXd* hull_weights) {
  if (points.empty())
    throw std::invalid_argument("projection: points must be nonempty");
  const int k = static_cast<int>(points.size());
  const int d = static_cast<int>(points[0].size());
  Eigen::MatrixXd p(d, k);
  for (int i = 0; i < k; ++i) p.col(i) = points[i] - query;

  double scale = 1.0;
  for (int i = 0; i < k; ++i) scale = std::max(scale, p.col(i).squaredNorm());
  const double eps = std::max(tol, 1e-14) * scale;

  // Wolfe's minimum-norm point over conv{p_i}. Finite termination; the
  // corral S carries convex weights lambda over the active columns.
  int start = 0;
  for (int i = 1; i < k; ++i)
    if (p.col(i).squaredNorm() < p.col(start).squaredNorm()) start = i;
  std::vector<int> corral = {start};
  std::vector<double> lambda = {1.0};
  Eigen::VectorXd x = p.col(start);

  const int max_major = 16 * k + 64;
  for (int major = 0; major < max_major; ++major) {
    int best = 0;
    double best_val = x.dot(p.col(0));
    for (int i = 1; i < k; ++i) {
      const double v = x.dot(p.col(i));
      if (v < best_val) {
        best_val = v;
        best = i;
      }
    }
    if (best_val >= x.squaredNorm() - eps) break;
    bool already = false;
    for (int idx : corral)
      if (idx == best) already = true;
    if (already) break;  // numerical stall; x already optimal to precision
    corral.push_back(best);
    lambda.push_back(0.0);

    for (int minor = 0; minor < 8 * k + 64; ++minor) {
      Eigen::VectorXd w = affine_min_norm(p, corral);
      if (w.minCoeff() > 1e-12) {
        lambda.assign(w.data(), w.data() + w.size());
        break;
      }
      double theta = 1.0;
      for (size_t i = 0; i < corral.size(); ++i) {
        if (w[i] <= 1e-12) {
          const double denom = lambda[i] - w[i];
          if (denom > 0) theta = std::min(theta, lambda[i] / denom);
        }
      }
      std::vector<int> next_corral;
      std::vector<double> next_lambda;
      for (size_t i = 0; i < corral.size(); ++i) {
        const double v = lambda[i] + theta * (w[i] - lambda[i]);
        if (v > 1e-12) {
          next_corral.push_back(corral[i]);
          next_lambda.push_back(v);
        }
      }
      if (next_corral.empty()) {
        next_corral.push_back(corral[0]);
        next_lambda.push_back(1.0);
      }
      corral = std::move(next_corral);
      lambda = std::move(next_lambda);
    }
    x.setZero();
    for (size_t i = 0; i < corral.size(); ++i) x += lambda[i] * p.col(corral[i]);
  }

  if (hull_weights) {
    *hull_weights = Eigen::VectorXd::Zero(k);
    for (size_t i = 0; i < corral.size(); ++i)
      (*hull_weights)[corral[i]] = lambda[i];
  }
  return x + query;
}

Eigen::VectorXd project_onto_polytope(const std::vector<Eigen::VectorXd>& points,
                                      const Eigen::VectorXd& query,
                                      double tol) {
  return project_onto_polytope(points, query, tol, nullptr);
}

QpResult solve_qp(const Eigen::MatrixXd& p, const Eigen::VectorXd& q,
                  const Eigen::MatrixXd& g, const Eigen::VectorXd& h,
                  const Eigen::VectorXd& u0, int max_iters, double tol) {
  QpResult out;
  const int n = static_cast<int>(q.size());
  const int m = static_cast<int>(h.size());

  if (m == 0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(
        p + 1e-13 * Eigen::MatrixXd::Identity(n, n));
    out.x = ldlt.solve(-q);
    out.value = 0.5 * out.x.dot(p * out.x) + q.dot(out.x);
    out.status = QpStatus::kOptimal;
    return out;
  }

  Eigen::VectorXd u = u0;
  Eigen::VectorXd s = h - g * u;
  if (s.minCoeff() <= 0)
    throw std::invalid_argument("qp: start point not strictly feasible");
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(m);

  double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if (p.size()) scale = std::max(scale, p.cwiseAbs().maxCoeff());

  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::VectorXd r_dual = p * u + q + g.transpose() * lam;
    const double mu_gap = lam.dot(s) / m;
    if (mu_gap < tol * scale && r_dual.cwiseAbs().maxCoeff() < 1e3 * tol * scale) {
      out.status = QpStatus::kOptimal;
      out.x = u;
      out.value = 0.5 * u.dot(p * u) + q.dot(u);
      out.iterations = iter;
      return out;
    }

    const Eigen::VectorXd d = lam.cwiseQuotient(s);
    Eigen::MatrixXd kkt = p + g.transpose() * d.asDiagonal() * g;
    kkt.diagonal().array() += 1e-13 * scale;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(kkt);

    // Primal feasibility is maintained exactly (ds = -G du), so the Newton
    // system reduces to (P + G'DG) du = -r_dual + G'(lam - r_cent ./ s),
    // with r_cent the target for lam .* s.
    auto newton = [&](const Eigen::VectorXd& r_cent) {
      Eigen::VectorXd du = ldlt.solve(
          -r_dual + g.transpose() * (lam - r_cent.cwiseQuotient(s)));
      Eigen::VectorXd ds = -(g * du);
      Eigen::VectorXd dl =
          (r_cent - lam.cwiseProduct(s) - lam.cwiseProduct(ds))
              .cwiseQuotient(s);
      return std::make_pair(du, std::make_pair(ds, dl));
    };

    // Affine-scaling step, then a Mehrotra-style centering target.
    auto [du_a, rest_a] = newton(Eigen::VectorXd::Zero(m));
    auto [ds_a, dl_a] = rest_a;
    double alpha_a = 1.0;
    for (int i = 0; i < m; ++i) {
      if (ds_a[i] < 0) alpha_a = std::min(alpha_a, -s[i] / ds_a[i]);
      if (dl_a[i] < 0) alpha_a = std::min(alpha_a, -lam[i] / dl_a[i]);
    }
    const double mu_aff =
        (lam + alpha_a * dl_a).dot(s + alpha_a * ds_a) / m;
    const double sigma = std::pow(mu_aff / std::max(mu_gap, 1e-300), 3.0);
    const Eigen::VectorXd r_cent =
        Eigen::VectorXd::Constant(m, sigma * mu_gap) -
        dl_a.cwiseProduct(ds_a);

    auto [du, rest] = newton(r_cent);
    auto [ds, dl] = rest;
    double alpha = 1.0;
    for (int i = 0; i < m; ++i) {
      if (ds[i] < 0) alpha = std::min(alpha, -s[i] / ds[i]);
      if (dl[i] < 0) alpha = std::min(alpha, -lam[i] / dl[i]);
    }
    alpha = std::min(1.0, 0.99 * alpha);
    u += alpha * du;
    s += alpha * ds;
    lam += alpha * dl;
    s = s.cwiseMax(1e-300);
    lam = lam.cwiseMax(1e-300);
    out.iterations = iter + 1;
  }

  out.status = QpStatus::kMaxIterations;
  out.x = u;
  out.value = 0.5 * u.dot(p * u) + q.dot(u);
  return out;
}

}  // namespace uwot
