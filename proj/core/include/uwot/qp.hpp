#pragma once

#include <Eigen/Dense>
#include <vector>

namespace uwot {

// Euclidean projection of `query` onto conv(points) by Wolfe's minimum-norm
// point algorithm. Finite termination; the result satisfies the variational
// inequality (query - p) . (v - p) <= tol for every vertex v.
Eigen::VectorXd project_onto_polytope(const std::vector<Eigen::VectorXd>& points,
                                      const Eigen::VectorXd& query,
                                      double tol = 1e-10);

// Same, with hull weights returned (convex coefficients over `points`).
Eigen::VectorXd project_onto_polytope(const std::vector<Eigen::VectorXd>& points,
                                      const Eigen::VectorXd& query, double tol,
                                      Eigen::VectorXd* hull_weights);

enum class QpStatus { kOptimal, kMaxIterations, kFailed };

struct QpResult {
  QpStatus status = QpStatus::kFailed;
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
};

// min 1/2 u'Pu + q'u  s.t.  G u <= h, with P symmetric PSD. Primal-dual
// interior point with a short Mehrotra-style corrector; intended for the
// small dense subproblems that arise in dual operator evaluations. The
// caller must provide a strictly feasible start (G u0 < h).
QpResult solve_qp(const Eigen::MatrixXd& p, const Eigen::VectorXd& q,
                  const Eigen::MatrixXd& g, const Eigen::VectorXd& h,
                  const Eigen::VectorXd& u0, int max_iters = 100,
                  double tol = 1e-11);

}  // namespace uwot
