#include "uwot/frank_wolfe.hpp"

#include <cmath>
#include <stdexcept>

namespace uwot {
namespace {

// Per column j, the oracle row argmin_i grad_ij / mu_i (lowest index wins
// ties) and the away row argmax over rows currently carrying mass.
struct ColumnRows {
  std::vector<int> toward;
  std::vector<int> away;
};

ColumnRows select_rows(const Eigen::MatrixXd& grad, const Eigen::MatrixXd& q,
                       const Eigen::VectorXd& mu) {
  const int n = static_cast<int>(grad.rows());
  const int m = static_cast<int>(grad.cols());
  ColumnRows rows;
  rows.toward.assign(m, 0);
  rows.away.assign(m, -1);
  for (int j = 0; j < m; ++j) {
    int best = 0;
    double best_rate = grad(0, j) / mu[0];
    for (int i = 1; i < n; ++i) {
      const double rate = grad(i, j) / mu[i];
      if (rate < best_rate) {
        best_rate = rate;
        best = i;
      }
    }
    rows.toward[j] = best;
    int worst = -1;
    double worst_rate = 0.0;
    for (int i = 0; i < n; ++i) {
      if (q(i, j) <= 0.0) continue;
      const double rate = grad(i, j) / mu[i];
      if (worst < 0 || rate > worst_rate) {
        worst_rate = rate;
        worst = i;
      }
    }
    rows.away[j] = worst;
  }
  return rows;
}

// Exact line search on [0, gamma_max]: the directional derivative psi is
// nondecreasing by convexity, so find its root by a safeguarded secant
// (Illinois) with a bisection fallback.
double line_search(const FwGradFn& grad, const Eigen::MatrixXd& q,
                   const Eigen::MatrixXd& dir, double slope0,
                   double gamma_max) {
  auto psi = [&](double gamma) {
    return (grad(q + gamma * dir).array() * dir.array()).sum();
  };
  double lo = 0.0, flo = slope0;
  double hi = gamma_max, fhi = psi(gamma_max);
  if (fhi <= 0) return gamma_max;
  for (int it = 0; it < 60; ++it) {
    double mid;
    if (fhi > flo) {
      mid = hi - fhi * (hi - lo) / (fhi - flo);  // secant
      if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    } else {
      mid = 0.5 * (lo + hi);
    }
    const double fmid = psi(mid);
    if (std::abs(fmid) <= 1e-16 * (1.0 + std::abs(slope0))) return mid;
    if (fmid < 0) {
      lo = mid;
      flo = fmid;
      fhi *= 0.5;  // Illinois damping keeps the secant from one-siding
    } else {
      hi = mid;
      fhi = fmid;
      flo *= 0.5;
    }
    if (hi - lo < 1e-15 * gamma_max) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

FwState fw_minimize_from(const FwValueFn& value, const FwGradFn& grad,
                         const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                         Eigen::MatrixXd q, const FwOptions& options) {
  const int n = static_cast<int>(mu.size());
  const int m = static_cast<int>(nu.size());
  if (q.rows() != n || q.cols() != m)
    throw std::invalid_argument("fw: start iterate has wrong shape");
  for (int i = 0; i < n; ++i)
    if (!(mu[i] > 0.0))
      throw std::invalid_argument("fw: all mu entries must be positive");

  FwState state;
  for (int t = 0; t < options.max_iters; ++t) {
    const Eigen::MatrixXd g = grad(q);
    const ColumnRows rows = select_rows(g, q, mu);

    // FW gap: g . (q - v) with v the oracle vertex.
    double gap = (g.array() * q.array()).sum();
    for (int j = 0; j < m; ++j)
      gap -= g(rows.toward[j], j) * nu[j] / mu[rows.toward[j]];
    state.fw_gap = gap;
    state.iterations = t;
    if (gap <= options.gap_tol) {
      state.converged = true;
      break;
    }

    // Toward-vertex direction (feasible for the full step gamma = 1).
    Eigen::MatrixXd dir_fw = -q;
    for (int j = 0; j < m; ++j)
      dir_fw(rows.toward[j], j) += nu[j] / mu[rows.toward[j]];
    const double slope_fw = -gap;

    // Best single-column swap: transfer the away row's mass in one column
    // to the oracle row. Vertex pairs of this form restore the fast local
    // rate that the toward-vertex steps lack near a face.
    int swap_col = -1;
    double swap_slope = 0.0;
    if (options.pairwise) {
      for (int j = 0; j < m; ++j) {
        const int a = rows.away[j];
        const int i = rows.toward[j];
        if (a < 0 || a == i) continue;
        const double budget = mu[a] * q(a, j);
        const double slope = budget * (g(i, j) / mu[i] - g(a, j) / mu[a]);
        if (slope < swap_slope) {
          swap_slope = slope;
          swap_col = j;
        }
      }
    }

    // Swap steps whenever available: on a product of simplices the column
    // coordinates are their own active-set decomposition, and greedy swaps
    // give the fast local rate that toward-vertex steps lack near faces.
    // The toward-vertex direction only runs while it is dramatically better
    // (early iterations far from any face).
    const bool use_swap =
        swap_col >= 0 && swap_slope < 0.25 * slope_fw / std::max(1, m);
    Eigen::MatrixXd dir;
    double slope;
    if (use_swap) {
      dir = Eigen::MatrixXd::Zero(n, m);
      const int a = rows.away[swap_col];
      const int i = rows.toward[swap_col];
      const double budget = mu[a] * q(a, swap_col);
      dir(i, swap_col) += budget / mu[i];
      dir(a, swap_col) -= budget / mu[a];
      slope = swap_slope;
    } else {
      dir = std::move(dir_fw);
      slope = slope_fw;
    }
    if (slope >= 0) {  // no descent direction left at this precision
      state.converged = gap <= options.gap_tol;
      break;
    }

    double gamma;
    if (options.step_rule == FwStepRule::kLineSearch) {
      gamma = line_search(grad, q, dir, slope, 1.0);
    } else {
      gamma = std::min(1.0, 2.0 / (t + 2.0));
    }
    if (gamma <= 0) break;
    q += gamma * dir;
    q = q.cwiseMax(0.0);

    // Cheap marginal repair: the directions conserve column mass exactly in
    // exact arithmetic; rescaling kills accumulated roundoff.
    if ((t & 63) == 63) {
      for (int j = 0; j < m; ++j) {
        const double col = mu.dot(q.col(j));
        if (col > 0) q.col(j) *= nu[j] / col;
      }
    }
  }

  state.q = std::move(q);
  state.value = value(state.q);
  return state;
}

FwState fw_minimize(const FwValueFn& value, const FwGradFn& grad,
                    const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                    const FwOptions& options) {
  const int n = static_cast<int>(mu.size());
  const int m = static_cast<int>(nu.size());
  // Interior start q_ij = nu_j: feasible because mu has unit mass.
  Eigen::MatrixXd q0(n, m);
  for (int j = 0; j < m; ++j) q0.col(j).setConstant(nu[j]);
  return fw_minimize_from(value, grad, mu, nu, std::move(q0), options);
}

}  // namespace uwot
