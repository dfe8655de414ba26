#include "uwot/primal.hpp"

#include <cmath>
#include <stdexcept>

#include "uwot/dual.hpp"
#include "uwot/frank_wolfe.hpp"
#include "uwot/lp.hpp"

namespace uwot {

double KernelPlan::feasibility_error(const Eigen::VectorXd& mu,
                                     const Eigen::VectorXd& nu) const {
  return (q.transpose() * mu - nu).cwiseAbs().maxCoeff();
}

double primal_objective(const Cost& cost, const DiscreteMeasure& mu,
                        const KernelPlan& plan) {
  if (plan.num_x() != mu.size() || plan.num_y() != cost.num_y())
    throw std::invalid_argument("primal_objective: dimension mismatch");
  double total = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    const double w = mu.weight(i);
    if (w > 0) total += w * cost.eval(i, plan.q.row(i));
  }
  return total;
}

double eval_bar_i(const Cost& cost, const DiscreteMeasure& mu,
                  const CouplingPlan& pi) {
  if (pi.pi.rows() != mu.size() || pi.pi.cols() != cost.num_y())
    throw std::invalid_argument("eval_bar_i: dimension mismatch");
  double total = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    const Eigen::VectorXd row = pi.pi.row(i);
    const double row_mass = row.sum();
    const double w = mu.weight(i);
    if (w > 0) {
      total += w * cost.eval(i, row / w);
    } else if (row_mass > 0) {
      const double r = cost.recession(i, row / row_mass);
      if (r == kInf) return kInf;
      total += row_mass * r;
    }
  }
  return total;
}

namespace {

// Indices of positive-mass rows; zero-weight atoms carry no primal
// variables (kernels are mu-a.s. objects).
std::vector<int> active_rows(const DiscreteMeasure& mu) {
  std::vector<int> act;
  for (int i = 0; i < mu.size(); ++i)
    if (mu.weight(i) > 0) act.push_back(i);
  return act;
}

Eigen::MatrixXd embed_rows(const Eigen::MatrixXd& q_act,
                           const std::vector<int>& act, int n, int m) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, m);
  for (size_t r = 0; r < act.size(); ++r) q.row(act[r]) = q_act.row(r);
  return q;
}

struct EpigraphPieces {
  // One (a, b) affine family per piece: c(x_i, m) = max_k b_k.row(i) m + a_k(i).
  std::vector<Eigen::VectorXd> a;
  std::vector<Eigen::MatrixXd> b;
};

EpigraphPieces lp_pieces(const Cost& cost) {
  EpigraphPieces out;
  if (cost.kind() == CostKind::kAffineSup) {
    const auto& c = static_cast<const AffineSupCost&>(cost);
    for (const auto& p : c.pieces()) {
      out.a.push_back(p.a);
      out.b.push_back(p.b);
    }
  } else if (cost.kind() == CostKind::kPiecewiseLinear) {
    const auto& c = static_cast<const PiecewiseLinearCost&>(cost);
    for (const auto& p : c.pieces()) {
      out.a.push_back(p.a);
      out.b.push_back(p.u * c.y_atoms().transpose());
    }
  } else {
    throw std::invalid_argument("solve_primal: lp method needs an affine-sup "
                                "or piecewise-linear cost");
  }
  return out;
}

// Epigraph LP: variables Q_ij (active rows) then t_i free;
// min sum mu_i t_i  s.t.  sum_i mu_i Q_ij = nu_j  and
// b_k.row(i) Q_i - t_i <= -a_k(i) for every piece k.
SolveReport solve_lp_path(const Cost& cost, const DiscreteMeasure& mu,
                          const DiscreteMeasure& nu,
                          const SolveOptions& options) {
  const auto act = active_rows(mu);
  const int na = static_cast<int>(act.size());
  const int m = nu.size();
  const EpigraphPieces pieces = lp_pieces(cost);
  const int npieces = static_cast<int>(pieces.a.size());

  const int nq = na * m;
  const int nvars = nq + na;
  LinearProgram lp;
  lp.c = Eigen::VectorXd::Zero(nvars);
  lp.is_free.assign(nvars, false);
  for (int r = 0; r < na; ++r) {
    lp.c[nq + r] = mu.weight(act[r]);
    lp.is_free[nq + r] = true;
  }
  lp.a_eq = Eigen::MatrixXd::Zero(m, nvars);
  lp.b_eq = Eigen::VectorXd(m);
  for (int j = 0; j < m; ++j) {
    for (int r = 0; r < na; ++r) lp.a_eq(j, r * m + j) = mu.weight(act[r]);
    lp.b_eq[j] = nu.weight(j);
  }
  lp.a_ub = Eigen::MatrixXd::Zero(npieces * na, nvars);
  lp.b_ub = Eigen::VectorXd(npieces * na);
  for (int k = 0; k < npieces; ++k) {
    for (int r = 0; r < na; ++r) {
      const int row = k * na + r;
      for (int j = 0; j < m; ++j)
        lp.a_ub(row, r * m + j) = pieces.b[k](act[r], j);
      lp.a_ub(row, nq + r) = -1.0;
      lp.b_ub[row] = -pieces.a[k][act[r]];
    }
  }

  SolveReport report;
  report.method = "lp";
  const LpSolution sol = solve_lp(lp);
  report.iterations = sol.iterations;
  if (sol.status == LpStatus::kInfeasible) {
    report.status = SolveStatus::kInfeasible;
    report.message = "marginal constraints are infeasible";
    return report;
  }
  if (sol.status != LpStatus::kOptimal) {
    report.status = SolveStatus::kNumericalFailure;
    report.message = "lp solver failed";
    return report;
  }

  Eigen::MatrixXd q_act(na, m);
  for (int r = 0; r < na; ++r)
    for (int j = 0; j < m; ++j) q_act(r, j) = std::max(0.0, sol.x[r * m + j]);
  report.plan.q = embed_rows(q_act, act, mu.size(), m);
  report.primal_value = primal_objective(cost, mu, report.plan);

  const DualPotential f = extract_dual_certificate(sol, 0, m);
  report.potential.conical = false;
  report.potential.f = f.f;
  report.dual_value = dual_value(cost, f, mu, nu);
  report.gap = std::abs(report.primal_value - report.dual_value);
  report.status = report.gap <= options.gap_tol * (1.0 + std::abs(report.primal_value))
                      ? SolveStatus::kSuccess
                      : SolveStatus::kNumericalFailure;
  return report;
}

// ---------------------------------------------------------------------------
// Active-set polish after Frank-Wolfe.

struct SupportProblem {
  std::vector<std::pair<int, int>> vars;  // (active-row r, column j)
  std::vector<int> var_of;                // r * m + j -> var index or -1
};

SupportProblem collect_support(const Eigen::MatrixXd& q, double thresh) {
  SupportProblem sp;
  const int n = static_cast<int>(q.rows());
  const int m = static_cast<int>(q.cols());
  sp.var_of.assign(n * m, -1);
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < m; ++j)
      if (q(r, j) > thresh) {
        sp.var_of[r * m + j] = static_cast<int>(sp.vars.size());
        sp.vars.push_back({r, j});
      }
  return sp;
}

// Quadratic costs restricted to a support are an equality-constrained QP;
// the KKT system is linear, so one solve per active set gives machine
// precision. Negative entries are dropped and dual-infeasible pairs added
// until the active set is consistent.
bool polish_quadratic(const QuadraticCost& cost, const Eigen::VectorXd& mu_act,
                      const std::vector<int>& act, const Eigen::VectorXd& nu,
                      Eigen::MatrixXd& q) {
  const int na = static_cast<int>(q.rows());
  const int m = static_cast<int>(q.cols());
  const Eigen::MatrixXd& y = cost.y_atoms();
  const double qmax = q.maxCoeff();
  SupportProblem sp = collect_support(q, 1e-10 * std::max(1.0, qmax));

  for (int round = 0; round < 60; ++round) {
    const int nv = static_cast<int>(sp.vars.size());
    const int rows = nv + m;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(rows, nv + m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
    // Stationarity: (S_r - x_r) . y_j - lambda_j = 0 for (r, j) in support.
    for (int v = 0; v < nv; ++v) {
      const auto [r, j] = sp.vars[v];
      for (int w = 0; w < nv; ++w) {
        const auto [r2, j2] = sp.vars[w];
        if (r2 == r) kkt(v, w) = y.row(j2).dot(y.row(j));
      }
      kkt(v, nv + j) = -1.0;
      rhs[v] = cost.x_atom(act[r]).dot(y.row(j));
    }
    // Marginals.
    for (int v = 0; v < nv; ++v) {
      const auto [r, j] = sp.vars[v];
      kkt(nv + j, v) = mu_act[r];
    }
    for (int j = 0; j < m; ++j) rhs[nv + j] = nu[j];

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
    const Eigen::VectorXd sol = cod.solve(rhs);
    if ((kkt * sol - rhs).cwiseAbs().maxCoeff() > 1e-7 * (1.0 + qmax))
      return false;  // inconsistent support; keep the FW iterate

    Eigen::MatrixXd q_new = Eigen::MatrixXd::Zero(na, m);
    for (int v = 0; v < nv; ++v) q_new(sp.vars[v].first, sp.vars[v].second) = sol[v];
    const Eigen::VectorXd lambda = sol.tail(m);

    double most_negative = q_new.minCoeff();
    if (most_negative < -1e-11 * std::max(1.0, qmax)) {
      // Drop the worst violator and re-solve.
      int drop = -1;
      double worst = 0.0;
      for (int v = 0; v < nv; ++v) {
        const double val = sol[v];
        if (val < worst) {
          worst = val;
          drop = v;
        }
      }
      sp.var_of[sp.vars[drop].first * m + sp.vars[drop].second] = -1;
      sp.vars.erase(sp.vars.begin() + drop);
      for (size_t v = 0; v < sp.vars.size(); ++v)
        sp.var_of[sp.vars[v].first * m + sp.vars[v].second] = static_cast<int>(v);
      continue;
    }

    // Dual feasibility: lambda_j <= (S_r - x_r) . y_j off the support.
    const Eigen::MatrixXd s = q_new * y;
    int add_r = -1, add_j = -1;
    double worst = -1e-9 * (1.0 + qmax);
    for (int r = 0; r < na; ++r) {
      for (int j = 0; j < m; ++j) {
        if (sp.var_of[r * m + j] >= 0) continue;
        const double slack =
            (s.row(r) - cost.x_atom(act[r]).transpose()).dot(y.row(j)) -
            lambda[j];
        if (slack < worst) {
          worst = slack;
          add_r = r;
          add_j = j;
        }
      }
    }
    if (add_r >= 0) {
      sp.var_of[add_r * m + add_j] = static_cast<int>(sp.vars.size());
      sp.vars.push_back({add_r, add_j});
      continue;
    }
    q = q_new.cwiseMax(0.0);
    return true;
  }
  return false;
}

// Composite costs: a small nonlinear transportation simplex. The working
// support is kept (mostly) a forest of the row/column bipartite graph:
// each row carries a single scalar F-mass, so Newton on the support KKT
// system is consistent on forests, while a violated off-support pair that
// would close a cycle is brought in by an exact mass shift around that
// cycle (column sums are the only marginals, rows are free).
struct SupportGraph {
  std::vector<std::pair<int, int>> vars;
  std::vector<int> var_of;  // r * m + j -> var index or -1
  int rows = 0, cols = 0;

  void reset(int na, int m) {
    rows = na;
    cols = m;
    vars.clear();
    var_of.assign(na * m, -1);
  }
  bool has(int r, int j) const { return var_of[r * cols + j] >= 0; }
  void add(int r, int j) {
    var_of[r * cols + j] = static_cast<int>(vars.size());
    vars.push_back({r, j});
  }
  void remove_all(const std::vector<std::pair<int, int>>& gone) {
    std::vector<std::pair<int, int>> next;
    for (const auto& v : vars) {
      bool dead = false;
      for (const auto& g : gone)
        if (g == v) dead = true;
      if (!dead) next.push_back(v);
    }
    vars = std::move(next);
    var_of.assign(rows * cols, -1);
    for (size_t v = 0; v < vars.size(); ++v)
      var_of[vars[v].first * cols + vars[v].second] = static_cast<int>(v);
  }
  // Path between graph nodes (rows are 0..na-1, columns na..na+m-1);
  // returns the edge sequence, empty when disconnected.
  std::vector<int> path(int from, int to) const {
    const int nodes = rows + cols;
    std::vector<int> prev_edge(nodes, -1), prev_node(nodes, -1);
    std::vector<bool> seen(nodes, false);
    std::vector<int> queue = {from};
    seen[from] = true;
    for (size_t head = 0; head < queue.size(); ++head) {
      const int node = queue[head];
      if (node == to) break;
      for (size_t e = 0; e < vars.size(); ++e) {
        const int r = vars[e].first, c = rows + vars[e].second;
        int other = -1;
        if (r == node) other = c;
        if (c == node) other = r;
        if (other < 0 || seen[other]) continue;
        seen[other] = true;
        prev_edge[other] = static_cast<int>(e);
        prev_node[other] = node;
        queue.push_back(other);
      }
    }
    std::vector<int> edges;
    if (!seen[to]) return edges;
    for (int node = to; node != from; node = prev_node[node])
      edges.push_back(prev_edge[node]);
    return edges;  // ordered from `to` back to `from`
  }
};

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) {
    for (int i = 0; i < n; ++i) parent_[i] = i;
  }
  int find(int a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[a] = b;
    return true;
  }

 private:
  std::vector<int> parent_;
};

// Maximal forest support from an approximate plan, heaviest pairs first,
// every column covered.
SupportGraph initial_support(const Eigen::MatrixXd& q,
                             const Eigen::VectorXd& mu_act,
                             const Eigen::VectorXd& nu) {
  const int na = static_cast<int>(q.rows());
  const int m = static_cast<int>(q.cols());
  SupportGraph sg;
  sg.reset(na, m);
  UnionFind uf(na + m);
  for (int j = 0; j < m; ++j) {
    int best = 0;
    for (int r = 1; r < na; ++r)
      if (mu_act[r] * q(r, j) > mu_act[best] * q(best, j)) best = r;
    sg.add(best, j);
    uf.unite(best, na + j);
  }
  std::vector<std::pair<double, std::pair<int, int>>> rest;
  for (int r = 0; r < na; ++r)
    for (int j = 0; j < m; ++j) {
      if (sg.has(r, j)) continue;
      const double share = mu_act[r] * q(r, j) / nu[j];
      if (share > 1e-9) rest.push_back({share, {r, j}});
    }
  std::sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (const auto& [share, pair] : rest)
    if (uf.unite(pair.first, na + pair.second)) sg.add(pair.first, pair.second);
  return sg;
}

bool polish_composite(const CompositeCost& cost, const Eigen::VectorXd& mu_act,
                      const std::vector<int>& act, const Eigen::VectorXd& nu,
                      Eigen::MatrixXd& q) {
  const int na = static_cast<int>(q.rows());
  const int m = static_cast<int>(q.cols());
  Eigen::MatrixXd fxy(na, m);
  for (int r = 0; r < na; ++r) fxy.row(r) = cost.fxy().row(act[r]);

  auto g_second = [&](double u) {
    const double h = 1e-6 * (1.0 + std::abs(u));
    return (cost.g_prime(u + h) - cost.g_prime(u - h)) / (2 * h);
  };

  // Restricted solve on the current support: damped Newton on the KKT
  // system, negative entries dropped all at once. Rank-deficient systems
  // (supports holding a cycle) go through the min-norm step and the
  // stagnation acceptance.
  auto solve_restricted = [&](SupportGraph& sg, Eigen::MatrixXd& q_io,
                              Eigen::VectorXd& lambda_out) -> bool {
    for (int shrink = 0; shrink < 60; ++shrink) {
      const int nv = static_cast<int>(sg.vars.size());
      Eigen::MatrixXd q_try = Eigen::MatrixXd::Zero(na, m);
      for (const auto& [r, j] : sg.vars)
        q_try(r, j) = std::max(q_io(r, j), 0.0);
      for (int j = 0; j < m; ++j) {
        const double col = mu_act.dot(q_try.col(j));
        if (col <= 0) return false;
        q_try.col(j) *= nu[j] / col;
      }

      Eigen::VectorXd u(na);
      for (int r = 0; r < na; ++r) u[r] = fxy.row(r).dot(q_try.row(r));
      Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
      for (int j = 0; j < m; ++j) {
        double best = kInf;
        for (const auto& [r, jj] : sg.vars)
          if (jj == j) best = std::min(best, cost.g_prime(u[r]) * fxy(r, j));
        lambda[j] = best == kInf ? 0.0 : best;
      }

      bool newton_ok = false;
      double prev_res = kInf;
      for (int it = 0; it < 80; ++it) {
        for (int r = 0; r < na; ++r) u[r] = fxy.row(r).dot(q_try.row(r));
        Eigen::VectorXd res(nv + m);
        for (int v = 0; v < nv; ++v) {
          const auto [r, j] = sg.vars[v];
          res[v] = cost.g_prime(u[r]) * fxy(r, j) - lambda[j];
        }
        for (int j = 0; j < m; ++j)
          res[nv + j] = mu_act.dot(q_try.col(j)) - nu[j];
        const double scale = 1.0 + lambda.cwiseAbs().maxCoeff();
        const double res_norm = res.cwiseAbs().maxCoeff();
        if (res_norm < 1e-13 * scale) {
          newton_ok = true;
          break;
        }
        if (res_norm > 0.9 * prev_res && it > 4) {
          newton_ok = res_norm < 1e-9 * scale;
          break;
        }
        prev_res = res_norm;

        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(nv + m, nv + m);
        for (int v = 0; v < nv; ++v) {
          const auto [r, j] = sg.vars[v];
          const double gpp = g_second(u[r]);
          for (int w = 0; w < nv; ++w) {
            const auto [r2, j2] = sg.vars[w];
            if (r2 == r) jac(v, w) = gpp * fxy(r, j) * fxy(r, j2);
          }
          jac(v, nv + j) = -1.0;
          jac(nv + j, v) = mu_act[r];
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
        const Eigen::VectorXd step = cod.solve(-res);
        if (!step.allFinite()) break;
        double alpha = 1.0;
        bool stepped = false;
        // Keep F-masses positive when G' blows up at 0.
        for (int t = 0; t < 50 && !stepped; ++t) {
          Eigen::MatrixXd q_cand = q_try;
          for (int v = 0; v < nv; ++v)
            q_cand(sg.vars[v].first, sg.vars[v].second) += alpha * step[v];
          bool ok = true;
          if (cost.g_prime_zero() == -kInf) {
            for (int r = 0; r < na; ++r)
              if (fxy.row(r).dot(q_cand.row(r).cwiseMax(0.0)) <= 0) ok = false;
          }
          if (ok) {
            q_try = q_cand;
            lambda += alpha * step.tail(m);
            stepped = true;
          }
          alpha *= 0.5;
        }
        if (!stepped) break;
      }
      if (!newton_ok) return false;

      const double qscale = 1.0 + q_try.cwiseAbs().maxCoeff();
      std::vector<int> column_count(m, 0);
      for (const auto& [r, j] : sg.vars) ++column_count[j];
      std::vector<std::pair<int, int>> gone;
      for (const auto& [r, j] : sg.vars) {
        if (q_try(r, j) < -1e-10 * qscale && column_count[j] > 1) {
          --column_count[j];
          gone.push_back({r, j});
        }
      }
      q_io = q_try.cwiseMax(0.0);
      if (gone.empty()) {
        lambda_out = lambda;
        return true;
      }
      sg.remove_all(gone);
    }
    return false;
  };

  Eigen::MatrixXd q_work = q;
  SupportGraph sg = initial_support(q_work, mu_act, nu);
  for (int round = 0; round < 400; ++round) {
    Eigen::VectorXd lambda;
    if (!solve_restricted(sg, q_work, lambda)) return false;

    // Global KKT scan: G'(U_r) F_rj >= lambda_j everywhere.
    Eigen::VectorXd u(na);
    for (int r = 0; r < na; ++r) u[r] = fxy.row(r).dot(q_work.row(r));
    int add_r = -1, add_j = -1;
    double worst = -1e-11 * (1.0 + lambda.cwiseAbs().maxCoeff());
    for (int r = 0; r < na; ++r)
      for (int j = 0; j < m; ++j) {
        if (sg.has(r, j)) continue;
        const double slack = cost.g_prime(u[r]) * fxy(r, j) - lambda[j];
        if (slack < worst) {
          worst = slack;
          add_r = r;
          add_j = j;
        }
      }
    if (add_r < 0) {
      q = q_work;
      return true;
    }

    const std::vector<int> cycle_path = sg.path(add_r, na + add_j);
    if (cycle_path.empty()) {
      sg.add(add_r, add_j);  // acyclic: the next Newton handles it
      continue;
    }

    // Shift mass around the cycle closed by the entering pair: signs
    // alternate along the path (walked from the entering column back to
    // the entering row), so every column stays balanced; rows are free.
    const int k = static_cast<int>(cycle_path.size());
    std::vector<double> sign(k);
    for (int e = 0; e < k; ++e) sign[e] = e % 2 == 0 ? -1.0 : 1.0;
    double budget = kInf;
    for (int e = 0; e < k; ++e) {
      if (sign[e] < 0) {
        const auto [r, j] = sg.vars[cycle_path[e]];
        budget = std::min(budget, mu_act[r] * q_work(r, j));
      }
    }
    if (!(budget > 0)) return false;
    auto deriv = [&](double delta) {
      Eigen::VectorXd du = Eigen::VectorXd::Zero(na);
      du[add_r] += fxy(add_r, add_j) * delta / mu_act[add_r];
      for (int e = 0; e < k; ++e) {
        const auto [r, j] = sg.vars[cycle_path[e]];
        du[r] += sign[e] * fxy(r, j) * delta / mu_act[r];
      }
      double total = cost.g_prime(std::max(u[add_r] + du[add_r], 0.0)) *
                     fxy(add_r, add_j);
      for (int e = 0; e < k; ++e) {
        const auto [r, j] = sg.vars[cycle_path[e]];
        total += sign[e] * cost.g_prime(std::max(u[r] + du[r], 0.0)) * fxy(r, j);
      }
      return total;
    };
    double lo = 0.0, hi = budget;
    if (deriv(budget) <= 0) {
      lo = budget;
    } else {
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (deriv(mid) < 0)
          lo = mid;
        else
          hi = mid;
      }
    }
    const double delta = 0.5 * (lo + hi);
    if (delta <= 1e-18) return false;
    q_work(add_r, add_j) += delta / mu_act[add_r];
    std::vector<std::pair<int, int>> gone;
    for (int e = 0; e < k; ++e) {
      const auto [r, j] = sg.vars[cycle_path[e]];
      q_work(r, j) =
          std::max(0.0, q_work(r, j) + sign[e] * delta / mu_act[r]);
      if (sign[e] < 0 && mu_act[r] * q_work(r, j) <= 1e-15)
        gone.push_back({r, j});
    }
    sg.add(add_r, add_j);
    if (!gone.empty()) sg.remove_all(gone);
  }
  return false;
}

// Structured interior point for costs whose objective splits across rows
// with a low-rank Hessian per row:
//   min sum_r h_r(q_r)  s.t.  sum_r mu_r q_rj = nu_j,  q >= 0,
// with grad h_r = g_r and hess h_r = B_r W_r B_r'. Composite costs have
// rank one (B = F row, W = mu G''), the quadratic cost rank d (B = Y,
// W = mu I). Each Newton step costs O(n m^2 + m^3) through Woodbury blocks
// and a column-space Schur complement, which converges where Frank-Wolfe
// alone cannot certify tight gaps.
struct RowwiseModel {
  int rank = 1;
  // Fill grad (n x m) and per-row factors B_r (m x rank), W_r (rank x rank).
  std::function<void(const Eigen::MatrixXd& q, Eigen::MatrixXd& grad,
                     std::vector<Eigen::MatrixXd>& b,
                     std::vector<Eigen::MatrixXd>& w)>
      refresh;
  // Rows whose F-mass must stay positive (G'(0) = -inf); empty otherwise.
  std::function<bool(const Eigen::MatrixXd& q)> domain_ok;
};

bool solve_rowwise_ipm(const RowwiseModel& model, const Eigen::VectorXd& mu_act,
                       const Eigen::VectorXd& nu, Eigen::MatrixXd& q_out) {
  const int na = static_cast<int>(mu_act.size());
  const int m = static_cast<int>(nu.size());
  const int k = model.rank;

  Eigen::MatrixXd q(na, m), z(na, m);
  for (int j = 0; j < m; ++j) q.col(j).setConstant(nu[j]);
  z.setOnes();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  Eigen::MatrixXd grad(na, m);
  std::vector<Eigen::MatrixXd> b(na), w(na);
  Eigen::MatrixXd best_q;
  double best_err = kInf;
  for (int iter = 0; iter < 100; ++iter) {
    model.refresh(q, grad, b, w);
    const double scale = 1.0 + grad.cwiseAbs().maxCoeff();

    Eigen::MatrixXd r_dual(na, m);
    for (int r = 0; r < na; ++r)
      r_dual.row(r) = grad.row(r) + mu_act[r] * y.transpose() - z.row(r);
    Eigen::VectorXd r_primal = q.transpose() * mu_act - nu;
    const double comp_gap = (q.array() * z.array()).sum() / (na * m);
    const double err = comp_gap / scale +
                       r_dual.cwiseAbs().maxCoeff() / scale +
                       r_primal.cwiseAbs().maxCoeff() / (1.0 + nu.maxCoeff());
    if (err < best_err) {
      best_err = err;
      best_q = q;
    }
    if (comp_gap < 1e-12 * scale &&
        r_dual.cwiseAbs().maxCoeff() < 1e-9 * scale &&
        r_primal.cwiseAbs().maxCoeff() < 1e-9 * (1.0 + nu.maxCoeff())) {
      q_out = q;
      return true;
    }
    // Past the well-conditioned region the Newton systems degrade; stop on
    // clear divergence and hand back the best iterate.
    if (best_err < 1e-8 && err > 1e3 * best_err) break;

    // Woodbury pieces for M_r = diag(z_r ./ q_r) + B W B'. The variant
    // K = (I + W B'D^{-1}B)^{-1} W stays valid for singular W.
    Eigen::MatrixXd dinv = q.array() / z.array();
    std::vector<Eigen::MatrixXd> dinv_b(na), kmat(na);
    for (int r = 0; r < na; ++r) {
      dinv_b[r] = dinv.row(r).asDiagonal() * b[r];
      const Eigen::MatrixXd inner =
          Eigen::MatrixXd::Identity(k, k) + w[r] * b[r].transpose() * dinv_b[r];
      kmat[r] = inner.partialPivLu().solve(w[r]);
    }
    auto minv_apply = [&](int r, const Eigen::RowVectorXd& v) -> Eigen::RowVectorXd {
      const Eigen::VectorXd dv = dinv.row(r).cwiseProduct(v).transpose();
      return (dv - dinv_b[r] * (kmat[r] * (b[r].transpose() * dv))).transpose();
    };

    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
    for (int r = 0; r < na; ++r) {
      const double wr = mu_act[r] * mu_act[r];
      schur.diagonal() += (wr * dinv.row(r)).transpose();
      schur -= wr * dinv_b[r] * kmat[r] * dinv_b[r].transpose();
    }
    Eigen::LDLT<Eigen::MatrixXd> schur_ldlt(schur);

    auto newton = [&](const Eigen::MatrixXd& target) {
      Eigen::MatrixXd rhs(na, m);
      for (int r = 0; r < na; ++r)
        rhs.row(r) = -r_dual.row(r) + target.row(r).cwiseQuotient(q.row(r)) -
                     z.row(r);
      Eigen::VectorXd agg = Eigen::VectorXd::Zero(m);
      for (int r = 0; r < na; ++r)
        agg += mu_act[r] * minv_apply(r, rhs.row(r)).transpose();
      const Eigen::VectorXd dy = schur_ldlt.solve(agg + r_primal);
      Eigen::MatrixXd dq(na, m), dz(na, m);
      for (int r = 0; r < na; ++r) {
        dq.row(r) =
            minv_apply(r, (rhs.row(r) - mu_act[r] * dy.transpose()).eval());
        dz.row(r) = (target.row(r) - q.row(r).cwiseProduct(z.row(r)) -
                     z.row(r).cwiseProduct(dq.row(r)))
                        .cwiseQuotient(q.row(r));
      }
      return std::make_pair(dq, std::make_pair(dy, dz));
    };

    auto step_len = [&](const Eigen::MatrixXd& dq, const Eigen::MatrixXd& dz) {
      double alpha = 1.0;
      for (int r = 0; r < na; ++r)
        for (int j = 0; j < m; ++j) {
          if (dq(r, j) < 0) alpha = std::min(alpha, -q(r, j) / dq(r, j));
          if (dz(r, j) < 0) alpha = std::min(alpha, -z(r, j) / dz(r, j));
        }
      return alpha;
    };

    // Mehrotra predictor-corrector.
    auto [dq_a, rest_a] = newton(Eigen::MatrixXd::Zero(na, m));
    auto [dy_a, dz_a] = rest_a;
    const double alpha_a = std::min(1.0, 0.99 * step_len(dq_a, dz_a));
    const double gap_aff =
        ((q + alpha_a * dq_a).array() * (z + alpha_a * dz_a).array()).sum() /
        (na * m);
    const double sigma = std::pow(gap_aff / std::max(comp_gap, 1e-300), 3.0);
    Eigen::MatrixXd target =
        Eigen::MatrixXd::Constant(na, m, sigma * comp_gap) -
        dq_a.cwiseProduct(dz_a);
    auto [dq, rest] = newton(target);
    auto [dy, dz] = rest;
    double alpha = std::min(1.0, 0.99 * step_len(dq, dz));
    if (model.domain_ok) {
      for (int t = 0; t < 60; ++t) {
        if (model.domain_ok((q + alpha * dq).cwiseMax(0.0).eval())) break;
        alpha *= 0.5;
      }
    }
    q += alpha * dq;
    y += alpha * dy;
    z += alpha * dz;
    q = q.cwiseMax(1e-300);
    z = z.cwiseMax(1e-300);
  }
  if (best_err < 1e-8) {
    q_out = best_q;
    return true;
  }
  return false;
}

bool solve_composite_ipm(const CompositeCost& cost,
                         const Eigen::VectorXd& mu_act,
                         const std::vector<int>& act, const Eigen::VectorXd& nu,
                         Eigen::MatrixXd& q_out) {
  const int na = static_cast<int>(mu_act.size());
  const int m = static_cast<int>(nu.size());
  Eigen::MatrixXd fxy(na, m);
  for (int r = 0; r < na; ++r) fxy.row(r) = cost.fxy().row(act[r]);
  auto g_second = [&cost](double u) {
    const double h = 1e-7 * (1.0 + std::abs(u));
    return (cost.g_prime(u + h) - cost.g_prime(u - h)) / (2 * h);
  };
  RowwiseModel model;
  model.rank = 1;
  model.refresh = [&, na, m](const Eigen::MatrixXd& q, Eigen::MatrixXd& grad,
                             std::vector<Eigen::MatrixXd>& b,
                             std::vector<Eigen::MatrixXd>& w) {
    for (int r = 0; r < na; ++r) {
      const double u = fxy.row(r).dot(q.row(r));
      grad.row(r) = mu_act[r] * cost.g_prime(u) * fxy.row(r);
      b[r] = fxy.row(r).transpose();
      w[r] = Eigen::MatrixXd::Constant(
          1, 1, std::max(0.0, mu_act[r] * g_second(u)));
    }
  };
  if (cost.g_prime_zero() == -kInf) {
    model.domain_ok = [&, na](const Eigen::MatrixXd& q) {
      for (int r = 0; r < na; ++r)
        if (fxy.row(r).dot(q.row(r)) <= 0) return false;
      return true;
    };
  }
  return solve_rowwise_ipm(model, mu_act, nu, q_out);
}

bool solve_quadratic_ipm(const QuadraticCost& cost,
                         const Eigen::VectorXd& mu_act,
                         const std::vector<int>& act, const Eigen::VectorXd& nu,
                         Eigen::MatrixXd& q_out) {
  const int na = static_cast<int>(mu_act.size());
  const int d = cost.dim();
  const Eigen::MatrixXd& y_atoms = cost.y_atoms();
  RowwiseModel model;
  model.rank = d;
  model.refresh = [&, na, d](const Eigen::MatrixXd& q, Eigen::MatrixXd& grad,
                             std::vector<Eigen::MatrixXd>& b,
                             std::vector<Eigen::MatrixXd>& w) {
    for (int r = 0; r < na; ++r) {
      const Eigen::VectorXd zr = y_atoms.transpose() * q.row(r).transpose();
      const Eigen::VectorXd x = cost.x_atom(act[r]);
      grad.row(r) = mu_act[r] * (y_atoms * (zr - x)).transpose();
      b[r] = y_atoms;
      w[r] = mu_act[r] * Eigen::MatrixXd::Identity(d, d);
    }
  };
  return solve_rowwise_ipm(model, mu_act, nu, q_out);
}

SolveReport solve_fw_path(const Cost& cost, const DiscreteMeasure& mu,
                          const DiscreteMeasure& nu,
                          const SolveOptions& options) {
  const auto act = active_rows(mu);
  const int na = static_cast<int>(act.size());
  const int m = nu.size();
  Eigen::VectorXd mu_act(na);
  for (int r = 0; r < na; ++r) mu_act[r] = mu.weight(act[r]);
  const Eigen::VectorXd nu_w = nu.weights();

  const CostKind kind = cost.kind();
  if (kind == CostKind::kPower || kind == CostKind::kAffineSup ||
      kind == CostKind::kPiecewiseLinear)
    throw std::invalid_argument(
        "solve_primal: fw method needs a differentiable cost");

  FwValueFn value = [&](const Eigen::MatrixXd& q) {
    double total = 0.0;
    for (int r = 0; r < na; ++r) total += mu_act[r] * cost.eval(act[r], q.row(r));
    return total;
  };
  FwGradFn grad = [&](const Eigen::MatrixXd& q) {
    Eigen::MatrixXd g(na, m);
    if (kind == CostKind::kComposite) {
      const auto& c = static_cast<const CompositeCost&>(cost);
      for (int r = 0; r < na; ++r) {
        const double u = c.f_mass(act[r], q.row(r));
        g.row(r) = mu_act[r] * c.g_prime(u) * c.fxy().row(act[r]);
      }
    } else {
      const auto& c = static_cast<const ConicalCost&>(cost);
      for (int r = 0; r < na; ++r) {
        const Eigen::VectorXd z = c.barycenter(q.row(r));
        g.row(r) = mu_act[r] * (c.y_atoms() * c.f_grad(act[r], z)).transpose();
      }
    }
    return g;
  };

  // Quadratic and composite costs get an exact active-set polish, so the
  // FW stage only has to identify the support; other costs must close the
  // gap themselves.
  const bool has_polish =
      kind == CostKind::kQuadratic || kind == CostKind::kComposite;
  Eigen::MatrixXd q0(na, m);
  for (int j = 0; j < m; ++j) q0.col(j).setConstant(nu_w[j]);
  const double scale = 1.0 + std::abs(value(q0));

  FwOptions fw_options;
  fw_options.max_iters =
      has_polish ? std::min(options.max_iters, 1500 + 30 * (na + m))
                 : options.max_iters;
  fw_options.gap_tol =
      std::max(has_polish ? 1e-7 : options.gap_tol * 1e-3, 1e-14) * scale;
  fw_options.step_rule = FwStepRule::kLineSearch;
  fw_options.pairwise = true;
  FwState state =
      fw_minimize_from(value, grad, mu_act, nu_w, std::move(q0), fw_options);

  auto try_polish = [&](Eigen::MatrixXd& q) {
    Eigen::MatrixXd polished = q;
    bool ok = false;
    if (kind == CostKind::kQuadratic) {
      ok = polish_quadratic(static_cast<const QuadraticCost&>(cost), mu_act,
                            act, nu_w, polished);
    } else if (kind == CostKind::kComposite) {
      ok = polish_composite(static_cast<const CompositeCost&>(cost), mu_act,
                            act, nu_w, polished);
    }
    if (ok && value(polished) <= value(q) + 1e-12 * scale) q = polished;
  };

  SolveReport report;
  report.method = "fw";

  // Certify from the first-order conditions at the candidate solution; if
  // the certificate misses the tolerance, push FW further from the same
  // iterate and polish again.
  for (int attempt = 0; attempt < 2; ++attempt) {
    try_polish(state.q);
    report.iterations = state.iterations;
    report.plan.q = embed_rows(state.q, act, mu.size(), m);
    report.primal_value = primal_objective(cost, mu, report.plan);

    if (kind == CostKind::kComposite) {
      const auto& c = static_cast<const CompositeCost&>(cost);
      DualPotential f;
      f.f = Eigen::VectorXd(m);
      for (int j = 0; j < m; ++j) {
        double v = kInf;
        for (int r = 0; r < na; ++r) {
          const double u = c.f_mass(act[r], state.q.row(r));
          v = std::min(v, c.g_prime(u) * c.fxy()(act[r], j));
        }
        f.f[j] = -v;
      }
      report.potential.conical = false;
      report.potential.f = f.f;
      report.dual_value = dual_value(cost, f, mu, nu);
    } else {
      const auto& c = static_cast<const ConicalCost&>(cost);
      ConicalPotential phi;
      phi.directions = Eigen::MatrixXd(na, c.dim());
      for (int r = 0; r < na; ++r) {
        const Eigen::VectorXd z = c.barycenter(state.q.row(r));
        phi.directions.row(r) = -c.f_grad(act[r], z);
      }
      report.potential.conical = true;
      report.potential.directions = phi.directions;
      report.dual_value = dual_value(c, phi, mu, nu);
    }
    report.gap = std::abs(report.primal_value - report.dual_value);
    const double tol = options.gap_tol * (1.0 + std::abs(report.primal_value));
    if (report.gap <= tol || state.fw_gap <= tol) {
      report.status = SolveStatus::kSuccess;
      return report;
    }
    if (attempt == 0) {
      bool refined = false;
      Eigen::MatrixXd q_ipm;
      if (kind == CostKind::kComposite) {
        refined = solve_composite_ipm(static_cast<const CompositeCost&>(cost),
                                      mu_act, act, nu_w, q_ipm);
      } else if (kind == CostKind::kQuadratic) {
        refined = solve_quadratic_ipm(static_cast<const QuadraticCost&>(cost),
                                      mu_act, act, nu_w, q_ipm);
      }
      if (refined && value(q_ipm) <= value(state.q) + 1e-10 * scale) {
        state.q = q_ipm;
      } else {
        FwOptions retry = fw_options;
        retry.max_iters = options.max_iters;
        retry.gap_tol = std::max(0.3 * options.gap_tol, 1e-14) * scale;
        state = fw_minimize_from(value, grad, mu_act, nu_w,
                                 std::move(state.q), retry);
      }
    }
  }
  report.status = SolveStatus::kNumericalFailure;
  report.message = "frank-wolfe did not certify the requested gap";
  return report;
}

SolveReport solve_closed_form_path(const Cost& cost, const DiscreteMeasure& mu,
                                   const DiscreteMeasure& nu,
                                   const SolveOptions& options) {
  if (cost.kind() != CostKind::kPower)
    throw std::invalid_argument(
        "solve_primal: closed_form method is only available for power costs");
  const auto& c = static_cast<const PowerCost&>(cost);
  const PowerClosedForm cf = closed_form_power(mu, nu, c.eta());

  SolveReport report;
  report.method = "closed_form";
  report.plan = cf.plan;
  report.primal_value = primal_objective(cost, mu, report.plan);

  ConicalPotential phi;
  phi.directions = Eigen::MatrixXd(1, 1);
  phi.directions(0, 0) = cf.wage;
  report.potential.conical = true;
  report.potential.directions = phi.directions;
  report.dual_value = dual_value(c, phi, mu, nu);
  report.gap = std::abs(report.primal_value - report.dual_value);
  report.status = report.gap <= options.gap_tol * (1.0 + std::abs(report.primal_value))
                      ? SolveStatus::kSuccess
                      : SolveStatus::kNumericalFailure;
  return report;
}

}  // namespace

SolveReport solve_primal(const Cost& cost, const DiscreteMeasure& mu,
                         const DiscreteMeasure& nu,
                         const SolveOptions& options) {
  if (mu.size() != cost.num_x() || nu.size() != cost.num_y())
    throw std::invalid_argument("solve_primal: measure/cost size mismatch");
  if (std::abs(mu.total_mass() - nu.total_mass()) >
      std::max(options.mass_tol, 1e-9)) {
    SolveReport report;
    report.status = SolveStatus::kInfeasible;
    report.message = "unbalanced masses: mu and nu must carry equal mass";
    return report;
  }

  SolveMethod method = options.method;
  if (method == SolveMethod::kAuto) {
    switch (cost.kind()) {
      case CostKind::kPower:
        method = SolveMethod::kClosedForm;
        break;
      case CostKind::kAffineSup:
      case CostKind::kPiecewiseLinear:
        method = SolveMethod::kLp;
        break;
      default:
        method = SolveMethod::kFw;
        break;
    }
  }
  switch (method) {
    case SolveMethod::kLp:
      return solve_lp_path(cost, mu, nu, options);
    case SolveMethod::kFw:
      return solve_fw_path(cost, mu, nu, options);
    case SolveMethod::kClosedForm:
      return solve_closed_form_path(cost, mu, nu, options);
    default:
      throw std::logic_error("solve_primal: unreachable");
  }
}

PowerClosedForm closed_form_power(const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu, double eta) {
  if (mu.dim() != 1 || nu.dim() != 1)
    throw std::invalid_argument("closed_form_power: d = 1 only");
  const int n = mu.size();
  const int m = nu.size();
  const double exponent = 1.0 / (1.0 - eta);
  double z = 0.0;
  Eigen::VectorXd xpow(n);
  for (int i = 0; i < n; ++i) {
    xpow[i] = std::pow(mu.atom(i)[0], exponent);
    z += mu.weight(i) * xpow[i];
  }
  if (z <= 0.0)
    throw std::domain_error("closed_form_power: all x atoms vanish (Z = 0)");
  double mean_y = 0.0;
  for (int j = 0; j < m; ++j) mean_y += nu.weight(j) * nu.atom(j)[0];

  PowerClosedForm out;
  out.plan.q = Eigen::MatrixXd(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      out.plan.q(i, j) = xpow[i] / z * nu.weight(j);
  out.value = -std::pow(z, 1.0 - eta) * std::pow(mean_y, eta);
  out.wage = eta * std::pow(z / mean_y, 1.0 - eta);
  return out;
}

namespace {

// Corner-rule coupling of row masses against nu, walking columns in the
// given order; produces monotone supports by construction.
Eigen::MatrixXd corner_fill(const Eigen::VectorXd& row_mass,
                            const Eigen::VectorXd& nu, bool reverse_cols) {
  const int n = static_cast<int>(row_mass.size());
  const int m = static_cast<int>(nu.size());
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, m);
  int j = reverse_cols ? m - 1 : 0;
  double col_left = nu[j];
  for (int i = 0; i < n; ++i) {
    double left = row_mass[i];
    while (left > 1e-16) {
      const double take = std::min(left, col_left);
      gamma(i, j) += take;
      left -= take;
      col_left -= take;
      if (col_left <= 1e-16) {
        const int next = reverse_cols ? j - 1 : j + 1;
        if (next < 0 || next >= m) {
          gamma(i, j) += left;  // dump roundoff in the last column
          break;
        }
        j = next;
        col_left = nu[j];
      }
    }
  }
  return gamma;
}

}  // namespace

UniformTriple closed_form_uniform_triple(double eta, int n) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("uniform_triple: eta must lie in (0,1)");
  if (n < 2) throw std::invalid_argument("uniform_triple: n >= 2 required");

  std::vector<Point> atoms(n);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
  for (int i = 0; i < n; ++i) {
    Point p(1);
    p[0] = (i + 0.5) / n;
    atoms[i] = p;
  }
  UniformTriple out;
  out.grid = DiscreteMeasure(atoms, w);

  const double a0 = 1.0 / (1.0 - eta);
  const double c = (2.0 - eta) / (1.0 - eta);
  const double a1 = c / 2.0;
  const double a2 = c;

  // Random sorting: exact cell integrals of N0(x) = C x^{a0} make the
  // marginal exact (C / (a0 + 1) = 1).
  Eigen::MatrixXd q0(n, n);
  for (int i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    const double cell =
        c / (a0 + 1.0) * (std::pow(hi, a0 + 1.0) - std::pow(lo, a0 + 1.0));
    for (int j = 0; j < n; ++j) q0(i, j) = (cell / w[i]) * w[j];
  }
  out.random_sorting.q = q0;

  // PAM: T1(x) = x^{a1} increasing, cell masses T1(hi) - T1(lo) sum to 1.
  Eigen::VectorXd mass1(n);
  for (int i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    mass1[i] = std::pow(hi, a1) - std::pow(lo, a1);
  }
  Eigen::MatrixXd gamma1 = corner_fill(mass1, w, /*reverse_cols=*/false);
  out.positive_assortative.q = gamma1 * static_cast<double>(n);  // / mu_i

  // NAM: T2(x) = sqrt(1 - x^{a2}) decreasing.
  Eigen::VectorXd mass2(n);
  for (int i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    mass2[i] = std::sqrt(1.0 - std::pow(lo, a2)) - std::sqrt(1.0 - std::pow(hi, a2));
  }
  Eigen::MatrixXd gamma2 = corner_fill(mass2, w, /*reverse_cols=*/true);
  out.negative_assortative.q = gamma2 * static_cast<double>(n);

  return out;
}

}  // namespace uwot
