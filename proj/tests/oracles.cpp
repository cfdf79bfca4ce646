#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "invopt/conic_program.hpp"
#include "invopt/solver.hpp"

namespace invopt::oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VertexLpResult vertex_lp_min(const MatrixXd& A, const VectorXd& b,
                             const VectorXd& c, double tol) {
  const int rows = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  VertexLpResult res;
  std::vector<int> idx(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      MatrixXd M(n, n);
      VectorXd rhs(n);
      for (int k = 0; k < n; ++k) {
        M.row(k) = A.row(idx[k]);
        rhs(k) = b(idx[k]);
      }
      Eigen::FullPivLU<MatrixXd> lu(M);
      if (!lu.isInvertible()) return;
      const VectorXd v = lu.solve(rhs);
      if (((A * v - b).array() < -tol).any()) return;
      const double val = c.dot(v);
      if (!res.ok || val < res.value) {
        res.ok = true;
        res.value = val;
        res.argmin = v;
      }
      return;
    }
    for (int i = start; i < rows; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return res;
}

void random_bounded_polytope(Rng& rng, int n, int extra_rows, MatrixXd& A,
                             VectorXd& b) {
  const int rows = 2 * n + extra_rows;
  A.resize(rows, n);
  b.resize(rows);
  A.topRows(n) = MatrixXd::Identity(n, n);
  A.middleRows(n, n) = -MatrixXd::Identity(n, n);
  b.head(2 * n).setConstant(-1.0);
  for (int r = 0; r < extra_rows; ++r) {
    VectorXd a = rng.uniform_vector(n, -1.0, 1.0);
    if (a.norm() < 1e-6) a(0) = 1.0;
    A.row(2 * n + r) = a;
    b(2 * n + r) = -rng.uniform(0.2, 1.0) * a.lpNorm<1>();
  }
}

AgentProblem box_agent_problem(int n, double lo, double hi, int m, double slo,
                               double shi) {
  ConicSet sig;
  sig.A.resize(2 * m, m);
  sig.A.topRows(m) = MatrixXd::Identity(m, m);
  sig.A.bottomRows(m) = -MatrixXd::Identity(m, m);
  sig.b.resize(2 * m);
  sig.b.head(m).setConstant(slo);
  sig.b.tail(m).setConstant(-shi);
  if (shi - slo < 1e-12) {
    // singleton signal set as zero rows
    sig.A = MatrixXd::Identity(m, m);
    sig.b = VectorXd::Constant(m, slo);
    sig.cones = {Cone::zero(m)};
  } else {
    sig.cones = {Cone::nonneg(2 * m)};
  }
  MatrixXd W(2 * n, n);
  W.topRows(n) = MatrixXd::Identity(n, n);
  W.bottomRows(n) = -MatrixXd::Identity(n, n);
  MatrixXd H = MatrixXd::Zero(2 * n, m);
  VectorXd h(2 * n);
  h.head(n).setConstant(lo);
  h.tail(n).setConstant(-hi);
  return AgentProblem(sig, W, H, h, {Cone::nonneg(2 * n)});
}

AgentProblem linear_experiment_problem(const MatrixXd& A) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  ConicSet sig;
  sig.A.resize(2 * m, m);
  sig.A.topRows(m) = MatrixXd::Identity(m, m);
  sig.A.bottomRows(m) = -MatrixXd::Identity(m, m);
  sig.b.resize(2 * m);
  for (int i = 0; i < m; ++i) {
    const double r = A.row(i).lpNorm<1>();
    sig.b(i) = -r;
    sig.b(m + i) = -r;
  }
  sig.cones = {Cone::nonneg(2 * m)};
  MatrixXd W(2 * n + m, n);
  W.topRows(n) = MatrixXd::Identity(n, n);
  W.middleRows(n, n) = -MatrixXd::Identity(n, n);
  W.bottomRows(m) = A;
  MatrixXd H = MatrixXd::Zero(2 * n + m, m);
  H.bottomRows(m) = MatrixXd::Identity(m, m);
  VectorXd h = VectorXd::Zero(2 * n + m);
  h.head(2 * n).setConstant(-1.0);
  return AgentProblem(sig, W, H, h, {Cone::nonneg(2 * n + m)});
}

double grid_worst_case_risk(
    const std::vector<VectorXd>& grid_s, const std::vector<VectorXd>& grid_x,
    const std::function<double(const VectorXd&, const VectorXd&)>& loss,
    const Dataset& data, Norm ground, int p, double eps, double alpha) {
  const int G = static_cast<int>(grid_s.size());
  const int N = data.size();
  std::vector<double> lvals(G);
  for (int g = 0; g < G; ++g) lvals[g] = loss(grid_s[g], grid_x[g]);

  ConicProgram lp;
  lp.set_maximize(true);
  const int w = lp.add_vars(N * G, "w");
  const bool tail = alpha < 1.0;
  const int nu = tail ? lp.add_vars(N * G, "nu") : w;
  LinExpr budget(std::pow(eps, p));
  for (int i = 0; i < N; ++i) {
    LinExpr marg(-1.0 / N);
    for (int g = 0; g < G; ++g) {
      const int k = i * G + g;
      lp.add_nonneg(LinExpr::variable(w + k));
      marg.add(w + k, 1.0);
      VectorXd diff(grid_s[g].size() + grid_x[g].size());
      diff << grid_s[g] - data.samples[i].s, grid_x[g] - data.samples[i].x;
      budget.add(w + k, -std::pow(norm_value(ground, diff),
                                  static_cast<double>(p)));
      if (tail) {
        lp.add_nonneg(LinExpr::variable(nu + k));
        lp.add_nonneg(LinExpr::variable(w + k).add(nu + k, -1.0));  // nu <= w
      }
      lp.add_cost(nu + k, lvals[g] / alpha);
    }
    lp.add_equality(marg);
  }
  lp.add_nonneg(budget);
  if (tail) {
    // the w weights already sum to one, so the tail mass is alpha
    LinExpr mass(-alpha);
    for (int k = 0; k < N * G; ++k) mass.add(nu + k, 1.0);
    lp.add_equality(mass);
  }
  const auto rep = solve(lp, 1e-9);
  if (!rep.ok()) throw std::runtime_error("grid brute force LP failed");
  return rep.objective_value;
}

double simpson(const std::function<double(double)>& f, double a, double b,
               int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int i = 1; i < intervals; ++i)
    acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

VectorXd finite_diff_gradient(const std::function<double(const VectorXd&)>& f,
                              const VectorXd& x, double step) {
  VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    VectorXd hi = x, lo = x;
    hi(i) += step;
    lo(i) -= step;
    g(i) = (f(hi) - f(lo)) / (2.0 * step);
  }
  return g;
}

}  // namespace invopt::oracle
