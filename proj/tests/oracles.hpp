#pragma once

// Test-only oracles, independent of the implementation paths they audit:
// vertex enumeration for small LPs, grid/transport brute forces for
// worst-case risks, quadrature, finite differences.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "invopt/agent.hpp"
#include "invopt/dataset.hpp"
#include "invopt/rng.hpp"

namespace invopt::oracle {

// min c'x over {x : A x >= b}; enumerates all row n-subsets (n <= 4).
// Returns +inf marker (ok=false) on infeasible/degenerate input.
struct VertexLpResult {
  bool ok = false;
  double value = 0.0;
  Eigen::VectorXd argmin;
};
VertexLpResult vertex_lp_min(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                             const Eigen::VectorXd& c, double tol = 1e-9);

// unit box plus a few random cuts through the interior (always bounded,
// contains a ball around 0)
void random_bounded_polytope(Rng& rng, int n, int extra_rows, Eigen::MatrixXd& A,
                             Eigen::VectorXd& b);

// box agent problem: X(s) = [lo, hi]^n fixed, S = [slo, shi]^m box
AgentProblem box_agent_problem(int n, double lo, double hi, int m, double slo,
                               double shi);
// X(s) = {|x_i| <= 1, A x >= s} with S = {|s_i| <= ||a_i||_1} (the linear
// experiment geometry)
AgentProblem linear_experiment_problem(const Eigen::MatrixXd& A);

// worst-case E_Q[loss at grid points] over distributions within transport
// budget eps^p of the empirical distribution (p-th power cost), Q supported
// on the given grid. Exact LP over transport weights; CVaR via the tail
// representation. Used against both dro_linear and dro_quadratic.
double grid_worst_case_risk(
    const std::vector<Eigen::VectorXd>& grid_s,
    const std::vector<Eigen::VectorXd>& grid_x,
    const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>&
        loss,
    const Dataset& data, Norm ground, int p, double eps, double alpha);

double simpson(const std::function<double(double)>& f, double a, double b,
               int intervals);

Eigen::VectorXd finite_diff_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step = 1e-6);

}  // namespace invopt::oracle
