#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "invopt/conic_program.hpp"
#include "invopt/solver.hpp"

using namespace invopt;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

LinExpr ex(int v, double c = 1.0) { return LinExpr::variable(v, c); }

}  // namespace

TEST_CASE("box LP minimum") {
  ConicProgram p;
  const int x = p.add_vars(1);
  p.add_cost(x, 1.0);
  p.add_nonneg(LinExpr(1.0).add(x, 1.0));   // x + 1 >= 0
  p.add_nonneg(LinExpr(1.0).add(x, -1.0));  // 1 - x >= 0
  auto rep = solve(p, 1e-8);
  REQUIRE(rep.status == SolverReport::Status::Optimal);
  CHECK(rep.objective_value == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(rep.primal(x) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("contradictory rows are infeasible") {
  ConicProgram p;
  const int x = p.add_vars(1);
  p.add_nonneg(LinExpr(-1.0).add(x, 1.0));  // x >= 1
  p.add_nonneg(ex(x, -1.0));                // -x >= 0
  auto rep = solve(p, 1e-8);
  CHECK(rep.status == SolverReport::Status::Infeasible);
}

TEST_CASE("unbounded LP") {
  ConicProgram p;
  const int x = p.add_vars(1);
  p.add_cost(x, 1.0);
  p.add_nonneg(ex(x, -1.0));  // -x >= 0, minimize x -> unbounded below
  auto rep = solve(p, 1e-8);
  CHECK(rep.status == SolverReport::Status::Unbounded);
}

TEST_CASE("equality rows and duals") {
  ConicProgram p;
  const int x = p.add_vars(2);
  p.add_cost(x, 1.0);
  p.add_cost(x + 1, 2.0);
  LinExpr sum(-1.0);
  sum.add(x, 1.0).add(x + 1, 1.0);
  p.add_equality(sum);  // x0 + x1 = 1
  p.add_nonneg(ex(x));
  p.add_nonneg(ex(x + 1));
  auto rep = solve(p, 1e-8);
  REQUIRE(rep.status == SolverReport::Status::Optimal);
  CHECK(rep.objective_value == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(rep.primal(x) == doctest::Approx(1.0).epsilon(1e-6));
  // weak duality audit
  CHECK(rep.objective_value >= rep.dual_objective - 1e-7);
  CHECK(std::abs(rep.objective_value - rep.dual_objective) < 1e-6);
}

TEST_CASE("maximize sense") {
  ConicProgram p;
  const int x = p.add_vars(1);
  p.set_maximize(true);
  p.add_cost(x, 1.0);
  p.add_nonneg(LinExpr(2.0).add(x, -1.0));  // x <= 2
  p.add_nonneg(ex(x));
  auto rep = solve(p, 1e-8);
  REQUIRE(rep.status == SolverReport::Status::Optimal);
  CHECK(rep.objective_value == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("second-order cone projection") {
  // min t s.t. t >= ||x - p||, x in box [0,1]^3, p = (2, 0.5, -1)
  // solution: x = (1, 0.5, 0), distance = sqrt(1 + 0 + 1) = sqrt(2)
  ConicProgram p;
  const int t = p.add_vars(1);
  const int x = p.add_vars(3);
  p.add_cost(t, 1.0);
  const double target[3] = {2.0, 0.5, -1.0};
  std::vector<LinExpr> soc{ex(t)};
  for (int i = 0; i < 3; ++i) {
    soc.push_back(LinExpr(-target[i]).add(x + i, 1.0));
    p.add_nonneg(ex(x + i));
    p.add_nonneg(LinExpr(1.0).add(x + i, -1.0));
  }
  p.add_soc(soc);
  auto rep = solve(p, 1e-8);
  REQUIRE(rep.status == SolverReport::Status::Optimal);
  CHECK(rep.objective_value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  CHECK(rep.primal(x + 0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(rep.primal(x + 1) == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(rep.primal(x + 2) == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("sdp: largest eigenvalue") {
  // min t s.t. t I - A >= 0 with A symmetric; optimum is lambda_max(A)
  MatrixXd A(3, 3);
  A << 2, 1, 0, 1, 3, -1, 0, -1, 1;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  const double lmax = es.eigenvalues().maxCoeff();

  ConicProgram p;
  const int t = p.add_vars(1);
  p.add_cost(t, 1.0);
  std::vector<std::vector<LinExpr>> entries(3, std::vector<LinExpr>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j) {
      LinExpr e(-A(i, j));
      if (i == j) e.add(t, 1.0);
      entries[i][j] = e;
    }
  p.add_psd(3, entries);
  auto rep = solve(p, 1e-7);
  REQUIRE(rep.status == SolverReport::Status::Optimal);
  CHECK(rep.objective_value == doctest::Approx(lmax).epsilon(1e-6));
}

TEST_CASE("sdp with equality trace constraint") {
  // max <C, X> s.t. tr X = 1, X >= 0  => lambda_max(C)
  MatrixXd C(2, 2);
  C << 1, 2, 2, -3;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(C);
  const double lmax = es.eigenvalues().maxCoeff();

  ConicProgram p;
  const int xv = p.add_vars(3);  // svec order: (0,0),(1,0),(1,1)
  p.set_maximize(true);
  // <C, X> with X = smat(xv * scaling): cost on svec coords equals svec(C)
  p.add_cost(xv + 0, C(0, 0));
  p.add_cost(xv + 1, std::sqrt(2.0) * C(1, 0));
  p.add_cost(xv + 2, C(1, 1));
  LinExpr tr(-1.0);
  tr.add(xv + 0, 1.0).add(xv + 2, 1.0);
  p.add_equality(tr);
  std::vector<std::vector<LinExpr>> entries(2, std::vector<LinExpr>(2));
  entries[0][0] = ex(xv + 0);
  entries[1][0] = ex(xv + 1, 1.0 / std::sqrt(2.0));
  entries[1][1] = ex(xv + 2);
  p.add_psd(2, entries);
  auto rep = solve(p, 1e-7);
  REQUIRE(rep.status == SolverReport::Status::Optimal);
  CHECK(rep.objective_value == doctest::Approx(lmax).epsilon(1e-6));
}

TEST_CASE("degenerate LP with redundant rows") {
  ConicProgram p;
  const int x = p.add_vars(2);
  p.add_cost(x, 1.0);
  p.add_cost(x + 1, 1.0);
  for (int dup = 0; dup < 3; ++dup) {
    p.add_nonneg(LinExpr(1.0).add(x, 1.0));
    p.add_nonneg(LinExpr(1.0).add(x + 1, 1.0));
  }
  p.add_nonneg(LinExpr(4.0).add(x, -1.0).add(x + 1, -1.0));
  auto rep = solve(p, 1e-8);
  REQUIRE(rep.status == SolverReport::Status::Optimal);
  CHECK(rep.objective_value == doctest::Approx(-2.0).epsilon(1e-7));
}

TEST_CASE("free variable via equality only") {
  // min y s.t. y = 3 (x unused free var in objective 0*x)
  ConicProgram p;
  const int y = p.add_vars(1);
  p.add_vars(1);  // untouched variable
  p.add_cost(y, 1.0);
  p.add_equality(LinExpr(-3.0).add(y, 1.0));
  auto rep = solve(p, 1e-8);
  REQUIRE(rep.status == SolverReport::Status::Optimal);
  CHECK(rep.objective_value == doctest::Approx(3.0).epsilon(1e-7));
}
