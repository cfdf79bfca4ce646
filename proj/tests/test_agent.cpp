#include <doctest.h>

#include <cmath>

#include "invopt/agent.hpp"
#include "oracles.hpp"

using namespace invopt;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("forward solve on a box LP") {
  auto prob = oracle::box_agent_problem(2, -1, 1, 1, 0, 0);
  LinearHypothesis theta{Eigen::Vector2d(1, 1)};
  const auto res = forward_solve(prob, Hypothesis(theta), VectorXd::Zero(1));
  REQUIRE(res.ok());
  CHECK(res.value == doctest::Approx(-2.0).epsilon(1e-7));
  CHECK(res.x(0) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(res.x(1) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("forward solve on a centered parabola") {
  auto prob = oracle::box_agent_problem(1, -1, 1, 1, -1, 1);
  QuadraticHypothesis quad{MatrixXd::Identity(1, 1), MatrixXd::Zero(1, 1),
                           VectorXd::Zero(1)};
  for (double s : {-0.5, 0.0, 0.9}) {
    const auto res =
        forward_solve(prob, Hypothesis(quad), VectorXd::Constant(1, s));
    REQUIRE(res.ok());
    CHECK(res.value == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(std::abs(res.x(0)) < 1e-4);
  }
}

TEST_CASE("forward solve with interior stationary point") {
  // grid-search oracle confirms the analytic optimum
  auto prob = oracle::box_agent_problem(2, 0, 5, 2, 0, 1);
  QuadraticHypothesis quad{MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2),
                           Eigen::Vector2d(-2, -2)};
  const VectorXd s = Eigen::Vector2d(1, 1);
  const auto res = forward_solve(prob, Hypothesis(quad), s);
  REQUIRE(res.ok());
  CHECK(res.value == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(res.x(0) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(res.x(1) == doctest::Approx(0.5).epsilon(1e-5));

  double best = 1e30;
  for (double a = 0; a <= 5.0; a += 0.01)
    for (double b = 0; b <= 1.0; b += 0.01) {
      const double v =
          hypothesis_value(Hypothesis(quad), s, Eigen::Vector2d(a, b));
      best = std::min(best, v);
    }
  CHECK(res.value <= best + 1e-6);
}

TEST_CASE("signal outside the support is rejected") {
  auto prob = oracle::box_agent_problem(1, -1, 1, 1, 0, 1);
  LinearHypothesis theta{VectorXd::Ones(1)};
  const auto res =
      forward_solve(prob, Hypothesis(theta), VectorXd::Constant(1, 2.0));
  CHECK(res.status == SolverReport::Status::Infeasible);
}

TEST_CASE("unbounded forward solve is reported") {
  // X = {x >= 0} with theta < 0
  ConicSet sig;
  sig.A = MatrixXd::Identity(1, 1);
  sig.b = VectorXd::Zero(1);
  sig.cones = {Cone::zero(1)};
  MatrixXd W = MatrixXd::Identity(1, 1);
  MatrixXd H = MatrixXd::Zero(1, 1);
  VectorXd h = VectorXd::Zero(1);
  AgentProblem prob(sig, W, H, h, {Cone::nonneg(1)});
  const auto res = forward_solve(
      prob, Hypothesis(LinearHypothesis{VectorXd::Constant(1, -1.0)}),
      VectorXd::Zero(1));
  CHECK(res.status == SolverReport::Status::Unbounded);
}

TEST_CASE("slater check rejects thin graphs") {
  // X(s) = {x : x >= 0, -x >= 0} has no interior
  ConicSet sig;
  sig.A.resize(2, 1);
  sig.A << 1, -1;
  sig.b = Eigen::Vector2d(-1, -1);
  sig.cones = {Cone::nonneg(2)};
  MatrixXd W(2, 1);
  W << 1, -1;
  MatrixXd H = MatrixXd::Zero(2, 1);
  VectorXd h = VectorXd::Zero(2);
  CHECK_THROWS_AS(AgentProblem(sig, W, H, h, {Cone::nonneg(2)}),
                  std::invalid_argument);
}

TEST_CASE("value is monotone under feasible-set shrinkage") {
  Rng rng(31);
  MatrixXd A = rng.uniform_matrix(2, 2, -1, 1);
  auto prob = oracle::linear_experiment_problem(A);
  const VectorXd v1 = rng.uniform_vector(2, -1, 1);
  const VectorXd s = A * v1;
  LinearHypothesis theta{rng.uniform_vector(2, -1, 1)};
  const auto base = forward_solve(prob, Hypothesis(theta), s);
  REQUIRE(base.ok());

  // append a row that cuts off the current optimizer
  MatrixXd W2(prob.W().rows() + 1, 2);
  W2.topRows(prob.W().rows()) = prob.W();
  W2.row(W2.rows() - 1) = -theta.theta.transpose();
  MatrixXd H2(W2.rows(), 2);
  H2.topRows(prob.H().rows()) = prob.H();
  H2.row(H2.rows() - 1).setZero();
  VectorXd h2(W2.rows());
  h2.head(prob.h().size()) = prob.h();
  h2(h2.size() - 1) = -(base.value + 0.05);  // -theta'x >= -(z*+0.05)
  AgentProblem shrunk(prob.signal_set(), W2, H2, h2,
                      {Cone::nonneg(static_cast<int>(W2.rows()))});
  const auto res = forward_solve(shrunk, Hypothesis(theta), s);
  REQUIRE(res.ok());
  CHECK(res.value >= base.value - 1e-7);

  // binding version: force theta'x >= z* + 0.05 (cuts the optimum)
  h2(h2.size() - 1) = base.value + 0.05;
  W2.row(W2.rows() - 1) = theta.theta.transpose();
  AgentProblem binding(prob.signal_set(), W2, H2, h2,
                       {Cone::nonneg(static_cast<int>(W2.rows()))});
  const auto res2 = forward_solve(binding, Hypothesis(theta), s);
  REQUIRE(res2.ok());
  CHECK(res2.value >= base.value + 0.05 - 1e-6);
}

TEST_CASE("argmin invariance under positive scaling of theta") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    MatrixXd A = rng.uniform_matrix(3, 3, -1, 1);
    auto prob = oracle::linear_experiment_problem(A);
    const VectorXd s = A * rng.uniform_vector(3, -1, 1);
    VectorXd th = rng.uniform_vector(3, -1, 1);
    const double kappa = rng.uniform(0.5, 4.0);
    const auto r1 = forward_solve(prob, Hypothesis(LinearHypothesis{th}), s);
    const auto r2 =
        forward_solve(prob, Hypothesis(LinearHypothesis{kappa * th}), s);
    REQUIRE(r1.ok());
    REQUIRE(r2.ok());
    CHECK(r2.value == doctest::Approx(kappa * r1.value).epsilon(1e-6));
    // cross-feasibility: each optimizer is optimal for the other objective
    CHECK(kappa * th.dot(r1.x) == doctest::Approx(r2.value).epsilon(1e-6));
  }
}

TEST_CASE("delta suboptimal response stays in the band") {
  auto prob = oracle::box_agent_problem(1, -1, 1, 1, 0, 0);
  LinearHypothesis truth{VectorXd::Ones(1)};
  LinearHypothesis tiebreak{VectorXd::Constant(1, -1.0)};
  const VectorXd s = VectorXd::Zero(1);

  SUBCASE("delta zero degenerates to the optimizer") {
    const auto res =
        delta_suboptimal_response(prob, Hypothesis(truth), s, 0.0,
                                  Hypothesis(tiebreak));
    REQUIRE(res.ok());
    CHECK(res.x(0) == doctest::Approx(-1.0).epsilon(1e-5));
  }
  SUBCASE("band endpoint reached by adversarial tiebreak") {
    const auto res = delta_suboptimal_response(prob, Hypothesis(truth), s, 1.0,
                                               Hypothesis(tiebreak));
    REQUIRE(res.ok());
    CHECK(res.x(0) == doctest::Approx(0.0).epsilon(1e-5));
  }
  SUBCASE("band constraint holds for random tiebreaks") {
    Rng rng(5);
    const auto fwd = forward_solve(prob, Hypothesis(truth), s);
    for (int i = 0; i < 20; ++i) {
      const double delta = rng.uniform(0.0, 2.0);
      const auto res =
          delta_suboptimal_response(prob, Hypothesis(truth), s, delta, rng);
      REQUIRE(res.ok());
      CHECK(hypothesis_value(Hypothesis(truth), s, res.x) <=
            fwd.value + delta + 1e-6);
      CHECK(res.x(0) >= -1 - 1e-7);
      CHECK(res.x(0) <= 1 + 1e-7);
    }
  }
}

TEST_CASE("agent problem json round trip") {
  auto prob = oracle::box_agent_problem(2, 0, 5, 2, 0, 1);
  const auto text = prob.to_json();
  auto back = AgentProblem::from_json(text);
  CHECK(back.to_json() == text);
  CHECK(back.signal_dim() == 2);
  CHECK(back.decision_dim() == 2);
}
