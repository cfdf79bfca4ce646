#include <doctest.h>

#include <cmath>

#include "invopt/losses.hpp"
#include "oracles.hpp"

using namespace invopt;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
const VectorXd kZeroSignal = VectorXd::Zero(1);

Hypothesis parabola() {
  return QuadraticHypothesis{MatrixXd::Identity(1, 1), MatrixXd::Zero(1, 1),
                             VectorXd::Zero(1)};
}
}  // namespace

TEST_CASE("suboptimality loss on the unit box") {
  auto prob = oracle::box_agent_problem(1, -1, 1, 1, 0, 0);
  Hypothesis theta = LinearHypothesis{VectorXd::Ones(1)};
  CHECK(suboptimality_loss(prob, theta, kZeroSignal, VectorXd::Zero(1)) ==
        doctest::Approx(1.0).epsilon(1e-7));
  CHECK(suboptimality_loss(prob, theta, kZeroSignal,
                           VectorXd::Constant(1, -1.0)) ==
        doctest::Approx(0.0).epsilon(1e-7));
  CHECK(suboptimality_loss(prob, parabola(), kZeroSignal,
                           VectorXd::Constant(1, 0.5)) ==
        doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("first-order loss") {
  auto prob = oracle::box_agent_problem(1, -1, 1, 1, 0, 0);
  CHECK(first_order_loss(prob, parabola(), kZeroSignal,
                         VectorXd::Constant(1, 0.5)) ==
        doctest::Approx(1.5).epsilon(1e-6));
  CHECK(first_order_loss(prob, parabola(), kZeroSignal, VectorXd::Zero(1)) ==
        doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("first-order equals suboptimality for linear hypotheses") {
  Rng rng(17);
  for (int trial = 0; trial < 15; ++trial) {
    MatrixXd A = rng.uniform_matrix(2, 2, -1, 1);
    auto prob = oracle::linear_experiment_problem(A);
    const VectorXd s = A * rng.uniform_vector(2, -1, 1);
    Hypothesis theta = LinearHypothesis{rng.uniform_vector(2, -1, 1)};
    const VectorXd x = rng.uniform_vector(2, -1, 1);  // may be infeasible
    const double ls = suboptimality_loss(prob, theta, s, x);
    const double lf = first_order_loss(prob, theta, s, x);
    CHECK(ls == doctest::Approx(lf).epsilon(1e-6));
  }
}

TEST_CASE("predictability loss") {
  auto prob1 = oracle::box_agent_problem(1, -1, 1, 1, 0, 0);
  CHECK(predictability_loss(prob1, parabola(), kZeroSignal,
                            VectorXd::Constant(1, 0.5)) ==
        doctest::Approx(0.25).epsilon(1e-5));
  const auto fwd = forward_solve(prob1, parabola(), kZeroSignal);
  CHECK(predictability_loss(prob1, parabola(), kZeroSignal, fwd.x) <= 1e-8);

  // optimal face {-1} x [-1, 1] contains the point
  auto prob2 = oracle::box_agent_problem(2, -1, 1, 1, 0, 0);
  Hypothesis theta = LinearHypothesis{Eigen::Vector2d(1, 0)};
  CHECK(predictability_loss(prob2, theta, kZeroSignal,
                            Eigen::Vector2d(-1, 0.3)) <= 1e-6);
  CHECK(predictability_loss(prob2, theta, kZeroSignal, Eigen::Vector2d(0, 0.3)) ==
        doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("bounded rationality loss") {
  auto prob = oracle::box_agent_problem(1, -1, 1, 1, 0, 0);
  Hypothesis theta = LinearHypothesis{VectorXd::Ones(1)};
  const VectorXd x = VectorXd::Zero(1);  // suboptimality 1
  CHECK(bounded_rationality_loss(prob, theta, kZeroSignal, x, 1.0) ==
        doctest::Approx(0.0).epsilon(1e-7));
  CHECK(bounded_rationality_loss(prob, theta, kZeroSignal, x, 0.2) ==
        doctest::Approx(0.8).epsilon(1e-7));
}

TEST_CASE("bounded rationality at delta zero equals suboptimality") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    MatrixXd A = rng.uniform_matrix(2, 2, -1, 1);
    auto prob = oracle::linear_experiment_problem(A);
    const VectorXd s = A * rng.uniform_vector(2, -1, 1);
    Hypothesis theta = LinearHypothesis{rng.uniform_vector(2, -1, 1)};
    const VectorXd v = rng.uniform_vector(2, -1, 1);
    const double a = suboptimality_loss(prob, theta, s, v);
    if (a < 0) continue;  // clamp differs only on negative losses
    CHECK(bounded_rationality_loss(prob, theta, s, v, 0.0) ==
          doctest::Approx(a).epsilon(1e-9));
  }
}

TEST_CASE("identifiability loss") {
  Hypothesis t1 = LinearHypothesis{VectorXd::Ones(1)};
  Hypothesis t2 = LinearHypothesis{VectorXd::Constant(1, 2.0)};
  const VectorXd x = VectorXd::Constant(1, 3.0);
  CHECK(identifiability_loss(t1, t1, kZeroSignal, x) == doctest::Approx(0.0));
  CHECK(identifiability_loss(t1, t2, kZeroSignal, x) == doctest::Approx(9.0));
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    Hypothesis a = LinearHypothesis{rng.uniform_vector(2, -1, 1)};
    Hypothesis b = LinearHypothesis{rng.uniform_vector(2, -1, 1)};
    const VectorXd s = rng.uniform_vector(2, -1, 1);
    const VectorXd xx = rng.uniform_vector(2, -1, 1);
    const double direct = std::pow(
        hypothesis_value(a, s, xx) - hypothesis_value(b, s, xx), 2.0);
    CHECK(identifiability_loss(a, b, s, xx) == doctest::Approx(direct));
  }
}

TEST_CASE("gamma certificate") {
  CHECK(gamma_certificate(Hypothesis(LinearHypothesis{Eigen::Vector2d(1, 1)}))
            .gamma == doctest::Approx(0.0));
  CHECK(gamma_certificate(Hypothesis(QuadraticHypothesis{
                              MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2),
                              VectorXd::Zero(2)}))
            .gamma == doctest::Approx(2.0));
  MatrixXd D = MatrixXd::Zero(2, 2);
  D(0, 0) = 0.2;
  D(1, 1) = 1.0;
  CHECK(gamma_certificate(Hypothesis(QuadraticHypothesis{
                              D, MatrixXd::Zero(2, 2), VectorXd::Zero(2)}))
            .gamma == doctest::Approx(0.4));
}

TEST_CASE("dominance chain on random quadratic instances") {
  Rng rng(41);
  int checked = 0;
  while (checked < 60) {
    auto prob = oracle::box_agent_problem(2, 0, 5, 2, 0, 1);
    // Qxx >= I so gamma >= 2
    MatrixXd B = rng.uniform_matrix(2, 2, -0.3, 0.3);
    MatrixXd Qxx = MatrixXd::Identity(2, 2) + B * B.transpose();
    Hypothesis hyp = QuadraticHypothesis{Qxx, MatrixXd::Identity(2, 2),
                                         rng.uniform_vector(2, -2, 0)};
    const VectorXd s = rng.uniform_vector(2, 0, 1);
    const VectorXd x = rng.uniform_vector(2, 0, 5);  // x in X(s)
    const double lf = first_order_loss(prob, hyp, s, x);
    const double ls = suboptimality_loss(prob, hyp, s, x);
    const double lp = predictability_loss(prob, hyp, s, x);
    const double gamma = gamma_certificate(hyp).gamma;
    CHECK(lf >= ls - 1e-6);
    CHECK(ls >= 0.5 * gamma * lp - 1e-6);
    CHECK(ls >= -1e-9);
    ++checked;
  }
}

TEST_CASE("losses vanish exactly at predicted responses") {
  Rng rng(53);
  auto prob = oracle::box_agent_problem(2, 0, 5, 2, 0, 1);
  MatrixXd B = rng.uniform_matrix(2, 2, -0.3, 0.3);
  MatrixXd Qxx = MatrixXd::Identity(2, 2) + B * B.transpose();
  Hypothesis hyp = QuadraticHypothesis{Qxx, MatrixXd::Identity(2, 2),
                                       rng.uniform_vector(2, -2, 0)};
  const VectorXd s = rng.uniform_vector(2, 0, 1);
  const auto fwd = forward_solve(prob, hyp, s);
  REQUIRE(fwd.ok());
  CHECK(std::abs(suboptimality_loss(prob, hyp, s, fwd.x)) <= 1e-6);
  CHECK(std::abs(first_order_loss(prob, hyp, s, fwd.x)) <= 1e-6);
  CHECK(predictability_loss(prob, hyp, s, fwd.x) <= 1e-6);
  // and are bounded away from zero off the argmin
  const VectorXd off = fwd.x + Eigen::Vector2d(0.3, 0.0).cwiseMin(
                                   VectorXd::Constant(2, 5.0) - fwd.x);
  CHECK(suboptimality_loss(prob, hyp, s, off) > 1e-4);
  CHECK(first_order_loss(prob, hyp, s, off) > 1e-4);
  CHECK(predictability_loss(prob, hyp, s, off) > 1e-4);
}

TEST_CASE("linear suboptimality loss is positively homogeneous in theta") {
  Rng rng(67);
  MatrixXd A = rng.uniform_matrix(2, 2, -1, 1);
  auto prob = oracle::linear_experiment_problem(A);
  const VectorXd s = A * rng.uniform_vector(2, -1, 1);
  const VectorXd th = rng.uniform_vector(2, -1, 1);
  const VectorXd x = rng.uniform_vector(2, -1, 1);
  const double base =
      suboptimality_loss(prob, Hypothesis(LinearHypothesis{th}), s, x);
  for (double kappa : {0.5, 2.0, 7.5}) {
    const double scaled = suboptimality_loss(
        prob, Hypothesis(LinearHypothesis{kappa * th}), s, x);
    CHECK(scaled == doctest::Approx(kappa * base).epsilon(1e-6));
  }
}
