#pragma once

#include "invopt/dataset.hpp"
#include "invopt/dro_linear.hpp"
#include "invopt/losses.hpp"
#include "invopt/risk.hpp"

namespace invopt {

struct QuadraticSearchSpace {
  enum class Kind { StronglyConvex, Bilinear, NominalBall, FixedTheta };
  Kind kind = Kind::StronglyConvex;

  // NominalBall center / FixedTheta value
  QuadraticHypothesis theta0;
  double Gamma = 1.0;
  // NominalBall distance over the stacked parameter vector
  // [lower(Qxx); vec(Qxs); q]
  Norm norm = Norm::Inf;

  static QuadraticSearchSpace strongly_convex() { return {}; }
  static QuadraticSearchSpace bilinear() {
    QuadraticSearchSpace s;
    s.kind = Kind::Bilinear;
    return s;
  }
  static QuadraticSearchSpace nominal_ball(QuadraticHypothesis theta0,
                                           double Gamma, Norm norm) {
    QuadraticSearchSpace s;
    s.kind = Kind::NominalBall;
    s.theta0 = std::move(theta0);
    s.Gamma = Gamma;
    s.norm = norm;
    return s;
  }
  static QuadraticSearchSpace fixed(QuadraticHypothesis theta) {
    QuadraticSearchSpace s;
    s.kind = Kind::FixedTheta;
    s.theta0 = std::move(theta);
    return s;
  }
};

enum class Exactness { ExactCertified, PossiblyConservative };

struct QuadDroSolution {
  SolverReport::Status status = SolverReport::Status::NumericalFailure;
  bool empty_ball = false;
  QuadraticHypothesis theta_hat;
  double certificate = 0.0;
  DroDuals duals;
  Exactness exactness = Exactness::PossiblyConservative;
  double min_ball_radius = 0.0;  // 2-Wasserstein transport of P_N onto Xi
  std::string message;

  bool ok() const { return status == SolverReport::Status::Optimal; }
  std::string to_json() const;
};

// Safe SDP approximation over the 2-Wasserstein ball with the 2-norm ground
// metric. delta > 0 uses the bounded-rationality variant (tau >= 0, rho
// shifted by delta). eps = 0 on consistent data is handled by the exact
// singleton-ball program; eps = 0 with inconsistent samples is an empty ball.
QuadDroSolution solve_dro_quadratic(const AgentProblem& prob,
                                    const Dataset& data,
                                    const QuadraticSearchSpace& space,
                                    const WassersteinSpec& wass, double alpha,
                                    double delta = 0.0);

// Strict positive definiteness of the 3x3 block matrix built from
// (lambda, Qxx, Qxs); margin separates "succ 0" from solver noise.
Exactness check_exactness(double lambda, const Eigen::MatrixXd& Qxx,
                          const Eigen::MatrixXd& Qxs, double margin = 1e-7);
Exactness check_exactness(const QuadDroSolution& sol, double margin = 1e-7);

// smallest eps for which the 2-Wasserstein ball intersects distributions on
// Xi: root-mean-square of the per-sample projection distances
double min_w2_radius(const AgentProblem& prob, const Dataset& data);

// Reconstructs every LMI block of the cvar-quad program at the returned
// solution and reports the worst eigenvalue violation (>= 0 means feasible).
double lmi_violation(const AgentProblem& prob, const Dataset& data,
                     const QuadDroSolution& sol, double delta = 0.0);

// Empirical-risk minimization for quadratic hypotheses via the exact
// inner-minimum epigraph (generalized Schur complement). Losses can be
// negative on inconsistent samples; unboundedness is reported faithfully.
QuadDroSolution erm_minimize_quadratic(const AgentProblem& prob,
                                       const Dataset& data,
                                       const QuadraticSearchSpace& space,
                                       LossKind loss, const RiskSpec& risk,
                                       double delta = 0.0);

}  // namespace invopt
