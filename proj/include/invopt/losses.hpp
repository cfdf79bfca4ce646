#pragma once

#include <functional>
#include <string>

#include "invopt/agent.hpp"

namespace invopt {

enum class LossKind {
  Identifiability,
  Predictability,
  Suboptimality,
  FirstOrder,
  BoundedRationality
};

std::string loss_kind_name(LossKind k);
LossKind loss_kind_from_name(const std::string& name);

struct StrongConvexityCert {
  double gamma = 0.0;
};

// F_hyp(s,x) - min_{y in X(s)} F_hyp(s,y). Negative values on inconsistent
// samples are returned as-is; an unbounded inner problem throws.
double suboptimality_loss(const AgentProblem& prob, const Hypothesis& hyp,
                          const Eigen::VectorXd& s, const Eigen::VectorXd& x);

// max_{y in X(s)} <grad_x F_hyp(s,x), x - y>
double first_order_loss(const AgentProblem& prob, const Hypothesis& hyp,
                        const Eigen::VectorXd& s, const Eigen::VectorXd& x);

// min_{y in X*_hyp(s)} ||x - y||_2^2. Strongly convex hypotheses use the
// forward optimizer; otherwise the optimal face is searched with a QP under
// the face tolerance F_hyp(s,y) <= z*(s) + 1e-7.
double predictability_loss(const AgentProblem& prob, const Hypothesis& hyp,
                           const Eigen::VectorXd& s, const Eigen::VectorXd& x);

double bounded_rationality_loss(const AgentProblem& prob, const Hypothesis& hyp,
                                const Eigen::VectorXd& s,
                                const Eigen::VectorXd& x, double delta);

double identifiability_loss(const Hypothesis& true_hyp, const Hypothesis& hyp,
                            const Eigen::VectorXd& s, const Eigen::VectorXd& x);
// variant for true objectives outside the hypothesis space
double identifiability_loss(
    const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>&
        true_objective,
    const Hypothesis& hyp, const Eigen::VectorXd& s, const Eigen::VectorXd& x);

// Largest gamma with F(s,y)-F(s,x) >= <grad,y-x> + (gamma/2)||y-x||^2:
// 0 for linear, 2*lambda_min(Qxx) for quadratic, 0 for feature hypotheses.
StrongConvexityCert gamma_certificate(const Hypothesis& hyp);

// dispatch by kind (Identifiability excluded: it needs the true objective)
double evaluate_loss(LossKind kind, const AgentProblem& prob,
                     const Hypothesis& hyp, const Eigen::VectorXd& s,
                     const Eigen::VectorXd& x, double delta = 0.0);

}  // namespace invopt
