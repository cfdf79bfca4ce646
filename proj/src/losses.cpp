#include "invopt/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace invopt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kFaceTol = 1e-7;

[[noreturn]] void raise(const std::string& what, SolverReport::Status st) {
  throw std::runtime_error(what + " (" + status_name(st) + ")");
}
}  // namespace

std::string loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::Identifiability:
      return "identifiability";
    case LossKind::Predictability:
      return "predictability";
    case LossKind::Suboptimality:
      return "suboptimality";
    case LossKind::FirstOrder:
      return "first_order";
    case LossKind::BoundedRationality:
      return "bounded_rationality";
  }
  return "suboptimality";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "identifiability") return LossKind::Identifiability;
  if (name == "predictability") return LossKind::Predictability;
  if (name == "suboptimality") return LossKind::Suboptimality;
  if (name == "first_order") return LossKind::FirstOrder;
  if (name == "bounded_rationality") return LossKind::BoundedRationality;
  throw std::invalid_argument("unknown loss kind: " + name);
}

double suboptimality_loss(const AgentProblem& prob, const Hypothesis& hyp,
                          const VectorXd& s, const VectorXd& x) {
  const auto fwd = forward_solve(prob, hyp, s);
  if (!fwd.ok()) raise("suboptimality loss: inner problem failed", fwd.status);
  return hypothesis_value(hyp, s, x) - fwd.value;
}

double first_order_loss(const AgentProblem& prob, const Hypothesis& hyp,
                        const VectorXd& s, const VectorXd& x) {
  const VectorXd g = hypothesis_gradient_x(hyp, s, x);
  const auto fwd = forward_solve(prob, Hypothesis(LinearHypothesis{g}), s);
  if (!fwd.ok()) raise("first-order loss: inner LP failed", fwd.status);
  return g.dot(x) - fwd.value;
}

double predictability_loss(const AgentProblem& prob, const Hypothesis& hyp,
                           const VectorXd& s, const VectorXd& x) {
  const auto fwd = forward_solve(prob, hyp, s);
  if (!fwd.ok()) raise("predictability loss: forward solve failed", fwd.status);
  if (gamma_certificate(hyp).gamma > 0) return (x - fwd.x).squaredNorm();

  // distance to the optimal face, relaxed by the face tolerance
  ConicProgram qp;
  const int n = prob.decision_dim();
  const int y = qp.add_vars(n, "y");
  const int t = qp.add_vars(1, "dist_sq");
  prob.append_response_rows(qp, y, s);
  qp.add_cost(t, 1.0);
  // t >= ||x - y||^2
  std::vector<LinExpr> soc;
  soc.push_back(LinExpr(1.0).add(t, 1.0));
  for (int i = 0; i < n; ++i)
    soc.push_back(LinExpr(2.0 * x(i)).add(y + i, -2.0));
  soc.push_back(LinExpr(-1.0).add(t, 1.0));
  qp.add_soc(std::move(soc));
  // face row: F_hyp(s, y) <= z* + face tolerance. Only linear and feature
  // hypotheses reach this branch (gamma = 0); quadratic hypotheses with a
  // singular Qxx are handled through the same generic objective machinery.
  if (const auto* lin = std::get_if<LinearHypothesis>(&hyp)) {
    LinExpr row(fwd.value + kFaceTol);
    for (int i = 0; i < n; ++i) row.add(y + i, -lin->theta(i));
    qp.add_nonneg(row);
  } else if (const auto* quad = std::get_if<QuadraticHypothesis>(&hyp)) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(quad->Qxx);
    const VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const MatrixXd L = es.eigenvectors() * lam.asDiagonal();
    const int u = qp.add_vars(1, "quad_epi");
    std::vector<LinExpr> qsoc;
    qsoc.push_back(LinExpr(1.0).add(u, 1.0));
    for (int j = 0; j < n; ++j) {
      LinExpr r2;
      for (int i = 0; i < n; ++i) r2.add(y + i, 2.0 * L(i, j));
      qsoc.push_back(std::move(r2));
    }
    qsoc.push_back(LinExpr(-1.0).add(u, 1.0));
    qp.add_soc(std::move(qsoc));
    const VectorXd linpart = quad->Qxs * s + quad->q;
    LinExpr row(fwd.value + kFaceTol);
    row.add(u, -1.0);
    for (int i = 0; i < n; ++i) row.add(y + i, -linpart(i));
    qp.add_nonneg(row);
  } else {
    // gamma = 0 feature hypothesis: fall back to the forward optimizer
    return (x - fwd.x).squaredNorm();
  }
  const auto rep = solve(qp, 1e-8);
  if (!rep.ok()) raise("predictability loss: face QP failed", rep.status);
  return std::max(rep.objective_value, 0.0);
}

double bounded_rationality_loss(const AgentProblem& prob, const Hypothesis& hyp,
                                const VectorXd& s, const VectorXd& x,
                                double delta) {
  if (delta < 0) throw std::invalid_argument("delta must be nonnegative");
  return std::max(suboptimality_loss(prob, hyp, s, x) - delta, 0.0);
}

double identifiability_loss(const Hypothesis& true_hyp, const Hypothesis& hyp,
                            const VectorXd& s, const VectorXd& x) {
  const double gap = hypothesis_value(true_hyp, s, x) - hypothesis_value(hyp, s, x);
  return gap * gap;
}

double identifiability_loss(
    const std::function<double(const VectorXd&, const VectorXd&)>& true_objective,
    const Hypothesis& hyp, const VectorXd& s, const VectorXd& x) {
  const double gap = true_objective(s, x) - hypothesis_value(hyp, s, x);
  return gap * gap;
}

StrongConvexityCert gamma_certificate(const Hypothesis& hyp) {
  if (std::holds_alternative<LinearHypothesis>(hyp)) return {0.0};
  if (const auto* quad = std::get_if<QuadraticHypothesis>(&hyp)) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(quad->Qxx, Eigen::EigenvaluesOnly);
    return {std::max(0.0, 2.0 * es.eigenvalues().minCoeff())};
  }
  // gamma = 0 always satisfies the inequality
  return {0.0};
}

double evaluate_loss(LossKind kind, const AgentProblem& prob,
                     const Hypothesis& hyp, const VectorXd& s, const VectorXd& x,
                     double delta) {
  switch (kind) {
    case LossKind::Suboptimality:
      return suboptimality_loss(prob, hyp, s, x);
    case LossKind::FirstOrder:
      return first_order_loss(prob, hyp, s, x);
    case LossKind::Predictability:
      return predictability_loss(prob, hyp, s, x);
    case LossKind::BoundedRationality:
      return bounded_rationality_loss(prob, hyp, s, x, delta);
    case LossKind::Identifiability:
      throw std::invalid_argument(
          "identifiability loss needs the true objective");
  }
  return 0.0;
}

}  // namespace invopt
