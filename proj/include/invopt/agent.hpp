#pragma once

#include <optional>
#include <stdexcept>
#include <variant>

#include <Eigen/Dense>

#include "invopt/conic_program.hpp"
#include "invopt/features.hpp"
#include "invopt/rng.hpp"
#include "invopt/solver.hpp"

namespace invopt {

struct LinearHypothesis {
  Eigen::VectorXd theta;
};

// F(s, x) = x'Qxx x + x'Qxs s + q'x
struct QuadraticHypothesis {
  Eigen::MatrixXd Qxx;
  Eigen::MatrixXd Qxs;
  Eigen::VectorXd q;
};

// F(s, x) = <theta, Psi(x)>, theta >= 0
struct ConvexFeaturesHypothesis {
  Eigen::VectorXd theta;
  FeatureMap features;
};

using Hypothesis =
    std::variant<LinearHypothesis, QuadraticHypothesis, ConvexFeaturesHypothesis>;

double hypothesis_value(const Hypothesis& hyp, const Eigen::VectorXd& s,
                        const Eigen::VectorXd& x);
Eigen::VectorXd hypothesis_gradient_x(const Hypothesis& hyp,
                                      const Eigen::VectorXd& s,
                                      const Eigen::VectorXd& x);

// The agent's parametric decision problem: signals live in
// S = {s : C s >=_C d} and responses in X(s) = {x : W x >=_K H s + h}.
class AgentProblem {
 public:
  // Verifies that Xi admits a Slater point (max-slack program, threshold
  // 1e-7); throws std::invalid_argument otherwise.
  AgentProblem(ConicSet signal_set, Eigen::MatrixXd W, Eigen::MatrixXd H,
               Eigen::VectorXd h, std::vector<Cone> feasible_cones);

  int signal_dim() const { return m_; }
  int decision_dim() const { return n_; }

  const ConicSet& signal_set() const { return signal_set_; }
  const Eigen::MatrixXd& W() const { return W_; }
  const Eigen::MatrixXd& H() const { return H_; }
  const Eigen::VectorXd& h() const { return h_; }
  const std::vector<Cone>& feasible_cones() const { return cones_; }

  ConicSet response_set(const Eigen::VectorXd& s) const;  // X(s)
  ConicSet graph_set() const;                             // Xi over (s, x)
  bool signal_member(const Eigen::VectorXd& s, double tol = 1e-6) const;
  bool graph_member(const Eigen::VectorXd& s, const Eigen::VectorXd& x,
                    double tol = 1e-6) const;

  // Appends the rows "W x - H s - h in K" to prog given variable indices.
  void append_response_rows(ConicProgram& prog, int x_base,
                            const Eigen::VectorXd& s) const;

  std::string to_json() const;
  static AgentProblem from_json(const std::string& text);

 private:
  int m_, n_;
  ConicSet signal_set_;
  Eigen::MatrixXd W_, H_;
  Eigen::VectorXd h_;
  std::vector<Cone> cones_;
};

struct ForwardResult {
  SolverReport::Status status = SolverReport::Status::NumericalFailure;
  Eigen::VectorXd x;
  double value = 0.0;
  bool ok() const { return status == SolverReport::Status::Optimal; }
};

// min_{x in X(s)} F_hyp(s, x). Signals outside S are rejected up front; an
// empty X(s) reports Infeasible, a coercivity failure reports Unbounded.
ForwardResult forward_solve(const AgentProblem& prob, const Hypothesis& hyp,
                            const Eigen::VectorXd& s, double tol = 1e-8);

// Minimizes the tiebreak objective over the delta-suboptimality band
// {x in X(s) : F_true(s, x) <= z*(s) + delta}, as one conic program.
ForwardResult delta_suboptimal_response(const AgentProblem& prob,
                                        const Hypothesis& true_hyp,
                                        const Eigen::VectorXd& s, double delta,
                                        const Hypothesis& tiebreak,
                                        double tol = 1e-8);

// Tiebreak sampled uniformly from [-1,1]^n as in the noisy-response generator.
ForwardResult delta_suboptimal_response(const AgentProblem& prob,
                                        const Hypothesis& true_hyp,
                                        const Eigen::VectorXd& s, double delta,
                                        Rng& rng, double tol = 1e-8);

}  // namespace invopt
