#pragma once

#include <optional>
#include <string>

#include "invopt/dataset.hpp"
#include "invopt/losses.hpp"
#include "invopt/risk.hpp"

namespace invopt {

struct LinearSearchSpace {
  enum class Kind { InfSphere, SimplexFace, NormBall, FixedTheta };
  Kind kind = Kind::InfSphere;

  // NormBall
  Eigen::VectorXd theta0;
  double Gamma = 1.0;
  Norm norm = Norm::Inf;

  // FixedTheta (worst-case evaluation at a fixed model)
  Eigen::VectorXd theta_fixed;

  static LinearSearchSpace inf_sphere() { return {}; }
  static LinearSearchSpace simplex_face() {
    LinearSearchSpace s;
    s.kind = Kind::SimplexFace;
    return s;
  }
  static LinearSearchSpace norm_ball(Eigen::VectorXd theta0, double Gamma,
                                     Norm norm) {
    LinearSearchSpace s;
    s.kind = Kind::NormBall;
    s.theta0 = std::move(theta0);
    s.Gamma = Gamma;
    s.norm = norm;
    return s;
  }
  static LinearSearchSpace fixed(Eigen::VectorXd theta) {
    LinearSearchSpace s;
    s.kind = Kind::FixedTheta;
    s.theta_fixed = std::move(theta);
    return s;
  }
};

struct WassersteinSpec {
  int p = 1;
  double eps = 0.0;
  Norm ground_norm = Norm::Inf;
};

struct DroDuals {
  std::vector<Eigen::VectorXd> phi1, phi2, mu1, mu2, gamma;
  std::vector<double> r;
  double lambda = 0.0;
  double tau = 0.0;
};

struct DroSolution {
  SolverReport::Status status = SolverReport::Status::NumericalFailure;
  bool empty_ball = false;  // Wasserstein ball has no distribution on Xi
  Hypothesis theta_hat;
  double certificate = 0.0;
  DroDuals duals;
  int facet_index = -1;  // InfSphere winner; facet f pins coord f/2 to +-1
  std::string message;

  bool ok() const { return status == SolverReport::Status::Optimal; }
  std::string to_json() const;
};

struct DiscreteDistribution {
  struct Atom {
    double weight;
    Eigen::VectorXd s;
    Eigen::VectorXd x;
  };
  std::vector<Atom> atoms;
  double dropped_transport = 0.0;  // audited mass of floored atoms
  std::string to_csv() const;
};

// Exact reformulation of the worst-case-CVaR minimization over the
// 1-Wasserstein ball for linear hypotheses. delta > 0 switches the first
// constraint group to the bounded-rationality variant with tau >= 0. The
// second dual block is emitted only for samples flagged inconsistent; for
// consistent ones it collapses to r_i >= 0.
DroSolution solve_dro_linear(const AgentProblem& prob, const Dataset& data,
                             const LinearSearchSpace& space,
                             const WassersteinSpec& wass, double alpha,
                             double delta = 0.0);

// Extremal distribution attaining the worst-case risk at a fixed theta,
// solved in perspective form. Atoms below the 1e-9 weight floor are dropped
// and their transport contribution recorded.
struct WorstCaseResult {
  SolverReport::Status status = SolverReport::Status::NumericalFailure;
  double value = 0.0;
  DiscreteDistribution dist;
  bool attainment_warning = false;
  bool ok() const { return status == SolverReport::Status::Optimal; }
};

WorstCaseResult worst_case_distribution(const AgentProblem& prob,
                                        const Dataset& data,
                                        const Eigen::VectorXd& theta,
                                        const WassersteinSpec& wass,
                                        double alpha);

// p-Wasserstein distance between a discrete distribution and the empirical
// distribution on the dataset, via the transport LP.
double wasserstein_to_empirical(const DiscreteDistribution& dist,
                                const Dataset& data, Norm ground_norm, int p);

}  // namespace invopt
