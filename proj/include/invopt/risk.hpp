#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace invopt {

struct RiskSpec {
  enum class Kind { CVaR, VaR, Expectation };
  Kind kind = Kind::Expectation;
  double alpha = 1.0;

  static RiskSpec expectation() { return {Kind::Expectation, 1.0}; }
  static RiskSpec cvar(double alpha) { return {Kind::CVaR, alpha}; }
  static RiskSpec var(double alpha) { return {Kind::VaR, alpha}; }

  void validate() const;
  std::string name() const;
};

// Expectation: mean. CVaR(alpha): sorted tail average with exact fractional
// atom at the alpha*N boundary. VaR(alpha): smallest tau covering a 1-alpha
// fraction of the samples.
double empirical_risk(const std::vector<double>& losses, const RiskSpec& spec);

// CVaR of a weighted discrete distribution (weights sum to ~1).
double weighted_cvar(const std::vector<double>& values,
                     const std::vector<double>& weights, double alpha);

struct RadiusBudget {
  double eps0 = 0.0;
  double c1 = 2.718281828459045;  // illustrative defaults; the theory only
  double c2 = 1.0;                // proves such constants exist
  double a = 2.0;                 // recorded moment parameters, not used
  double A = 1.0;
  double beta = 0.05;
  int p = 1;
  int m = 1;
  int n = 1;

  void validate() const;  // requires m + n != 2p, beta in (0,1), c1,c2 > 0
};

// eps0 + eps_N(beta) with the two-branch concentration rate.
double eps_n_radius(const RadiusBudget& budget, int N);

}  // namespace invopt
