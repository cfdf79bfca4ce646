#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "invopt/agent.hpp"

namespace invopt {

struct Sample {
  Eigen::VectorXd s;
  Eigen::VectorXd x;
  bool consistent = true;
};

struct Dataset {
  std::vector<Sample> samples;
  std::string provenance;       // scenario tag
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(samples.size()); }
  bool all_consistent() const {
    for (const auto& s : samples)
      if (!s.consistent) return false;
    return true;
  }
};

// Recomputes every consistency flag from graph membership at the given tol.
void flag_consistency(const AgentProblem& prob, Dataset& data, double tol = 1e-6);

// response rows as CSV: s_1..s_m, x_1..x_n
std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(const std::string& text, int m, int n);

}  // namespace invopt
