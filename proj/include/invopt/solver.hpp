#pragma once

#include "invopt/conic_program.hpp"

namespace invopt {

struct SolveOptions {
  double tol = 1e-8;       // feasibility and gap tolerance
  int max_iter = 100;
  double static_reg = 1e-10;
  bool verbose = false;
  // accept a reduced-accuracy optimum at slack*tol before declaring failure
  double accept_slack = 100.0;
};

// Default tolerances: 1e-8 for LP/SOCP, 1e-7 once PSD blocks are present.
double default_tol(const ConicProgram& prog);

SolverReport solve(const ConicProgram& prog, const SolveOptions& opts);
SolverReport solve(const ConicProgram& prog, double tol);
SolverReport solve(const ConicProgram& prog);

}  // namespace invopt
