#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "invopt/cones.hpp"

namespace invopt {

// Sparse affine expression sum_k coef_k * var_k + constant.
class LinExpr {
 public:
  LinExpr() = default;
  explicit LinExpr(double c) : constant_(c) {}

  static LinExpr variable(int idx, double coef = 1.0) {
    LinExpr e;
    e.add(idx, coef);
    return e;
  }

  LinExpr& add(int var, double coef) {
    if (coef != 0.0) terms_.emplace_back(var, coef);
    return *this;
  }
  LinExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }
  LinExpr& operator+=(const LinExpr& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    constant_ += o.constant_;
    return *this;
  }
  LinExpr& operator*=(double s) {
    for (auto& [v, c] : terms_) c *= s;
    constant_ *= s;
    return *this;
  }

  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }

  double eval(const Eigen::VectorXd& x) const {
    double v = constant_;
    for (const auto& [idx, c] : terms_) v += c * x(idx);
    return v;
  }

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

// {v : A v >=_cone b}, rows partitioned by an ordered cone list.
struct ConicSet {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<Cone> cones;

  int vars() const { return static_cast<int>(A.cols()); }
  int rows() const { return static_cast<int>(A.rows()); }
  bool well_formed() const {
    return total_slots(cones) == rows() && b.size() == rows();
  }
};

// true iff A v - b lies in every cone up to tol (PSD: min eigenvalue >= -tol).
bool membership(const ConicSet& set, const Eigen::VectorXd& v, double tol);

struct SolverReport {
  enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure };
  Status status = Status::NumericalFailure;
  Eigen::VectorXd primal;
  // one dual vector per constraint block, in the block's dual cone
  std::vector<Eigen::VectorXd> block_duals;
  double objective_value = 0.0;
  double dual_objective = 0.0;
  double primal_inf = 0.0;
  double dual_inf = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::string message;

  bool ok() const { return status == Status::Optimal; }
};

std::string status_name(SolverReport::Status s);

// Immutable after assembly; one constraint block per cone, each block meaning
// rows(v) in cone where rows are affine expressions of the variables.
class ConicProgram {
 public:
  struct Block {
    Cone cone;
    std::vector<LinExpr> rows;  // rows.size() == cone.slots()
  };

  int add_vars(int k, const std::string& tag = "");
  int num_vars() const { return num_vars_; }

  void add_cost(int var, double coef);
  void add_cost(const LinExpr& e);
  void set_cost_constant(double c) { cost_constant_ = c; }
  void set_maximize(bool m) { maximize_ = m; }
  bool maximize() const { return maximize_; }
  double cost_constant() const { return cost_constant_; }
  const std::vector<std::pair<int, double>>& cost_terms() const {
    return cost_terms_;
  }

  // rows.size() must equal cone.slots()
  void add_block(const Cone& cone, std::vector<LinExpr> rows);
  // Convenience: expr >= 0 / expr == 0 / aggregate vector rows.
  void add_nonneg(const LinExpr& e);
  void add_equality(const LinExpr& e);
  void add_soc(std::vector<LinExpr> rows);
  // Symmetric matrix expression entries(i,j) (i >= j) constrained PSD;
  // entries are svec-scaled internally.
  void add_psd(int side, const std::vector<std::vector<LinExpr>>& lower);

  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<std::string>& var_tags() const { return var_tags_; }

  bool well_formed() const;

  std::string to_json() const;
  static ConicProgram from_json(const std::string& text);

 private:
  int num_vars_ = 0;
  std::vector<std::string> var_tags_;
  std::vector<std::pair<int, double>> cost_terms_;
  double cost_constant_ = 0.0;
  bool maximize_ = false;
  std::vector<Block> blocks_;
};

std::string conic_set_to_json(const ConicSet& set);
ConicSet conic_set_from_json(const std::string& text);

enum class Norm { One, Two, Inf };

std::string norm_name(Norm n);
Norm norm_from_name(const std::string& name);
double norm_value(Norm n, const Eigen::VectorXd& v);

// 1 <-> inf, 2 self-dual.
Norm dual_norm(Norm n);

// Emits ||expr||_norm <= bound into prog (orthant rows for 1/inf, one
// second-order cone block for 2). May allocate auxiliary variables.
void add_norm_bound(ConicProgram& prog, Norm norm,
                    const std::vector<LinExpr>& expr, const LinExpr& bound);

}  // namespace invopt
