#include "invopt/conic_program.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace invopt {

using json = nlohmann::ordered_json;

bool membership(const ConicSet& set, const Eigen::VectorXd& v, double tol) {
  if (v.size() != set.vars())
    throw std::invalid_argument("membership: dimension mismatch");
  const Eigen::VectorXd resid = set.A * v - set.b;
  int offset = 0;
  for (const auto& cone : set.cones) {
    if (cone_violation(cone, resid.segment(offset, cone.slots())) > tol)
      return false;
    offset += cone.slots();
  }
  return true;
}

std::string status_name(SolverReport::Status s) {
  switch (s) {
    case SolverReport::Status::Optimal:
      return "optimal";
    case SolverReport::Status::Infeasible:
      return "infeasible";
    case SolverReport::Status::Unbounded:
      return "unbounded";
    case SolverReport::Status::NumericalFailure:
      return "numerical_failure";
  }
  return "numerical_failure";
}

int ConicProgram::add_vars(int k, const std::string& tag) {
  const int first = num_vars_;
  num_vars_ += k;
  for (int i = 0; i < k; ++i) var_tags_.push_back(tag);
  return first;
}

void ConicProgram::add_cost(int var, double coef) {
  if (coef != 0.0) cost_terms_.emplace_back(var, coef);
}

void ConicProgram::add_cost(const LinExpr& e) {
  for (const auto& [v, c] : e.terms()) add_cost(v, c);
  cost_constant_ += e.constant();
}

void ConicProgram::add_block(const Cone& cone, std::vector<LinExpr> rows) {
  if (static_cast<int>(rows.size()) != cone.slots())
    throw std::invalid_argument("block rows do not match cone slots");
  blocks_.push_back(Block{cone, std::move(rows)});
}

void ConicProgram::add_nonneg(const LinExpr& e) {
  add_block(Cone::nonneg(1), {e});
}

void ConicProgram::add_equality(const LinExpr& e) {
  add_block(Cone::zero(1), {e});
}

void ConicProgram::add_soc(std::vector<LinExpr> rows) {
  const int dim = static_cast<int>(rows.size());
  add_block(Cone::soc(dim), std::move(rows));
}

void ConicProgram::add_psd(int side,
                           const std::vector<std::vector<LinExpr>>& lower) {
  std::vector<LinExpr> rows;
  rows.reserve(svec_dim(side));
  for (int j = 0; j < side; ++j) {
    for (int i = j; i < side; ++i) {
      LinExpr e = lower[i][j];
      e *= svec_scale(i, j);
      rows.push_back(std::move(e));
    }
  }
  add_block(Cone::psd(side), std::move(rows));
}

bool ConicProgram::well_formed() const {
  for (const auto& blk : blocks_) {
    if (static_cast<int>(blk.rows.size()) != blk.cone.slots()) return false;
    for (const auto& row : blk.rows)
      for (const auto& [v, c] : row.terms())
        if (v < 0 || v >= num_vars_ || !std::isfinite(c)) return false;
  }
  for (const auto& [v, c] : cost_terms_)
    if (v < 0 || v >= num_vars_ || !std::isfinite(c)) return false;
  return true;
}

namespace {

json blocks_to_json(int nvars, const std::vector<ConicProgram::Block>& blocks) {
  json blist = json::array();
  for (const auto& blk : blocks) {
    json jb;
    jb["cone"] = cone_kind_name(blk.cone.kind);
    jb["dim"] = blk.cone.dim;
    json A = json::array();
    json b = json::array();
    for (const auto& row : blk.rows) {
      std::vector<double> dense(nvars, 0.0);
      for (const auto& [v, c] : row.terms()) dense[v] += c;
      A.push_back(dense);
      b.push_back(-row.constant());
    }
    jb["A"] = std::move(A);
    jb["b"] = std::move(b);
    blist.push_back(std::move(jb));
  }
  return blist;
}

}  // namespace

std::string ConicProgram::to_json() const {
  json j;
  j["vars"] = num_vars_;
  j["blocks"] = blocks_to_json(num_vars_, blocks_);
  json obj;
  std::vector<double> c(num_vars_, 0.0);
  for (const auto& [v, coef] : cost_terms_) c[v] += coef;
  obj["c"] = c;
  obj["constant"] = cost_constant_;
  obj["sense"] = maximize_ ? "max" : "min";
  j["objective"] = std::move(obj);
  return j.dump();
}

ConicProgram ConicProgram::from_json(const std::string& text) {
  const json j = json::parse(text);
  ConicProgram prog;
  prog.add_vars(j.at("vars").get<int>());
  for (const auto& jb : j.at("blocks")) {
    const Cone cone(cone_kind_from_name(jb.at("cone").get<std::string>()),
                    jb.at("dim").get<int>());
    std::vector<LinExpr> rows;
    const auto& A = jb.at("A");
    const auto& b = jb.at("b");
    for (std::size_t r = 0; r < A.size(); ++r) {
      LinExpr e;
      const auto& row = A[r];
      for (std::size_t v = 0; v < row.size(); ++v) {
        const double coef = row[v].get<double>();
        if (coef != 0.0) e.add(static_cast<int>(v), coef);
      }
      e.add_constant(-b[r].get<double>());
      rows.push_back(std::move(e));
    }
    prog.add_block(cone, std::move(rows));
  }
  if (j.contains("objective")) {
    const auto& obj = j.at("objective");
    const auto& c = obj.at("c");
    for (std::size_t v = 0; v < c.size(); ++v)
      prog.add_cost(static_cast<int>(v), c[v].get<double>());
    prog.set_cost_constant(obj.at("constant").get<double>());
    prog.set_maximize(obj.at("sense").get<std::string>() == "max");
  }
  return prog;
}

std::string conic_set_to_json(const ConicSet& set) {
  json j;
  j["vars"] = set.vars();
  json blist = json::array();
  int offset = 0;
  for (const auto& cone : set.cones) {
    json jb;
    jb["cone"] = cone_kind_name(cone.kind);
    jb["dim"] = cone.dim;
    json A = json::array();
    json b = json::array();
    for (int r = 0; r < cone.slots(); ++r) {
      std::vector<double> row(set.vars());
      for (int v = 0; v < set.vars(); ++v) row[v] = set.A(offset + r, v);
      A.push_back(row);
      b.push_back(set.b(offset + r));
    }
    jb["A"] = std::move(A);
    jb["b"] = std::move(b);
    blist.push_back(std::move(jb));
    offset += cone.slots();
  }
  j["blocks"] = std::move(blist);
  return j.dump();
}

ConicSet conic_set_from_json(const std::string& text) {
  const json j = json::parse(text);
  const int nvars = j.at("vars").get<int>();
  ConicSet set;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (const auto& jb : j.at("blocks")) {
    const Cone cone(cone_kind_from_name(jb.at("cone").get<std::string>()),
                    jb.at("dim").get<int>());
    set.cones.push_back(cone);
    const auto& A = jb.at("A");
    const auto& b = jb.at("b");
    for (std::size_t r = 0; r < A.size(); ++r) {
      Eigen::VectorXd row(nvars);
      for (int v = 0; v < nvars; ++v) row(v) = A[r][v].get<double>();
      rows.push_back(std::move(row));
      rhs.push_back(b[r].get<double>());
    }
  }
  set.A.resize(static_cast<int>(rows.size()), nvars);
  set.b.resize(static_cast<int>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    set.A.row(static_cast<int>(r)) = rows[r];
    set.b(static_cast<int>(r)) = rhs[r];
  }
  return set;
}

std::string norm_name(Norm n) {
  switch (n) {
    case Norm::One:
      return "1";
    case Norm::Two:
      return "2";
    case Norm::Inf:
      return "inf";
  }
  return "inf";
}

Norm norm_from_name(const std::string& name) {
  if (name == "1") return Norm::One;
  if (name == "2") return Norm::Two;
  if (name == "inf") return Norm::Inf;
  throw std::invalid_argument("unknown norm: " + name);
}

double norm_value(Norm n, const Eigen::VectorXd& v) {
  switch (n) {
    case Norm::One:
      return v.lpNorm<1>();
    case Norm::Two:
      return v.norm();
    case Norm::Inf:
      return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

Norm dual_norm(Norm n) {
  switch (n) {
    case Norm::One:
      return Norm::Inf;
    case Norm::Two:
      return Norm::Two;
    case Norm::Inf:
      return Norm::One;
  }
  return Norm::Two;
}

void add_norm_bound(ConicProgram& prog, Norm norm,
                    const std::vector<LinExpr>& expr, const LinExpr& bound) {
  const int k = static_cast<int>(expr.size());
  switch (norm) {
    case Norm::Inf: {
      for (int i = 0; i < k; ++i) {
        LinExpr lo = bound, hi = bound;
        LinExpr neg = expr[i];
        neg *= -1.0;
        lo += neg;  // bound - e_i >= 0
        hi += expr[i];
        prog.add_nonneg(lo);
        prog.add_nonneg(hi);
      }
      break;
    }
    case Norm::One: {
      // t_i >= |e_i|, sum t_i <= bound
      const int t = prog.add_vars(k, "normbound_aux");
      LinExpr total = bound;
      for (int i = 0; i < k; ++i) {
        LinExpr lo = LinExpr::variable(t + i);
        LinExpr neg = expr[i];
        neg *= -1.0;
        lo += neg;
        prog.add_nonneg(lo);
        LinExpr hi = LinExpr::variable(t + i);
        hi += expr[i];
        prog.add_nonneg(hi);
        total.add(t + i, -1.0);
      }
      prog.add_nonneg(total);
      break;
    }
    case Norm::Two: {
      std::vector<LinExpr> rows;
      rows.reserve(k + 1);
      rows.push_back(bound);
      for (const auto& e : expr) rows.push_back(e);
      prog.add_soc(std::move(rows));
      break;
    }
  }
}

}  // namespace invopt
