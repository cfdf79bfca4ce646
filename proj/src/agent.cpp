#include "invopt/agent.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace invopt {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::ordered_json;

double FeatureMap::eval_component(int j, const VectorXd& x) const {
  const auto& comp = components[j];
  if (const auto* a = std::get_if<AffineFeature>(&comp))
    return a->a.dot(x) + a->b;
  if (const auto* s = std::get_if<SquaredCoordinateFeature>(&comp))
    return x(s->index) * x(s->index);
  const auto& q = std::get<ConvexQuadraticFeature>(comp);
  return x.dot(q.P * x) + q.r.dot(x);
}

VectorXd FeatureMap::eval(const VectorXd& x) const {
  VectorXd v(size());
  for (int j = 0; j < size(); ++j) v(j) = eval_component(j, x);
  return v;
}

VectorXd FeatureMap::gradient_component(int j, const VectorXd& x) const {
  const auto& comp = components[j];
  if (const auto* a = std::get_if<AffineFeature>(&comp)) return a->a;
  if (const auto* s = std::get_if<SquaredCoordinateFeature>(&comp)) {
    VectorXd g = VectorXd::Zero(x.size());
    g(s->index) = 2.0 * x(s->index);
    return g;
  }
  const auto& q = std::get<ConvexQuadraticFeature>(comp);
  return 2.0 * q.P * x + q.r;
}

std::string FeatureMap::to_json() const {
  json j;
  j["input_dim"] = input_dim;
  j["lipschitz_ok"] = lipschitz_ok;
  json comps = json::array();
  for (const auto& comp : components) {
    json c;
    if (const auto* a = std::get_if<AffineFeature>(&comp)) {
      c["kind"] = "affine";
      c["a"] = std::vector<double>(a->a.data(), a->a.data() + a->a.size());
      c["b"] = a->b;
    } else if (const auto* s = std::get_if<SquaredCoordinateFeature>(&comp)) {
      c["kind"] = "sq";
      c["index"] = s->index;
    } else {
      const auto& q = std::get<ConvexQuadraticFeature>(comp);
      c["kind"] = "quad";
      json rows = json::array();
      for (int i = 0; i < q.P.rows(); ++i) {
        std::vector<double> row(q.P.cols());
        for (int k = 0; k < q.P.cols(); ++k) row[k] = q.P(i, k);
        rows.push_back(row);
      }
      c["P"] = rows;
      c["r"] = std::vector<double>(q.r.data(), q.r.data() + q.r.size());
    }
    comps.push_back(std::move(c));
  }
  j["components"] = std::move(comps);
  return j.dump();
}

FeatureMap FeatureMap::from_json(const std::string& text) {
  const json j = json::parse(text);
  FeatureMap fm;
  fm.input_dim = j.at("input_dim").get<int>();
  fm.lipschitz_ok = j.value("lipschitz_ok", false);
  for (const auto& c : j.at("components")) {
    const std::string kind = c.at("kind").get<std::string>();
    if (kind == "affine") {
      AffineFeature a;
      const auto av = c.at("a").get<std::vector<double>>();
      a.a = Eigen::Map<const VectorXd>(av.data(), av.size());
      a.b = c.at("b").get<double>();
      fm.components.push_back(a);
    } else if (kind == "sq") {
      fm.components.push_back(SquaredCoordinateFeature{c.at("index").get<int>()});
    } else if (kind == "quad") {
      ConvexQuadraticFeature q;
      const auto& rows = c.at("P");
      const int nn = static_cast<int>(rows.size());
      q.P.resize(nn, nn);
      for (int i = 0; i < nn; ++i)
        for (int k = 0; k < nn; ++k) q.P(i, k) = rows[i][k].get<double>();
      const auto rv = c.at("r").get<std::vector<double>>();
      q.r = Eigen::Map<const VectorXd>(rv.data(), rv.size());
      fm.components.push_back(q);
    } else {
      throw std::invalid_argument("unknown feature kind: " + kind);
    }
  }
  return fm;
}

double hypothesis_value(const Hypothesis& hyp, const VectorXd& s,
                        const VectorXd& x) {
  if (const auto* lin = std::get_if<LinearHypothesis>(&hyp))
    return lin->theta.dot(x);
  if (const auto* quad = std::get_if<QuadraticHypothesis>(&hyp))
    return x.dot(quad->Qxx * x) + x.dot(quad->Qxs * s) + quad->q.dot(x);
  const auto& cf = std::get<ConvexFeaturesHypothesis>(hyp);
  return cf.theta.dot(cf.features.eval(x));
}

VectorXd hypothesis_gradient_x(const Hypothesis& hyp, const VectorXd& s,
                               const VectorXd& x) {
  if (const auto* lin = std::get_if<LinearHypothesis>(&hyp)) return lin->theta;
  if (const auto* quad = std::get_if<QuadraticHypothesis>(&hyp))
    return 2.0 * quad->Qxx * x + quad->Qxs * s + quad->q;
  const auto& cf = std::get<ConvexFeaturesHypothesis>(hyp);
  VectorXd g = VectorXd::Zero(x.size());
  for (int j = 0; j < cf.features.size(); ++j)
    g += cf.theta(j) * cf.features.gradient_component(j, x);
  return g;
}

AgentProblem::AgentProblem(ConicSet signal_set, MatrixXd W, MatrixXd H,
                           VectorXd h, std::vector<Cone> feasible_cones)
    : m_(signal_set.vars()),
      n_(static_cast<int>(W.cols())),
      signal_set_(std::move(signal_set)),
      W_(std::move(W)),
      H_(std::move(H)),
      h_(std::move(h)),
      cones_(std::move(feasible_cones)) {
  if (total_slots(cones_) != W_.rows() || H_.rows() != W_.rows() ||
      h_.size() != W_.rows() || H_.cols() != m_ || !signal_set_.well_formed())
    throw std::invalid_argument("AgentProblem: inconsistent dimensions");

  // Slater check on Xi: maximize the uniform slack t (capped at 1).
  ConicProgram prog;
  const int s = prog.add_vars(m_, "s");
  const int x = prog.add_vars(n_, "x");
  const int t = prog.add_vars(1, "slack");
  prog.set_maximize(true);
  prog.add_cost(t, 1.0);
  prog.add_nonneg(LinExpr(1.0).add(t, -1.0));
  int offset = 0;
  for (const auto& cone : signal_set_.cones) {
    const VectorXd e = cone_identity(cone);
    std::vector<LinExpr> rows;
    for (int r = 0; r < cone.slots(); ++r) {
      LinExpr row(-signal_set_.b(offset + r));
      for (int v = 0; v < m_; ++v) row.add(s + v, signal_set_.A(offset + r, v));
      row.add(t, -e(r));
      rows.push_back(std::move(row));
    }
    prog.add_block(cone, std::move(rows));
    offset += cone.slots();
  }
  offset = 0;
  for (const auto& cone : cones_) {
    const VectorXd e = cone_identity(cone);
    std::vector<LinExpr> rows;
    for (int r = 0; r < cone.slots(); ++r) {
      LinExpr row(-h_(offset + r));
      for (int v = 0; v < n_; ++v) row.add(x + v, W_(offset + r, v));
      for (int v = 0; v < m_; ++v) row.add(s + v, -H_(offset + r, v));
      row.add(t, -e(r));
      rows.push_back(std::move(row));
    }
    prog.add_block(cone, std::move(rows));
    offset += cone.slots();
  }
  const auto rep = solve(prog, 1e-8);
  if (!rep.ok() || rep.objective_value <= 1e-7)
    throw std::invalid_argument("AgentProblem: Xi has no Slater point");
}

ConicSet AgentProblem::response_set(const VectorXd& s) const {
  ConicSet set;
  set.A = W_;
  set.b = H_ * s + h_;
  set.cones = cones_;
  return set;
}

ConicSet AgentProblem::graph_set() const {
  const int rows_s = signal_set_.rows();
  const int rows_x = static_cast<int>(W_.rows());
  ConicSet set;
  set.A = MatrixXd::Zero(rows_s + rows_x, m_ + n_);
  set.A.topLeftCorner(rows_s, m_) = signal_set_.A;
  set.A.bottomLeftCorner(rows_x, m_) = -H_;
  set.A.bottomRightCorner(rows_x, n_) = W_;
  set.b.resize(rows_s + rows_x);
  set.b.head(rows_s) = signal_set_.b;
  set.b.tail(rows_x) = h_;
  set.cones = signal_set_.cones;
  set.cones.insert(set.cones.end(), cones_.begin(), cones_.end());
  return set;
}

bool AgentProblem::signal_member(const VectorXd& s, double tol) const {
  return membership(signal_set_, s, tol);
}

bool AgentProblem::graph_member(const VectorXd& s, const VectorXd& x,
                                double tol) const {
  VectorXd v(m_ + n_);
  v << s, x;
  return membership(graph_set(), v, tol);
}

void AgentProblem::append_response_rows(ConicProgram& prog, int x_base,
                                        const VectorXd& s) const {
  const VectorXd rhs = H_ * s + h_;
  int offset = 0;
  for (const auto& cone : cones_) {
    std::vector<LinExpr> rows;
    for (int r = 0; r < cone.slots(); ++r) {
      LinExpr row(-rhs(offset + r));
      for (int v = 0; v < n_; ++v) row.add(x_base + v, W_(offset + r, v));
      rows.push_back(std::move(row));
    }
    prog.add_block(cone, std::move(rows));
    offset += cone.slots();
  }
}

namespace {

// factor Q = L L' for PSD Q via eigendecomposition with clipping
MatrixXd psd_factor(const MatrixXd& Q) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q);
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw std::invalid_argument("quadratic form is not positive semidefinite");
  const VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal();
}

// adds epigraph variable u with u >= ||L' x||^2 (x given as variable range)
int add_quad_epigraph(ConicProgram& prog, const MatrixXd& L, int x_base) {
  const int u = prog.add_vars(1, "quad_epi");
  const int n = static_cast<int>(L.rows());
  const int k = static_cast<int>(L.cols());
  std::vector<LinExpr> soc;
  soc.reserve(k + 2);
  soc.push_back(LinExpr(1.0).add(u, 1.0));  // u + 1
  for (int j = 0; j < k; ++j) {
    LinExpr row;
    for (int i = 0; i < n; ++i) row.add(x_base + i, 2.0 * L(i, j));
    soc.push_back(std::move(row));
  }
  soc.push_back(LinExpr(-1.0).add(u, 1.0));  // u - 1
  prog.add_soc(std::move(soc));
  return u;
}

// objective F_hyp(s, x) expressed over prog variables; may add epigraph vars
LinExpr hypothesis_objective(ConicProgram& prog, const Hypothesis& hyp,
                             const VectorXd& s, int x_base, int n) {
  LinExpr obj;
  if (const auto* lin = std::get_if<LinearHypothesis>(&hyp)) {
    for (int i = 0; i < n; ++i) obj.add(x_base + i, lin->theta(i));
    return obj;
  }
  if (const auto* quad = std::get_if<QuadraticHypothesis>(&hyp)) {
    const VectorXd linpart = quad->Qxs * s + quad->q;
    const MatrixXd L = psd_factor(quad->Qxx);
    const int u = add_quad_epigraph(prog, L, x_base);
    obj.add(u, 1.0);
    for (int i = 0; i < n; ++i) obj.add(x_base + i, linpart(i));
    return obj;
  }
  const auto& cf = std::get<ConvexFeaturesHypothesis>(hyp);
  if ((cf.theta.array() < -1e-12).any())
    throw std::invalid_argument("ConvexFeatures hypothesis needs theta >= 0");
  for (int j = 0; j < cf.features.size(); ++j) {
    const double w = cf.theta(j);
    const auto& comp = cf.features.components[j];
    if (const auto* a = std::get_if<AffineFeature>(&comp)) {
      obj.add_constant(w * a->b);
      for (int i = 0; i < n; ++i) obj.add(x_base + i, w * a->a(i));
    } else if (const auto* sq = std::get_if<SquaredCoordinateFeature>(&comp)) {
      MatrixXd L = MatrixXd::Zero(n, 1);
      L(sq->index, 0) = 1.0;
      const int u = add_quad_epigraph(prog, L, x_base);
      obj.add(u, w);
    } else {
      const auto& q = std::get<ConvexQuadraticFeature>(comp);
      const MatrixXd L = psd_factor(q.P);
      const int u = add_quad_epigraph(prog, L, x_base);
      obj.add(u, w);
      for (int i = 0; i < n; ++i) obj.add(x_base + i, w * q.r(i));
    }
  }
  return obj;
}

}  // namespace

ForwardResult forward_solve(const AgentProblem& prob, const Hypothesis& hyp,
                            const VectorXd& s, double tol) {
  ForwardResult res;
  if (!prob.signal_member(s, 1e-6)) {
    res.status = SolverReport::Status::Infeasible;
    return res;
  }
  ConicProgram prog;
  const int x = prog.add_vars(prob.decision_dim(), "x");
  prob.append_response_rows(prog, x, s);
  prog.add_cost(hypothesis_objective(prog, hyp, s, x, prob.decision_dim()));
  const auto rep = solve(prog, tol);
  res.status = rep.status;
  if (rep.ok()) {
    res.x = rep.primal.head(prob.decision_dim());
    res.value = rep.objective_value;
  }
  return res;
}

ForwardResult delta_suboptimal_response(const AgentProblem& prob,
                                        const Hypothesis& true_hyp,
                                        const VectorXd& s, double delta,
                                        const Hypothesis& tiebreak, double tol) {
  if (delta < 0) throw std::invalid_argument("delta must be nonnegative");
  ForwardResult fwd = forward_solve(prob, true_hyp, s, tol);
  if (!fwd.ok()) return fwd;

  ConicProgram prog;
  const int x = prog.add_vars(prob.decision_dim(), "x");
  prob.append_response_rows(prog, x, s);
  // band row: F_true(s, x) <= z*(s) + delta
  LinExpr truecost =
      hypothesis_objective(prog, true_hyp, s, x, prob.decision_dim());
  truecost *= -1.0;
  truecost.add_constant(fwd.value + delta);
  prog.add_nonneg(truecost);
  prog.add_cost(hypothesis_objective(prog, tiebreak, s, x, prob.decision_dim()));
  const auto rep = solve(prog, tol);
  ForwardResult res;
  res.status = rep.status;
  if (rep.ok()) {
    res.x = rep.primal.head(prob.decision_dim());
    res.value = hypothesis_value(true_hyp, s, res.x);
  }
  return res;
}

ForwardResult delta_suboptimal_response(const AgentProblem& prob,
                                        const Hypothesis& true_hyp,
                                        const VectorXd& s, double delta,
                                        Rng& rng, double tol) {
  LinearHypothesis tiebreak{rng.uniform_vector(prob.decision_dim(), -1.0, 1.0)};
  return delta_suboptimal_response(prob, true_hyp, s, delta,
                                   Hypothesis(tiebreak), tol);
}

std::string AgentProblem::to_json() const {
  json j;
  j["m"] = m_;
  j["n"] = n_;
  j["signal_set"] = json::parse(conic_set_to_json(signal_set_));
  ConicSet feas;
  feas.A.resize(W_.rows(), n_ + m_);
  feas.A.leftCols(n_) = W_;
  feas.A.rightCols(m_) = -H_;
  feas.b = h_;
  feas.cones = cones_;
  j["feasible_map"] = json::parse(conic_set_to_json(feas));
  return j.dump();
}

AgentProblem AgentProblem::from_json(const std::string& text) {
  const json j = json::parse(text);
  const int m = j.at("m").get<int>();
  const int n = j.at("n").get<int>();
  ConicSet sig = conic_set_from_json(j.at("signal_set").dump());
  ConicSet feas = conic_set_from_json(j.at("feasible_map").dump());
  MatrixXd W = feas.A.leftCols(n);
  MatrixXd H = -feas.A.rightCols(m);
  return AgentProblem(std::move(sig), std::move(W), std::move(H), feas.b,
                      feas.cones);
}

}  // namespace invopt
