#include "invopt/dro_linear.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <sstream>

namespace invopt {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::ordered_json;

void flag_consistency(const AgentProblem& prob, Dataset& data, double tol) {
  for (auto& smp : data.samples)
    smp.consistent = prob.graph_member(smp.s, smp.x, tol);
}

std::string dataset_to_csv(const Dataset& data) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& smp : data.samples) {
    for (int i = 0; i < smp.s.size(); ++i) os << smp.s(i) << ",";
    for (int i = 0; i < smp.x.size(); ++i)
      os << smp.x(i) << (i + 1 == smp.x.size() ? "" : ",");
    os << "\n";
  }
  return os.str();
}

Dataset dataset_from_csv(const std::string& text, int m, int n) {
  Dataset data;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != m + n)
      throw std::invalid_argument("dataset csv: wrong column count");
    Sample smp;
    smp.s = Eigen::Map<VectorXd>(vals.data(), m);
    smp.x = Eigen::Map<VectorXd>(vals.data() + m, n);
    data.samples.push_back(std::move(smp));
  }
  return data;
}

namespace {

// variable indices for the duals of one sample
struct SampleVars {
  int phi1 = -1, mu1 = -1, gamma = -1, r = -1;
  int phi2 = -1, mu2 = -1;
};

// emits "var block lies in the dual cone" rows (skipping free duals)
void add_dual_cone_rows(ConicProgram& prog, int base,
                        const std::vector<Cone>& cones) {
  int off = 0;
  for (const auto& cone : cones) {
    const Cone dual = cone.dual();
    if (dual.kind != ConeKind::Free) {
      std::vector<LinExpr> rows;
      for (int r = 0; r < dual.slots(); ++r)
        rows.push_back(LinExpr::variable(base + off + r));
      prog.add_block(dual, std::move(rows));
    }
    off += cone.slots();
  }
}

LinExpr dot_vars(const VectorXd& coef, int base) {
  LinExpr e;
  for (int i = 0; i < coef.size(); ++i) e.add(base + i, coef(i));
  return e;
}

// rows of M^T * varblock as expressions (column j of M dotted with vars)
std::vector<LinExpr> mat_t_vars(const MatrixXd& M, int base) {
  std::vector<LinExpr> out(M.cols());
  for (int j = 0; j < M.cols(); ++j) {
    LinExpr e;
    for (int i = 0; i < M.rows(); ++i) e.add(base + i, M(i, j));
    out[j] = std::move(e);
  }
  return out;
}

void add_theta_space_rows(ConicProgram& prog, const LinearSearchSpace& space,
                          int theta, int n, int facet) {
  switch (space.kind) {
    case LinearSearchSpace::Kind::InfSphere: {
      // facet 2k pins theta_k = -1, facet 2k+1 pins theta_k = +1
      const int coord = facet / 2;
      const double sign = facet % 2 == 0 ? -1.0 : 1.0;
      prog.add_equality(LinExpr(-sign).add(theta + coord, 1.0));
      for (int j = 0; j < n; ++j) {
        prog.add_nonneg(LinExpr(1.0).add(theta + j, -1.0));
        prog.add_nonneg(LinExpr(1.0).add(theta + j, 1.0));
      }
      break;
    }
    case LinearSearchSpace::Kind::SimplexFace: {
      LinExpr sum(-1.0);
      for (int j = 0; j < n; ++j) {
        prog.add_nonneg(LinExpr::variable(theta + j));
        sum.add(theta + j, 1.0);
      }
      prog.add_equality(sum);
      break;
    }
    case LinearSearchSpace::Kind::NormBall: {
      std::vector<LinExpr> diff(n);
      for (int j = 0; j < n; ++j)
        diff[j] = LinExpr(-space.theta0(j)).add(theta + j, 1.0);
      add_norm_bound(prog, space.norm, diff, LinExpr(space.Gamma));
      break;
    }
    case LinearSearchSpace::Kind::FixedTheta: {
      for (int j = 0; j < n; ++j)
        prog.add_equality(LinExpr(-space.theta_fixed(j)).add(theta + j, 1.0));
      break;
    }
  }
}

struct BuiltLinearProgram {
  ConicProgram prog;
  int theta, lambda, tau;  // tau == -1 when pinned to zero
  std::vector<SampleVars> sv;
};

BuiltLinearProgram build_cvar_lin(const AgentProblem& prob, const Dataset& data,
                                  const LinearSearchSpace& space,
                                  const WassersteinSpec& wass, double alpha,
                                  double delta, int facet) {
  const int n = prob.decision_dim();
  const int m = prob.signal_dim();
  const int N = data.size();
  const auto& sig = prob.signal_set();
  const MatrixXd& C = sig.A;
  const VectorXd& d = sig.b;
  const MatrixXd& W = prob.W();
  const MatrixXd& H = prob.H();
  const VectorXd& h = prob.h();
  const int mc = sig.rows();
  const int mk = static_cast<int>(W.rows());
  const Norm dual = dual_norm(wass.ground_norm);

  // At eps = 0 the transport price lambda and its dual-norm rows only pad the
  // program with an unbounded optimal face; dropping them leaves the exact
  // empirical-risk program ("shrinks to the singleton").
  const bool priced = wass.eps > 0.0;

  BuiltLinearProgram bp;
  ConicProgram& prog = bp.prog;
  bp.theta = prog.add_vars(n, "theta");
  bp.lambda = priced ? prog.add_vars(1, "lambda") : -1;
  if (priced) prog.add_nonneg(LinExpr::variable(bp.lambda));
  const bool need_tau = alpha < 1.0 || delta > 0.0;
  bp.tau = need_tau ? prog.add_vars(1, "tau") : -1;
  if (delta > 0.0 && need_tau)
    prog.add_nonneg(LinExpr::variable(bp.tau));
  const int rbase = prog.add_vars(N, "r");

  add_theta_space_rows(prog, space, bp.theta, n, facet);

  LinExpr objective;
  if (need_tau) objective.add(bp.tau, 1.0);
  if (priced) objective.add(bp.lambda, wass.eps / alpha);

  for (int i = 0; i < N; ++i) {
    const auto& smp = data.samples[i];
    SampleVars sv;
    sv.r = rbase + i;
    // At eps = 0 on consistent data the optimal phi1, mu1 vanish; keeping
    // them adds flat dual rays along binding rows that stall the solver.
    if (priced) {
      sv.phi1 = prog.add_vars(mc, "phi1");
      sv.mu1 = prog.add_vars(mk, "mu1");
      add_dual_cone_rows(prog, sv.phi1, sig.cones);
      add_dual_cone_rows(prog, sv.mu1, prob.feasible_cones());
    }
    sv.gamma = prog.add_vars(mk, "gamma");
    add_dual_cone_rows(prog, sv.gamma, prob.feasible_cones());

    const VectorXd cs_d = C * smp.s - d;
    const VectorXd wx_hs_h = W * smp.x - H * smp.s - h;

    // theta = W' gamma
    const auto wt_gamma = mat_t_vars(W, sv.gamma);
    for (int j = 0; j < n; ++j) {
      LinExpr eq = wt_gamma[j];
      eq *= -1.0;
      eq.add(bp.theta + j, 1.0);
      prog.add_equality(eq);
    }

    // <C s_i - d, phi1> + <W x_i - H s_i - h, mu1 + gamma> <= r_i + tau + delta
    {
      LinExpr row(delta);
      row.add(sv.r, 1.0);
      if (need_tau) row.add(bp.tau, 1.0);
      LinExpr lhs = dot_vars(wx_hs_h, sv.gamma);
      if (priced) {
        lhs += dot_vars(cs_d, sv.phi1);
        lhs += dot_vars(wx_hs_h, sv.mu1);
      }
      lhs *= -1.0;
      row += lhs;
      prog.add_nonneg(row);
    }

    // || (C' phi1 - H'(mu1+gamma); W'(mu1+gamma)) ||_* <= lambda
    if (priced) {
      std::vector<LinExpr> v(m + n);
      const auto ct_phi = mat_t_vars(C, sv.phi1);
      const auto ht_mu = mat_t_vars(H, sv.mu1);
      const auto ht_g = mat_t_vars(H, sv.gamma);
      const auto wt_mu = mat_t_vars(W, sv.mu1);
      for (int j = 0; j < m; ++j) {
        LinExpr e = ct_phi[j];
        LinExpr neg = ht_mu[j];
        neg += ht_g[j];
        neg *= -1.0;
        e += neg;
        v[j] = std::move(e);
      }
      for (int j = 0; j < n; ++j) {
        LinExpr e = wt_mu[j];
        e += wt_gamma[j];
        v[m + j] = std::move(e);
      }
      add_norm_bound(prog, dual, v, LinExpr::variable(bp.lambda));
    }

    if (smp.consistent) {
      prog.add_nonneg(LinExpr::variable(sv.r));
    } else {
      sv.phi2 = prog.add_vars(mc, "phi2");
      sv.mu2 = prog.add_vars(mk, "mu2");
      add_dual_cone_rows(prog, sv.phi2, sig.cones);
      add_dual_cone_rows(prog, sv.mu2, prob.feasible_cones());
      LinExpr row;
      row.add(sv.r, 1.0);
      LinExpr lhs = dot_vars(cs_d, sv.phi2);
      lhs += dot_vars(wx_hs_h, sv.mu2);
      lhs *= -1.0;
      row += lhs;
      prog.add_nonneg(row);

      if (priced) {
        std::vector<LinExpr> v(m + n);
        const auto ct_phi = mat_t_vars(C, sv.phi2);
        const auto ht_mu = mat_t_vars(H, sv.mu2);
        const auto wt_mu = mat_t_vars(W, sv.mu2);
        for (int j = 0; j < m; ++j) {
          LinExpr e = ct_phi[j];
          LinExpr neg = ht_mu[j];
          neg *= -1.0;
          e += neg;
          v[j] = std::move(e);
        }
        for (int j = 0; j < n; ++j) v[m + j] = wt_mu[j];
        add_norm_bound(prog, dual, v, LinExpr::variable(bp.lambda));
      }
    }

    objective.add(sv.r, 1.0 / (alpha * N));
    bp.sv.push_back(sv);
  }
  prog.add_cost(objective);
  return bp;
}

DroSolution extract_linear_solution(const AgentProblem& prob,
                                    const BuiltLinearProgram& bp,
                                    const SolverReport& rep, int facet) {
  DroSolution sol;
  sol.status = rep.status;
  sol.message = rep.message;
  if (rep.status == SolverReport::Status::Unbounded) {
    sol.empty_ball = true;
    sol.message = "worst-case problem unbounded: empty Wasserstein ball";
    return sol;
  }
  if (!rep.ok()) return sol;
  const int n = prob.decision_dim();
  const int mc = prob.signal_set().rows();
  const int mk = static_cast<int>(prob.W().rows());
  sol.theta_hat = LinearHypothesis{rep.primal.segment(bp.theta, n)};
  sol.certificate = rep.objective_value;
  sol.facet_index = facet;
  sol.duals.lambda = bp.lambda >= 0 ? rep.primal(bp.lambda) : 0.0;
  sol.duals.tau = bp.tau >= 0 ? rep.primal(bp.tau) : 0.0;
  for (const auto& sv : bp.sv) {
    sol.duals.phi1.push_back(
        sv.phi1 >= 0 ? VectorXd(rep.primal.segment(sv.phi1, mc))
                     : VectorXd(VectorXd::Zero(mc)));
    sol.duals.mu1.push_back(sv.mu1 >= 0
                                ? VectorXd(rep.primal.segment(sv.mu1, mk))
                                : VectorXd(VectorXd::Zero(mk)));
    sol.duals.gamma.push_back(rep.primal.segment(sv.gamma, mk));
    sol.duals.r.push_back(rep.primal(sv.r));
    if (sv.phi2 >= 0) {
      sol.duals.phi2.push_back(rep.primal.segment(sv.phi2, mc));
      sol.duals.mu2.push_back(rep.primal.segment(sv.mu2, mk));
    } else {
      sol.duals.phi2.push_back(VectorXd::Zero(mc));
      sol.duals.mu2.push_back(VectorXd::Zero(mk));
    }
  }
  return sol;
}

}  // namespace

DroSolution solve_dro_linear(const AgentProblem& prob, const Dataset& data,
                             const LinearSearchSpace& space,
                             const WassersteinSpec& wass, double alpha,
                             double delta) {
  if (wass.p != 1)
    throw std::invalid_argument("linear reformulation needs the 1-Wasserstein ball");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1]");
  if (wass.eps < 0 || delta < 0)
    throw std::invalid_argument("eps and delta must be nonnegative");
  if (data.size() == 0) throw std::invalid_argument("empty dataset");

  if (wass.eps == 0.0 && !data.all_consistent()) {
    DroSolution sol;
    sol.status = SolverReport::Status::Unbounded;
    sol.empty_ball = true;
    sol.message =
        "empirical distribution not supported on Xi and eps = 0: empty ball";
    return sol;
  }

  const int facets =
      space.kind == LinearSearchSpace::Kind::InfSphere ? 2 * prob.decision_dim()
                                                       : 1;
  DroSolution best;
  bool have_opt = false;
  for (int f = 0; f < facets; ++f) {
    auto bp = build_cvar_lin(prob, data, space, wass, alpha, delta, f);
    const auto rep = solve(bp.prog, default_tol(bp.prog));
    DroSolution sol = extract_linear_solution(prob, bp, rep, f);
    if (sol.empty_ball) return sol;  // ball emptiness is theta-independent
    if (sol.ok()) {
      // improvements below solver accuracy count as ties, which keep the
      // lowest facet index
      const double tie_tol =
          have_opt ? 1e-7 * (1.0 + std::abs(best.certificate)) : 0.0;
      if (!have_opt || sol.certificate < best.certificate - tie_tol) {
        const std::string warn = best.message;
        best = std::move(sol);
        best.message += warn;
        have_opt = true;
      }
    } else {
      if (!have_opt && f == 0) best = std::move(sol);
      best.message += " facet " + std::to_string(f) + " failed;";
    }
  }
  if (space.kind != LinearSearchSpace::Kind::InfSphere) best.facet_index = -1;
  return best;
}

WorstCaseResult worst_case_distribution(const AgentProblem& prob,
                                        const Dataset& data,
                                        const VectorXd& theta,
                                        const WassersteinSpec& wass,
                                        double alpha) {
  if (wass.p != 1)
    throw std::invalid_argument("worst-case program needs the 1-Wasserstein ball");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1]");
  const int n = prob.decision_dim();
  const int m = prob.signal_dim();
  const int N = data.size();
  const auto& sig = prob.signal_set();
  const MatrixXd& C = sig.A;
  const VectorXd& d = sig.b;
  const MatrixXd& W = prob.W();
  const MatrixXd& H = prob.H();
  const VectorXd& h = prob.h();

  ConicProgram prog;
  prog.set_maximize(true);
  struct AtomVars {
    int pi, p, q;
  };
  std::vector<std::array<AtomVars, 2>> av(N);
  std::vector<int> wvars(N);
  LinExpr alpha_row(-alpha * N);  // sum_i pi_i1 = alpha N
  LinExpr budget(wass.eps * N);   // sum_ij t_ij <= eps N

  for (int i = 0; i < N; ++i) {
    const auto& smp = data.samples[i];
    for (int j = 0; j < 2; ++j) {
      AtomVars& a = av[i][j];
      a.pi = prog.add_vars(1, "pi");
      a.p = prog.add_vars(m, "p");
      a.q = prog.add_vars(n, "q");
      prog.add_nonneg(LinExpr::variable(a.pi));

      // C p - pi d in cone(S)
      int off = 0;
      for (const auto& cone : sig.cones) {
        std::vector<LinExpr> rows;
        for (int r = 0; r < cone.slots(); ++r) {
          LinExpr row;
          for (int v = 0; v < m; ++v) row.add(a.p + v, C(off + r, v));
          row.add(a.pi, -d(off + r));
          rows.push_back(std::move(row));
        }
        prog.add_block(cone, std::move(rows));
        off += cone.slots();
      }
      // W q - H p - pi h in K
      off = 0;
      for (const auto& cone : prob.feasible_cones()) {
        std::vector<LinExpr> rows;
        for (int r = 0; r < cone.slots(); ++r) {
          LinExpr row;
          for (int v = 0; v < n; ++v) row.add(a.q + v, W(off + r, v));
          for (int v = 0; v < m; ++v) row.add(a.p + v, -H(off + r, v));
          row.add(a.pi, -h(off + r));
          rows.push_back(std::move(row));
        }
        prog.add_block(cone, std::move(rows));
        off += cone.slots();
      }
      // transport epigraph t_ij >= || (p - pi s_i; q - pi x_i) ||
      const int t = prog.add_vars(1, "t");
      std::vector<LinExpr> diff(m + n);
      for (int v = 0; v < m; ++v)
        diff[v] = LinExpr::variable(a.p + v).add(a.pi, -smp.s(v));
      for (int v = 0; v < n; ++v)
        diff[m + v] = LinExpr::variable(a.q + v).add(a.pi, -smp.x(v));
      add_norm_bound(prog, wass.ground_norm, diff, LinExpr::variable(t));
      budget.add(t, -1.0);
    }
    // perspective of the inner minimizer y for the j=1 atom
    wvars[i] = prog.add_vars(n, "w");
    int off = 0;
    for (const auto& cone : prob.feasible_cones()) {
      std::vector<LinExpr> rows;
      for (int r = 0; r < cone.slots(); ++r) {
        LinExpr row;
        for (int v = 0; v < n; ++v) row.add(wvars[i] + v, W(off + r, v));
        for (int v = 0; v < m; ++v) row.add(av[i][0].p + v, -H(off + r, v));
        row.add(av[i][0].pi, -h(off + r));
        rows.push_back(std::move(row));
      }
      prog.add_block(cone, std::move(rows));
      off += cone.slots();
    }

    LinExpr prob_row(-1.0);
    prob_row.add(av[i][0].pi, 1.0).add(av[i][1].pi, 1.0);
    prog.add_equality(prob_row);
    alpha_row.add(av[i][0].pi, 1.0);

    for (int v = 0; v < n; ++v) {
      prog.add_cost(av[i][0].q + v, theta(v) / (alpha * N));
      prog.add_cost(wvars[i] + v, -theta(v) / (alpha * N));
    }
  }
  prog.add_equality(alpha_row);
  prog.add_nonneg(budget);

  const auto rep = solve(prog, default_tol(prog));
  WorstCaseResult res;
  res.status = rep.status;
  if (!rep.ok()) return res;
  res.value = rep.objective_value;

  constexpr double kFloor = 1e-9;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < 2; ++j) {
      const AtomVars& a = av[i][j];
      const double pi = rep.primal(a.pi);
      if (pi <= kFloor) {
        // audit the transport carried by the dropped atom
        VectorXd ps = rep.primal.segment(a.p, m) - pi * data.samples[i].s;
        VectorXd qx = rep.primal.segment(a.q, n) - pi * data.samples[i].x;
        VectorXd full(m + n);
        full << ps, qx;
        res.dist.dropped_transport += norm_value(wass.ground_norm, full) / N;
        continue;
      }
      DiscreteDistribution::Atom atom;
      atom.weight = pi / N;
      atom.s = rep.primal.segment(a.p, m) / pi;
      atom.x = rep.primal.segment(a.q, n) / pi;
      res.dist.atoms.push_back(std::move(atom));
    }
  }
  return res;
}

double wasserstein_to_empirical(const DiscreteDistribution& dist,
                                const Dataset& data, Norm ground_norm, int p) {
  const int A = static_cast<int>(dist.atoms.size());
  const int N = data.size();
  ConicProgram lp;
  const int f = lp.add_vars(A * N, "flow");
  for (int i = 0; i < A * N; ++i) lp.add_nonneg(LinExpr::variable(f + i));
  for (int a = 0; a < A; ++a) {
    LinExpr row(-dist.atoms[a].weight);
    for (int i = 0; i < N; ++i) row.add(f + a * N + i, 1.0);
    lp.add_equality(row);
  }
  for (int i = 0; i < N; ++i) {
    LinExpr row(-1.0 / N);
    for (int a = 0; a < A; ++a) row.add(f + a * N + i, 1.0);
    lp.add_equality(row);
  }
  for (int a = 0; a < A; ++a)
    for (int i = 0; i < N; ++i) {
      VectorXd diff(dist.atoms[a].s.size() + dist.atoms[a].x.size());
      diff << dist.atoms[a].s - data.samples[i].s,
          dist.atoms[a].x - data.samples[i].x;
      lp.add_cost(f + a * N + i, std::pow(norm_value(ground_norm, diff),
                                          static_cast<double>(p)));
    }
  const auto rep = solve(lp, 1e-9);
  if (!rep.ok()) throw std::runtime_error("transport LP failed");
  return std::pow(std::max(rep.objective_value, 0.0), 1.0 / p);
}

std::string DiscreteDistribution::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& a : atoms) {
    os << a.weight;
    for (int i = 0; i < a.s.size(); ++i) os << "," << a.s(i);
    for (int i = 0; i < a.x.size(); ++i) os << "," << a.x(i);
    os << "\n";
  }
  return os.str();
}

std::string DroSolution::to_json() const {
  json j;
  j["status"] = empty_ball ? "empty_ball" : status_name(status);
  j["certificate"] = certificate;
  if (ok()) {
    if (const auto* lin = std::get_if<LinearHypothesis>(&theta_hat))
      j["theta"] = std::vector<double>(lin->theta.data(),
                                       lin->theta.data() + lin->theta.size());
    j["facet_index"] = facet_index;
    j["lambda"] = duals.lambda;
    j["tau"] = duals.tau;
    j["r"] = duals.r;
    auto dump_vecs = [](const std::vector<VectorXd>& vs) {
      json arr = json::array();
      for (const auto& v : vs)
        arr.push_back(std::vector<double>(v.data(), v.data() + v.size()));
      return arr;
    };
    j["phi1"] = dump_vecs(duals.phi1);
    j["phi2"] = dump_vecs(duals.phi2);
    j["mu1"] = dump_vecs(duals.mu1);
    j["mu2"] = dump_vecs(duals.mu2);
    j["gamma"] = dump_vecs(duals.gamma);
  }
  if (!message.empty()) j["message"] = message;
  return j.dump();
}

}  // namespace invopt
