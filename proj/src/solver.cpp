#include "invopt/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

namespace invopt {
namespace {

using SpMat = Eigen::SparseMatrix<double>;
using SpMatRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// standard form:  min c'x  s.t.  Ax = b,  Gx + s = h,  s in K
// ---------------------------------------------------------------------------

struct OrigBlock {
  int target;  // 0 = equality rows, 1 = cone rows, 2 = free (dropped)
  int offset;
  int slots;
};

struct Standard {
  int n = 0;
  SpMat A;
  VectorXd b;
  SpMatRow G;
  VectorXd h;
  std::vector<Cone> cones;  // aligned with rows of G
  VectorXd c;

  // equilibration state (x_orig = col_scale .* x_scaled, etc.)
  VectorXd col_scale, rowA_scale, rowG_scale;
  double obj_scale = 1.0;

  std::vector<OrigBlock> orig;
  bool maximize = false;
  double cost_constant = 0.0;

  // unequilibrated copies for honest convergence checks
  SpMat A0;
  SpMatRow G0;
  VectorXd b0, h0, c0;
};

Standard build_standard(const ConicProgram& prog) {
  Standard st;
  st.n = prog.num_vars();
  st.maximize = prog.maximize();
  st.cost_constant = prog.cost_constant();

  st.c = VectorXd::Zero(st.n);
  for (const auto& [v, coef] : prog.cost_terms()) st.c(v) += coef;
  if (st.maximize) st.c = -st.c;

  std::vector<Eigen::Triplet<double>> ta, tg;
  std::vector<double> bvals, hvals;
  int ma = 0, mg = 0;
  for (const auto& blk : prog.blocks()) {
    OrigBlock ob;
    ob.slots = blk.cone.slots();
    if (blk.cone.kind == ConeKind::Free) {
      ob.target = 2;
      ob.offset = 0;
    } else if (blk.cone.kind == ConeKind::Zero) {
      ob.target = 0;
      ob.offset = ma;
      for (const auto& row : blk.rows) {
        for (const auto& [v, coef] : row.terms()) ta.emplace_back(ma, v, coef);
        bvals.push_back(-row.constant());
        ++ma;
      }
    } else {
      ob.target = 1;
      ob.offset = mg;
      st.cones.push_back(blk.cone);
      for (const auto& row : blk.rows) {
        // row(v) in K  <=>  Gx + s = h with G = -M, h = const
        for (const auto& [v, coef] : row.terms()) tg.emplace_back(mg, v, -coef);
        hvals.push_back(row.constant());
        ++mg;
      }
    }
    st.orig.push_back(ob);
  }
  st.A.resize(ma, st.n);
  st.A.setFromTriplets(ta.begin(), ta.end());
  st.b = Eigen::Map<VectorXd>(bvals.data(), ma);
  st.G.resize(mg, st.n);
  st.G.setFromTriplets(tg.begin(), tg.end());
  st.h = Eigen::Map<VectorXd>(hvals.data(), mg);

  st.A0 = st.A;
  st.G0 = st.G;
  st.b0 = st.b;
  st.h0 = st.h;
  st.c0 = st.c;

  // Ruiz equilibration; SOC/PSD blocks get one uniform row scale so that the
  // scaled rows still describe the same cone.
  st.col_scale = VectorXd::Ones(st.n);
  st.rowA_scale = VectorXd::Ones(ma);
  st.rowG_scale = VectorXd::Ones(mg);
  auto clamp_scale = [](double v) {
    return std::min(1e6, std::max(1e-6, v));
  };
  for (int pass = 0; pass < 3; ++pass) {
    VectorXd ra = VectorXd::Zero(ma), rg = VectorXd::Zero(mg),
             cc = VectorXd::Zero(st.n);
    for (int k = 0; k < st.A.outerSize(); ++k)
      for (SpMat::InnerIterator it(st.A, k); it; ++it) {
        const double a = std::abs(it.value());
        ra(it.row()) = std::max(ra(it.row()), a);
        cc(it.col()) = std::max(cc(it.col()), a);
      }
    for (int k = 0; k < st.G.outerSize(); ++k)
      for (SpMatRow::InnerIterator it(st.G, k); it; ++it) {
        const double a = std::abs(it.value());
        rg(it.row()) = std::max(rg(it.row()), a);
        cc(it.col()) = std::max(cc(it.col()), a);
      }
    // uniform within SOC/PSD blocks
    int off = 0;
    for (const auto& cone : st.cones) {
      const int s = cone.slots();
      if (cone.kind != ConeKind::NonNegOrthant) {
        const double m = rg.segment(off, s).maxCoeff();
        rg.segment(off, s).setConstant(m);
      }
      off += s;
    }
    auto apply = [&](double m) {
      return m > 0 ? 1.0 / clamp_scale(std::sqrt(m)) : 1.0;
    };
    VectorXd dra(ma), drg(mg), dcc(st.n);
    for (int i = 0; i < ma; ++i) dra(i) = apply(ra(i));
    for (int i = 0; i < mg; ++i) drg(i) = apply(rg(i));
    for (int i = 0; i < st.n; ++i) dcc(i) = apply(cc(i));
    st.A = dra.asDiagonal() * st.A * dcc.asDiagonal();
    st.G = drg.asDiagonal() * st.G * dcc.asDiagonal();
    st.b = dra.asDiagonal() * st.b;
    st.h = drg.asDiagonal() * st.h;
    st.c = dcc.asDiagonal() * st.c;
    st.rowA_scale = st.rowA_scale.cwiseProduct(dra);
    st.rowG_scale = st.rowG_scale.cwiseProduct(drg);
    st.col_scale = st.col_scale.cwiseProduct(dcc);
  }
  const double cmax = st.c.size() ? st.c.cwiseAbs().maxCoeff() : 0.0;
  st.obj_scale = cmax > 1.0 ? 1.0 / cmax : 1.0;
  st.c *= st.obj_scale;
  return st;
}

// ---------------------------------------------------------------------------
// Nesterov-Todd scaling
// ---------------------------------------------------------------------------

struct SocScale {
  double eta = 1.0;
  VectorXd wbar;  // J-normalized scaling point
  VectorXd u;     // Jordan square root of wbar
};

struct PsdScale {
  MatrixXd R, Rinv, Q;  // Q = Rinv' * Rinv
};

struct Scaling {
  // full-length per-slot diagonal for orthant rows: w = sqrt(s/z)
  VectorXd orthant_w;
  std::vector<SocScale> soc;
  std::vector<PsdScale> psd;
  VectorXd lambda;  // scaled point, full length
};

struct ConeLayout {
  struct Entry {
    Cone cone;
    int offset;     // slot offset in G rows
    int soc_index = -1;
    int psd_index = -1;
  };
  std::vector<Entry> entries;
  int total = 0;
  double degree = 0.0;  // Jordan rank

  explicit ConeLayout(const std::vector<Cone>& cones) {
    int off = 0, si = 0, pi = 0;
    for (const auto& c : cones) {
      Entry e{c, off};
      if (c.kind == ConeKind::SecondOrder) e.soc_index = si++;
      if (c.kind == ConeKind::PSD) e.psd_index = pi++;
      entries.push_back(e);
      off += c.slots();
      switch (c.kind) {
        case ConeKind::NonNegOrthant:
          degree += c.dim;
          break;
        case ConeKind::SecondOrder:
          degree += 2;
          break;
        case ConeKind::PSD:
          degree += c.dim;
          break;
        default:
          break;
      }
    }
    total = off;
  }
};

VectorXd cone_identity_full(const ConeLayout& lay) {
  VectorXd e(lay.total);
  for (const auto& en : lay.entries)
    e.segment(en.offset, en.cone.slots()) = cone_identity(en.cone);
  return e;
}

// smallest spectral value, blockwise
double min_eig_block(const Cone& cone, const Eigen::Ref<const VectorXd>& v) {
  switch (cone.kind) {
    case ConeKind::NonNegOrthant:
      return v.minCoeff();
    case ConeKind::SecondOrder:
      return v(0) - (cone.dim > 1 ? v.tail(cone.dim - 1).norm() : 0.0);
    case ConeKind::PSD: {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(v), Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff();
    }
    default:
      return 0.0;
  }
}

double min_eig_full(const ConeLayout& lay, const VectorXd& v) {
  double m = kInf;
  for (const auto& en : lay.entries)
    m = std::min(m, min_eig_block(en.cone, v.segment(en.offset, en.cone.slots())));
  return lay.entries.empty() ? 0.0 : m;
}

// largest step alpha with v + alpha*dv staying in the cone (can be +inf)
double max_step_block(const Cone& cone, const Eigen::Ref<const VectorXd>& v,
                      const Eigen::Ref<const VectorXd>& dv) {
  switch (cone.kind) {
    case ConeKind::NonNegOrthant: {
      double a = kInf;
      for (int i = 0; i < cone.dim; ++i)
        if (dv(i) < 0) a = std::min(a, -v(i) / dv(i));
      return a;
    }
    case ConeKind::SecondOrder: {
      const int k = cone.dim;
      const double d0 = dv(0), v0 = v(0);
      double a = d0 < 0 ? -v0 / d0 : kInf;
      if (k == 1) return a;
      const auto v1 = v.tail(k - 1);
      const auto d1 = dv.tail(k - 1);
      const double qa = d0 * d0 - d1.squaredNorm();
      const double qb = 2.0 * (v0 * d0 - v1.dot(d1));
      const double qc = v0 * v0 - v1.squaredNorm();
      double root = kInf;
      if (std::abs(qa) < 1e-300) {
        if (qb < 0) root = -qc / qb;
      } else {
        const double disc = qb * qb - 4 * qa * qc;
        if (disc >= 0) {
          const double sq = std::sqrt(disc);
          const double r1 = (-qb - sq) / (2 * qa);
          const double r2 = (-qb + sq) / (2 * qa);
          for (double r : {std::min(r1, r2), std::max(r1, r2)})
            if (r > 0) {
              root = r;
              break;
            }
          // upward parabola with positive start and no sign change ahead
          if (qa > 0 && (std::min(r1, r2) > 0) == false && std::max(r1, r2) <= 0)
            root = kInf;
        }
      }
      return std::min(a, root);
    }
    case ConeKind::PSD: {
      const MatrixXd S = smat(v);
      const MatrixXd D = smat(dv);
      Eigen::LLT<MatrixXd> llt(S);
      if (llt.info() != Eigen::Success) return 0.0;
      const MatrixXd L = llt.matrixL();
      MatrixXd T = L.triangularView<Eigen::Lower>().solve(D);
      T = L.triangularView<Eigen::Lower>().solve(T.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues().minCoeff();
      return lmin >= 0 ? kInf : -1.0 / lmin;
    }
    default:
      return kInf;
  }
}

double max_step_full(const ConeLayout& lay, const VectorXd& v, const VectorXd& dv) {
  double a = kInf;
  for (const auto& en : lay.entries)
    a = std::min(a, max_step_block(en.cone, v.segment(en.offset, en.cone.slots()),
                                   dv.segment(en.offset, en.cone.slots())));
  return a;
}

Scaling identity_scaling(const ConeLayout& lay) {
  Scaling sc;
  sc.orthant_w = VectorXd::Ones(lay.total);
  for (const auto& en : lay.entries) {
    if (en.cone.kind == ConeKind::SecondOrder) {
      SocScale s;
      s.eta = 1.0;
      s.wbar = cone_identity(en.cone);
      s.u = s.wbar;
      sc.soc.push_back(std::move(s));
    } else if (en.cone.kind == ConeKind::PSD) {
      PsdScale p;
      p.R = MatrixXd::Identity(en.cone.dim, en.cone.dim);
      p.Rinv = p.R;
      p.Q = p.R;
      sc.psd.push_back(std::move(p));
    }
  }
  sc.lambda = cone_identity_full(lay);
  return sc;
}

bool compute_scaling(const ConeLayout& lay, const VectorXd& s, const VectorXd& z,
                     Scaling& sc) {
  sc.orthant_w = VectorXd::Ones(lay.total);
  sc.soc.clear();
  sc.psd.clear();
  sc.lambda = VectorXd::Zero(lay.total);
  for (const auto& en : lay.entries) {
    const int off = en.offset, sl = en.cone.slots();
    const auto sb = s.segment(off, sl);
    const auto zb = z.segment(off, sl);
    switch (en.cone.kind) {
      case ConeKind::NonNegOrthant: {
        if ((sb.array() <= 0).any() || (zb.array() <= 0).any()) return false;
        sc.orthant_w.segment(off, sl) = (sb.array() / zb.array()).sqrt();
        sc.lambda.segment(off, sl) = (sb.array() * zb.array()).sqrt();
        break;
      }
      case ConeKind::SecondOrder: {
        const int k = en.cone.dim;
        auto jdet = [&](const Eigen::Ref<const VectorXd>& v) {
          return v(0) * v(0) - (k > 1 ? v.tail(k - 1).squaredNorm() : 0.0);
        };
        const double ds = jdet(sb), dz = jdet(zb);
        if (ds <= 0 || dz <= 0 || sb(0) <= 0 || zb(0) <= 0) return false;
        const double sj = std::sqrt(ds), zj = std::sqrt(dz);
        VectorXd sbar = sb / sj, zbar = zb / zj;
        const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
        VectorXd jz = zbar;
        jz.tail(k - 1) = -jz.tail(k - 1);
        SocScale ss;
        ss.wbar = (sbar + jz) / (2.0 * gamma);
        ss.eta = std::sqrt(sj / zj);
        const double u0 = std::sqrt((ss.wbar(0) + 1.0) / 2.0);
        ss.u = ss.wbar;
        ss.u(0) = u0;
        ss.u.tail(k - 1) = ss.wbar.tail(k - 1) / (2.0 * u0);
        // lambda = W z = eta * (2 u (u'z) - J z)
        VectorXd lz = zb;
        lz.tail(k - 1) = -lz.tail(k - 1);
        sc.lambda.segment(off, sl) = ss.eta * (2.0 * ss.u * ss.u.dot(zb) - lz);
        sc.soc.push_back(std::move(ss));
        break;
      }
      case ConeKind::PSD: {
        const MatrixXd S = smat(sb), Z = smat(zb);
        Eigen::LLT<MatrixXd> ls(S), lz(Z);
        if (ls.info() != Eigen::Success || lz.info() != Eigen::Success)
          return false;
        const MatrixXd Ls = ls.matrixL();
        const MatrixXd Lz = lz.matrixL();
        Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Ls,
                                       Eigen::ComputeFullU | Eigen::ComputeFullV);
        const VectorXd sig = svd.singularValues();
        if (sig.minCoeff() <= 0) return false;
        PsdScale ps;
        const VectorXd isq = sig.cwiseSqrt().cwiseInverse();
        ps.R = Ls * svd.matrixV() * isq.asDiagonal();
        ps.Rinv = isq.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
        ps.Q = ps.Rinv.transpose() * ps.Rinv;
        sc.lambda.segment(off, sl) = svec(MatrixXd(sig.asDiagonal()));
        sc.psd.push_back(std::move(ps));
        break;
      }
      default:
        break;
    }
  }
  return true;
}

enum class WOp { W, Wt, Winv, Wtinv };

void apply_scaling(const ConeLayout& lay, const Scaling& sc, WOp op,
                   const VectorXd& in, VectorXd& out) {
  out.resize(in.size());
  for (const auto& en : lay.entries) {
    const int off = en.offset, sl = en.cone.slots();
    const auto vb = in.segment(off, sl);
    switch (en.cone.kind) {
      case ConeKind::NonNegOrthant: {
        const auto w = sc.orthant_w.segment(off, sl);
        if (op == WOp::W || op == WOp::Wt)
          out.segment(off, sl) = vb.cwiseProduct(w);
        else
          out.segment(off, sl) = vb.cwiseQuotient(w);
        break;
      }
      case ConeKind::SecondOrder: {
        const auto& ss = sc.soc[en.soc_index];
        const int k = en.cone.dim;
        VectorXd jv = vb;
        jv.tail(k - 1) = -jv.tail(k - 1);
        if (op == WOp::W || op == WOp::Wt) {
          out.segment(off, sl) = ss.eta * (2.0 * ss.u * ss.u.dot(vb) - jv);
        } else {
          // P(u)^{-1} = P(Ju) since det(u) = 1
          VectorXd ju = ss.u;
          ju.tail(k - 1) = -ju.tail(k - 1);
          out.segment(off, sl) = (2.0 * ju * ju.dot(vb) - jv) / ss.eta;
        }
        break;
      }
      case ConeKind::PSD: {
        const auto& ps = sc.psd[en.psd_index];
        const MatrixXd M = smat(vb);
        MatrixXd r;
        switch (op) {
          case WOp::W:
            r = ps.R.transpose() * M * ps.R;
            break;
          case WOp::Wt:
            r = ps.R * M * ps.R.transpose();
            break;
          case WOp::Winv:
            r = ps.Rinv.transpose() * M * ps.Rinv;
            break;
          case WOp::Wtinv:
            r = ps.Rinv * M * ps.Rinv.transpose();
            break;
        }
        out.segment(off, sl) = svec(0.5 * (r + r.transpose()));
        break;
      }
      default:
        out.segment(off, sl) = vb;
    }
  }
}

// (W'W)^{-1} v
void apply_wtw_inv(const ConeLayout& lay, const Scaling& sc, const VectorXd& in,
                   VectorXd& out) {
  out.resize(in.size());
  for (const auto& en : lay.entries) {
    const int off = en.offset, sl = en.cone.slots();
    const auto vb = in.segment(off, sl);
    switch (en.cone.kind) {
      case ConeKind::NonNegOrthant: {
        const auto w = sc.orthant_w.segment(off, sl);
        out.segment(off, sl) = vb.cwiseQuotient(w.cwiseProduct(w));
        break;
      }
      case ConeKind::SecondOrder: {
        const auto& ss = sc.soc[en.soc_index];
        const int k = en.cone.dim;
        VectorXd jw = ss.wbar;
        jw.tail(k - 1) = -jw.tail(k - 1);
        VectorXd jv = vb;
        jv.tail(k - 1) = -jv.tail(k - 1);
        out.segment(off, sl) =
            (2.0 * jw * jw.dot(vb) - jv) / (ss.eta * ss.eta);
        break;
      }
      case ConeKind::PSD: {
        const auto& ps = sc.psd[en.psd_index];
        const MatrixXd M = smat(vb);
        const MatrixXd r = ps.Q * M * ps.Q;
        out.segment(off, sl) = svec(0.5 * (r + r.transpose()));
        break;
      }
      default:
        out.segment(off, sl) = vb;
    }
  }
}

// Jordan product per block
void jordan_mul(const ConeLayout& lay, const VectorXd& a, const VectorXd& b,
                VectorXd& out) {
  out.resize(a.size());
  for (const auto& en : lay.entries) {
    const int off = en.offset, sl = en.cone.slots();
    const auto ab = a.segment(off, sl);
    const auto bb = b.segment(off, sl);
    switch (en.cone.kind) {
      case ConeKind::NonNegOrthant:
        out.segment(off, sl) = ab.cwiseProduct(bb);
        break;
      case ConeKind::SecondOrder: {
        const int k = en.cone.dim;
        out(off) = ab.dot(bb);
        if (k > 1)
          out.segment(off + 1, k - 1) =
              ab(0) * bb.tail(k - 1) + bb(0) * ab.tail(k - 1);
        break;
      }
      case ConeKind::PSD: {
        const MatrixXd A = smat(ab), B = smat(bb);
        out.segment(off, sl) = svec(0.5 * (A * B + B * A));
        break;
      }
      default:
        out.segment(off, sl).setZero();
    }
  }
}

// solve lambda o x = d
void jordan_div_lambda(const ConeLayout& lay, const Scaling& sc, const VectorXd& d,
                       VectorXd& out) {
  out.resize(d.size());
  for (const auto& en : lay.entries) {
    const int off = en.offset, sl = en.cone.slots();
    const auto db = d.segment(off, sl);
    const auto lb = sc.lambda.segment(off, sl);
    switch (en.cone.kind) {
      case ConeKind::NonNegOrthant:
        out.segment(off, sl) = db.cwiseQuotient(lb);
        break;
      case ConeKind::SecondOrder: {
        const int k = en.cone.dim;
        const double det =
            lb(0) * lb(0) - (k > 1 ? lb.tail(k - 1).squaredNorm() : 0.0);
        const double x0 =
            (lb(0) * db(0) - (k > 1 ? lb.tail(k - 1).dot(db.tail(k - 1)) : 0.0)) /
            det;
        out(off) = x0;
        if (k > 1)
          out.segment(off + 1, k - 1) =
              (db.tail(k - 1) - x0 * lb.tail(k - 1)) / lb(0);
        break;
      }
      case ConeKind::PSD: {
        const int k = en.cone.dim;
        // lambda is diagonal in the scaled space
        const MatrixXd D = smat(db);
        const MatrixXd L = smat(lb);
        MatrixXd X(k, k);
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) X(i, j) = 2.0 * D(i, j) / (L(i, i) + L(j, j));
        out.segment(off, sl) = svec(0.5 * (X + X.transpose()));
        break;
      }
      default:
        out.segment(off, sl).setZero();
    }
  }
}

// ---------------------------------------------------------------------------
// KKT machinery: factor [[H + rI, A'], [A, -rI]] with H = G'(W'W)^{-1}G
// ---------------------------------------------------------------------------

class Kkt {
 public:
  Kkt(const Standard& st, const ConeLayout& lay, double reg)
      : st_(st), lay_(lay), reg_(reg) {
    setup();
  }

  bool factor(const Scaling& sc);

  // solves the 3x3 system; rx,ry,rz are right-hand sides
  void solve3(const Scaling& sc, const VectorXd& rx, const VectorXd& ry,
              const VectorXd& rz, VectorXd& ux, VectorXd& uy, VectorXd& uz) const;

 private:
  void setup();
  int find_pos(int row, int col) const;  // in compressed K
  void scatter_sym(const std::vector<int>& cols, const MatrixXd& block);

  const Standard& st_;
  const ConeLayout& lay_;
  double reg_;
  int n_ = 0, me_ = 0;

  SpMat K_;  // lower triangle
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;

  // scatter plans
  struct DiagRowPlan {
    int row;                       // G row index
    std::vector<int> pos;          // position in K values
    std::vector<double> coef;      // g_a * g_b products
  };
  std::vector<DiagRowPlan> diag_rows_;        // orthant + soc diagonal parts
  std::vector<double> diag_row_sign_;         // +1, or -1 for soc slot 0

  struct DenseBlockPlan {
    std::vector<int> cols;               // touched variables
    std::vector<int> pos;                // |cols|^2 positions (lower packed)
    MatrixXd gsub;                       // slots x |cols| (psd only)
    int layout_entry;                    // index into lay_.entries
  };
  std::vector<DenseBlockPlan> soc_blocks_;
  std::vector<DenseBlockPlan> psd_blocks_;

  std::vector<int> a_pos_;       // positions of A entries
  std::vector<double> a_val_;
  std::vector<int> diag_pos_x_;  // variable diagonal positions
  std::vector<int> diag_pos_y_;  // equality diagonal positions
};

int Kkt::find_pos(int row, int col) const {
  // lower triangle storage, column-major
  const int* outer = K_.outerIndexPtr();
  const int* inner = K_.innerIndexPtr();
  int lo = outer[col], hi = outer[col + 1];
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (inner[mid] < row)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

void Kkt::setup() {
  n_ = st_.n;
  me_ = static_cast<int>(st_.A.rows());
  const int dim = n_ + me_;

  std::vector<Eigen::Triplet<double>> pattern;
  auto add_p = [&](int r, int c) {
    if (r < c) std::swap(r, c);
    pattern.emplace_back(r, c, 0.0);
  };
  for (int i = 0; i < dim; ++i) add_p(i, i);
  for (int k = 0; k < st_.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(st_.A, k); it; ++it)
      add_p(n_ + static_cast<int>(it.row()), static_cast<int>(it.col()));

  // row plans for orthant rows and soc diagonal parts
  for (const auto& en : lay_.entries) {
    if (en.cone.kind == ConeKind::NonNegOrthant ||
        en.cone.kind == ConeKind::SecondOrder) {
      for (int r = en.offset; r < en.offset + en.cone.slots(); ++r) {
        DiagRowPlan plan;
        plan.row = r;
        std::vector<int> cols;
        for (SpMatRow::InnerIterator it(st_.G, r); it; ++it)
          cols.push_back(static_cast<int>(it.col()));
        for (std::size_t a = 0; a < cols.size(); ++a)
          for (std::size_t b = 0; b <= a; ++b) add_p(cols[a], cols[b]);
        diag_rows_.push_back(std::move(plan));
        diag_row_sign_.push_back(
            en.cone.kind == ConeKind::SecondOrder && r == en.offset ? -1.0 : 1.0);
      }
    }
  }

  auto touched_cols = [&](int offset, int slots) {
    std::vector<int> cols;
    for (int r = offset; r < offset + slots; ++r)
      for (SpMatRow::InnerIterator it(st_.G, r); it; ++it)
        cols.push_back(static_cast<int>(it.col()));
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    return cols;
  };

  for (std::size_t ei = 0; ei < lay_.entries.size(); ++ei) {
    const auto& en = lay_.entries[ei];
    if (en.cone.kind == ConeKind::SecondOrder) {
      DenseBlockPlan plan;
      plan.cols = touched_cols(en.offset, en.cone.slots());
      plan.layout_entry = static_cast<int>(ei);
      for (std::size_t a = 0; a < plan.cols.size(); ++a)
        for (std::size_t b = 0; b <= a; ++b) add_p(plan.cols[a], plan.cols[b]);
      soc_blocks_.push_back(std::move(plan));
    } else if (en.cone.kind == ConeKind::PSD) {
      DenseBlockPlan plan;
      plan.cols = touched_cols(en.offset, en.cone.slots());
      plan.layout_entry = static_cast<int>(ei);
      plan.gsub = MatrixXd::Zero(en.cone.slots(), plan.cols.size());
      for (int r = en.offset; r < en.offset + en.cone.slots(); ++r)
        for (SpMatRow::InnerIterator it(st_.G, r); it; ++it) {
          const auto pos = std::lower_bound(plan.cols.begin(), plan.cols.end(),
                                            static_cast<int>(it.col()));
          plan.gsub(r - en.offset, pos - plan.cols.begin()) = it.value();
        }
      for (std::size_t a = 0; a < plan.cols.size(); ++a)
        for (std::size_t b = 0; b <= a; ++b) add_p(plan.cols[a], plan.cols[b]);
      psd_blocks_.push_back(std::move(plan));
    }
  }

  K_.resize(dim, dim);
  K_.setFromTriplets(pattern.begin(), pattern.end());
  K_.makeCompressed();

  // resolve positions
  for (auto& plan : diag_rows_) {
    std::vector<std::pair<int, double>> entries;
    for (SpMatRow::InnerIterator it(st_.G, plan.row); it; ++it)
      entries.emplace_back(static_cast<int>(it.col()), it.value());
    plan.pos.clear();
    plan.coef.clear();
    for (std::size_t a = 0; a < entries.size(); ++a)
      for (std::size_t b = 0; b <= a; ++b) {
        int r = entries[a].first, c = entries[b].first;
        double coef = entries[a].second * entries[b].second;
        if (r < c) std::swap(r, c);
        plan.pos.push_back(find_pos(r, c));
        plan.coef.push_back(coef);
      }
  }
  auto resolve_block = [&](DenseBlockPlan& plan) {
    const int t = static_cast<int>(plan.cols.size());
    plan.pos.assign(static_cast<std::size_t>(t) * t, -1);
    for (int a = 0; a < t; ++a)
      for (int b = 0; b <= a; ++b) {
        int r = plan.cols[a], c = plan.cols[b];
        if (r < c) std::swap(r, c);
        plan.pos[a * t + b] = find_pos(r, c);
      }
  };
  for (auto& p : soc_blocks_) resolve_block(p);
  for (auto& p : psd_blocks_) resolve_block(p);

  a_pos_.clear();
  a_val_.clear();
  for (int k = 0; k < st_.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(st_.A, k); it; ++it) {
      a_pos_.push_back(find_pos(n_ + static_cast<int>(it.row()),
                                static_cast<int>(it.col())));
      a_val_.push_back(it.value());
    }
  diag_pos_x_.resize(n_);
  for (int i = 0; i < n_; ++i) diag_pos_x_[i] = find_pos(i, i);
  diag_pos_y_.resize(me_);
  for (int j = 0; j < me_; ++j) diag_pos_y_[j] = find_pos(n_ + j, n_ + j);
}

bool Kkt::factor(const Scaling& sc) {
  double* vals = K_.valuePtr();
  std::fill(vals, vals + K_.nonZeros(), 0.0);

  for (std::size_t i = 0; i < a_pos_.size(); ++i) vals[a_pos_[i]] += a_val_[i];

  // diagonal rows: weight 1/w^2 (orthant) or +-1/eta^2 (soc diagonal part)
  {
    std::size_t ri = 0;
    for (const auto& en : lay_.entries) {
      if (en.cone.kind == ConeKind::NonNegOrthant) {
        for (int r = en.offset; r < en.offset + en.cone.slots(); ++r, ++ri) {
          const double w = sc.orthant_w(r);
          const double weight = 1.0 / (w * w);
          const auto& plan = diag_rows_[ri];
          for (std::size_t t = 0; t < plan.pos.size(); ++t)
            vals[plan.pos[t]] += weight * plan.coef[t];
        }
      } else if (en.cone.kind == ConeKind::SecondOrder) {
        const auto& ss = sc.soc[en.soc_index];
        const double ie2 = 1.0 / (ss.eta * ss.eta);
        for (int r = en.offset; r < en.offset + en.cone.slots(); ++r, ++ri) {
          const double weight = (r == en.offset ? -ie2 : ie2);
          const auto& plan = diag_rows_[ri];
          for (std::size_t t = 0; t < plan.pos.size(); ++t)
            vals[plan.pos[t]] += weight * plan.coef[t];
        }
      }
    }
  }

  // soc rank-one corrections: 2/eta^2 (G' Jwbar)(G' Jwbar)'
  for (const auto& plan : soc_blocks_) {
    const auto& en = lay_.entries[plan.layout_entry];
    const auto& ss = sc.soc[en.soc_index];
    const int k = en.cone.dim;
    VectorXd jw = ss.wbar;
    jw.tail(k - 1) = -jw.tail(k - 1);
    const int t = static_cast<int>(plan.cols.size());
    VectorXd u = VectorXd::Zero(t);
    for (int r = 0; r < k; ++r) {
      for (SpMatRow::InnerIterator it(st_.G, en.offset + r); it; ++it) {
        const auto pos = std::lower_bound(plan.cols.begin(), plan.cols.end(),
                                          static_cast<int>(it.col()));
        u(pos - plan.cols.begin()) += jw(r) * it.value();
      }
    }
    const double f = 2.0 / (ss.eta * ss.eta);
    for (int a = 0; a < t; ++a)
      for (int b = 0; b <= a; ++b) vals[plan.pos[a * t + b]] += f * u(a) * u(b);
  }

  // psd dense blocks: Gsub' * congruence(Q) * Gsub
  for (const auto& plan : psd_blocks_) {
    const auto& en = lay_.entries[plan.layout_entry];
    const auto& ps = sc.psd[en.psd_index];
    const int t = static_cast<int>(plan.cols.size());
    const int slots = en.cone.slots();
    MatrixXd Y(slots, t);
    for (int j = 0; j < t; ++j) {
      const MatrixXd M = smat(plan.gsub.col(j));
      const MatrixXd R = ps.Q * M * ps.Q;
      Y.col(j) = svec(0.5 * (R + R.transpose()));
    }
    MatrixXd B = plan.gsub.transpose() * Y;
    B = 0.5 * (B + B.transpose()).eval();
    for (int a = 0; a < t; ++a)
      for (int b = 0; b <= a; ++b) vals[plan.pos[a * t + b]] += B(a, b);
  }

  if (!analyzed_) {
    ldlt_.analyzePattern(K_);
    analyzed_ = true;
  }
  for (int i = 0; i < K_.nonZeros(); ++i)
    if (!std::isfinite(vals[i])) return false;
  // retry with stronger static regularization when the quasidefinite
  // factorization hits a degenerate pivot; refinement recovers the accuracy
  double reg = reg_;
  for (int attempt = 0; attempt < 4; ++attempt) {
    for (int i = 0; i < n_; ++i) vals[diag_pos_x_[i]] += reg;
    for (int j = 0; j < me_; ++j) vals[diag_pos_y_[j]] -= reg;
    ldlt_.factorize(K_);
    if (ldlt_.info() == Eigen::Success) return true;
    for (int i = 0; i < n_; ++i) vals[diag_pos_x_[i]] -= reg;
    for (int j = 0; j < me_; ++j) vals[diag_pos_y_[j]] += reg;
    reg *= 1e3;
  }
  return false;
}

void Kkt::solve3(const Scaling& sc, const VectorXd& rx, const VectorXd& ry,
                 const VectorXd& rz, VectorXd& ux, VectorXd& uy,
                 VectorXd& uz) const {
  VectorXd wz;
  apply_wtw_inv(lay_, sc, rz, wz);
  VectorXd rhs(n_ + me_);
  rhs.head(n_) = rx + st_.G.transpose() * wz;
  rhs.tail(me_) = ry;

  VectorXd sol = ldlt_.solve(rhs);
  // two refinement sweeps against the unregularized operator
  for (int it = 0; it < 2; ++it) {
    VectorXd gx = st_.G * sol.head(n_);
    VectorXd tmp;
    apply_wtw_inv(lay_, sc, gx, tmp);
    VectorXd resid(n_ + me_);
    resid.head(n_) = rhs.head(n_) - st_.G.transpose() * tmp -
                     st_.A.transpose() * sol.tail(me_);
    resid.tail(me_) = rhs.tail(me_) - st_.A * sol.head(n_);
    if (resid.lpNorm<Eigen::Infinity>() < 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
      break;
    sol += ldlt_.solve(resid);
  }

  ux = sol.head(n_);
  uy = sol.tail(me_);
  VectorXd gx = st_.G * ux - rz;
  apply_wtw_inv(lay_, sc, gx, uz);
}

// ---------------------------------------------------------------------------

struct Residuals {
  double pres, dres, gap, relgap, pcost, dcost;
  double pinfres, dinfres;
};

}  // namespace

double default_tol(const ConicProgram& prog) {
  for (const auto& blk : prog.blocks())
    if (blk.cone.kind == ConeKind::PSD) return 1e-7;
  return 1e-8;
}

SolverReport solve(const ConicProgram& prog, const SolveOptions& opts) {
  SolverReport rep;
  if (!prog.well_formed()) {
    rep.status = SolverReport::Status::NumericalFailure;
    rep.message = "program is not well formed";
    return rep;
  }

  Standard st = build_standard(prog);
  const ConeLayout lay(st.cones);
  const int n = st.n;
  const int me = static_cast<int>(st.A.rows());
  const int mi = lay.total;

  // trivial case: nothing to do
  if (n == 0) {
    rep.status = SolverReport::Status::Optimal;
    rep.primal = VectorXd(0);
    rep.objective_value = st.cost_constant;
    rep.dual_objective = st.cost_constant;
    for (const auto& ob : st.orig)
      rep.block_duals.emplace_back(VectorXd::Zero(ob.slots));
    return rep;
  }

  Kkt kkt(st, lay, opts.static_reg);
  const VectorXd e = cone_identity_full(lay);

  // --- initialization (scaling = identity) ---
  Scaling sc = identity_scaling(lay);
  if (!kkt.factor(sc)) {
    rep.status = SolverReport::Status::NumericalFailure;
    rep.message = "initial factorization failed";
    return rep;
  }
  VectorXd x, y, z, s, tmpx, tmpy, tmpz;
  {
    VectorXd zr = VectorXd::Zero(mi);
    kkt.solve3(sc, VectorXd::Zero(n), st.b, st.h, x, y, tmpz);
    s = st.h - st.G * x;
    const double a = mi > 0 ? min_eig_full(lay, s) : 1.0;
    if (a <= 0) s += (1.0 - a) * e;
    kkt.solve3(sc, -st.c, VectorXd::Zero(me), zr, tmpx, y, z);
    const double ad = mi > 0 ? min_eig_full(lay, z) : 1.0;
    if (ad <= 0) z += (1.0 - ad) * e;
  }
  double tau = 1.0, kappa = 1.0;

  const double resx0 = std::max(1.0, st.c0.norm());
  const double resy0 = std::max(1.0, st.b0.norm());
  const double resz0 = std::max(1.0, st.h0.norm());

  auto unscale_x = [&](const VectorXd& v) {
    return VectorXd(st.col_scale.asDiagonal() * v);
  };
  auto unscale_y = [&](const VectorXd& v) {
    return VectorXd(st.rowA_scale.asDiagonal() * v / st.obj_scale);
  };
  auto unscale_z = [&](const VectorXd& v) {
    return VectorXd(st.rowG_scale.asDiagonal() * v / st.obj_scale);
  };
  auto unscale_s = [&](const VectorXd& v) {
    return VectorXd(v.cwiseQuotient(st.rowG_scale));
  };

  auto finish_optimal = [&](const VectorXd& xs, const VectorXd& ys,
                            const VectorXd& zs, const Residuals& r, int iters) {
    rep.status = SolverReport::Status::Optimal;
    rep.primal = xs;
    rep.objective_value =
        (st.maximize ? -1.0 : 1.0) * st.c0.dot(xs) + st.cost_constant;
    const double dualobj = -(st.b0.dot(ys) + st.h0.dot(zs));
    rep.dual_objective =
        (st.maximize ? -1.0 : 1.0) * dualobj + st.cost_constant;
    rep.block_duals.clear();
    for (const auto& ob : st.orig) {
      VectorXd d;
      if (ob.target == 0)
        d = -ys.segment(ob.offset, ob.slots);
      else if (ob.target == 1)
        d = zs.segment(ob.offset, ob.slots);
      else
        d = VectorXd::Zero(ob.slots);
      if (st.maximize) d = -d;
      rep.block_duals.push_back(std::move(d));
    }
    rep.primal_inf = r.pres;
    rep.dual_inf = r.dres;
    rep.gap = r.gap;
    rep.iterations = iters;
    return rep;
  };

  double best_metric = kInf;
  VectorXd bx, by, bz;
  Residuals best_res{};
  int stall_count = 0;
  double last_metric = kInf;

  VectorXd dx(n), dy(me), dz(mi), ds(mi);
  double dtau = 0.0, dkappa = 0.0;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // --- residuals on the original (unequilibrated) data ---
    const VectorXd xo = unscale_x(x), yo = unscale_y(y), zo = unscale_z(z),
                   so = unscale_s(s);
    // homogeneous residuals, original space
    VectorXd rx0 = st.A0.rows() ? VectorXd(st.A0.transpose() * yo) : VectorXd::Zero(n);
    rx0 += st.G0.transpose() * zo + st.c0 * tau;
    VectorXd ry0 = st.A0 * xo - st.b0 * tau;
    VectorXd rz0 = st.G0 * xo + so - st.h0 * tau;

    Residuals r{};
    r.pcost = st.c0.dot(xo) / tau;
    r.dcost = -(st.b0.dot(yo) + st.h0.dot(zo)) / tau;
    r.gap = s.dot(z) / (tau * tau) / st.obj_scale;
    r.relgap = r.gap / std::max({1.0, std::abs(r.pcost), std::abs(r.dcost)});
    r.pres = std::max(ry0.norm() / resy0, rz0.norm() / resz0) / tau;
    r.dres = rx0.norm() / resx0 / tau;

    const double by0hz0 = -(st.b0.dot(yo) + st.h0.dot(zo));
    r.pinfres = kInf;
    r.dinfres = kInf;
    if (by0hz0 > 0) {
      VectorXd cert = rx0 - st.c0 * tau;  // A'y + G'z
      r.pinfres = cert.norm() / resx0 / by0hz0;
    }
    const double cx0 = -st.c0.dot(xo);
    if (cx0 > 0) {
      r.dinfres = std::max((st.A0 * xo).norm() / resy0,
                           (st.G0 * xo + so).norm() / resz0) /
                  cx0;
    }

    if (opts.verbose) {
      std::printf(
          "it %2d  pcost % .6e  dcost % .6e  gap %.2e  pres %.2e  dres %.2e\n",
          iter, r.pcost, r.dcost, r.gap, r.pres, r.dres);
    }

    if (r.pres <= opts.tol && r.dres <= opts.tol &&
        (r.gap <= opts.tol || r.relgap <= opts.tol)) {
      return finish_optimal(xo / tau, yo / tau, zo / tau, r, iter);
    }
    if (r.pinfres <= opts.tol) {
      rep.status = SolverReport::Status::Infeasible;
      rep.message = "primal infeasibility certificate found";
      rep.iterations = iter;
      rep.primal = VectorXd::Zero(n);
      rep.block_duals.clear();
      for (const auto& ob : st.orig) {
        VectorXd d;
        if (ob.target == 0)
          d = -yo.segment(ob.offset, ob.slots) / by0hz0;
        else if (ob.target == 1)
          d = zo.segment(ob.offset, ob.slots) / by0hz0;
        else
          d = VectorXd::Zero(ob.slots);
        rep.block_duals.push_back(std::move(d));
      }
      rep.primal_inf = r.pres;
      rep.dual_inf = r.dres;
      rep.gap = r.gap;
      return rep;
    }
    if (r.dinfres <= opts.tol) {
      rep.status = SolverReport::Status::Unbounded;
      rep.message = "dual infeasibility certificate found (primal unbounded)";
      rep.iterations = iter;
      rep.primal = xo / cx0;  // improving ray
      rep.primal_inf = r.pres;
      rep.dual_inf = r.dres;
      rep.gap = r.gap;
      return rep;
    }

    const double metric = std::max({r.pres, r.dres, std::min(r.gap, r.relgap)});
    if (metric < best_metric) {
      best_metric = metric;
      bx = xo / tau;
      by = yo / tau;
      bz = zo / tau;
      best_res = r;
    }
    // progress toward optimality or toward either certificate
    const double progress = std::min({metric, r.pinfres, r.dinfres});
    if (progress > 0.97 * last_metric)
      ++stall_count;
    else
      stall_count = 0;
    last_metric = progress;
    if (stall_count >= 12) break;

    // --- scaling and factorization ---
    if (!compute_scaling(lay, s, z, sc)) break;
    if (!kkt.factor(sc)) break;

    // residuals of the embedding in scaled space (used for step equations)
    VectorXd rx = st.A.rows() ? VectorXd(st.A.transpose() * y) : VectorXd::Zero(n);
    rx += st.G.transpose() * z + st.c * tau;
    VectorXd ry = st.A * x - st.b * tau;
    VectorXd rz = st.G * x + s - st.h * tau;
    const double rtau = kappa + st.c.dot(x) + st.b.dot(y) + st.h.dot(z);

    // tau-column solve
    VectorXd u1x, u1y, u1z;
    kkt.solve3(sc, -st.c, st.b, st.h, u1x, u1y, u1z);
    const double den =
        st.c.dot(u1x) + st.b.dot(u1y) + st.h.dot(u1z) - kappa / tau;
    if (!(den < 0) || !std::isfinite(den)) break;

    const double mu = (s.dot(z) + tau * kappa) / (lay.degree + 1.0);

    VectorXd lam_sq;
    jordan_mul(lay, sc.lambda, sc.lambda, lam_sq);

    auto direction = [&](const VectorXd& d_vec, double d_kap, double rweight,
                         VectorXd& ox, VectorXd& oy, VectorXd& oz, VectorXd& os,
                         double& otau, double& okap) {
      VectorXd ds_bar;
      jordan_div_lambda(lay, sc, d_vec, ds_bar);
      VectorXd wds;
      apply_scaling(lay, sc, WOp::Wt, ds_bar, wds);
      VectorXd vx, vy, vz;
      kkt.solve3(sc, -rweight * rx, -rweight * ry, -rweight * rz + wds, vx, vy,
                 vz);
      const double num = -rweight * rtau + d_kap / tau - st.c.dot(vx) -
                         st.b.dot(vy) - st.h.dot(vz);
      otau = num / den;
      ox = vx + otau * u1x;
      oy = vy + otau * u1y;
      oz = vz + otau * u1z;
      // ds = -W'(ds_bar + W oz)
      VectorXd woz;
      apply_scaling(lay, sc, WOp::W, oz, woz);
      VectorXd sum = ds_bar + woz;
      apply_scaling(lay, sc, WOp::Wt, sum, os);
      os = -os;
      okap = (-d_kap - kappa * otau) / tau;
    };

    // affine direction
    direction(lam_sq, tau * kappa, 1.0, dx, dy, dz, ds, dtau, dkappa);

    double alpha = std::min({max_step_full(lay, s, ds), max_step_full(lay, z, dz),
                             dtau < 0 ? -tau / dtau : kInf,
                             dkappa < 0 ? -kappa / dkappa : kInf, 1.0});
    alpha = std::min(alpha * 0.99, 1.0);
    // mehrotra centering parameter
    const double gap_now = s.dot(z) + tau * kappa;
    const double gap_aff = (s + alpha * ds).dot(z + alpha * dz) +
                           (tau + alpha * dtau) * (kappa + alpha * dkappa);
    double sigma = std::pow(std::max(0.0, gap_aff / gap_now), 3.0);
    sigma = std::min(1.0, std::max(0.0, sigma));

    // combined direction with mehrotra correction
    VectorXd wdz, wtds, corr;
    apply_scaling(lay, sc, WOp::W, dz, wdz);
    apply_scaling(lay, sc, WOp::Wtinv, ds, wtds);
    jordan_mul(lay, wtds, wdz, corr);
    VectorXd d_vec = lam_sq + corr - sigma * mu * e;
    const double d_kap = tau * kappa + dtau * dkappa - sigma * mu;
    direction(d_vec, d_kap, 1.0 - sigma, dx, dy, dz, ds, dtau, dkappa);

    alpha = std::min({max_step_full(lay, s, ds), max_step_full(lay, z, dz),
                      dtau < 0 ? -tau / dtau : kInf,
                      dkappa < 0 ? -kappa / dkappa : kInf, 1.0 / 0.99});
    alpha = std::min(alpha * 0.99, 1.0);
    if (!std::isfinite(alpha) || alpha <= 1e-10) break;

    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    rep.iterations = iter + 1;
  }

  // did not converge to full tolerance: accept a slightly degraded optimum
  if (best_metric <= opts.accept_slack * opts.tol && bx.size() == n) {
    rep.message = "reduced-accuracy optimum";
    return finish_optimal(bx, by, bz, best_res, rep.iterations);
  }
  rep.status = SolverReport::Status::NumericalFailure;
  rep.message = "no progress (stalled or iteration limit)";
  rep.primal = bx.size() == n ? bx : VectorXd::Zero(n);
  rep.primal_inf = best_res.pres;
  rep.dual_inf = best_res.dres;
  rep.gap = best_res.gap;
  return rep;
}

SolverReport solve(const ConicProgram& prog, double tol) {
  SolveOptions opts;
  opts.tol = tol;
  return solve(prog, opts);
}

SolverReport solve(const ConicProgram& prog) {
  SolveOptions opts;
  opts.tol = default_tol(prog);
  return solve(prog, opts);
}

}  // namespace invopt
