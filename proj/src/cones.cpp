#include "invopt/cones.hpp"

#include <cmath>

namespace invopt {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

std::string cone_kind_name(ConeKind k) {
  switch (k) {
    case ConeKind::NonNegOrthant:
      return "nonneg";
    case ConeKind::SecondOrder:
      return "soc";
    case ConeKind::PSD:
      return "psd";
    case ConeKind::Zero:
      return "zero";
    case ConeKind::Free:
      return "free";
  }
  return "nonneg";
}

ConeKind cone_kind_from_name(const std::string& name) {
  if (name == "nonneg") return ConeKind::NonNegOrthant;
  if (name == "soc") return ConeKind::SecondOrder;
  if (name == "psd") return ConeKind::PSD;
  if (name == "zero") return ConeKind::Zero;
  if (name == "free") return ConeKind::Free;
  throw std::invalid_argument("unknown cone kind: " + name);
}

int total_slots(const std::vector<Cone>& cones) {
  int n = 0;
  for (const auto& c : cones) n += c.slots();
  return n;
}

int svec_dim(int side) { return side * (side + 1) / 2; }

int svec_index(int i, int j, int k) {
  // column-major lower triangle: column j holds entries (j..k-1, j)
  return j * k - j * (j - 1) / 2 + (i - j);
}

double svec_scale(int i, int j) { return i == j ? 1.0 : kSqrt2; }

Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
  const int k = static_cast<int>(m.rows());
  Eigen::VectorXd v(svec_dim(k));
  int idx = 0;
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) v(idx++) = m(i, j) * svec_scale(i, j);
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  const int k = static_cast<int>((std::sqrt(8.0 * n + 1.0) - 1.0) / 2.0 + 0.5);
  Eigen::MatrixXd m(k, k);
  int idx = 0;
  for (int j = 0; j < k; ++j) {
    for (int i = j; i < k; ++i) {
      const double x = v(idx++) / svec_scale(i, j);
      m(i, j) = x;
      m(j, i) = x;
    }
  }
  return m;
}

double cone_violation(const Cone& cone, const Eigen::Ref<const Eigen::VectorXd>& v) {
  switch (cone.kind) {
    case ConeKind::NonNegOrthant:
      return std::max(-v.minCoeff(), 0.0);
    case ConeKind::SecondOrder: {
      const double tail = cone.dim > 1 ? v.tail(cone.dim - 1).norm() : 0.0;
      return std::max(tail - v(0), 0.0);
    }
    case ConeKind::PSD: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(smat(v),
                                                        Eigen::EigenvaluesOnly);
      return std::max(-es.eigenvalues().minCoeff(), 0.0);
    }
    case ConeKind::Zero:
      return v.cwiseAbs().maxCoeff();
    case ConeKind::Free:
      return 0.0;
  }
  return 0.0;
}

Eigen::VectorXd cone_identity(const Cone& cone) {
  switch (cone.kind) {
    case ConeKind::NonNegOrthant:
      return Eigen::VectorXd::Ones(cone.dim);
    case ConeKind::SecondOrder: {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(cone.dim);
      e(0) = 1.0;
      return e;
    }
    case ConeKind::PSD:
      return svec(Eigen::MatrixXd::Identity(cone.dim, cone.dim));
    case ConeKind::Zero:
    case ConeKind::Free:
      return Eigen::VectorXd::Zero(cone.dim);
  }
  return Eigen::VectorXd::Zero(cone.dim);
}

}  // namespace invopt
