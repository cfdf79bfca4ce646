#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace invopt {

enum class ConeKind { NonNegOrthant, SecondOrder, PSD, Zero, Free };

// For PSD, dim is the matrix side length; the block occupies
// dim*(dim+1)/2 scalar slots in scaled lower-triangular vectorization.
struct Cone {
  ConeKind kind = ConeKind::NonNegOrthant;
  int dim = 1;

  Cone() = default;
  Cone(ConeKind k, int d) : kind(k), dim(d) {
    if (d < 1) throw std::invalid_argument("cone dim must be >= 1");
  }

  static Cone nonneg(int d) { return Cone(ConeKind::NonNegOrthant, d); }
  static Cone soc(int d) { return Cone(ConeKind::SecondOrder, d); }
  static Cone psd(int side) { return Cone(ConeKind::PSD, side); }
  static Cone zero(int d) { return Cone(ConeKind::Zero, d); }
  static Cone free(int d) { return Cone(ConeKind::Free, d); }

  int slots() const {
    return kind == ConeKind::PSD ? dim * (dim + 1) / 2 : dim;
  }

  // All cones in the catalog are self-dual except Zero <-> Free.
  Cone dual() const {
    switch (kind) {
      case ConeKind::Zero:
        return Cone(ConeKind::Free, dim);
      case ConeKind::Free:
        return Cone(ConeKind::Zero, dim);
      default:
        return *this;
    }
  }
};

std::string cone_kind_name(ConeKind k);
ConeKind cone_kind_from_name(const std::string& name);

int total_slots(const std::vector<Cone>& cones);

// Scaled lower-triangular vectorization: column-major lower triangle with
// off-diagonal entries multiplied by sqrt(2), so <svec(A), svec(B)> = tr(AB).
Eigen::VectorXd svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd smat(const Eigen::VectorXd& v);
int svec_dim(int side);

// svec slot index of matrix entry (i, j), i >= j, for side-length k.
int svec_index(int i, int j, int k);
// sqrt(2) for off-diagonal entries, 1 on the diagonal.
double svec_scale(int i, int j);

// Signed distance-like violation of v against the cone: 0 when v is inside,
// positive when outside. For the orthant it is max(-min_i v_i, 0), for SOC
// max(||v_1:|| - v_0, 0), for PSD max(-lambda_min, 0), for Zero max|v_i|.
double cone_violation(const Cone& cone, const Eigen::Ref<const Eigen::VectorXd>& v);

// Identity element used for interior initialization and Slater slack
// directions: ones for the orthant, (1,0,..) for SOC, svec(I) for PSD.
Eigen::VectorXd cone_identity(const Cone& cone);

}  // namespace invopt
