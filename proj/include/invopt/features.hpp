#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace invopt {

// Feature components are limited to shapes whose conjugates have clean conic
// epigraphs: affine pieces and convex quadratics (SquaredCoordinate is the
// rank-one special case kept as its own tag for the JSON descriptor).
struct AffineFeature {
  Eigen::VectorXd a;
  double b = 0.0;
};

struct SquaredCoordinateFeature {
  int index = 0;
};

struct ConvexQuadraticFeature {
  Eigen::MatrixXd P;  // symmetric PSD
  Eigen::VectorXd r;
};

using FeatureComponent =
    std::variant<AffineFeature, SquaredCoordinateFeature, ConvexQuadraticFeature>;

struct FeatureMap {
  int input_dim = 0;
  std::vector<FeatureComponent> components;
  bool lipschitz_ok = false;

  int size() const { return static_cast<int>(components.size()); }

  double eval_component(int j, const Eigen::VectorXd& x) const;
  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient_component(int j, const Eigen::VectorXd& x) const;

  std::string to_json() const;
  static FeatureMap from_json(const std::string& text);
};

}  // namespace invopt
