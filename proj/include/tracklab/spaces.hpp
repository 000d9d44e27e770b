#pragma once

// Norms on the finite-dimensional state and control spaces.
//
// Two families are provided: quadratic norms (scale * x^T W x)^{1/2} with an
// SPD weight, and discrete L^q norms on uniform interior grids. Both carry a
// positive scale so that Tikhonov parameters can be folded into the norm
// itself; downstream code only ever sees norms.

#include <cmath>
#include <string>
#include <variant>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "tracklab/errors.hpp"

namespace tracklab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

class WeightedNorm {
 public:
  WeightedNorm(Matrix weight, double scale = 1.0) : weight_(std::move(weight)), scale_(scale) {
    require(weight_.rows() > 0 && weight_.rows() == weight_.cols(),
            "weighted norm: weight matrix must be square and nonempty");
    require(std::isfinite(scale_) && scale_ > 0.0, "weighted norm: scale must be positive");
    const double magnitude = std::max(1.0, weight_.cwiseAbs().maxCoeff());
    require((weight_ - weight_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * magnitude,
            "weighted norm: weight matrix is not symmetric");
    Eigen::LLT<Matrix> llt(weight_);
    require(llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0,
            "weighted norm: weight matrix is not positive definite");
    factor_ = llt.matrixL().transpose();
  }

  static WeightedNorm euclidean(Index dim, double scale = 1.0) {
    return WeightedNorm(Matrix::Identity(dim, dim), scale);
  }

  Index dim() const { return weight_.rows(); }
  const Matrix& weight() const { return weight_; }
  double scale() const { return scale_; }

  double operator()(const Vector& x) const {
    require(x.size() == dim(), "weighted norm: dimension mismatch (got " + std::to_string(x.size()) +
                                   ", expected " + std::to_string(dim()) + ")");
    // ||L^T x|| avoids the cancellation in x^T W x for badly scaled W.
    return std::sqrt(scale_) * (factor_ * x).norm();
  }

  /// Norm multiplied by `factor` (> 0).
  WeightedNorm scaled(double factor) const {
    require(factor > 0.0, "weighted norm: scaling factor must be positive");
    return WeightedNorm(weight_, scale_ * factor * factor);
  }

 private:
  Matrix weight_;
  Matrix factor_;
  double scale_;
};

/// Discrete surrogate for the L^q(0,1) norm: (scale * h * sum |v_i|^q)^{1/q}
/// over interior nodes only (boundary values are zero).
class GridNorm {
 public:
  GridNorm(double h, double q = 2.0, double scale = 1.0) : h_(h), q_(q), scale_(scale) {
    require(std::isfinite(h_) && h_ > 0.0, "grid norm: mesh width must be positive");
    require(std::isfinite(q_) && q_ > 1.0, "grid norm: exponent must lie in (1, inf)");
    require(std::isfinite(scale_) && scale_ > 0.0, "grid norm: scale must be positive");
  }

  double h() const { return h_; }
  double exponent() const { return q_; }
  double scale() const { return scale_; }

  double operator()(const Vector& v) const {
    require(v.size() > 0, "grid norm: empty grid");
    double sum = 0.0;
    if (q_ == 2.0) {
      sum = v.squaredNorm();
    } else {
      for (Index i = 0; i < v.size(); ++i) sum += std::pow(std::abs(v[i]), q_);
    }
    return std::pow(scale_ * h_ * sum, 1.0 / q_);
  }

  GridNorm scaled(double factor) const {
    require(factor > 0.0, "grid norm: scaling factor must be positive");
    return GridNorm(h_, q_, scale_ * std::pow(factor, q_));
  }

 private:
  double h_;
  double q_;
  double scale_;
};

using Norm = std::variant<WeightedNorm, GridNorm>;

inline double weighted_norm(const Vector& x, const WeightedNorm& n) { return n(x); }
inline double grid_norm(const Vector& v, const GridNorm& g) { return g(v); }

inline double norm(const Norm& n, const Vector& x) {
  return std::visit([&](const auto& impl) { return impl(x); }, n);
}

inline Norm scaled(const Norm& n, double factor) {
  return std::visit([&](const auto& impl) -> Norm { return impl.scaled(factor); }, n);
}

/// Dimension the norm expects, or -1 when any length is accepted.
inline Index norm_dim(const Norm& n) {
  if (const auto* w = std::get_if<WeightedNorm>(&n)) return w->dim();
  return -1;
}

/// (ny^p + nu^p)^{1/p}, the p-product norm on Y x U.
inline double product_norm(double ny, double nu, double p) {
  require(p > 1.0 && std::isfinite(p), "product norm: exponent must lie in (1, inf)");
  require(ny >= 0.0 && nu >= 0.0, "product norm: component norms must be nonnegative");
  const double m = std::max(ny, nu);
  if (m == 0.0) return 0.0;
  // Factor out the max so large p does not overflow.
  return m * std::pow(std::pow(ny / m, p) + std::pow(nu / m, p), 1.0 / p);
}

}  // namespace tracklab
