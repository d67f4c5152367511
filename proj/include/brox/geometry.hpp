#pragma once

// Norm geometry: primal/dual norms, balls, linear minimization oracles over
// unit balls, normal-cone residuals and the fixed-volume ellipsoid design.
//
// Spectral norms act on vectors of length m*n read as m x n matrices in
// row-major order: entry (i, j) is v[i * n + j].

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

namespace brox {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class NormKind { kL1, kL2, kLinf, kLp, kEllipsoid, kSpectral };

std::string_view to_string(NormKind kind);

/// Immutable description of a norm on R^d. Cheap to copy; ellipsoid data
/// (X, its Cholesky factor and inverse) is shared between copies.
class NormDescriptor {
 public:
  static NormDescriptor l1(std::size_t dim);
  static NormDescriptor l2(std::size_t dim);
  static NormDescriptor linf(std::size_t dim);
  /// Requires 1 < p < inf; p = 1 and p = inf have dedicated variants.
  static NormDescriptor lp(std::size_t dim, double p);
  /// ||v||_X = sqrt(v^T X v). X must be symmetric positive definite.
  static NormDescriptor ellipsoid(const Matrix& X);
  static NormDescriptor spectral(std::size_t rows, std::size_t cols);

  NormKind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return dim_; }
  double p() const noexcept { return p_; }
  /// Hoelder conjugate of p (Lp only).
  double q() const noexcept { return p_ / (p_ - 1.0); }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  /// Ellipsoid accessors; throw ArgumentError for other kinds.
  const Matrix& matrix() const;
  const Matrix& inverse_matrix() const;
  const Eigen::LLT<Matrix>& factor() const;

  /// True for norms induced by an inner product (L2, Ellipsoid).
  bool is_inner_product() const noexcept {
    return kind_ == NormKind::kL2 || kind_ == NormKind::kEllipsoid;
  }

  /// Descriptor of the dual norm. Not available for Spectral (its dual, the
  /// nuclear norm, is not one of the variants); use dual_norm_value instead.
  NormDescriptor dual() const;

  /// Short human-readable label, e.g. "lp:3" or "spectral:2x3".
  std::string label() const;

 private:
  struct EllipsoidData {
    Matrix X;
    Matrix X_inv;
    Eigen::LLT<Matrix> llt;
  };

  NormDescriptor(NormKind kind, std::size_t dim) : kind_(kind), dim_(dim) {}

  NormKind kind_;
  std::size_t dim_;
  double p_ = 2.0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::shared_ptr<const EllipsoidData> ellipsoid_;
};

/// Absolute tolerance on the norm value used by Ball::contains.
inline constexpr double kMembershipTol = 1e-12;

struct Ball {
  Vector center;
  double radius;
  NormDescriptor norm;

  /// Validates dimension and radius > 0.
  Ball(Vector center, double radius, NormDescriptor norm);

  bool contains(const Vector& z, double tol = kMembershipTol) const;
};

double norm_value(const NormDescriptor& n, const Vector& v);
double dual_norm_value(const NormDescriptor& n, const Vector& v);

/// u in argmin_{||z|| <= 1} <g, z>. Satisfies <g, u> = -||g||_* and ||u|| <= 1.
/// lmo(n, 0) is the zero vector. L1 ties pick the smallest index; Spectral uses
/// the reduced SVD truncated at singular values > 1e-12 * sigma_max.
Vector lmo(const NormDescriptor& n, const Vector& g);

/// max(0, t * ||g||_* - <g, u - center>): zero iff g is in the normal cone of
/// the ball at u. Throws ArgumentError if u is outside the ball by more than 1e-9.
double normal_cone_violation(const Ball& b, const Vector& u, const Vector& g);

/// Singular values of v read as a rows x cols row-major matrix, descending.
Vector singular_values(const Vector& v, std::size_t rows, std::size_t cols);

/// Volume of the d-dimensional Euclidean unit ball.
double unit_ball_volume(std::size_t d);

/// Volume of {z : ||z - c||_X <= t}, i.e. t^d det(X)^{-1/2} vol(B_2(0,1)).
double ellipsoid_ball_volume(const Matrix& X, double t);

struct EllipsoidDesign {
  Matrix X;       ///< c1 * P + (I - P)
  double radius;  ///< ||x0 - x_star||_X
};

/// Fixed-volume ellipsoid whose ball around x0 has volume V and passes through
/// x_star. Requires d >= 2 (UnsupportedError otherwise) and x0 != x_star.
EllipsoidDesign design_ellipsoid(const Vector& x0, const Vector& x_star, double volume);

/// Parses "l1" | "l2" | "linf" | "lp:<p>" | "ellipsoid:<csv>" | "spectral:<m>x<n>".
/// Ellipsoid paths are resolved against `base_dir` when relative. `dim` is
/// checked against the spectral shape and the ellipsoid matrix size.
NormDescriptor parse_norm(std::string_view spec, std::size_t dim, const std::string& base_dir = "");

}  // namespace brox
