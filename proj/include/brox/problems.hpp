#pragma once

// Convex test objectives with exact gradients and, where available, known
// minimizers. All objectives are finite-valued on R^d.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "brox/geometry.hpp"

namespace brox {

struct KnownOptimum {
  Vector x_star;
  double f_star;
};

/// f(x) = 1/2 (x - x_star)^T A (x - x_star) + f_star with A symmetric positive definite.
class Quadratic {
 public:
  /// Validates symmetry (1e-12) and positive definiteness.
  Quadratic(Matrix A, Vector x_star, double f_star);

  const Matrix& A() const noexcept { return A_; }
  const Vector& x_star() const noexcept { return x_star_; }
  double f_star() const noexcept { return f_star_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(A_.rows()); }

  /// Eigenvalues of A, ascending.
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  /// Columns are the eigenvectors matching eigenvalues().
  const Matrix& eigenvectors() const noexcept { return eigenvectors_; }
  double lambda_max() const noexcept { return eigenvalues_[eigenvalues_.size() - 1]; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

 private:
  Matrix A_;
  Vector x_star_;
  double f_star_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
};

/// Type-erased differentiable convex objective.
class Objective {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  /// d -> d^T H d for objectives with constant Hessian H.
  using CurvatureFn = std::function<double(const Vector&)>;

  Objective(std::size_t dim, std::string label, ValueFn value, GradientFn gradient);

  static Objective from_quadratic(Quadratic q, std::string label = "quadratic");

  std::size_t dimension() const noexcept { return dim_; }
  const std::string& label() const noexcept { return label_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  const std::optional<KnownOptimum>& known_optimum() const noexcept { return optimum_; }
  Objective& set_known_optimum(KnownOptimum opt);

  /// Present when f is an SPD quadratic; lets the broximal dispatcher pick an exact solver.
  const Quadratic* quadratic() const noexcept { return quadratic_.get(); }

  /// Present when the Hessian is constant (exact line search along a segment).
  const CurvatureFn& curvature() const noexcept { return curvature_; }
  Objective& set_curvature(CurvatureFn fn);

 private:
  std::size_t dim_;
  std::string label_;
  ValueFn value_;
  GradientFn gradient_;
  std::optional<KnownOptimum> optimum_;
  std::shared_ptr<const Quadratic> quadratic_;
  CurvatureFn curvature_;
};

/// Seeded orthogonal matrix: Q factor of the QR decomposition of a Gaussian
/// d x d matrix, with column signs fixed so that diag(R) > 0.
Matrix random_orthogonal(std::size_t d, std::uint64_t seed);

/// A = Q^T diag(eigenvalues) Q with Q = random_orthogonal(d, rotation_seed).
Quadratic make_quadratic(const Vector& eigenvalues, std::uint64_t rotation_seed, const Vector& x_star,
                         double f_star);

/// f(x) = 1/2 ||M x - y||^2. Known optimum (and the quadratic view) is set when
/// M^T M is nonsingular.
Objective make_least_squares(const Matrix& M, const Vector& y);

/// f(x) = (1/n) sum log(1 + exp(-l_i <m_i, x>)) + ridge/2 ||x||^2 with labels in
/// {-1, +1}. When ridge > 0 the optimum is found by gradient descent down to
/// ||grad f||_2 <= 1e-12.
Objective make_logistic(const Matrix& features, const Vector& labels, double ridge);

}  // namespace brox
