#include "brox/problems.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "brox/errors.hpp"

namespace brox {
namespace {

constexpr int kLogisticMaxIters = 1'000'000;
constexpr double kLogisticGradTol = 1e-12;

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Quadratic::Quadratic(Matrix A, Vector x_star, double f_star)
    : A_(std::move(A)), x_star_(std::move(x_star)), f_star_(f_star) {
  if (A_.rows() == 0 || A_.rows() != A_.cols()) throw ArgumentError("quadratic: A must be square and nonempty");
  if (x_star_.size() != A_.rows()) throw ArgumentError("quadratic: x_star dimension does not match A");
  if (!A_.allFinite() || !x_star_.allFinite() || !std::isfinite(f_star_)) {
    throw ArgumentError("quadratic: non-finite data");
  }
  const double asym = (A_ - A_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, A_.cwiseAbs().maxCoeff())) {
    throw ArgumentError(fmt::format("quadratic: A is not symmetric (max asymmetry {:.3g})", asym));
  }
  A_ = 0.5 * (A_ + A_.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A_);
  if (eig.info() != Eigen::Success) throw NumericError("quadratic: eigendecomposition failed");
  if (!(eig.eigenvalues()[0] > 0.0)) {
    throw ArgumentError(fmt::format("quadratic: A is not positive definite (lambda_min = {})", eig.eigenvalues()[0]));
  }
  eigenvalues_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();
}

double Quadratic::value(const Vector& x) const {
  // Written out so the grid oracle can call it millions of times without
  // allocating temporaries.
  const Eigen::Index d = A_.rows();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double dj = x[j] - x_star_[j];
    double row = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) row += A_(i, j) * (x[i] - x_star_[i]);
    acc += row * dj;
  }
  return 0.5 * acc + f_star_;
}

Vector Quadratic::gradient(const Vector& x) const { return A_ * (x - x_star_); }

Objective::Objective(std::size_t dim, std::string label, ValueFn value, GradientFn gradient)
    : dim_(dim), label_(std::move(label)), value_(std::move(value)), gradient_(std::move(gradient)) {
  if (dim_ == 0) throw ArgumentError("objective dimension must be positive");
}

Objective Objective::from_quadratic(Quadratic q, std::string label) {
  auto shared = std::make_shared<const Quadratic>(std::move(q));
  Objective f(
      shared->dimension(), std::move(label), [shared](const Vector& x) { return shared->value(x); },
      [shared](const Vector& x) { return shared->gradient(x); });
  f.optimum_ = KnownOptimum{shared->x_star(), shared->f_star()};
  f.curvature_ = [shared](const Vector& d) { return d.dot(shared->A() * d); };
  f.quadratic_ = std::move(shared);
  return f;
}

double Objective::value(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw ArgumentError("objective: dimension mismatch");
  return value_(x);
}

Vector Objective::gradient(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw ArgumentError("objective: dimension mismatch");
  return gradient_(x);
}

Objective& Objective::set_known_optimum(KnownOptimum opt) {
  if (static_cast<std::size_t>(opt.x_star.size()) != dim_) throw ArgumentError("known optimum: dimension mismatch");
  optimum_ = std::move(opt);
  return *this;
}

Objective& Objective::set_curvature(CurvatureFn fn) {
  curvature_ = std::move(fn);
  return *this;
}

Matrix random_orthogonal(std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(d);
  Matrix G(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  }
  return Q;
}

Quadratic make_quadratic(const Vector& eigenvalues, std::uint64_t rotation_seed, const Vector& x_star,
                         double f_star) {
  if (eigenvalues.size() == 0) throw ArgumentError("make_quadratic: no eigenvalues");
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (!(eigenvalues[i] > 0.0)) {
      throw ArgumentError(fmt::format("make_quadratic: eigenvalue {} is not positive", eigenvalues[i]));
    }
  }
  if (x_star.size() != eigenvalues.size()) throw ArgumentError("make_quadratic: x_star dimension mismatch");
  const Matrix Q = random_orthogonal(static_cast<std::size_t>(eigenvalues.size()), rotation_seed);
  Matrix A = Q.transpose() * eigenvalues.asDiagonal() * Q;
  A = 0.5 * (A + A.transpose());
  return Quadratic(std::move(A), x_star, f_star);
}

Objective make_least_squares(const Matrix& M, const Vector& y) {
  if (M.rows() < 1 || M.cols() < 1) throw ArgumentError("least squares: M must be nonempty");
  if (y.size() != M.rows()) {
    throw ArgumentError(fmt::format("least squares: M has {} rows, y has {} entries", M.rows(), y.size()));
  }
  auto data = std::make_shared<const std::pair<Matrix, Vector>>(M, y);
  Objective f(
      static_cast<std::size_t>(M.cols()), "least_squares",
      [data](const Vector& x) { return 0.5 * (data->first * x - data->second).squaredNorm(); },
      [data](const Vector& x) -> Vector { return data->first.transpose() * (data->first * x - data->second); });
  f.set_curvature([data](const Vector& d) { return (data->first * d).squaredNorm(); });

  const Eigen::ColPivHouseholderQR<Matrix> qr(M);
  if (qr.rank() == M.cols()) {
    const Vector x_star = qr.solve(y);
    const double f_star = f.value(x_star);
    Matrix A = M.transpose() * M;
    A = 0.5 * (A + A.transpose());
    // Use the exact quadratic form (and with it the exact broximal solvers)
    // when M^T M is numerically positive definite.
    try {
      return Objective::from_quadratic(Quadratic(A, x_star, f_star), "least_squares");
    } catch (const ArgumentError&) {
      f.set_known_optimum({x_star, f_star});
    }
  }
  return f;
}

Objective make_logistic(const Matrix& features, const Vector& labels, double ridge) {
  if (features.rows() < 1 || features.cols() < 1) throw ArgumentError("logistic: features must be nonempty");
  if (labels.size() != features.rows()) throw ArgumentError("logistic: one label per feature row required");
  if (!(ridge >= 0.0)) throw ArgumentError("logistic: ridge must be nonnegative");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0) {
      throw ArgumentError(fmt::format("logistic: label {} at row {} is not +1 or -1", labels[i], i));
    }
  }
  // Rows pre-multiplied by their labels: margins are (L M) x.
  auto signed_features = std::make_shared<const Matrix>(labels.asDiagonal() * features);
  const double n = static_cast<double>(features.rows());

  auto value = [signed_features, n, ridge](const Vector& x) {
    const Vector margins = *signed_features * x;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < margins.size(); ++i) acc += softplus(-margins[i]);
    return acc / n + 0.5 * ridge * x.squaredNorm();
  };
  auto gradient = [signed_features, n, ridge](const Vector& x) -> Vector {
    const Vector margins = *signed_features * x;
    Vector weights(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) weights[i] = -sigmoid(-margins[i]) / n;
    return signed_features->transpose() * weights + ridge * x;
  };
  Objective f(static_cast<std::size_t>(features.cols()), "logistic", value, gradient);

  if (ridge > 0.0) {
    // Plain gradient descent with step 1/L, L = ||M||_2^2 / (4n) + ridge.
    const Eigen::JacobiSVD<Matrix> svd(*signed_features);
    const double sigma = svd.singularValues()[0];
    const double lipschitz = sigma * sigma / (4.0 * n) + ridge;
    Vector x = Vector::Zero(features.cols());
    Vector g = gradient(x);
    int it = 0;
    while (g.norm() > kLogisticGradTol) {
      if (++it > kLogisticMaxIters) {
        throw ConvergenceError(fmt::format("logistic optimum: gradient descent stalled at ||grad|| = {:.3g}", g.norm()));
      }
      x -= g / lipschitz;
      g = gradient(x);
    }
    f.set_known_optimum({x, value(x)});
  }
  return f;
}

}  // namespace brox
