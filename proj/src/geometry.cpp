#include "brox/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "brox/csv.hpp"
#include "brox/errors.hpp"

namespace brox {
namespace {

void check_dim(const NormDescriptor& n, const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != n.dimension()) {
    throw ArgumentError(fmt::format("dimension mismatch: norm has d={}, vector has {}", n.dimension(), v.size()));
  }
}

// ||v||_p computed on v / max|v_i| to avoid overflow for large p.
double lp_norm(const Vector& v, double p) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]) / scale, p);
  return scale * std::pow(acc, 1.0 / p);
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Eigen::JacobiSVD<Matrix> spectral_svd(const NormDescriptor& n, const Vector& v, bool with_vectors) {
  if (!v.allFinite()) throw NumericError("SVD input has non-finite entries");
  const Eigen::Map<const RowMajorMatrix> m(v.data(), static_cast<Eigen::Index>(n.rows()),
                                           static_cast<Eigen::Index>(n.cols()));
  const unsigned options = with_vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0u;
  Eigen::JacobiSVD<Matrix> svd(Matrix(m), options);
  if (svd.info() != Eigen::Success) throw NumericError("SVD did not converge");
  return svd;
}

}  // namespace

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::kL1: return "l1";
    case NormKind::kL2: return "l2";
    case NormKind::kLinf: return "linf";
    case NormKind::kLp: return "lp";
    case NormKind::kEllipsoid: return "ellipsoid";
    case NormKind::kSpectral: return "spectral";
  }
  return "?";
}

NormDescriptor NormDescriptor::l1(std::size_t dim) {
  if (dim == 0) throw ArgumentError("norm dimension must be positive");
  return {NormKind::kL1, dim};
}

NormDescriptor NormDescriptor::l2(std::size_t dim) {
  if (dim == 0) throw ArgumentError("norm dimension must be positive");
  return {NormKind::kL2, dim};
}

NormDescriptor NormDescriptor::linf(std::size_t dim) {
  if (dim == 0) throw ArgumentError("norm dimension must be positive");
  return {NormKind::kLinf, dim};
}

NormDescriptor NormDescriptor::lp(std::size_t dim, double p) {
  if (dim == 0) throw ArgumentError("norm dimension must be positive");
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw ArgumentError(fmt::format("lp norm requires 1 < p < inf, got p={}", p));
  }
  NormDescriptor n(NormKind::kLp, dim);
  n.p_ = p;
  return n;
}

NormDescriptor NormDescriptor::ellipsoid(const Matrix& X) {
  if (X.rows() == 0 || X.rows() != X.cols()) throw ArgumentError("ellipsoid matrix must be square and nonempty");
  if (!X.allFinite()) throw ArgumentError("ellipsoid matrix has non-finite entries");
  const double asym = (X - X.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, X.cwiseAbs().maxCoeff())) {
    throw ArgumentError(fmt::format("ellipsoid matrix is not symmetric (max asymmetry {:.3g})", asym));
  }
  auto data = std::make_shared<EllipsoidData>();
  data->X = 0.5 * (X + X.transpose());
  data->llt.compute(data->X);
  if (data->llt.info() != Eigen::Success) throw ArgumentError("ellipsoid matrix is not positive definite");
  const Matrix id = Matrix::Identity(X.rows(), X.cols());
  const Matrix inv = data->llt.solve(id);
  data->X_inv = 0.5 * (inv + inv.transpose());
  NormDescriptor n(NormKind::kEllipsoid, static_cast<std::size_t>(X.rows()));
  n.ellipsoid_ = std::move(data);
  return n;
}

NormDescriptor NormDescriptor::spectral(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw ArgumentError("spectral norm needs positive rows and cols");
  NormDescriptor n(NormKind::kSpectral, rows * cols);
  n.rows_ = rows;
  n.cols_ = cols;
  return n;
}

const Matrix& NormDescriptor::matrix() const {
  if (!ellipsoid_) throw ArgumentError("not an ellipsoid norm");
  return ellipsoid_->X;
}

const Matrix& NormDescriptor::inverse_matrix() const {
  if (!ellipsoid_) throw ArgumentError("not an ellipsoid norm");
  return ellipsoid_->X_inv;
}

const Eigen::LLT<Matrix>& NormDescriptor::factor() const {
  if (!ellipsoid_) throw ArgumentError("not an ellipsoid norm");
  return ellipsoid_->llt;
}

NormDescriptor NormDescriptor::dual() const {
  switch (kind_) {
    case NormKind::kL1: return linf(dim_);
    case NormKind::kL2: return *this;
    case NormKind::kLinf: return l1(dim_);
    case NormKind::kLp: return lp(dim_, q());
    case NormKind::kEllipsoid: return ellipsoid(ellipsoid_->X_inv);
    case NormKind::kSpectral: break;
  }
  throw ArgumentError("the dual of the spectral norm (nuclear norm) has no descriptor");
}

std::string NormDescriptor::label() const {
  switch (kind_) {
    case NormKind::kLp: return fmt::format("lp:{}", p_);
    case NormKind::kSpectral: return fmt::format("spectral:{}x{}", rows_, cols_);
    default: return std::string(to_string(kind_));
  }
}

Ball::Ball(Vector c, double r, NormDescriptor n) : center(std::move(c)), radius(r), norm(std::move(n)) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ArgumentError(fmt::format("ball radius must be positive, got {}", radius));
  check_dim(norm, center);
}

bool Ball::contains(const Vector& z, double tol) const { return norm_value(norm, z - center) <= radius + tol; }

double norm_value(const NormDescriptor& n, const Vector& v) {
  check_dim(n, v);
  switch (n.kind()) {
    case NormKind::kL1: return v.lpNorm<1>();
    case NormKind::kL2: return v.norm();
    case NormKind::kLinf: return v.lpNorm<Eigen::Infinity>();
    case NormKind::kLp: return lp_norm(v, n.p());
    case NormKind::kEllipsoid: return std::sqrt(std::max(0.0, v.dot(n.matrix() * v)));
    case NormKind::kSpectral: {
      if (v.isZero(0.0)) return 0.0;
      return spectral_svd(n, v, false).singularValues()[0];
    }
  }
  return 0.0;
}

double dual_norm_value(const NormDescriptor& n, const Vector& v) {
  check_dim(n, v);
  switch (n.kind()) {
    case NormKind::kL1: return v.lpNorm<Eigen::Infinity>();
    case NormKind::kL2: return v.norm();
    case NormKind::kLinf: return v.lpNorm<1>();
    case NormKind::kLp: return lp_norm(v, n.q());
    case NormKind::kEllipsoid: return std::sqrt(std::max(0.0, v.dot(n.inverse_matrix() * v)));
    case NormKind::kSpectral: {
      if (v.isZero(0.0)) return 0.0;
      return spectral_svd(n, v, false).singularValues().sum();
    }
  }
  return 0.0;
}

Vector lmo(const NormDescriptor& n, const Vector& g) {
  check_dim(n, g);
  Vector u = Vector::Zero(g.size());
  if (g.isZero(0.0)) return u;
  switch (n.kind()) {
    case NormKind::kL1: {
      Eigen::Index i_max = 0;
      // maxCoeff returns the first maximizer, i.e. the smallest index on ties.
      g.cwiseAbs().maxCoeff(&i_max);
      u[i_max] = -sign(g[i_max]);
      return u;
    }
    case NormKind::kL2: return -g / g.norm();
    case NormKind::kLinf: {
      for (Eigen::Index i = 0; i < g.size(); ++i) u[i] = -sign(g[i]);
      return u;
    }
    case NormKind::kLp: {
      const double q = n.q();
      const Vector h = g / g.cwiseAbs().maxCoeff();
      const double denom = std::pow(lp_norm(h, q), q - 1.0);
      for (Eigen::Index i = 0; i < h.size(); ++i) u[i] = -sign(h[i]) * std::pow(std::abs(h[i]), q - 1.0) / denom;
      return u;
    }
    case NormKind::kEllipsoid: {
      const Vector w = n.factor().solve(g);
      return -w / std::sqrt(g.dot(w));
    }
    case NormKind::kSpectral: {
      const auto svd = spectral_svd(n, g, true);
      const Vector& s = svd.singularValues();
      const double cutoff = 1e-12 * s[0];
      Eigen::Index rank = 0;
      while (rank < s.size() && s[rank] > cutoff) ++rank;
      const Matrix uv = svd.matrixU().leftCols(rank) * svd.matrixV().leftCols(rank).transpose();
      Eigen::Map<RowMajorMatrix>(u.data(), uv.rows(), uv.cols()) = -uv;
      return u;
    }
  }
  return u;
}

double normal_cone_violation(const Ball& b, const Vector& u, const Vector& g) {
  check_dim(b.norm, u);
  check_dim(b.norm, g);
  const Vector offset = u - b.center;
  const double dist = norm_value(b.norm, offset);
  if (dist > b.radius + 1e-9) {
    throw ArgumentError(fmt::format("point lies outside the ball: ||u - c|| = {} > t = {}", dist, b.radius));
  }
  return std::max(0.0, b.radius * dual_norm_value(b.norm, g) - g.dot(offset));
}

Vector singular_values(const Vector& v, std::size_t rows, std::size_t cols) {
  const auto n = NormDescriptor::spectral(rows, cols);
  check_dim(n, v);
  return spectral_svd(n, v, false).singularValues();
}

double unit_ball_volume(std::size_t d) {
  const double half = 0.5 * static_cast<double>(d);
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

double ellipsoid_ball_volume(const Matrix& X, double t) {
  const Eigen::LLT<Matrix> llt(X);
  if (llt.info() != Eigen::Success) throw ArgumentError("matrix is not positive definite");
  const auto d = static_cast<std::size_t>(X.rows());
  // det(X)^{-1/2} = 1 / prod(diag(L)).
  const double sqrt_det = llt.matrixL().toDenseMatrix().diagonal().prod();
  return std::pow(t, static_cast<double>(d)) / sqrt_det * unit_ball_volume(d);
}

EllipsoidDesign design_ellipsoid(const Vector& x0, const Vector& x_star, double volume) {
  if (x0.size() != x_star.size()) throw ArgumentError("x0 and x_star differ in dimension");
  const auto d = static_cast<std::size_t>(x0.size());
  if (d < 2) throw UnsupportedError("ellipsoid design needs d >= 2 (exponent 2/(d-1))");
  if (!(volume > 0.0)) throw ArgumentError("target volume must be positive");
  const Vector delta = x0 - x_star;
  const double dist = delta.norm();
  if (dist == 0.0) throw ArgumentError("x0 and x_star must be distinct");

  const double dd = static_cast<double>(d);
  const double c1 = std::pow(volume / (std::pow(dist, dd) * unit_ball_volume(d)), 2.0 / (dd - 1.0));
  const Matrix P = delta * delta.transpose() / (dist * dist);
  const Matrix id = Matrix::Identity(x0.size(), x0.size());
  EllipsoidDesign out;
  out.X = c1 * P + (id - P);
  out.radius = std::sqrt(c1) * dist;
  return out;
}

NormDescriptor parse_norm(std::string_view spec, std::size_t dim, const std::string& base_dir) {
  const auto s = trim(spec);
  const auto colon = s.find(':');
  const auto head = s.substr(0, colon);
  const auto arg = colon == std::string_view::npos ? std::string_view{} : s.substr(colon + 1);
  if (colon == std::string_view::npos) {
    if (head == "l1") return NormDescriptor::l1(dim);
    if (head == "l2") return NormDescriptor::l2(dim);
    if (head == "linf") return NormDescriptor::linf(dim);
  } else if (head == "lp") {
    return NormDescriptor::lp(dim, parse_double(arg));
  } else if (head == "ellipsoid") {
    const Matrix X = read_matrix_csv(resolve_path(base_dir, std::string(arg)));
    if (static_cast<std::size_t>(X.rows()) != dim) {
      throw ArgumentError(fmt::format("ellipsoid matrix is {}x{}, problem dimension is {}", X.rows(), X.cols(), dim));
    }
    return NormDescriptor::ellipsoid(X);
  } else if (head == "spectral") {
    const auto x = arg.find('x');
    if (x == std::string_view::npos) throw ArgumentError("spectral norm spec must be spectral:<m>x<n>");
    const auto m = parse_int(arg.substr(0, x));
    const auto n = parse_int(arg.substr(x + 1));
    if (m <= 0 || n <= 0) throw ArgumentError("spectral shape must be positive");
    if (static_cast<std::size_t>(m * n) != dim) {
      throw ArgumentError(fmt::format("spectral shape {}x{} does not match dimension {}", m, n, dim));
    }
    return NormDescriptor::spectral(static_cast<std::size_t>(m), static_cast<std::size_t>(n));
  }
  throw ArgumentError("unknown norm spec: '" + std::string(spec) + "'");
}

}  // namespace brox
