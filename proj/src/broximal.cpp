#include "brox/broximal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "brox/errors.hpp"

namespace brox {
namespace {

constexpr int kSecularMaxIters = 200;
constexpr int kBoxMaxSweeps = 100'000;
constexpr int kL1MaxIters = 100'000;
constexpr int kLineSearchBisections = 60;

void check_inputs(const Quadratic& q, const Vector& center, double t, double tol) {
  if (static_cast<std::size_t>(center.size()) != q.dimension()) throw ArgumentError("brox: center dimension mismatch");
  if (!(t > 0.0) || !std::isfinite(t)) throw ArgumentError(fmt::format("brox: radius must be positive, got {}", t));
  if (!(tol > 0.0)) throw ArgumentError(fmt::format("brox: tolerance must be positive, got {}", tol));
}

// Stopping threshold on iterate movement: the requested tolerance, floored at
// a few ulps of the iterate so tiny radii far from the origin still terminate.
double movement_threshold(double tol, double t, const Vector& z) {
  return std::max(tol * t, 8.0 * std::numeric_limits<double>::epsilon() * z.cwiseAbs().maxCoeff());
}

double kkt_residual(const NormDescriptor& norm, const Vector& center, double t, const Vector& point,
                    const Vector& grad) {
  const Vector offset = point - center;
  return std::max(0.0, t * dual_norm_value(norm, grad) + grad.dot(offset));
}

bool on_boundary(const NormDescriptor& norm, const Vector& center, double t, const Vector& point) {
  return norm_value(norm, point - center) >= t * (1.0 - kBoundaryRelTol);
}

// Minimizes phi(gamma) = f(z + gamma d) on [0, 1] given phi'(0) < 0.
constexpr double kAtomDropWeight = 1e-12;

double line_search(const Objective& f, const Vector& z, const Vector& d) {
  auto slope = [&](double gamma) { return f.gradient(z + gamma * d).dot(d); };
  if (slope(1.0) <= 0.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < kLineSearchBisections && hi - lo > std::numeric_limits<double>::epsilon(); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  // lo keeps phi' <= 0, so phi(lo) <= phi(0).
  return lo;
}

}  // namespace

std::string_view to_string(BroxPath path) {
  switch (path) {
    case BroxPath::kL2Exact: return "l2_exact";
    case BroxPath::kEllipsoidExact: return "ellipsoid_exact";
    case BroxPath::kBoxCoordinate: return "box_cd";
    case BroxPath::kL1ProjectedGradient: return "l1_pgd";
    case BroxPath::kFrankWolfe: return "frank_wolfe";
  }
  return "?";
}

BroxPath parse_brox_path(std::string_view name) {
  for (auto p : {BroxPath::kL2Exact, BroxPath::kEllipsoidExact, BroxPath::kBoxCoordinate,
                 BroxPath::kL1ProjectedGradient, BroxPath::kFrankWolfe}) {
    if (to_string(p) == name) return p;
  }
  throw ArgumentError("unknown broximal path: '" + std::string(name) + "'");
}

BroxSolution brox_l2_quadratic(const Quadratic& q, const Vector& center, double t, double tol) {
  check_inputs(q, center, t, tol);
  const auto l2 = NormDescriptor::l2(q.dimension());
  BroxSolution sol;
  sol.path = BroxPath::kL2Exact;

  if ((q.x_star() - center).norm() <= t) {
    sol.point = q.x_star();
    sol.on_boundary = on_boundary(l2, center, t, sol.point);
    sol.stationarity_residual = kkt_residual(l2, center, t, sol.point, q.gradient(sol.point));
    return sol;
  }

  // Step s(lambda) = -(A + lambda I)^{-1} g in the eigenbasis: beta = V^T g.
  const Vector g = q.gradient(center);
  const Vector beta = q.eigenvectors().transpose() * g;
  const Vector& lam = q.eigenvalues();
  auto step_norm = [&](double lambda) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) acc += beta[i] * beta[i] / ((lam[i] + lambda) * (lam[i] + lambda));
    return std::sqrt(acc);
  };
  // d/dlambda of 1/||s(lambda)||.
  auto inv_norm_slope = [&](double lambda, double norm) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) acc += beta[i] * beta[i] / std::pow(lam[i] + lambda, 3);
    return acc / (norm * norm * norm);
  };

  double lo = 0.0;
  double hi = g.norm() / t + q.lambda_max();
  double lambda = 0.5 * (lo + hi);
  int it = 0;
  bool converged = false;
  while (it < kSecularMaxIters) {
    ++it;
    const double norm = step_norm(lambda);
    if (std::abs(norm - t) <= tol * t) {
      converged = true;
      break;
    }
    if (norm > t) {
      lo = lambda;
    } else {
      hi = lambda;
    }
    if (lo > 0.0 && hi <= 2.0 * lo) {
      const double phi = 1.0 / norm - 1.0 / t;
      const double newton = lambda - phi / inv_norm_slope(lambda, norm);
      lambda = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
    } else {
      lambda = 0.5 * (lo + hi);
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      // Bracket collapsed to rounding level: lambda is as good as it gets.
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError(fmt::format("brox_l2_quadratic: secular equation not solved in {} iterations", kSecularMaxIters));
  }

  Vector coeffs(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) coeffs[i] = -beta[i] / (lam[i] + lambda);
  Vector s = q.eigenvectors() * coeffs;
  s *= t / s.norm();
  sol.point = center + s;
  sol.inner_iterations = it;
  sol.on_boundary = true;
  sol.stationarity_residual = kkt_residual(l2, center, t, sol.point, q.gradient(sol.point));
  return sol;
}

BroxSolution brox_ellipsoid_quadratic(const Quadratic& q, const Vector& center, double t, const Matrix& X,
                                      double tol) {
  check_inputs(q, center, t, tol);
  if (X.rows() != center.size() || X.cols() != center.size()) throw ArgumentError("brox_ellipsoid: X dimension mismatch");
  const Eigen::LLT<Matrix> llt(X);
  if (llt.info() != Eigen::Success) throw ArgumentError("brox_ellipsoid: X is not positive definite");
  const auto L = llt.matrixL();
  const auto U = llt.matrixU();  // L^T

  // z = c + L^{-T} y  =>  f = 1/2 (y - y*)^T (L^{-1} A L^{-T}) (y - y*) + f*, y* = L^T (x* - c).
  const Matrix half = L.solve(q.A());
  Matrix A_y = L.solve(half.transpose()).transpose();
  A_y = 0.5 * (A_y + A_y.transpose());
  const Vector y_star = U * (q.x_star() - center);
  const Quadratic transformed(A_y, y_star, q.f_star());

  BroxSolution sol = brox_l2_quadratic(transformed, Vector::Zero(center.size()), t, tol);
  sol.point = center + U.solve(sol.point);
  sol.path = BroxPath::kEllipsoidExact;
  const auto norm = NormDescriptor::ellipsoid(X);
  sol.on_boundary = on_boundary(norm, center, t, sol.point);
  sol.stationarity_residual = kkt_residual(norm, center, t, sol.point, q.gradient(sol.point));
  return sol;
}

BroxSolution brox_box_quadratic(const Quadratic& q, const Vector& center, double t, double tol) {
  check_inputs(q, center, t, tol);
  const Matrix& A = q.A();
  const Eigen::Index d = center.size();
  const Vector lower = center.array() - t;
  const Vector upper = center.array() + t;

  Vector z = center;
  int sweeps = 0;
  while (true) {
    if (sweeps >= kBoxMaxSweeps) {
      throw ConvergenceError(fmt::format("brox_box_quadratic: no convergence in {} sweeps", kBoxMaxSweeps));
    }
    ++sweeps;
    // Fresh residual every sweep keeps incremental rounding from accumulating.
    Vector r = A * (z - q.x_star());
    double max_change = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double target = std::clamp(z[i] - r[i] / A(i, i), lower[i], upper[i]);
      const double delta = target - z[i];
      if (delta != 0.0) {
        z[i] = target;
        r += delta * A.col(i);
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change <= movement_threshold(tol, t, z)) break;
  }

  BroxSolution sol;
  sol.path = BroxPath::kBoxCoordinate;
  sol.point = z;
  sol.inner_iterations = sweeps;
  const Vector grad = q.gradient(z);
  const Vector projected = (z - grad).cwiseMax(lower).cwiseMin(upper);
  sol.stationarity_residual = (z - projected).norm();
  sol.on_boundary = on_boundary(NormDescriptor::linf(q.dimension()), center, t, z);
  return sol;
}

Vector project_l1_ball(const Vector& v, const Vector& center, double t) {
  const Vector w = v - center;
  if (w.lpNorm<1>() <= t) return v;
  std::vector<double> mags(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) mags[i] = std::abs(w[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    cumulative += mags[j];
    const double candidate = (cumulative - t) / static_cast<double>(j + 1);
    if (mags[j] - candidate > 0.0) theta = candidate;
  }
  Vector out(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double shrunk = std::max(std::abs(w[i]) - theta, 0.0);
    out[i] = center[i] + (w[i] < 0.0 ? -shrunk : shrunk);
  }
  return out;
}

BroxSolution brox_l1_quadratic(const Quadratic& q, const Vector& center, double t, double tol) {
  check_inputs(q, center, t, tol);
  const double step = 1.0 / q.lambda_max();
  Vector z = center;
  int it = 0;
  while (true) {
    if (it >= kL1MaxIters) {
      throw ConvergenceError(fmt::format("brox_l1_quadratic: no convergence in {} iterations", kL1MaxIters));
    }
    ++it;
    const Vector next = project_l1_ball(z - step * q.gradient(z), center, t);
    const double moved = (next - z).norm();
    z = next;
    if (moved <= movement_threshold(tol, t, z)) break;
  }
  BroxSolution sol;
  sol.path = BroxPath::kL1ProjectedGradient;
  sol.point = z;
  sol.inner_iterations = it;
  const auto l1 = NormDescriptor::l1(q.dimension());
  sol.on_boundary = on_boundary(l1, center, t, z);
  sol.stationarity_residual = kkt_residual(l1, center, t, z, q.gradient(z));
  return sol;
}

BroxSolution brox_frank_wolfe(const Objective& f, const Ball& ball, int max_iters, double gap_tol, FwStepRule rule) {
  if (max_iters < 1) throw ArgumentError("brox_frank_wolfe: max_iters must be >= 1");
  if (f.dimension() != ball.norm.dimension()) throw ArgumentError("brox_frank_wolfe: dimension mismatch");
  enum class Step { kClosedForm, kSearch, kOpenLoop };
  Step step = Step::kOpenLoop;
  if (rule == FwStepRule::kLineSearch) {
    step = Step::kSearch;
  } else if (rule == FwStepRule::kAuto) {
    step = f.curvature() ? Step::kClosedForm : Step::kSearch;
  }

  // On polytope balls (l1, l-inf) the iterate is tracked as a convex
  // combination of LMO atoms so that away steps can drop atoms; plain
  // conditional gradient zigzags there when the solution sits on a face.
  const bool away = step != Step::kOpenLoop &&
                    (ball.norm.kind() == NormKind::kL1 || ball.norm.kind() == NormKind::kLinf);
  std::vector<Vector> atoms{Vector::Zero(ball.center.size())};  // unit-ball coordinates
  std::vector<double> weights{1.0};

  Vector z = ball.center;
  double gap = std::numeric_limits<double>::infinity();
  int j = 0;
  for (; j < max_iters; ++j) {
    const Vector g = f.gradient(z);
    const Vector u = lmo(ball.norm, g);
    const Vector s = ball.center + ball.radius * u;
    gap = g.dot(z - s);
    if (gap <= gap_tol) break;

    Vector d = s - z;
    double gamma_max = 1.0;
    std::size_t away_atom = atoms.size();
    if (away) {
      std::size_t worst = 0;
      for (std::size_t a = 1; a < atoms.size(); ++a) {
        if (g.dot(atoms[a]) > g.dot(atoms[worst])) worst = a;
      }
      const Vector d_away = z - (ball.center + ball.radius * atoms[worst]);
      if (-g.dot(d_away) > gap && weights[worst] < 1.0) {
        d = d_away;
        gamma_max = weights[worst] / (1.0 - weights[worst]);
        away_atom = worst;
      }
    }

    double gamma = 2.0 / (j + 2.0);
    if (step == Step::kClosedForm) {
      const double curv = f.curvature()(d);
      const double descent = -g.dot(d);
      gamma = curv > 0.0 ? std::min(gamma_max, descent / curv) : gamma_max;
    } else if (step == Step::kSearch) {
      gamma = gamma_max * line_search(f, z, gamma_max * d);
    }
    z += gamma * d;

    if (!away) continue;
    const bool away_step = away_atom < atoms.size();
    if (!away_step) {
      for (double& w : weights) w *= 1.0 - gamma;
      std::size_t a = 0;
      while (a < atoms.size() && atoms[a] != u) ++a;
      if (a == atoms.size()) {
        atoms.push_back(u);
        weights.push_back(0.0);
      }
      weights[a] += gamma;
    } else {
      for (double& w : weights) w *= 1.0 + gamma;
      weights[away_atom] -= gamma;
    }
    // Atoms whose weight has decayed to rounding level would otherwise stall
    // the loop with away steps of length ~0.
    for (std::size_t a = atoms.size(); a-- > 0;) {
      if (weights[a] <= kAtomDropWeight || (away_step && gamma == gamma_max && a == away_atom)) {
        atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(a));
        weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(a));
      }
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    Vector w = Vector::Zero(z.size());
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      weights[a] /= total;
      w += weights[a] * atoms[a];
    }
    z = ball.center + ball.radius * w;
  }
  if (j == max_iters) {
    const Vector g = f.gradient(z);
    gap = g.dot(z - ball.center - ball.radius * lmo(ball.norm, g));
  }

  BroxSolution sol;
  sol.path = BroxPath::kFrankWolfe;
  sol.point = z;
  sol.inner_iterations = j;
  sol.stationarity_residual = std::max(0.0, gap);
  sol.on_boundary = on_boundary(ball.norm, ball.center, ball.radius, z);
  return sol;
}

Vector brox_bruteforce(const Objective& f, const Ball& ball, double resolution) {
  const std::size_t d = ball.norm.dimension();
  if (d > 3) throw UnsupportedError(fmt::format("brox_bruteforce: dimension {} > 3", d));
  if (!(resolution > 0.0)) throw ArgumentError("brox_bruteforce: resolution must be positive");
  if (f.dimension() != d) throw ArgumentError("brox_bruteforce: dimension mismatch");

  // Per-axis half-width of the bounding box: max_{||u|| <= t} u_i = t ||e_i||_*.
  std::vector<long long> half_steps(d);
  for (std::size_t i = 0; i < d; ++i) {
    Vector e = Vector::Zero(static_cast<Eigen::Index>(d));
    e[static_cast<Eigen::Index>(i)] = 1.0;
    const double half_width = ball.radius * dual_norm_value(ball.norm, e);
    half_steps[i] = static_cast<long long>(std::floor(half_width / resolution * (1.0 + 1e-12)));
  }

  Vector z = ball.center;
  Vector offset = Vector::Zero(static_cast<Eigen::Index>(d));
  Vector best = ball.center;
  double best_value = f.value(ball.center);
  std::vector<long long> idx(d);
  for (std::size_t i = 0; i < d; ++i) idx[i] = -half_steps[i];
  while (true) {
    for (std::size_t i = 0; i < d; ++i) {
      offset[static_cast<Eigen::Index>(i)] = static_cast<double>(idx[i]) * resolution;
    }
    if (norm_value(ball.norm, offset) <= ball.radius + kMembershipTol) {
      z = ball.center + offset;
      const double v = f.value(z);
      if (v < best_value) {
        best_value = v;
        best = z;
      }
    }
    std::size_t axis = 0;
    while (axis < d && ++idx[axis] > half_steps[axis]) {
      idx[axis] = -half_steps[axis];
      ++axis;
    }
    if (axis == d) break;
  }
  return best;
}

BroxSolution brox(const Objective& f, const Ball& ball, const BroxConfig& cfg) {
  if (f.dimension() != ball.norm.dimension()) throw ArgumentError("brox: objective and ball dimensions differ");
  if (const Quadratic* q = f.quadratic()) {
    switch (ball.norm.kind()) {
      case NormKind::kL2: return brox_l2_quadratic(*q, ball.center, ball.radius, cfg.tol);
      case NormKind::kEllipsoid:
        return brox_ellipsoid_quadratic(*q, ball.center, ball.radius, ball.norm.matrix(), cfg.tol);
      case NormKind::kLinf: return brox_box_quadratic(*q, ball.center, ball.radius, cfg.tol);
      case NormKind::kL1: return brox_l1_quadratic(*q, ball.center, ball.radius, cfg.tol);
      default: break;
    }
  }
  return brox_frank_wolfe(f, ball, cfg.fw_max_iters, cfg.fw_gap_tol, cfg.fw_step);
}

}  // namespace brox
