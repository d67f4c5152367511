#include "brox/methods.hpp"

#include <Eigen/SVD>

#include <cmath>

#include <fmt/format.h>

#include "brox/csv.hpp"
#include "brox/errors.hpp"

namespace brox {
namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_start(const Objective& f, const NormDescriptor& norm, const Vector& x0, int K) {
  if (K < 1) throw ArgumentError("iteration budget K must be >= 1");
  if (f.dimension() != norm.dimension() || static_cast<std::size_t>(x0.size()) != f.dimension()) {
    throw ArgumentError(fmt::format("dimension mismatch: objective d={}, norm d={}, x0 d={}", f.dimension(),
                                    norm.dimension(), x0.size()));
  }
  if (!x0.allFinite()) throw ArgumentError("x0 has non-finite entries");
}

IterateRecord make_record(const Objective& f, const NormDescriptor& norm, int k, const Vector& x, const Vector& g) {
  IterateRecord rec;
  rec.k = k;
  rec.x = x;
  rec.f = f.value(x);
  rec.dual_grad_norm = dual_norm_value(norm, g);
  return rec;
}

}  // namespace

RadiusSchedule RadiusSchedule::constant(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ArgumentError(fmt::format("constant radius must be positive, got {}", t));
  return RadiusSchedule(Constant{t});
}

RadiusSchedule RadiusSchedule::explicit_list(std::vector<double> radii) {
  for (double t : radii) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ArgumentError(fmt::format("explicit radius must be positive, got {}", t));
  }
  return RadiusSchedule(Explicit{std::move(radii)});
}

RadiusSchedule RadiusSchedule::polyak() { return RadiusSchedule(Polyak{}); }

double RadiusSchedule::at(int k) const {
  if (const auto* c = std::get_if<Constant>(&rule_)) return c->t;
  if (const auto* e = std::get_if<Explicit>(&rule_)) {
    if (k < 0 || static_cast<std::size_t>(k) >= e->radii.size()) {
      throw ArgumentError(fmt::format("explicit schedule has no radius for step {}", k));
    }
    return e->radii[static_cast<std::size_t>(k)];
  }
  throw ArgumentError("the Polyak radius depends on the iterate; use polyak_radius");
}

void RadiusSchedule::check_length(int steps) const {
  if (const auto* e = std::get_if<Explicit>(&rule_)) {
    if (e->radii.size() < static_cast<std::size_t>(steps)) {
      throw ArgumentError(fmt::format("explicit schedule has {} radii, {} steps requested", e->radii.size(), steps));
    }
  }
}

RadiusSchedule RadiusSchedule::parse(const std::string& spec) {
  const auto s = std::string(trim(spec));
  if (s == "polyak") return polyak();
  if (s.rfind("const:", 0) == 0) return constant(parse_double(s.substr(6)));
  if (s.rfind("explicit:", 0) == 0) {
    const Vector v = parse_list(s.substr(9));
    return explicit_list(std::vector<double>(v.data(), v.data() + v.size()));
  }
  throw ArgumentError("unknown radius schedule: '" + s + "'");
}

std::string RadiusSchedule::to_string() const {
  if (const auto* c = std::get_if<Constant>(&rule_)) return "const:" + format_double(c->t);
  if (const auto* e = std::get_if<Explicit>(&rule_)) {
    return "explicit:" + format_list(Eigen::Map<const Vector>(e->radii.data(), static_cast<Eigen::Index>(e->radii.size())));
  }
  return "polyak";
}

std::string_view to_string(MethodKind kind) { return kind == MethodKind::kBpm ? "bpm" : "linearized"; }

Trajectory run_bpm(const Objective& f, const NormDescriptor& norm, const Vector& x0, const RadiusSchedule& sched,
                   const BroxConfig& cfg, int K, double stop_tol) {
  check_start(f, norm, x0, K);
  if (sched.is_polyak()) throw ArgumentError("the Polyak schedule is only available for Euclidean linearized runs");
  sched.check_length(K);

  Trajectory traj{{}, norm, f.label(), MethodKind::kBpm, cfg};
  const auto& opt = f.known_optimum();
  Vector x = x0;
  for (int k = 0;; ++k) {
    IterateRecord rec = make_record(f, norm, k, x, f.gradient(x));
    if (k == K || (opt && rec.f - opt->f_star <= stop_tol)) {
      traj.iterates.push_back(std::move(rec));
      break;
    }
    const double t = sched.at(k);
    BroxSolution sol;
    try {
      sol = brox(f, Ball(x, t, norm), cfg);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(fmt::format("step {}: {}", k, e.what()), k);
    }
    rec.radius = t;
    rec.step_length = norm_value(norm, sol.point - x);
    rec.brox_path = std::string(to_string(sol.path));
    rec.stationarity_residual = sol.stationarity_residual;
    rec.inner_iterations = sol.inner_iterations;
    traj.iterates.push_back(std::move(rec));
    x = std::move(sol.point);
  }
  return traj;
}

Trajectory run_linearized(const Objective& f, const NormDescriptor& norm, const Vector& x0,
                          const RadiusSchedule& sched, int K) {
  check_start(f, norm, x0, K);
  const auto& opt = f.known_optimum();
  if (sched.is_polyak()) {
    if (norm.kind() != NormKind::kL2) throw ArgumentError("the Polyak schedule requires the l2 norm");
    if (!opt) throw ArgumentError("the Polyak schedule requires a known optimal value");
  }
  sched.check_length(K);

  Trajectory traj{{}, norm, f.label(), MethodKind::kLinearized, BroxConfig{}};
  Vector x = x0;
  for (int k = 0;; ++k) {
    const Vector g = f.gradient(x);
    IterateRecord rec = make_record(f, norm, k, x, g);
    if (k == K || rec.dual_grad_norm <= kLinearizedStopGrad) {
      traj.iterates.push_back(std::move(rec));
      break;
    }
    const double t = sched.is_polyak() ? (rec.f - opt->f_star) / g.norm() : sched.at(k);
    const bool gap_at_rounding = sched.is_polyak() && rec.f - opt->f_star <= kPolyakGapFloor * std::max(1.0, std::abs(rec.f));
    if (!(t > 0.0) || gap_at_rounding) {
      // The Polyak numerator is rounding noise once the gap reaches a few hundred ulps of f.
      traj.iterates.push_back(std::move(rec));
      break;
    }
    Vector next = linearized_step(norm, x, g, t);
    rec.radius = t;
    rec.step_length = norm_value(norm, next - x);
    rec.brox_path = "lmo";
    traj.iterates.push_back(std::move(rec));
    x = std::move(next);
  }
  return traj;
}

Vector linearized_step(const NormDescriptor& norm, const Vector& x, const Vector& g, double t) {
  if (static_cast<std::size_t>(x.size()) != norm.dimension() || g.size() != x.size()) {
    throw ArgumentError("linearized_step: dimension mismatch");
  }
  if (!(t > 0.0)) throw ArgumentError("linearized_step: radius must be positive");
  if (g.isZero(0.0)) return x;

  Vector next = x;
  switch (norm.kind()) {
    case NormKind::kL1: {
      // Gauss-Southwell: move the coordinate with the largest |g_i| (first on ties).
      Eigen::Index i = 0;
      g.cwiseAbs().maxCoeff(&i);
      next[i] -= t * sign(g[i]);
      break;
    }
    case NormKind::kL2:
      next -= (t / g.norm()) * g;
      break;
    case NormKind::kLinf:
      for (Eigen::Index i = 0; i < g.size(); ++i) next[i] -= t * sign(g[i]);
      break;
    case NormKind::kLp: {
      const double q = norm.q();
      const Vector h = g / g.cwiseAbs().maxCoeff();
      double acc = 0.0;
      for (Eigen::Index i = 0; i < h.size(); ++i) acc += std::pow(std::abs(h[i]), q);
      const double denom = std::pow(acc, (q - 1.0) / q);
      for (Eigen::Index i = 0; i < h.size(); ++i) next[i] -= t * sign(h[i]) * std::pow(std::abs(h[i]), q - 1.0) / denom;
      break;
    }
    case NormKind::kEllipsoid: {
      const Vector w = norm.factor().solve(g);
      next -= (t / std::sqrt(g.dot(w))) * w;
      break;
    }
    case NormKind::kSpectral: {
      const auto rows = static_cast<Eigen::Index>(norm.rows());
      const auto cols = static_cast<Eigen::Index>(norm.cols());
      const Matrix G = Eigen::Map<const RowMajorMatrix>(g.data(), rows, cols);
      Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
      if (svd.info() != Eigen::Success) throw NumericError("linearized_step: SVD did not converge");
      const Vector& s = svd.singularValues();
      Eigen::Index rank = 0;
      while (rank < s.size() && s[rank] > 1e-12 * s[0]) ++rank;
      const Matrix UVt = svd.matrixU().leftCols(rank) * svd.matrixV().leftCols(rank).transpose();
      const RowMajorMatrix step = t * UVt;
      next -= Eigen::Map<const Vector>(step.data(), step.size());
      break;
    }
  }
  return next;
}

double polyak_radius(const Objective& f, const Vector& x) {
  const auto& opt = f.known_optimum();
  if (!opt) throw ArgumentError("polyak_radius: objective has no known optimal value");
  const Vector g = f.gradient(x);
  const double gn = g.norm();
  if (gn == 0.0) throw ArgumentError("polyak_radius: gradient vanishes at x");
  return (f.value(x) - opt->f_star) / gn;
}

}  // namespace brox
