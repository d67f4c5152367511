#pragma once

// Runtime certificates: each convergence inequality of the exact method (and
// the Euclidean distance recursion of the linearized method) is checked step
// by step on a recorded trajectory.
//
// Every check records a raw violation v_k >= 0 and an allowance s_k per step.
// The reported worst step maximizes v_k - s_k, so pass <=> worst_violation <= slack_used.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brox/methods.hpp"

namespace brox {

struct CertificateEntry {
  std::string name;
  bool applicable = true;
  bool pass = true;
  double worst_violation = 0.0;
  int worst_step = -1;
  double slack_used = 0.0;
  int checked_steps = 0;
  int skipped_steps = 0;
  std::string note;
};

struct CertificateReport {
  std::vector<CertificateEntry> entries;
  /// Steps where the distance to x* in the run's norm went up.
  std::vector<int> distance_increases;

  /// True iff every applicable entry passes.
  bool all_pass() const;
  /// Throws ArgumentError for unknown names.
  const CertificateEntry& at(std::string_view name) const;
};

namespace cert {
inline constexpr std::string_view kDescent = "descent";
inline constexpr std::string_view kOneStep = "one_step_optimality";
inline constexpr std::string_view kFvalRate = "fval_rate";
inline constexpr std::string_view kFvalContraction = "fval_contraction";
inline constexpr std::string_view kGradMonotone = "grad_monotone";
inline constexpr std::string_view kGradAverage = "grad_average";
inline constexpr std::string_view kDistance = "distance_recursion";
inline constexpr std::string_view kFiniteConvergence = "finite_convergence";
inline constexpr std::string_view kBoundary = "boundary_law";
inline constexpr std::string_view kAlignment = "kkt_alignment";
inline constexpr std::string_view kCollinearity = "ellipsoid_collinearity";
inline constexpr std::string_view kLinearizedDistance = "linearized_distance";
}  // namespace cert

/// Tolerance of the case split "x* in B(x_k, t_k)": ||x_k - x*|| <= t_k (1 + 1e-9).
inline constexpr double kCaseSplitTol = 1e-9;

/// f_{k+1} <= f_k, allowance 10 tol (1 + |f_k|).
CertificateEntry certify_descent(const Trajectory& traj);

/// Steps whose ball contains x*: f_{k+1} - f* <= 1e-8 (1 + |f*|), or
/// 1e-5 (1 + |f*|) plus the duality gap on Frank-Wolfe steps.
CertificateEntry certify_one_step(const Trajectory& traj, const Vector& x_star, double f_star);

/// f_{k+1} - f* <= (f_k - f*) / (1 + t_k / ||x_{k+1} - x*||), allowance
/// 10 tol (1 + |f_k|). When x_{k+1} = x* the step is checked as f_{k+1} - f* <= allowance.
CertificateEntry certify_fval_rate(const Trajectory& traj, const Vector& x_star, double f_star);

/// f_{k+1} - f* <= (1 - t_k / ||x_k - x*||)(f_k - f*) on steps with t_k < ||x_k - x*||.
CertificateEntry certify_fval_contraction(const Trajectory& traj, const Vector& x_star, double f_star);

/// Dual gradient norm monotonicity (allowance 1e-6 (1 + ||grad f(x_k)||_*)) and,
/// for every prefix K, sum_k t_k ||grad f(x_{k+1})||_* <= f(x_0) - f_ref with
/// f_ref = f* when known, f(x_K) otherwise. Returns {monotone, average}.
std::vector<CertificateEntry> certify_gradient(const Trajectory& traj, std::optional<double> f_star);

/// ||x_{k+1} - x*||^2 <= ||x_k - x*||^2 - t_k^2 (allowance 1e-6 (1 + ||x_k - x*||^2))
/// on steps outside the case split, and the finite-convergence consequence:
/// once sum t_k^2 >= ||x_0 - x*||^2, f - f* <= 1e-10 (1 + |f*|).
/// Both entries are not applicable unless the norm comes from an inner product.
std::vector<CertificateEntry> certify_distance(const Trajectory& traj, const Vector& x_star, double f_star);

/// On steps with x* outside the ball: |step - t_k| <= 1e-6 t_k (1e-3 t_k for
/// Frank-Wolfe) and <-grad f(x_{k+1}), x_{k+1} - x_k> = ||grad f(x_{k+1})||_* step.
/// Ellipsoid runs additionally get grad f(x_{k+1}) = c X (x_k - x_{k+1}), c >= 0.
/// Returns {boundary, alignment, collinearity}.
std::vector<CertificateEntry> certify_boundary_and_kkt(const Trajectory& traj, const Objective& f,
                                                       const Vector& x_star);

/// Linearized Euclidean runs: on steps whose radius satisfies
/// t_k <= <grad f(x_k), x_k - x*> / ||grad f(x_k)||_2, checks
/// ||x_{k+1} - x*||^2 <= ||x_k - x*||^2 - t_k^2 + 1e-9.
CertificateEntry certify_linearized_distance(const Trajectory& traj, const Objective& f, const Vector& x_star);

/// Steps k with ||x_{k+1} - x*|| > ||x_k - x*|| (1 + 1e-12) in the run's norm.
std::vector<int> find_distance_increases(const Trajectory& traj, const Vector& x_star);

/// Every applicable certificate for the trajectory. Certificates that need x*
/// are marked not applicable when f has no known optimum.
CertificateReport certify_all(const Trajectory& traj, const Objective& f);

/// `#schema=1` then `certificate,pass,worst_violation,worst_step,slack`;
/// pass is true/false/n/a.
void write_certificates_csv(std::ostream& os, const CertificateReport& report);
void write_report_text(std::ostream& os, const CertificateReport& report, const Trajectory& traj);

/// An exact l-inf step on a rotated 2-D quadratic that moves away from x*.
struct Counterexample {
  std::uint64_t seed = 0;
  Vector eigenvalues;
  std::uint64_t rotation_seed = 0;
  Matrix A;
  Vector x_star;
  double f_star = 0.0;
  Vector x0;
  double radius = 0.0;
  Vector x1;
  double dist0 = 0.0;  ///< ||x0 - x*||_inf
  double dist1 = 0.0;  ///< ||x1 - x*||_inf
};

/// Scans seeds in [seed_begin, seed_end). Each seed draws a condition number
/// in [10, 100], an x0 in [-2, 2]^2 and t in [0.2, 0.8] ||x0||_inf (x* = 0).
/// Accepts the first instance with dist1 >= (1 + margin) dist0 whose
/// `verify_iters`-step run passes every applicable certificate. Throws
/// SearchFailure when the range is exhausted.
Counterexample find_linf_distance_increase(std::uint64_t seed_begin, std::uint64_t seed_end, double margin = 0.01,
                                           int verify_iters = 30);

}  // namespace brox
