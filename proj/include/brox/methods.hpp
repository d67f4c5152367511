#pragma once

#include <limits>

// Outer loops: exact broximal point iteration and its linearized (LMO) variant.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "brox/broximal.hpp"
#include "brox/geometry.hpp"
#include "brox/problems.hpp"

namespace brox {

class RadiusSchedule {
 public:
  struct Constant {
    double t;
  };
  struct Explicit {
    std::vector<double> radii;
  };
  /// (f(x_k) - f*) / ||grad f(x_k)||_2; Euclidean linearized runs only.
  struct Polyak {};

  static RadiusSchedule constant(double t);
  static RadiusSchedule explicit_list(std::vector<double> radii);
  static RadiusSchedule polyak();

  bool is_polyak() const noexcept { return std::holds_alternative<Polyak>(rule_); }
  const std::variant<Constant, Explicit, Polyak>& rule() const noexcept { return rule_; }

  /// Radius for step k of a non-Polyak schedule.
  double at(int k) const;

  /// Throws ArgumentError if the schedule cannot supply `steps` radii.
  void check_length(int steps) const;

  /// "const:<t>" | "explicit:<t0>,<t1>,..." | "polyak".
  static RadiusSchedule parse(const std::string& spec);
  std::string to_string() const;

 private:
  explicit RadiusSchedule(std::variant<Constant, Explicit, Polyak> rule) : rule_(std::move(rule)) {}
  std::variant<Constant, Explicit, Polyak> rule_;
};

enum class MethodKind { kBpm, kLinearized };

std::string_view to_string(MethodKind kind);

struct IterateRecord {
  int k = 0;
  Vector x;
  double f = 0.0;
  /// ||grad f(x_k)||_* in the run's norm.
  double dual_grad_norm = 0.0;
  /// t_k and ||x_{k+1} - x_k|| for records that have a successor.
  std::optional<double> radius;
  std::optional<double> step_length;
  /// Path and diagnostics of the step that produced x_{k+1}.
  std::string brox_path;
  double stationarity_residual = 0.0;
  int inner_iterations = 0;
};

struct Trajectory {
  std::vector<IterateRecord> iterates;
  NormDescriptor norm;
  std::string objective_label;
  MethodKind method = MethodKind::kBpm;
  BroxConfig config;
};

/// x_{k+1} = brox(f, B(x_k, t_k), cfg).point for k < K. Stops early once a
/// known f* is reached within stop_tol. Solver convergence errors are rethrown
/// with the step index attached.
Trajectory run_bpm(const Objective& f, const NormDescriptor& norm, const Vector& x0, const RadiusSchedule& sched,
                   const BroxConfig& cfg, int K, double stop_tol);

/// Dual gradient norm below which linearized runs stop (lmo(0) is undefined as a step).
inline constexpr double kLinearizedStopGrad = 1e-12;
/// Polyak runs stop once f - f* <= kPolyakGapFloor * max(1, |f|).
inline constexpr double kPolyakGapFloor = 1e3 * std::numeric_limits<double>::epsilon();

/// x_{k+1} = linearized_step(norm, x_k, grad f(x_k), t_k).
Trajectory run_linearized(const Objective& f, const NormDescriptor& norm, const Vector& x0,
                          const RadiusSchedule& sched, int K);

/// Closed-form minimizer of the linear model over B(x, t): coordinate descent
/// (l1), normalized GD (l2), sign GD (l-inf), the l_p interpolation,
/// x - t X^{-1} g / ||g||_{X^{-1}} (ellipsoid) and x - t U V^T (spectral).
/// Returns x unchanged when g = 0.
Vector linearized_step(const NormDescriptor& norm, const Vector& x, const Vector& g, double t);

/// (f(x) - f*) / ||grad f(x)||_2. ArgumentError without a known f* or at a
/// stationary point.
double polyak_radius(const Objective& f, const Vector& x);

}  // namespace brox
