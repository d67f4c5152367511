#pragma once

// Broximal operator: argmin of f over a norm ball around the current point.
//
// Exact solvers exist for SPD quadratics over l2, ellipsoid, l-inf and l1
// balls. Everything else goes through Frank-Wolfe. A brute-force grid search
// in d <= 3 serves as an independent oracle.

#include <string_view>

#include "brox/geometry.hpp"
#include "brox/problems.hpp"

namespace brox {

enum class BroxPath { kL2Exact, kEllipsoidExact, kBoxCoordinate, kL1ProjectedGradient, kFrankWolfe };

std::string_view to_string(BroxPath path);
/// Inverse of to_string; throws ArgumentError on unknown names.
BroxPath parse_brox_path(std::string_view name);

/// Exact solvers return points that match the true minimizer to tolerance; the
/// Frank-Wolfe path is approximate with its duality gap as the residual.
inline bool is_exact(BroxPath path) { return path != BroxPath::kFrankWolfe; }

struct BroxSolution {
  Vector point;
  /// KKT/normal-cone violation for exact paths, projected-gradient norm for the
  /// box solver, duality gap for Frank-Wolfe.
  double stationarity_residual = 0.0;
  int inner_iterations = 0;
  bool on_boundary = false;
  BroxPath path = BroxPath::kL2Exact;
};

enum class FwStepRule {
  kAuto,       ///< closed-form exact step when the Hessian is constant, line search otherwise
  kOpenLoop,   ///< 2 / (j + 2)
  kLineSearch  ///< bisection on the directional derivative along the segment
};

struct BroxConfig {
  double tol = 1e-12;
  int fw_max_iters = 5000;
  double fw_gap_tol = 1e-12;
  double grid_resolution = 1e-3;
  FwStepRule fw_step = FwStepRule::kAuto;
};

/// Relative tolerance used to flag solutions that sit on the ball boundary.
inline constexpr double kBoundaryRelTol = 1e-9;

/// Trust-region subproblem over a Euclidean ball, solved through the secular
/// equation in the eigenbasis of A: bisection on lambda in
/// [0, ||grad f(center)||/t + lambda_max], switching to safeguarded Newton on
/// 1/||s(lambda)|| - 1/t once the bracket is within a factor 2.
BroxSolution brox_l2_quadratic(const Quadratic& q, const Vector& center, double t, double tol);

/// Maps {||z - c||_X <= t} to a Euclidean ball with y = L^T (z - c), X = L L^T.
BroxSolution brox_ellipsoid_quadratic(const Quadratic& q, const Vector& center, double t, const Matrix& X,
                                      double tol);

/// Box QP over [center - t, center + t] by cyclic exact coordinate minimization
/// with clipping. Budget: 1e5 sweeps.
BroxSolution brox_box_quadratic(const Quadratic& q, const Vector& center, double t, double tol);

/// Projected gradient with step 1 / lambda_max(A) and sort-based projection
/// onto the l1 ball. Budget: 1e5 iterations.
BroxSolution brox_l1_quadratic(const Quadratic& q, const Vector& center, double t, double tol);

/// Euclidean projection of v onto {z : ||z - center||_1 <= t}.
Vector project_l1_ball(const Vector& v, const Vector& center, double t);

/// Conditional gradient over any ball with an LMO. Starts at the center and
/// stops once the duality gap drops to gap_tol; never throws on budget
/// exhaustion (the final gap is reported instead). On l1 and l-inf balls the
/// searched step rules also take away steps.
BroxSolution brox_frank_wolfe(const Objective& f, const Ball& ball, int max_iters, double gap_tol,
                              FwStepRule rule = FwStepRule::kAuto);

/// Grid argmin over the ball's bounding box (half-width t * ||e_i||_* per
/// axis) at the given spacing; grid lines pass through the center.
/// UnsupportedError for d > 3.
Vector brox_bruteforce(const Objective& f, const Ball& ball, double resolution);

/// Picks the exact solver for quadratics over l2/ellipsoid/l-inf/l1 balls and
/// Frank-Wolfe otherwise.
BroxSolution brox(const Objective& f, const Ball& ball, const BroxConfig& cfg);

}  // namespace brox
