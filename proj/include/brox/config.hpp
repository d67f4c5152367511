#pragma once

// Flat key = value experiment configs and the versioned trajectory CSV.
//
//   # comment
//   problem = quadratic          # quadratic | least_squares | logistic
//   eigenvalues = 1,100
//   seed = 3
//   norm = "linf"
//
// Values may be wrapped in double quotes. Unknown keys are rejected. Relative
// data paths resolve against the config file's directory.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "brox/broximal.hpp"
#include "brox/methods.hpp"

namespace brox {

struct ExperimentConfig {
  std::string problem = "quadratic";
  // quadratic
  Vector eigenvalues;
  std::uint64_t seed = 0;
  std::optional<Vector> xstar;  ///< defaults to the origin
  double fstar = 0.0;
  // least_squares
  std::string matrix;
  std::string target;
  // logistic
  std::string features;
  std::string labels;
  double ridge = 0.0;

  std::string norm = "l2";
  std::string method = "bpm";
  std::string radius = "const:1";
  Vector x0;
  int iters = 10;
  double stop_tol = 0.0;
  BroxConfig brox;
  std::string out;

  /// Directory used to resolve relative paths; not serialized.
  std::string base_dir;
};

/// Throws ArgumentError on syntax errors, unknown or duplicate keys, and
/// missing required keys.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = "");
ExperimentConfig load_config(const std::string& path);
/// Emits every key with 17 significant digits; parse_config inverts it exactly.
std::string serialize_config(const ExperimentConfig& cfg);
/// BROX_SEED, when set, replaces cfg.seed.
void apply_env_overrides(ExperimentConfig& cfg);

std::string_view to_string(FwStepRule rule);
FwStepRule parse_fw_step(std::string_view name);

Objective build_objective(const ExperimentConfig& cfg);
NormDescriptor build_norm(const ExperimentConfig& cfg, std::size_t dim);
MethodKind parse_method(std::string_view name);

/// Builds the objective and norm and runs the configured method.
Trajectory run_experiment(const ExperimentConfig& cfg, const Objective& f);

/// `#schema=1` header, then
/// k,t_k,f,fgap,dual_grad_norm,step_len,dist_l2,dist_norm,inner_iters,residual,path,x0,...
/// Fields without a value (no successor, unknown optimum) are left empty.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::optional<KnownOptimum>& opt);

/// Rebuilds records from a trajectory CSV written by write_trajectory_csv.
Trajectory read_trajectory_csv(std::istream& is, const NormDescriptor& norm, std::string label, MethodKind method,
                               const BroxConfig& cfg);

}  // namespace brox
