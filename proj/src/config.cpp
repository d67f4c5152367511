#include "brox/config.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "brox/csv.hpp"
#include "brox/errors.hpp"

namespace brox {
namespace {

std::uint64_t parse_u64(std::string_view text) {
  const auto t = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ArgumentError("not an unsigned integer: '" + std::string(t) + "'");
  }
  return value;
}

int parse_small_int(std::string_view text, std::string_view key) {
  const long long v = parse_int(text);
  if (v < 1 || v > 100'000'000) throw ArgumentError(fmt::format("{} must be in [1, 1e8], got {}", key, v));
  return static_cast<int>(v);
}

// Drops a trailing '#' comment that is not inside double quotes.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(std::string_view v, int line_no) {
  v = trim(v);
  if (!v.empty() && v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw ArgumentError(fmt::format("line {}: unterminated quote", line_no));
    v = v.substr(1, v.size() - 2);
  }
  return std::string(v);
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string_view to_string(FwStepRule rule) {
  switch (rule) {
    case FwStepRule::kAuto: return "auto";
    case FwStepRule::kOpenLoop: return "open_loop";
    case FwStepRule::kLineSearch: return "line_search";
  }
  return "auto";
}

FwStepRule parse_fw_step(std::string_view name) {
  if (name == "auto") return FwStepRule::kAuto;
  if (name == "open_loop") return FwStepRule::kOpenLoop;
  if (name == "line_search") return FwStepRule::kLineSearch;
  throw ArgumentError("unknown Frank-Wolfe step rule: '" + std::string(name) + "'");
}

MethodKind parse_method(std::string_view name) {
  if (name == "bpm") return MethodKind::kBpm;
  if (name == "linearized") return MethodKind::kLinearized;
  throw ArgumentError("unknown method: '" + std::string(name) + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ArgumentError(fmt::format("line {}: expected key = value", line_no));
    const std::string key(trim(body.substr(0, eq)));
    if (key.empty()) throw ArgumentError(fmt::format("line {}: empty key", line_no));
    if (!kv.emplace(key, unquote(body.substr(eq + 1), line_no)).second) {
      throw ArgumentError(fmt::format("line {}: duplicate key '{}'", line_no, key));
    }
  }

  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  auto take = [&kv](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = std::move(it->second);
    kv.erase(it);
    return v;
  };

  if (auto v = take("problem")) cfg.problem = *v;
  if (auto v = take("eigenvalues")) cfg.eigenvalues = parse_list(*v);
  if (auto v = take("seed")) cfg.seed = parse_u64(*v);
  if (auto v = take("xstar")) cfg.xstar = parse_list(*v);
  if (auto v = take("fstar")) cfg.fstar = parse_double(*v);
  if (auto v = take("matrix")) cfg.matrix = *v;
  if (auto v = take("target")) cfg.target = *v;
  if (auto v = take("features")) cfg.features = *v;
  if (auto v = take("labels")) cfg.labels = *v;
  if (auto v = take("ridge")) cfg.ridge = parse_double(*v);
  if (auto v = take("norm")) cfg.norm = *v;
  if (auto v = take("method")) cfg.method = *v;
  if (auto v = take("radius")) cfg.radius = *v;
  if (auto v = take("x0")) cfg.x0 = parse_list(*v);
  if (auto v = take("iters")) cfg.iters = parse_small_int(*v, "iters");
  if (auto v = take("stop_tol")) cfg.stop_tol = parse_double(*v);
  if (auto v = take("brox.tol")) cfg.brox.tol = parse_double(*v);
  if (auto v = take("brox.fw_max_iters")) cfg.brox.fw_max_iters = parse_small_int(*v, "brox.fw_max_iters");
  if (auto v = take("brox.fw_gap_tol")) cfg.brox.fw_gap_tol = parse_double(*v);
  if (auto v = take("brox.grid_resolution")) cfg.brox.grid_resolution = parse_double(*v);
  if (auto v = take("brox.fw_step")) cfg.brox.fw_step = parse_fw_step(*v);
  if (auto v = take("out")) cfg.out = *v;
  if (!kv.empty()) throw ArgumentError("unknown config key: '" + kv.begin()->first + "'");

  if (cfg.problem == "quadratic") {
    if (cfg.eigenvalues.size() == 0) throw ArgumentError("quadratic problem requires 'eigenvalues'");
  } else if (cfg.problem == "least_squares") {
    if (cfg.matrix.empty() || cfg.target.empty()) throw ArgumentError("least_squares requires 'matrix' and 'target'");
  } else if (cfg.problem == "logistic") {
    if (cfg.features.empty() || cfg.labels.empty()) throw ArgumentError("logistic requires 'features' and 'labels'");
  } else {
    throw ArgumentError("unknown problem: '" + cfg.problem + "'");
  }
  if (cfg.x0.size() == 0) throw ArgumentError("config requires 'x0'");
  if (!(cfg.brox.tol > 0.0)) throw ArgumentError("brox.tol must be positive");
  if (!(cfg.brox.grid_resolution > 0.0)) throw ArgumentError("brox.grid_resolution must be positive");
  if (!(cfg.stop_tol >= 0.0)) throw ArgumentError("stop_tol must be nonnegative");
  parse_method(cfg.method);
  RadiusSchedule::parse(cfg.radius);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::filesystem::path(path).parent_path().string());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string s;
  auto put = [&s](std::string_view key, const std::string& value) { s += fmt::format("{} = {}\n", key, value); };
  put("problem", quoted(cfg.problem));
  if (cfg.problem == "quadratic") {
    put("eigenvalues", format_list(cfg.eigenvalues));
    put("seed", std::to_string(cfg.seed));
    if (cfg.xstar) put("xstar", format_list(*cfg.xstar));
    put("fstar", format_double(cfg.fstar));
  } else if (cfg.problem == "least_squares") {
    put("matrix", quoted(cfg.matrix));
    put("target", quoted(cfg.target));
  } else {
    put("features", quoted(cfg.features));
    put("labels", quoted(cfg.labels));
    put("ridge", format_double(cfg.ridge));
  }
  put("norm", quoted(cfg.norm));
  put("method", quoted(cfg.method));
  put("radius", quoted(cfg.radius));
  put("x0", format_list(cfg.x0));
  put("iters", std::to_string(cfg.iters));
  put("stop_tol", format_double(cfg.stop_tol));
  put("brox.tol", format_double(cfg.brox.tol));
  put("brox.fw_max_iters", std::to_string(cfg.brox.fw_max_iters));
  put("brox.fw_gap_tol", format_double(cfg.brox.fw_gap_tol));
  put("brox.grid_resolution", format_double(cfg.brox.grid_resolution));
  put("brox.fw_step", std::string(to_string(cfg.brox.fw_step)));
  if (!cfg.out.empty()) put("out", quoted(cfg.out));
  return s;
}

void apply_env_overrides(ExperimentConfig& cfg) {
  if (const char* env = std::getenv("BROX_SEED")) cfg.seed = parse_u64(env);
}

Objective build_objective(const ExperimentConfig& cfg) {
  if (cfg.problem == "quadratic") {
    const auto d = cfg.eigenvalues.size();
    const Vector x_star = cfg.xstar ? *cfg.xstar : Vector::Zero(d);
    return Objective::from_quadratic(make_quadratic(cfg.eigenvalues, cfg.seed, x_star, cfg.fstar));
  }
  if (cfg.problem == "least_squares") {
    return make_least_squares(read_matrix_csv(resolve_path(cfg.base_dir, cfg.matrix)),
                              read_vector_csv(resolve_path(cfg.base_dir, cfg.target)));
  }
  if (cfg.problem == "logistic") {
    return make_logistic(read_matrix_csv(resolve_path(cfg.base_dir, cfg.features)),
                         read_vector_csv(resolve_path(cfg.base_dir, cfg.labels)), cfg.ridge);
  }
  throw ArgumentError("unknown problem: '" + cfg.problem + "'");
}

NormDescriptor build_norm(const ExperimentConfig& cfg, std::size_t dim) { return parse_norm(cfg.norm, dim, cfg.base_dir); }

Trajectory run_experiment(const ExperimentConfig& cfg, const Objective& f) {
  const NormDescriptor norm = build_norm(cfg, f.dimension());
  const RadiusSchedule sched = RadiusSchedule::parse(cfg.radius);
  if (parse_method(cfg.method) == MethodKind::kBpm) {
    return run_bpm(f, norm, cfg.x0, sched, cfg.brox, cfg.iters, cfg.stop_tol);
  }
  return run_linearized(f, norm, cfg.x0, sched, cfg.iters);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::optional<KnownOptimum>& opt) {
  const auto d = traj.iterates.empty() ? 0 : traj.iterates.front().x.size();
  os << "#schema=1\n";
  os << "k,t_k,f,fgap,dual_grad_norm,step_len,dist_l2,dist_norm,inner_iters,residual,path";
  for (Eigen::Index i = 0; i < d; ++i) os << ",x" << i;
  os << '\n';
  for (const auto& r : traj.iterates) {
    std::string fgap, dist_l2, dist_norm;
    if (opt) {
      fgap = format_double(r.f - opt->f_star);
      dist_l2 = format_double((r.x - opt->x_star).norm());
      dist_norm = format_double(norm_value(traj.norm, r.x - opt->x_star));
    }
    os << r.k << ',' << opt_field(r.radius) << ',' << format_double(r.f) << ',' << fgap << ','
       << format_double(r.dual_grad_norm) << ',' << opt_field(r.step_length) << ',' << dist_l2 << ',' << dist_norm
       << ',' << r.inner_iterations << ',' << format_double(r.stationarity_residual) << ',' << r.brox_path;
    for (Eigen::Index i = 0; i < d; ++i) os << ',' << format_double(r.x[i]);
    os << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& is, const NormDescriptor& norm, std::string label, MethodKind method,
                               const BroxConfig& cfg) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "#schema=1") throw ArgumentError("trajectory CSV: missing #schema=1");
  if (!std::getline(is, line)) throw ArgumentError("trajectory CSV: missing header");
  const auto header = split(trim(line), ',');
  constexpr std::size_t kFixed = 11;
  if (header.size() < kFixed + 1 || header[0] != "k" || header[10] != "path" || header[kFixed] != "x0") {
    throw ArgumentError("trajectory CSV: unexpected header");
  }
  const std::size_t d = header.size() - kFixed;
  if (d != norm.dimension()) throw ArgumentError("trajectory CSV: dimension does not match the norm");

  Trajectory traj{{}, norm, std::move(label), method, cfg};
  int row = 2;
  while (std::getline(is, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != header.size()) throw ArgumentError(fmt::format("trajectory CSV: row {} has wrong width", row));
    IterateRecord r;
    r.k = static_cast<int>(parse_int(cells[0]));
    if (!trim(cells[1]).empty()) r.radius = parse_double(cells[1]);
    r.f = parse_double(cells[2]);
    r.dual_grad_norm = parse_double(cells[4]);
    if (!trim(cells[5]).empty()) r.step_length = parse_double(cells[5]);
    r.inner_iterations = static_cast<int>(parse_int(cells[8]));
    r.stationarity_residual = parse_double(cells[9]);
    r.brox_path = std::string(trim(cells[10]));
    r.x.resize(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) r.x[static_cast<Eigen::Index>(i)] = parse_double(cells[kFixed + i]);
    if (r.k != static_cast<int>(traj.iterates.size())) throw ArgumentError("trajectory CSV: steps out of order");
    traj.iterates.push_back(std::move(r));
  }
  if (traj.iterates.empty()) throw ArgumentError("trajectory CSV: no rows");
  for (std::size_t k = 0; k + 1 < traj.iterates.size(); ++k) {
    if (!traj.iterates[k].radius || !traj.iterates[k].step_length) {
      throw ArgumentError(fmt::format("trajectory CSV: step {} lacks t_k or step_len", k));
    }
  }
  return traj;
}

}  // namespace brox
