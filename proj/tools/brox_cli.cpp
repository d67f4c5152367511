// brox_cli: run, certify and tabulate broximal point experiments.
//
// Exit codes: 0 all applicable certificates pass, 1 certificate failure,
// 2 bad config or arguments, 3 solver failure, 4 counterexample search failure,
// 5 I/O error.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "brox/certify.hpp"
#include "brox/config.hpp"
#include "brox/csv.hpp"
#include "brox/errors.hpp"

namespace fs = std::filesystem;
using namespace brox;

namespace {

enum Exit : int { kOk = 0, kCertFail = 1, kBadInput = 2, kSolverFail = 3, kSearchFail = 4, kIoFail = 5 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

// Maps library exceptions onto the exit-code contract.
template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConvergenceError& e) {
    err << "error: solver did not converge";
    if (e.step() >= 0) err << " at step " << e.step();
    err << ": " << e.what() << '\n';
    return kSolverFail;
  } catch (const NumericError& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return kSolverFail;
  } catch (const SearchFailure& e) {
    err << "error: " << e.what() << '\n';
    return kSearchFail;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFail;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }
}

int write_run_outputs(const fs::path& dir, const Trajectory& traj, const Objective& f) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const CertificateReport report = certify_all(traj, f);
  {
    auto os = open_out(dir / "trajectory.csv");
    write_trajectory_csv(os, traj, f.known_optimum());
  }
  {
    auto os = open_out(dir / "certificates.csv");
    write_certificates_csv(os, report);
  }
  {
    auto os = open_out(dir / "report.txt");
    write_report_text(os, report, traj);
  }
  return report.all_pass() ? kOk : kCertFail;
}

int run_one(const std::string& config_path, const fs::path& out_dir, std::ostream& err) {
  return guarded(err, [&] {
    ExperimentConfig cfg = load_config(config_path);
    apply_env_overrides(cfg);
    const Objective f = build_objective(cfg);
    const Trajectory traj = run_experiment(cfg, f);
    const int code = write_run_outputs(out_dir, traj, f);
    if (code == kCertFail) err << config_path << ": certificate failure, see " << (out_dir / "report.txt") << '\n';
    return code;
  });
}

int cmd_run(const std::vector<std::string>& configs, const std::string& out_flag, int jobs) {
  // One config writes into the output directory itself; several get a
  // subdirectory each, named after the config file.
  std::vector<fs::path> dirs;
  for (const auto& c : configs) {
    fs::path base = out_flag;
    if (base.empty()) {
      std::string cfg_out;
      try {
        cfg_out = load_config(c).out;
      } catch (const std::exception& e) {
        std::cerr << c << ": error: " << e.what() << '\n';
        return kBadInput;
      }
      base = cfg_out.empty() ? fs::path("out") : fs::path(cfg_out);
    }
    dirs.push_back(configs.size() == 1 ? base : base / fs::path(c).stem());
  }

  std::vector<int> codes(configs.size(), kOk);
  std::vector<std::string> messages(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      std::ostringstream err;
      codes[i] = run_one(configs[i], dirs[i], err);
      messages[i] = err.str();
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, jobs));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(n, configs.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (const auto& m : messages) std::cerr << m;
  return *std::max_element(codes.begin(), codes.end());
}

int cmd_certify(const std::string& traj_path, const std::string& config_path, const std::string& out_dir) {
  return guarded(std::cerr, [&] {
    ExperimentConfig cfg = load_config(config_path);
    apply_env_overrides(cfg);
    const Objective f = build_objective(cfg);
    std::ifstream in(traj_path);
    if (!in) throw IoError("cannot open " + traj_path);
    const Trajectory traj =
        read_trajectory_csv(in, build_norm(cfg, f.dimension()), f.label(), parse_method(cfg.method), cfg.brox);
    const CertificateReport report = certify_all(traj, f);
    if (out_dir.empty()) {
      write_certificates_csv(std::cout, report);
    } else {
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      auto csv = open_out(fs::path(out_dir) / "certificates.csv");
      write_certificates_csv(csv, report);
      auto txt = open_out(fs::path(out_dir) / "report.txt");
      write_report_text(txt, report, traj);
    }
    return report.all_pass() ? kOk : kCertFail;
  });
}

// "spectral" without a shape picks m x n with m the largest divisor of d not above sqrt(d);
// "ellipsoid" without a path draws X = B^T B + I from the seed.
NormDescriptor table_norm(const std::string& spec, std::size_t d, std::mt19937_64& rng) {
  if (spec == "spectral") {
    std::size_t m = 1;
    for (std::size_t i = 1; i * i <= d; ++i) {
      if (d % i == 0) m = i;
    }
    return NormDescriptor::spectral(m, d / m);
  }
  if (spec == "ellipsoid") {
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(d);
    Matrix B(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) B(i, j) = normal(rng);
    }
    Matrix X = B.transpose() * B + Matrix::Identity(n, n);
    X = 0.5 * (X + X.transpose());
    return NormDescriptor::ellipsoid(X);
  }
  return parse_norm(spec, d);
}

int cmd_lmo_table(const std::string& dims_text, const std::string& norms_text, std::uint64_t seed, int samples,
                  const std::string& gradient_text, const std::string& out_path) {
  return guarded(std::cerr, [&] {
    std::vector<std::size_t> dims;
    std::vector<Vector> fixed;
    if (!gradient_text.empty()) {
      fixed.push_back(parse_list(gradient_text));
      dims.push_back(static_cast<std::size_t>(fixed.back().size()));
    } else {
      for (const auto& d : split(dims_text, ',')) {
        const long long v = parse_int(d);
        if (v < 1) throw ArgumentError("dimensions must be positive");
        dims.push_back(static_cast<std::size_t>(v));
      }
    }
    if (samples < 1) throw ArgumentError("--samples must be >= 1");

    std::ofstream file;
    if (!out_path.empty()) file = open_out(out_path);
    std::ostream& os = out_path.empty() ? std::cout : file;
    os << "#schema=1\n";
    os << "norm,dim,sample,g,lmo,inner_product,neg_dual_norm,abs_diff\n";
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const auto& spec_raw : split(norms_text, ',')) {
      const std::string spec(trim(spec_raw));
      for (std::size_t d : dims) {
        const NormDescriptor norm = table_norm(spec, d, rng);
        const int count = fixed.empty() ? samples : 1;
        for (int s = 0; s < count; ++s) {
          Vector g(static_cast<Eigen::Index>(d));
          if (!fixed.empty()) {
            g = fixed.front();
          } else {
            for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = normal(rng);
          }
          const Vector u = lmo(norm, g);
          const double ip = g.dot(u);
          const double neg_dual = -dual_norm_value(norm, g);
          os << norm.label() << ',' << d << ',' << s << ',' << format_list(g, ';') << ',' << format_list(u, ';') << ','
             << format_double(ip) << ',' << format_double(neg_dual) << ',' << format_double(std::abs(ip - neg_dual))
             << '\n';
        }
      }
    }
    return kOk;
  });
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ArgumentError("--seeds must look like <begin>:<end>");
  const auto a = parse_int(text.substr(0, colon));
  const auto b = parse_int(text.substr(colon + 1));
  if (a < 0 || b <= a) throw ArgumentError("--seeds needs 0 <= begin < end");
  return {static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b)};
}

int cmd_counterexample(const std::string& seeds, double margin, const std::string& out_flag) {
  return guarded(std::cerr, [&] {
    const auto [begin, end] = parse_seed_range(seeds);
    const Counterexample ce = find_linf_distance_increase(begin, end, margin);
    const fs::path dir = out_flag.empty() ? fs::path("out") : fs::path(out_flag);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());

    ExperimentConfig cfg;
    cfg.problem = "quadratic";
    cfg.eigenvalues = ce.eigenvalues;
    cfg.seed = ce.rotation_seed;
    cfg.xstar = ce.x_star;
    cfg.fstar = ce.f_star;
    cfg.norm = "linf";
    cfg.method = "bpm";
    cfg.radius = RadiusSchedule::constant(ce.radius).to_string();
    cfg.x0 = ce.x0;
    cfg.iters = 30;
    {
      auto os = open_out(dir / "counterexample.cfg");
      os << "# l-inf broximal step that moves away from x* (found at seed " << ce.seed << ")\n";
      os << serialize_config(cfg);
    }
    {
      auto os = open_out(dir / "counterexample.csv");
      os << "#schema=1\n";
      os << "seed,lambda1,lambda2,a11,a12,a21,a22,x0_0,x0_1,t,x1_0,x1_1,dist0,dist1\n";
      os << ce.seed << ',' << format_list(ce.eigenvalues) << ',' << format_double(ce.A(0, 0)) << ','
         << format_double(ce.A(0, 1)) << ',' << format_double(ce.A(1, 0)) << ',' << format_double(ce.A(1, 1)) << ','
         << format_list(ce.x0) << ',' << format_double(ce.radius) << ',' << format_list(ce.x1) << ','
         << format_double(ce.dist0) << ',' << format_double(ce.dist1) << '\n';
    }
    const Objective f = build_objective(cfg);
    const Trajectory traj = run_experiment(cfg, f);
    std::cout << fmt::format("seed {}: ||x0 - x*||_inf = {:.6g}, ||x1 - x*||_inf = {:.6g} (ratio {:.4f})\n", ce.seed,
                             ce.dist0, ce.dist1, ce.dist1 / ce.dist0);
    return write_run_outputs(dir, traj, f);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broximal point method experiments and certificates"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string out;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "Run configs and certify the trajectories");
  run->add_option("configs", configs, "Config files")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory (default: the config's 'out' key, else ./out)");
  run->add_option("--jobs", jobs, "Worker threads when several configs are given")->check(CLI::PositiveNumber);

  std::string traj_path, cert_config;
  auto* certify = app.add_subcommand("certify", "Re-certify a trajectory CSV");
  certify->add_option("trajectory", traj_path, "trajectory.csv")->required();
  certify->add_option("config", cert_config, "Config that produced it")->required();
  certify->add_option("--out", out, "Write certificates.csv and report.txt here instead of stdout");

  std::string dims = "2,3", norms = "l1,l2,linf,lp:3,ellipsoid,spectral", gradient, table_out;
  std::uint64_t seed = 0;
  int samples = 3;
  auto* table = app.add_subcommand("lmo-table", "Tabulate LMO outputs with their duality check");
  table->add_option("--dims", dims, "Comma-separated dimensions");
  table->add_option("--norms", norms, "Comma-separated norm specs");
  table->add_option("--seed", seed, "RNG seed for gradients");
  table->add_option("--samples", samples, "Random gradients per (norm, dim)");
  table->add_option("--gradient", gradient, "Use this gradient instead of random ones");
  table->add_option("--out", table_out, "Output CSV (default: stdout)");

  std::string seeds = "0:1000";
  double margin = 0.01;
  auto* counter = app.add_subcommand("counterexample", "Search for an l-inf step that increases the distance to x*");
  counter->add_option("--seeds", seeds, "Seed range <begin>:<end>");
  counter->add_option("--margin", margin, "Required relative distance increase");
  counter->add_option("--out", out, "Output directory (default: ./out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  if (run->parsed()) return cmd_run(configs, out, jobs);
  if (certify->parsed()) return cmd_certify(traj_path, cert_config, out);
  if (table->parsed()) return cmd_lmo_table(dims, norms, seed, samples, gradient, table_out);
  return cmd_counterexample(seeds, margin, out);
}
