#include "brox/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "brox/csv.hpp"
#include "brox/errors.hpp"

namespace brox {
namespace {

constexpr double kFvalSlackFactor = 10.0;
constexpr double kGapInflation = 10.0;
constexpr double kGradRelSlack = 1e-6;
constexpr double kDistRelSlack = 1e-6;
constexpr double kBoundaryExact = 1e-6;
constexpr double kBoundaryFw = 1e-3;
constexpr double kKktRelSlack = 1e-6;
constexpr double kOneStepExact = 1e-8;
constexpr double kOneStepFw = 1e-5;
constexpr double kFiniteConvSlack = 1e-10;
constexpr double kLinearizedSlack = 1e-9;
// Rounding allowance on the stepsize condition: near x* both sides are tiny
// differences of nearly equal numbers.
constexpr double kStepsizeTol = 1e-9;

// Keeps the step that maximizes violation - allowance.
class Tracker {
 public:
  explicit Tracker(std::string_view name) { entry_.name = std::string(name); }

  void observe(int step, double violation, double allowance) {
    ++entry_.checked_steps;
    const double excess = violation - allowance;
    if (entry_.worst_step < 0 || excess > best_excess_) {
      best_excess_ = excess;
      entry_.worst_step = step;
      entry_.worst_violation = violation;
      entry_.slack_used = allowance;
    }
  }
  void skip() { ++entry_.skipped_steps; }
  int skipped() const { return entry_.skipped_steps; }
  void note(std::string text) { entry_.note = std::move(text); }

  CertificateEntry finish() {
    entry_.pass = entry_.worst_violation <= entry_.slack_used;
    return entry_;
  }

 private:
  CertificateEntry entry_;
  double best_excess_ = -std::numeric_limits<double>::infinity();
};

CertificateEntry not_applicable(std::string_view name, std::string note) {
  CertificateEntry e;
  e.name = std::string(name);
  e.applicable = false;
  e.note = std::move(note);
  return e;
}

bool is_fw(const IterateRecord& r) { return r.brox_path == to_string(BroxPath::kFrankWolfe); }

// Extra allowance for approximate (Frank-Wolfe) steps, scaled from the recorded gap.
double gap_allowance(const IterateRecord& r, double scale = 1.0) {
  return is_fw(r) ? kGapInflation * r.stationarity_residual * scale : 0.0;
}

// Number of records that have a successor.
std::size_t steps(const Trajectory& traj) { return traj.iterates.empty() ? 0 : traj.iterates.size() - 1; }

double dist(const Trajectory& traj, std::size_t k, const Vector& x_star) {
  return norm_value(traj.norm, traj.iterates[k].x - x_star);
}

bool star_in_ball(double d_k, double t_k) { return d_k <= t_k * (1.0 + kCaseSplitTol); }

}  // namespace

bool CertificateReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return !e.applicable || e.pass; });
}

const CertificateEntry& CertificateReport::at(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw ArgumentError(fmt::format("no certificate named '{}'", name));
}

CertificateEntry certify_descent(const Trajectory& traj) {
  if (traj.method != MethodKind::kBpm) return not_applicable(cert::kDescent, "exact method only");
  Tracker tr(cert::kDescent);
  const double tol = traj.config.tol;
  for (std::size_t k = 0; k < steps(traj); ++k) {
    const auto& r = traj.iterates[k];
    const double v = std::max(0.0, traj.iterates[k + 1].f - r.f);
    tr.observe(static_cast<int>(k), v, kFvalSlackFactor * tol * (1.0 + std::abs(r.f)) + gap_allowance(r));
  }
  return tr.finish();
}

CertificateEntry certify_one_step(const Trajectory& traj, const Vector& x_star, double f_star) {
  if (traj.method != MethodKind::kBpm) return not_applicable(cert::kOneStep, "exact method only");
  Tracker tr(cert::kOneStep);
  for (std::size_t k = 0; k < steps(traj); ++k) {
    const auto& r = traj.iterates[k];
    if (!star_in_ball(dist(traj, k, x_star), *r.radius)) {
      tr.skip();
      continue;
    }
    const double base = is_fw(r) ? kOneStepFw : kOneStepExact;
    const double v = std::max(0.0, traj.iterates[k + 1].f - f_star);
    tr.observe(static_cast<int>(k), v, base * (1.0 + std::abs(f_star)) + gap_allowance(r));
  }
  return tr.finish();
}

CertificateEntry certify_fval_rate(const Trajectory& traj, const Vector& x_star, double f_star) {
  if (traj.method != MethodKind::kBpm) return not_applicable(cert::kFvalRate, "exact method only");
  Tracker tr(cert::kFvalRate);
  const double tol = traj.config.tol;
  const double scale = 1.0 + x_star.cwiseAbs().maxCoeff();
  for (std::size_t k = 0; k < steps(traj); ++k) {
    const auto& r = traj.iterates[k];
    const double t = *r.radius;
    const double allowance = kFvalSlackFactor * tol * (1.0 + std::abs(r.f)) + gap_allowance(r);
    const double lhs = traj.iterates[k + 1].f - f_star;
    const double d_next = dist(traj, k + 1, x_star);
    // x_{k+1} = x*: the bound degenerates to f_{k+1} - f* <= 0.
    const double rhs = d_next <= 1e-15 * scale ? 0.0 : (r.f - f_star) / (1.0 + t / d_next);
    tr.observe(static_cast<int>(k), std::max(0.0, lhs - rhs), allowance);
  }
  return tr.finish();
}

CertificateEntry certify_fval_contraction(const Trajectory& traj, const Vector& x_star, double f_star) {
  if (traj.method != MethodKind::kBpm) return not_applicable(cert::kFvalContraction, "exact method only");
  Tracker tr(cert::kFvalContraction);
  const double tol = traj.config.tol;
  for (std::size_t k = 0; k < steps(traj); ++k) {
    const auto& r = traj.iterates[k];
    const double t = *r.radius;
    const double d_k = dist(traj, k, x_star);
    if (!(t < d_k)) {
      tr.skip();
      continue;
    }
    const double rhs = (1.0 - t / d_k) * (r.f - f_star);
    const double lhs = traj.iterates[k + 1].f - f_star;
    tr.observe(static_cast<int>(k), std::max(0.0, lhs - rhs),
               kFvalSlackFactor * tol * (1.0 + std::abs(r.f)) + gap_allowance(r));
  }
  return tr.finish();
}

std::vector<CertificateEntry> certify_gradient(const Trajectory& traj, std::optional<double> f_star) {
  if (traj.method != MethodKind::kBpm) {
    return {not_applicable(cert::kGradMonotone, "exact method only"),
            not_applicable(cert::kGradAverage, "exact method only")};
  }
  Tracker mono(cert::kGradMonotone);
  Tracker avg(cert::kGradAverage);
  const auto& it = traj.iterates;
  double weighted = 0.0;  // sum_k t_k ||grad f(x_{k+1})||_*
  double total_t = 0.0;
  double fw_allowance = 0.0;
  for (std::size_t k = 0; k < steps(traj); ++k) {
    const auto& r = it[k];
    const double t = *r.radius;
    mono.observe(static_cast<int>(k), std::max(0.0, it[k + 1].dual_grad_norm - r.dual_grad_norm),
                 kGradRelSlack * (1.0 + r.dual_grad_norm) + gap_allowance(r, 1.0 / t));

    weighted += t * it[k + 1].dual_grad_norm;
    total_t += t;
    fw_allowance += gap_allowance(r);
    const double f_ref = f_star ? *f_star : it[k + 1].f;
    const double rhs = (it[0].f - f_ref) / total_t;
    const double lhs = weighted / total_t;
    avg.observe(static_cast<int>(k), std::max(0.0, lhs - rhs),
                kGradRelSlack * (1.0 + std::abs(rhs)) + fw_allowance / total_t);
  }
  if (!f_star) avg.note("f* unknown; reference value f(x_K) per prefix");
  return {mono.finish(), avg.finish()};
}

std::vector<CertificateEntry> certify_distance(const Trajectory& traj, const Vector& x_star, double f_star) {
  if (traj.method != MethodKind::kBpm) {
    return {not_applicable(cert::kDistance, "exact method only"),
            not_applicable(cert::kFiniteConvergence, "exact method only")};
  }
  if (!traj.norm.is_inner_product()) {
    const std::string why = fmt::format("{} norm is not induced by an inner product", traj.norm.label());
    return {not_applicable(cert::kDistance, why), not_applicable(cert::kFiniteConvergence, why)};
  }
  Tracker rec(cert::kDistance);
  Tracker fin(cert::kFiniteConvergence);
  const auto& it = traj.iterates;
  const double d0 = dist(traj, 0, x_star);
  double sum_t2 = 0.0;
  std::optional<std::size_t> reach;  // first index K with sum_{k<K} t_k^2 >= d0^2
  if (d0 == 0.0) reach = 0;
  for (std::size_t k = 0; k < steps(traj); ++k) {
    const auto& r = it[k];
    const double t = *r.radius;
    const double d_k = dist(traj, k, x_star);
    sum_t2 += t * t;
    if (!reach && sum_t2 >= d0 * d0) reach = k + 1;
    if (star_in_ball(d_k, t)) {
      rec.skip();
      continue;
    }
    const double d_next = dist(traj, k + 1, x_star);
    const double v = std::max(0.0, d_next * d_next - (d_k * d_k - t * t));
    rec.observe(static_cast<int>(k), v, kDistRelSlack * (1.0 + d_k * d_k) + gap_allowance(r));
  }

  const double fin_allowance = kFiniteConvSlack * (1.0 + std::abs(f_star));
  const std::size_t last = it.size() - 1;
  if (reach && *reach <= last) {
    double fw = 0.0;
    for (std::size_t k = 0; k < *reach; ++k) fw += gap_allowance(it[k]);
    fin.observe(static_cast<int>(*reach), std::max(0.0, it[*reach].f - f_star), fin_allowance + fw);
    fin.note(fmt::format("guarantee index {} (observed optimum no later)", *reach));
  } else if (it[last].f - f_star <= fin_allowance) {
    // Stopped early at the optimum before the guarantee index.
    fin.observe(static_cast<int>(last), std::max(0.0, it[last].f - f_star), fin_allowance);
    fin.note("optimum reached before the guarantee index");
  } else {
    fin.note("sum of squared radii never covers the initial distance; nothing to check");
  }
  return {rec.finish(), fin.finish()};
}

std::vector<CertificateEntry> certify_boundary_and_kkt(const Trajectory& traj, const Objective& f,
                                                       const Vector& x_star) {
  const bool ellipsoid = traj.norm.kind() == NormKind::kEllipsoid;
  if (traj.method != MethodKind::kBpm) {
    return {not_applicable(cert::kBoundary, "exact method only"), not_applicable(cert::kAlignment, "exact method only"),
            not_applicable(cert::kCollinearity, "exact method only")};
  }
  Tracker boundary(cert::kBoundary);
  Tracker align(cert::kAlignment);
  Tracker col(cert::kCollinearity);
  const auto& it = traj.iterates;
  for (std::size_t k = 0; k < steps(traj); ++k) {
    const auto& r = it[k];
    const double t = *r.radius;
    if (star_in_ball(dist(traj, k, x_star), t)) {
      boundary.skip();
      align.skip();
      col.skip();
      continue;
    }
    const int step = static_cast<int>(k);
    const double len = *r.step_length;
    boundary.observe(step, std::abs(len - t), (is_fw(r) ? kBoundaryFw : kBoundaryExact) * t);

    const Vector G = f.gradient(it[k + 1].x);
    const Vector move = it[k + 1].x - r.x;
    const double G_dual = dual_norm_value(traj.norm, G);
    align.observe(step, std::abs(-G.dot(move) - G_dual * len), kKktRelSlack * (1.0 + G_dual) + gap_allowance(r));

    if (ellipsoid) {
      const Vector w = traj.norm.matrix() * (-move);
      const double ww = w.squaredNorm();
      const double c = ww > 0.0 ? std::max(0.0, G.dot(w) / ww) : 0.0;
      const double v = (G - c * w).norm() / (1.0 + G.norm());
      col.observe(step, v, kKktRelSlack + gap_allowance(r));
    }
  }
  CertificateEntry col_entry = ellipsoid ? col.finish() : not_applicable(cert::kCollinearity, "ellipsoid norms only");
  return {boundary.finish(), align.finish(), col_entry};
}

CertificateEntry certify_linearized_distance(const Trajectory& traj, const Objective& f, const Vector& x_star) {
  if (traj.method != MethodKind::kLinearized) return not_applicable(cert::kLinearizedDistance, "linearized method only");
  if (traj.norm.kind() != NormKind::kL2) return not_applicable(cert::kLinearizedDistance, "l2 norm only");
  Tracker tr(cert::kLinearizedDistance);
  const auto& it = traj.iterates;
  for (std::size_t k = 0; k < steps(traj); ++k) {
    const double t = *it[k].radius;
    const Vector g = f.gradient(it[k].x);
    const double bound = g.dot(it[k].x - x_star) / g.norm();
    if (!(t <= bound + kStepsizeTol)) {
      tr.skip();
      continue;
    }
    const double d_k = (it[k].x - x_star).squaredNorm();
    const double d_next = (it[k + 1].x - x_star).squaredNorm();
    tr.observe(static_cast<int>(k), std::max(0.0, d_next - (d_k - t * t)), kLinearizedSlack);
  }
  if (tr.skipped() > 0) tr.note("steps with radius above the stepsize bound are skipped");
  return tr.finish();
}

std::vector<int> find_distance_increases(const Trajectory& traj, const Vector& x_star) {
  std::vector<int> out;
  for (std::size_t k = 0; k < steps(traj); ++k) {
    if (dist(traj, k + 1, x_star) > dist(traj, k, x_star) * (1.0 + 1e-12)) out.push_back(static_cast<int>(k));
  }
  return out;
}

CertificateReport certify_all(const Trajectory& traj, const Objective& f) {
  if (traj.iterates.empty()) throw ArgumentError("certify: empty trajectory");
  CertificateReport report;
  auto add = [&report](std::vector<CertificateEntry> v) {
    for (auto& e : v) report.entries.push_back(std::move(e));
  };
  const auto& opt = f.known_optimum();
  report.entries.push_back(certify_descent(traj));
  add(certify_gradient(traj, opt ? std::optional<double>(opt->f_star) : std::nullopt));
  if (opt) {
    report.entries.push_back(certify_one_step(traj, opt->x_star, opt->f_star));
    report.entries.push_back(certify_fval_rate(traj, opt->x_star, opt->f_star));
    report.entries.push_back(certify_fval_contraction(traj, opt->x_star, opt->f_star));
    add(certify_distance(traj, opt->x_star, opt->f_star));
    add(certify_boundary_and_kkt(traj, f, opt->x_star));
    report.entries.push_back(certify_linearized_distance(traj, f, opt->x_star));
    report.distance_increases = find_distance_increases(traj, opt->x_star);
  } else {
    for (auto name : {cert::kOneStep, cert::kFvalRate, cert::kFvalContraction, cert::kDistance,
                      cert::kFiniteConvergence, cert::kBoundary, cert::kAlignment, cert::kCollinearity,
                      cert::kLinearizedDistance}) {
      report.entries.push_back(not_applicable(name, "no known optimum"));
    }
  }
  return report;
}

void write_certificates_csv(std::ostream& os, const CertificateReport& report) {
  os << "#schema=1\n";
  os << "certificate,pass,worst_violation,worst_step,slack\n";
  for (const auto& e : report.entries) {
    os << e.name << ',' << (e.applicable ? (e.pass ? "true" : "false") : "n/a") << ','
       << format_double(e.worst_violation) << ',' << e.worst_step << ',' << format_double(e.slack_used) << '\n';
  }
}

void write_report_text(std::ostream& os, const CertificateReport& report, const Trajectory& traj) {
  os << fmt::format("objective: {}\nnorm: {}\nmethod: {}\niterates: {}\n\n", traj.objective_label,
                    traj.norm.label(), to_string(traj.method), traj.iterates.size());
  for (const auto& e : report.entries) {
    if (!e.applicable) {
      os << fmt::format("{:<24} n/a   ({})\n", e.name, e.note);
      continue;
    }
    os << fmt::format("{:<24} {:<5} worst violation {:.3e} at step {} (slack {:.3e}); checked {}, skipped {}",
                      e.name, e.pass ? "PASS" : "FAIL", e.worst_violation, e.worst_step, e.slack_used,
                      e.checked_steps, e.skipped_steps);
    if (!e.note.empty()) os << "; " << e.note;
    os << '\n';
  }
  if (!report.distance_increases.empty()) {
    os << "\nnote: the distance to x* in the run's norm increased at step(s)";
    for (int k : report.distance_increases) os << ' ' << k;
    os << ".\n      Monotone distance decrease is only guaranteed for inner-product norms.\n";
  }
  os << '\n' << (report.all_pass() ? "all applicable certificates pass" : "CERTIFICATE FAILURE") << '\n';
}

Counterexample find_linf_distance_increase(std::uint64_t seed_begin, std::uint64_t seed_end, double margin,
                                           int verify_iters) {
  const Vector zero = Vector::Zero(2);
  const auto norm = NormDescriptor::linf(2);
  for (std::uint64_t seed = seed_begin; seed < seed_end; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> kappa_dist(10.0, 100.0);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::uniform_real_distribution<double> frac(0.2, 0.8);
    Vector eig(2);
    eig << 1.0, kappa_dist(rng);
    Vector x0(2);
    x0 << coord(rng), coord(rng);
    const double d0 = x0.cwiseAbs().maxCoeff();
    if (d0 == 0.0) continue;
    const double t = frac(rng) * d0;

    const Quadratic q = make_quadratic(eig, seed, zero, 0.0);
    const BroxSolution step = brox_box_quadratic(q, x0, t, BroxConfig{}.tol);
    const double d1 = step.point.cwiseAbs().maxCoeff();
    if (!(d1 >= (1.0 + margin) * d0)) continue;

    const Objective f = Objective::from_quadratic(q);
    const Trajectory traj = run_bpm(f, norm, x0, RadiusSchedule::constant(t), BroxConfig{}, verify_iters, 0.0);
    if (!certify_all(traj, f).all_pass()) continue;

    Counterexample ce;
    ce.seed = seed;
    ce.eigenvalues = eig;
    ce.rotation_seed = seed;
    ce.A = q.A();
    ce.x_star = zero;
    ce.f_star = 0.0;
    ce.x0 = x0;
    ce.radius = t;
    ce.x1 = step.point;
    ce.dist0 = d0;
    ce.dist1 = d1;
    return ce;
  }
  throw SearchFailure(fmt::format("no l-inf distance increase found for seeds [{}, {})", seed_begin, seed_end));
}

}  // namespace brox
