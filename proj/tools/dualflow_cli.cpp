#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dualflow/cli_io.hpp"
#include "dualflow/errors.hpp"
#include "dualflow/gamma_sweep.hpp"
#include "dualflow/ns_dual.hpp"
#include "dualflow/random_fields.hpp"
#include "dualflow/verification.hpp"

namespace fs = std::filesystem;
using namespace dualflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitOptimizer = 3;
constexpr int kExitVerification = 4;

class Timer {
 public:
  void lap(const std::string& phase) {
    const auto now = std::chrono::steady_clock::now();
    rows_.push_back({phase, std::chrono::duration<double>(now - last_).count()});
    last_ = now;
  }
  void write(const fs::path& path) const { write_csv(path, {"phase", "seconds"}, rows_); }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  std::vector<CsvRow> rows_;
};

void dump_dual(const DualState& dual, const fs::path& dir, const std::string& prefix) {
  write_field(dual.lambda, dir / (prefix + "lambda.dfld"));
  write_field(dual.gamma, dir / (prefix + "gamma.dfld"));
  if (dual.has_chi()) write_field(dual.chi, dir / (prefix + "chi.dfld"));
}

void dump_primal(const PrimalState& p, const fs::path& dir) {
  if (!p.V.empty()) write_field(p.V, dir / "V.dfld");
  if (!p.W.empty()) write_field(p.W, dir / "W.dfld");
  if (!p.p.empty()) write_field(p.p, dir / "p.dfld");
}

std::string nu_tag(double nu) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "nu_%.6g_", nu);
  return buf;
}

int run_solve(const RunConfig& cfg, const ProblemData& prob, Variant v, Timer& timer) {
  ProblemData p = prob;
  if (v == Variant::euler) p.nu = 0.0;
  const ConsistencyRun run =
      solve_dual_problem(p, v, cfg.problem.base, cfg.opts, cfg.seed, cfg.problem.perturbation);
  timer.lap("solve");
  write_iteration_log(run.result.log, cfg.output_dir / "iterations.csv");
  write_summary(std::vector<ConsistencyReport>{run.report}, cfg.output_dir / "summary.csv");
  if (cfg.dump_fields) {
    const fs::path dir = cfg.output_dir / "fields";
    dump_dual(run.result.final, dir, "");
    dump_primal(run.primal, dir);
  }
  timer.lap("write");
  std::cout << variant_name(v) << ": " << run.report.termination << " after "
            << run.report.iterations << " iterations, |J| = " << run.report.abs_J
            << ", V error = " << run.report.V_error << "\n";
  return run.result.termination == Termination::converged ? kExitOk : kExitOptimizer;
}

int run_sweep_command(const RunConfig& cfg, const ProblemData& prob, Timer& timer) {
  SweepConfig sc = cfg.sweep;
  sc.base = prob;
  sc.opts = cfg.opts;
  const SweepResult res = run_sweep(sc);
  timer.lap("sweep");

  std::vector<CsvRow> log_rows;
  for (std::size_t i = 0; i < res.rows.size(); ++i)
    for (const IterationRecord& r : res.logs[i])
      log_rows.push_back({res.rows[i].nu, std::int64_t{r.iteration}, r.objective, r.grad_norm,
                          r.min_margin, r.step});
  write_csv(cfg.output_dir / "iterations.csv",
            {"nu", "iteration", "objective", "grad_norm", "min_margin", "step"}, log_rows);
  write_summary(res.rows, cfg.output_dir / "summary.csv");

  const FieldTriple target = dual_fields(res.minimizers.back(), 0.0);
  const LimsupCertificate cert = limsup_certificate(target, sc.positive_nus(), sc);
  timer.lap("limsup");
  write_summary(cert.rows, cfg.output_dir / "limsup.csv");
  if (cfg.dump_fields) {
    const fs::path dir = cfg.output_dir / "fields";
    for (std::size_t i = 0; i < res.rows.size(); ++i)
      dump_dual(res.minimizers[i], dir, nu_tag(res.rows[i].nu));
  }
  timer.lap("write");

  bool solved = true;
  bool checks = cert.passed;
  for (const SweepRow& r : res.rows) {
    std::cout << "nu = " << r.nu << ": A_min = " << r.A_min << " (" << r.status << ", "
              << r.iters << " iterations)\n";
    if (r.status != "converged" && r.status != "boundary") solved = false;
    if (!r.lower_bound_ok || !r.in_ball) checks = false;
  }
  std::cout << "limsup certificate: " << (cert.passed ? "passed" : "failed") << "\n";
  if (!solved) return kExitOptimizer;
  return checks ? kExitOk : kExitVerification;
}

int run_verify(const RunConfig& cfg, const ProblemData& prob, Timer& timer) {
  std::mt19937_64 rng(cfg.seed);
  const Grid& g = prob.grid();
  const VerifySpec& vs = cfg.verify;
  std::vector<CheckRecord> checks;

  for (Variant v : {Variant::euler, Variant::ns, Variant::ns_pressure}) {
    const auto obj = make_objective(v, prob);
    const DualState point = random_dual(g, v, rng, obj->margin_scale());
    const FdCheckResult fd = fd_gradient_check(*obj, point, vs.fd_directions, vs.fd_step, rng);
    checks.push_back({std::string("fd_gradient_") + variant_name(v), fd.max_rel_error, vs.fd_tol,
                      fd.max_rel_error <= vs.fd_tol});
  }
  {
    const double nu = cfg.sweep.positive_nus().front();
    const auto obj = make_shifted_objective(prob, nu, cfg.sweep.alpha, cfg.sweep.chi_normalization);
    const DualState point = random_dual(g, Variant::ns, rng, obj->margin_scale());
    const FdCheckResult fd = fd_gradient_check(*obj, point, vs.fd_directions, vs.fd_step, rng);
    checks.push_back({"fd_gradient_shifted", fd.max_rel_error, vs.fd_tol, fd.max_rel_error <= vs.fd_tol});
  }
  {
    const DualState point = random_dual(g, Variant::euler, rng, prob.a_V);
    const FieldTriple f = dual_fields(point, 0.0);
    const SupRepResult sr = sup_representation_check(f.E, f.B, prob.a_V, vs.sup_samples, rng);
    checks.push_back({"sup_rep_violation", sr.max_violation, vs.sup_tol, sr.max_violation <= vs.sup_tol});
    checks.push_back({"sup_rep_equality", sr.max_equality_gap, vs.sup_tol, sr.max_equality_gap <= vs.sup_tol});
  }
  timer.lap("checks");

  bool solved = true;
  std::vector<IterationRecord> log;
  if (vs.consistency) {
    const Variant v = prob.nu > 0.0 ? Variant::ns : Variant::euler;
    const ConsistencyRun run =
        solve_dual_problem(prob, v, cfg.problem.base, cfg.opts, cfg.seed, cfg.problem.perturbation);
    timer.lap("solve");
    solved = run.result.termination == Termination::converged;
    log = run.result.log;
    write_summary(std::vector<ConsistencyReport>{run.report}, cfg.output_dir / "consistency.csv");
    const AuditRecord audit = apriori_bound_audit(run.result, run.problem, cfg.opts.grad_tol);
    for (const AuditCheck& c : audit.checks)
      if (!c.skipped) checks.push_back({"audit_" + c.name, c.lhs, c.rhs, c.passed});
    if (v != Variant::ns_pressure) {
      const EigenWindow w = eigen_window(run.result.final);
      const bool ok = within_eigen_bounds(w, prob.a_V, g.d, 1e-10);
      checks.push_back({"eigen_window_max_frobenius", w.max_frobenius,
                        std::sqrt(double(g.d)) * (g.d - 1) * prob.a_V / 2.0, ok});
    }
    if (cfg.dump_fields) {
      dump_dual(run.result.final, cfg.output_dir / "fields", "");
      dump_primal(run.primal, cfg.output_dir / "fields");
    }
  }
  write_iteration_log(log, cfg.output_dir / "iterations.csv");
  write_summary(checks, cfg.output_dir / "summary.csv");
  timer.lap("write");

  bool all = true;
  for (const CheckRecord& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.value << " (tolerance "
              << c.tolerance << ")\n";
    all = all && c.passed;
  }
  if (!solved) return kExitOptimizer;
  return all ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational dual solver for Euler and Navier-Stokes flows"};
  std::optional<std::string> command;
  fs::path config_path;
  std::optional<fs::path> output;
  bool dump = false;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command,
                 "solve-euler, solve-ns, solve-nsp, sweep-nu or verify (overrides the config)");
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--output", output, "output directory");
  app.add_flag("--dump-fields", dump, "write dual and primal fields");
  app.add_option("--seed", seed, "seed for random initial duals and checks");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  RunConfig cfg;
  ProblemData prob;
  try {
    cfg = load_config(config_path);
    if (command) cfg.command = parse_command(*command);
    if (output) cfg.output_dir = *output;
    if (dump) cfg.dump_fields = true;
    if (seed) cfg.seed = *seed;
    prob = build_problem(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FieldFormatError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    Timer timer;
    fs::create_directories(cfg.output_dir);
    write_text_atomic(cfg.output_dir / "config.txt", echo_config(cfg));
    int code = kExitOk;
    switch (cfg.command) {
      case Command::solve_euler: code = run_solve(cfg, prob, Variant::euler, timer); break;
      case Command::solve_ns: code = run_solve(cfg, prob, Variant::ns, timer); break;
      case Command::solve_nsp: code = run_solve(cfg, prob, Variant::ns_pressure, timer); break;
      case Command::sweep_nu: code = run_sweep_command(cfg, prob, timer); break;
      case Command::verify: code = run_verify(cfg, prob, timer); break;
    }
    timer.write(cfg.output_dir / "timing.csv");
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Infeasible& e) {
    std::cerr << "optimizer failure: " << e.what() << "\n";
    return kExitOptimizer;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOptimizer;
  }
}
