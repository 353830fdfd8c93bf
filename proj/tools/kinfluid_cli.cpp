// Command line front end: simulate-kinetic, simulate-limit, converge, check-entropy.
// Exit codes: 0 ok, 1 configuration or I/O, 2 solver failure, 3 entropy audit failure.

#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kinfluid/harness/config.hpp"
#include "kinfluid/harness/experiment.hpp"
#include "kinfluid/harness/io.hpp"

namespace {

using namespace kinfluid;
using namespace kinfluid::harness;
using nlohmann::json;

constexpr int kOk = 0, kConfig = 1, kSolver = 2, kAudit = 3;

bool audit_ok(const AuditRecordD& a, double tolerance) {
  return a.worst_slack_theorem >= -tolerance * std::abs(a.F0);
}

void print_audit(const AuditRecordD& a, double tolerance) {
  std::cout << "audit: F0 " << a.F0 << ", worst slack " << a.worst_slack_theorem
            << " (allowed " << -tolerance * std::abs(a.F0) << "), sharp slack " << a.worst_slack_sharp
            << ", min D1 " << a.min_D1 << ", min D2 " << a.min_D2 << '\n';
}

int simulate_kinetic(const std::string& config_path, std::optional<double> eps_flag,
                     std::optional<std::string> out_flag) {
  ExperimentConfig cfg = load_config(config_path);
  if (out_flag) cfg.output_dir = *out_flag;
  const double eps = eps_flag ? *eps_flag : cfg.eps_list.front();
  if (!(eps > 0)) throw ConfigError("--eps must be positive");
  ensure_directory(cfg.output_dir);

  const LimitRun ref = run_limit(cfg, SolverMode::LimitDirect);
  const CoupledRun run = run_coupled(cfg, eps, &ref, cfg.output_dir);
  const InitialData init = make_well_prepared(cfg);

  write_entropy_series_csv(run.reports, cfg.output_dir + "/entropy_series.csv");
  write_state(cfg.output_dir + "/final_state",
              {{"f", run.final_kinetic.f}, {"n", run.final_fluid.n}, {"v", run.final_fluid.v}},
              {{"eps", eps}, {"t", run.final_kinetic.t}});
  json meta;
  meta["config"] = to_json(cfg);
  meta["eps"] = eps;
  meta["h1_residual"] = init.h1_residual;
  meta["h2_residual"] = init.h2_residual;
  meta["run"] = summary_json(run);
  meta["audit_ok"] = audit_ok(run.audit, cfg.audit_tolerance);
  write_json(meta, cfg.output_dir + "/run.json");

  std::cout << "eps " << eps << ": " << run.steps << " steps of " << run.dt << " in " << run.seconds
            << " s; mass drift " << run.kinetic_mass_drift << " (kinetic), " << run.fluid_mass_drift
            << " (fluid); truncation leak " << run.truncation_leak << '\n';
  print_audit(run.audit, cfg.audit_tolerance);
  return audit_ok(run.audit, cfg.audit_tolerance) ? kOk : kAudit;
}

int simulate_limit(const std::string& config_path, std::optional<std::string> mode_flag) {
  ExperimentConfig cfg = load_config(config_path);
  SolverMode mode = cfg.mode == SolverMode::LimitPicard ? SolverMode::LimitPicard : SolverMode::LimitDirect;
  if (mode_flag) mode = *mode_flag == "picard" ? SolverMode::LimitPicard : SolverMode::LimitDirect;
  ensure_directory(cfg.output_dir);

  const LimitRun run = run_limit(cfg, mode);
  const TwoPhaseStateD& last = run.samples.back();
  write_state(cfg.output_dir + "/limit_state",
              {{"rho", last.rho}, {"u", last.u}, {"n", last.fluid.n}, {"v", last.fluid.v}},
              {{"t", last.t}, {"mode", to_string(mode)}});
  json meta;
  meta["config"] = to_json(cfg);
  meta["run"] = summary_json(run);
  write_json(meta, cfg.output_dir + "/limit_run.json");

  std::cout << to_string(mode) << ": " << run.steps << " steps of " << run.dt << "; rho mass drift "
            << run.rho_mass_drift << ", min(1+h) " << run.positivity.min_one_plus_h << '\n';
  for (const auto& it : run.picard)
    std::cout << "  iterate " << it.m << ": cauchy_l2 " << it.cauchy_l2 << ", ratio " << it.contraction_ratio
              << '\n';
  return kOk;
}

int converge(const std::string& config_path) {
  const ExperimentConfig cfg = load_config(config_path);
  ensure_directory(cfg.output_dir);
  const ConvergenceTable table = run_convergence(cfg);
  write_convergence_csv(table.rows, cfg.output_dir + "/convergence.csv");
  json meta = summary_json(table);
  meta["config"] = to_json(cfg);
  write_json(meta, cfg.output_dir + "/convergence.json");

  for (const auto& r : table.rows)
    std::cout << "eps " << r.eps << ": sup_H " << r.sup_H << ", |f - M|_1 " << r.f_to_M_l1 << '\n';
  if (table.degenerate)
    std::cout << "slope: degenerate (sup_H vanishes)\n";
  else
    std::cout << "slope " << table.slope << '\n';
  if (!table.monotone) std::cout << "warning: sup_H is not monotone in eps\n";
  return kOk;
}

int check_entropy(const std::string& run_dir) {
  const json meta = read_json(run_dir + "/run.json");
  const ExperimentConfig cfg = parse_config(meta.at("config"));
  const double eps = meta.at("eps").get<double>();
  const auto series = read_entropy_series_csv(run_dir + "/entropy_series.csv");
  if (series.empty()) throw IoError("empty entropy series in '" + run_dir + "'");
  const AuditRecordD a = entropy_inequality_audit(series, eps, Grid::dim());
  print_audit(a, cfg.audit_tolerance);
  return audit_ok(a, cfg.audit_tolerance) ? kOk : kAudit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinetic-fluid simulator and entropy diagnostics"};
  app.require_subcommand(1);

  std::string config, run_dir;
  std::optional<double> eps;
  std::optional<std::string> out, mode;

  auto* sk = app.add_subcommand("simulate-kinetic", "coupled kinetic-fluid run at one eps");
  sk->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
  sk->add_option("--eps", eps, "scaling parameter (default: first of eps_list)");
  sk->add_option("--out", out, "output directory (default: output_dir)");

  auto* sl = app.add_subcommand("simulate-limit", "two-phase limit system");
  sl->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
  sl->add_option("--mode", mode, "direct or picard")->check(CLI::IsMember({"direct", "picard"}));

  auto* cv = app.add_subcommand("converge", "eps sweep against the limit system");
  cv->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);

  auto* ce = app.add_subcommand("check-entropy", "re-audit a finished run");
  ce->add_option("--run", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*sk) return simulate_kinetic(config, eps, out);
    if (*sl) return simulate_limit(config, mode);
    if (*cv) return converge(config);
    if (*ce) return check_entropy(run_dir);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const kinfluid::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
