#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kinfluid/harness/config.hpp"
#include "kinfluid/harness/io.hpp"
#include "kinfluid/kinfluid.hpp"

namespace kinfluid::harness {

struct InitialData {
  KineticStateD kinetic;
  FluidStateD fluid;
  TwoPhaseStateD limit;
  // Left-hand sides of the two well-preparedness hypotheses, evaluated on the grid.
  double h1_residual = 0;
  double h2_residual = 0;
};

// f0 = M_{rho0,u0}, n0, v0 taken over unchanged, so both residuals vanish up to quadrature.
InitialData make_well_prepared(const ExperimentConfig& cfg);

BoundaryKernelD make_boundary(const ExperimentConfig& cfg, const Grid& grid);

// A step count that is a multiple of the sample count and keeps dt <= dt_max.
struct TimeGrid {
  double dt = 0;
  long steps = 0;
  long steps_per_sample = 0;
};
TimeGrid align_time_grid(double t_final, double dt_max, int samples);

struct LimitRun {
  SolverMode mode = SolverMode::LimitDirect;
  double dt = 0;
  long steps = 0;
  std::vector<double> times;
  std::vector<TwoPhaseStateD> samples;
  double rho_mass_drift = 0;
  double fluid_mass_drift = 0;
  double max_exchange_antisymmetry = 0;
  PositivityReport<double> positivity;
  std::vector<IterationReportD> picard;  // Picard mode only
  double seconds = 0;
};

LimitRun run_limit(const ExperimentConfig& cfg, SolverMode mode);

struct CoupledRun {
  double eps = 0;
  double dt = 0;
  long steps = 0;
  std::vector<double> times;
  std::vector<TwoPhaseStateD> moment_samples;
  std::vector<EntropyReportD> reports;
  std::vector<MaxwellianGap<double>> gaps;  // against the reference, when one is given
  KineticStateD final_kinetic;
  FluidStateD final_fluid;
  AuditRecordD audit;
  double kinetic_mass_drift = 0;
  double fluid_mass_drift = 0;
  double max_wall_flux = 0;
  double max_exchange_antisymmetry = 0;
  double truncation_leak = 0;
  double seconds = 0;
};

// The coupled kinetic-fluid system at one eps. With a reference the reports
// carry H and the relative flux against it, and the Maxwellian gaps are filled.
// On a solver failure the state is written under dump_dir (if non-empty) and the
// error is rethrown with the step index and the dump path.
CoupledRun run_coupled(const ExperimentConfig& cfg, double eps, const LimitRun* reference = nullptr,
                       const std::string& dump_dir = "");

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double slope = 0;
  double intercept = 0;
  bool degenerate = false;  // some sup_H is zero, no fit
  bool monotone = true;     // sup_H strictly decreasing along eps_list
  std::vector<double> f_to_M_ratios;
  double min_ck_margin = 0;
  LimitRun reference;
  std::vector<double> run_seconds;
};

ConvergenceTable run_convergence(const ExperimentConfig& cfg);

// Least-squares slope and intercept of log(y) against log(x).
std::pair<double, double> fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

nlohmann::json summary_json(const CoupledRun& run);
nlohmann::json summary_json(const LimitRun& run);
nlohmann::json summary_json(const ConvergenceTable& table);

}  // namespace kinfluid::harness
