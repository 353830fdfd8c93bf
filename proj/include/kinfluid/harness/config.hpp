#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinfluid/core.hpp"

namespace kinfluid::harness {

enum class ProfileKind { LocalMaxwellianWave, Equilibrium, Custom };
enum class BoundaryChoice { Specular, Diffuse, Dirichlet };
enum class SolverMode { Coupled, LimitDirect, LimitPicard };

struct ExperimentConfig {
  Index nx = 64;
  Index nv = 64;
  double x_lo = 0.0;
  double x_hi = 1.0;
  double v_max = 8.0;

  std::vector<double> eps_list{0.5};
  double t_final = 1.0;
  double cfl = 0.4;
  std::optional<double> dt;  // overrides cfl when set
  double gamma = 2.0;
  double vel_floor = 1e-12;
  std::optional<double> chi_lambda;  // unset means no truncation

  ProfileKind profile = ProfileKind::LocalMaxwellianWave;
  double rho_amplitude = 0.1;
  double u_amplitude = 0.2;
  std::string custom_file;  // state file stem for ProfileKind::Custom

  BoundaryChoice boundary = BoundaryChoice::Specular;
  double wall_temperature = 1.0;
  double dirichlet_rho = 1.0;
  double dirichlet_u = 0.0;

  SolverMode mode = SolverMode::Coupled;
  std::string output_dir = "out";
  int samples = 32;
  int threads = 0;  // 0: one per hardware thread
  double audit_tolerance = 0.05;  // fraction of |F(0)| allowed in the entropy audit

  int picard_iterations = 10;
  double picard_cfl = 0.4;

  void validate() const;
  ScalingParamsD scaling(double eps) const;
  Grid grid() const;
};

// Unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& c);

std::string to_string(ProfileKind k);
std::string to_string(BoundaryChoice b);
std::string to_string(SolverMode m);

}  // namespace kinfluid::harness
