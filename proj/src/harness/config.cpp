#include "kinfluid/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace kinfluid::harness {

using nlohmann::json;

namespace {

template <typename T>
T get(const json& j, const char* key, const char* where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError(std::string(where) + ": unknown key '" + it.key() + "'");
}

ProfileKind parse_profile_kind(const std::string& s) {
  if (s == "local_maxwellian_wave") return ProfileKind::LocalMaxwellianWave;
  if (s == "equilibrium") return ProfileKind::Equilibrium;
  if (s == "custom") return ProfileKind::Custom;
  throw ConfigError("profile.type: unknown profile '" + s + "'");
}

BoundaryChoice parse_boundary(const std::string& s) {
  if (s == "specular") return BoundaryChoice::Specular;
  if (s == "diffuse") return BoundaryChoice::Diffuse;
  if (s == "dirichlet") return BoundaryChoice::Dirichlet;
  throw ConfigError("boundary.type: unknown boundary '" + s + "'");
}

SolverMode parse_mode(const std::string& s) {
  if (s == "coupled") return SolverMode::Coupled;
  if (s == "limit_direct") return SolverMode::LimitDirect;
  if (s == "limit_picard") return SolverMode::LimitPicard;
  throw ConfigError("solver_mode: unknown mode '" + s + "'");
}

}  // namespace

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::LocalMaxwellianWave: return "local_maxwellian_wave";
    case ProfileKind::Equilibrium: return "equilibrium";
    case ProfileKind::Custom: return "custom";
  }
  return "?";
}

std::string to_string(BoundaryChoice b) {
  switch (b) {
    case BoundaryChoice::Specular: return "specular";
    case BoundaryChoice::Diffuse: return "diffuse";
    case BoundaryChoice::Dirichlet: return "dirichlet";
  }
  return "?";
}

std::string to_string(SolverMode m) {
  switch (m) {
    case SolverMode::Coupled: return "coupled";
    case SolverMode::LimitDirect: return "limit_direct";
    case SolverMode::LimitPicard: return "limit_picard";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (nx <= 0 || nv <= 0) throw ConfigError("grid: nx and nv must be positive");
  if (nv % 2 != 0) throw ConfigError("grid: nv must be even");
  if (!(x_hi > x_lo)) throw ConfigError("grid: need x_hi > x_lo");
  if (!(v_max > 0)) throw ConfigError("grid: v_max must be positive");
  if (eps_list.empty()) throw ConfigError("eps_list: must not be empty");
  for (double e : eps_list)
    if (!(e > 0)) throw ConfigError("eps_list: entries must be positive");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps_list: must be sorted descending");
  if (!(t_final > 0)) throw ConfigError("t_final: must be positive");
  if (!(cfl > 0 && cfl <= 1)) throw ConfigError("cfl: must lie in (0, 1]");
  if (dt && !(*dt > 0)) throw ConfigError("dt: must be positive");
  if (!(gamma > 1)) throw ConfigError("gamma: must exceed 1");
  if (!(vel_floor >= 0)) throw ConfigError("vel_floor: must be nonnegative");
  if (chi_lambda && !(*chi_lambda > 0)) throw ConfigError("chi_lambda: must be positive");
  if (profile == ProfileKind::LocalMaxwellianWave && !(std::abs(rho_amplitude) < 1))
    throw ConfigError("profile.rho_amplitude: must be below 1 in magnitude");
  if (profile == ProfileKind::Custom && custom_file.empty())
    throw ConfigError("profile.file: required for a custom profile");
  if (!(wall_temperature > 0)) throw ConfigError("boundary.wall_temperature: must be positive");
  if (!(dirichlet_rho >= 0)) throw ConfigError("boundary.rho: must be nonnegative");
  if (samples < 1) throw ConfigError("samples: must be at least 1");
  if (threads < 0) throw ConfigError("threads: must be nonnegative");
  if (!(audit_tolerance >= 0)) throw ConfigError("audit_tolerance: must be nonnegative");
  if (picard_iterations < 1) throw ConfigError("picard.iterations: must be at least 1");
  if (!(picard_cfl > 0 && picard_cfl <= 1)) throw ConfigError("picard.cfl: must lie in (0, 1]");
}

ScalingParamsD ExperimentConfig::scaling(double eps) const {
  ScalingParamsD s;
  s.eps = eps;
  s.vel_floor = vel_floor;
  s.chi_lambda = chi_lambda ? *chi_lambda : std::numeric_limits<double>::infinity();
  s.validate();
  return s;
}

Grid ExperimentConfig::grid() const { return Grid(nx, nv, x_lo, x_hi, v_max); }

ExperimentConfig parse_config(const json& j) {
  reject_unknown(j,
                 {"grid", "eps_list", "t_final", "cfl", "dt", "gamma", "vel_floor", "chi_lambda",
                  "profile", "boundary", "solver_mode", "output_dir", "samples", "threads",
                  "audit_tolerance", "picard"},
                 "config");
  ExperimentConfig c;
  if (j.contains("grid")) {
    const json& g = j["grid"];
    reject_unknown(g, {"nx", "nv", "x_lo", "x_hi", "v_max"}, "grid");
    if (g.contains("nx")) c.nx = get<Index>(g, "nx", "grid");
    if (g.contains("nv")) c.nv = get<Index>(g, "nv", "grid");
    if (g.contains("x_lo")) c.x_lo = get<double>(g, "x_lo", "grid");
    if (g.contains("x_hi")) c.x_hi = get<double>(g, "x_hi", "grid");
    if (g.contains("v_max")) c.v_max = get<double>(g, "v_max", "grid");
  }
  if (j.contains("eps_list")) c.eps_list = get<std::vector<double>>(j, "eps_list", "config");
  if (j.contains("t_final")) c.t_final = get<double>(j, "t_final", "config");
  if (j.contains("cfl")) c.cfl = get<double>(j, "cfl", "config");
  if (j.contains("dt") && !j["dt"].is_null()) c.dt = get<double>(j, "dt", "config");
  if (j.contains("gamma")) c.gamma = get<double>(j, "gamma", "config");
  if (j.contains("vel_floor")) c.vel_floor = get<double>(j, "vel_floor", "config");
  if (j.contains("chi_lambda") && !j["chi_lambda"].is_null())
    c.chi_lambda = get<double>(j, "chi_lambda", "config");
  if (j.contains("profile")) {
    const json& p = j["profile"];
    if (p.is_string()) {
      c.profile = parse_profile_kind(p.get<std::string>());
    } else {
      reject_unknown(p, {"type", "rho_amplitude", "u_amplitude", "file"}, "profile");
      c.profile = parse_profile_kind(get<std::string>(p, "type", "profile"));
      if (p.contains("rho_amplitude")) c.rho_amplitude = get<double>(p, "rho_amplitude", "profile");
      if (p.contains("u_amplitude")) c.u_amplitude = get<double>(p, "u_amplitude", "profile");
      if (p.contains("file")) c.custom_file = get<std::string>(p, "file", "profile");
    }
  }
  if (j.contains("boundary")) {
    const json& b = j["boundary"];
    if (b.is_string()) {
      c.boundary = parse_boundary(b.get<std::string>());
    } else {
      reject_unknown(b, {"type", "wall_temperature", "rho", "u"}, "boundary");
      c.boundary = parse_boundary(get<std::string>(b, "type", "boundary"));
      if (b.contains("wall_temperature"))
        c.wall_temperature = get<double>(b, "wall_temperature", "boundary");
      if (b.contains("rho")) c.dirichlet_rho = get<double>(b, "rho", "boundary");
      if (b.contains("u")) c.dirichlet_u = get<double>(b, "u", "boundary");
    }
  }
  if (j.contains("solver_mode")) c.mode = parse_mode(get<std::string>(j, "solver_mode", "config"));
  if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir", "config");
  if (j.contains("samples")) c.samples = get<int>(j, "samples", "config");
  if (j.contains("threads")) c.threads = get<int>(j, "threads", "config");
  if (j.contains("audit_tolerance")) c.audit_tolerance = get<double>(j, "audit_tolerance", "config");
  if (j.contains("picard")) {
    const json& p = j["picard"];
    reject_unknown(p, {"iterations", "cfl"}, "picard");
    if (p.contains("iterations")) c.picard_iterations = get<int>(p, "iterations", "picard");
    if (p.contains("cfl")) c.picard_cfl = get<double>(p, "cfl", "picard");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["grid"] = {{"nx", c.nx}, {"nv", c.nv}, {"x_lo", c.x_lo}, {"x_hi", c.x_hi}, {"v_max", c.v_max}};
  j["eps_list"] = c.eps_list;
  j["t_final"] = c.t_final;
  j["cfl"] = c.cfl;
  j["dt"] = c.dt ? json(*c.dt) : json(nullptr);
  j["gamma"] = c.gamma;
  j["vel_floor"] = c.vel_floor;
  j["chi_lambda"] = c.chi_lambda ? json(*c.chi_lambda) : json(nullptr);
  json p = {{"type", to_string(c.profile)}};
  if (c.profile == ProfileKind::LocalMaxwellianWave) {
    p["rho_amplitude"] = c.rho_amplitude;
    p["u_amplitude"] = c.u_amplitude;
  }
  if (c.profile == ProfileKind::Custom) p["file"] = c.custom_file;
  j["profile"] = p;
  json b = {{"type", to_string(c.boundary)}};
  if (c.boundary == BoundaryChoice::Diffuse) b["wall_temperature"] = c.wall_temperature;
  if (c.boundary == BoundaryChoice::Dirichlet) {
    b["rho"] = c.dirichlet_rho;
    b["u"] = c.dirichlet_u;
  }
  j["boundary"] = b;
  j["solver_mode"] = to_string(c.mode);
  j["output_dir"] = c.output_dir;
  j["samples"] = c.samples;
  j["threads"] = c.threads;
  j["audit_tolerance"] = c.audit_tolerance;
  j["picard"] = {{"iterations", c.picard_iterations}, {"cfl", c.picard_cfl}};
  return j;
}

}  // namespace kinfluid::harness
