#include "kinfluid/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

namespace kinfluid::harness {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Smooth bump supported in |r| < 1, equal to 1 at r = 0.
double bump(double r) {
  if (std::abs(r) >= 1) return 0;
  return std::exp(1 - 1 / (1 - r * r));
}

FieldD column(const StateArrays& a, const std::string& name, Index nx, const std::string& file) {
  const auto it = a.find(name);
  if (it == a.end()) throw ConfigError("custom profile '" + file + "' has no field '" + name + "'");
  if (it->second.rows() != nx || it->second.cols() != 1)
    throw ConfigError("custom profile field '" + name + "' does not match nx");
  return it->second.col(0);
}

// Linear extrapolation of cell data to both walls.
std::pair<double, double> wall_values(const FieldD& a) {
  const Index n = a.size();
  if (n < 2) return {a(0), a(0)};
  return {1.5 * a(0) - 0.5 * a(1), 1.5 * a(n - 1) - 0.5 * a(n - 2)};
}

double fluid_mass(const FluidStateD& fl, const Grid& g) { return quad_x(g, fl.n); }

}  // namespace

BoundaryKernelD make_boundary(const ExperimentConfig& cfg, const Grid& grid) {
  switch (cfg.boundary) {
    case BoundaryChoice::Specular:
      return BoundaryKernelD::specular();
    case BoundaryChoice::Diffuse:
      return BoundaryKernelD::diffuse(grid, cfg.wall_temperature);
    case BoundaryChoice::Dirichlet: {
      const FieldD rho = FieldD::Constant(1, cfg.dirichlet_rho);
      const FieldD u = FieldD::Constant(1, cfg.dirichlet_u);
      const Grid one(1, grid.nv(), grid.x_lo(), grid.x_hi(), grid.v_max());
      const FieldD g = maxwellian(rho, u, one).f.row(0).transpose();
      return BoundaryKernelD::dirichlet(grid, g, g);
    }
  }
  throw ConfigError("unknown boundary choice");
}

InitialData make_well_prepared(const ExperimentConfig& cfg) {
  cfg.validate();
  const Grid grid = cfg.grid();
  const Index nx = grid.nx();
  FieldD rho(nx), u(nx), n(nx), v(nx);
  switch (cfg.profile) {
    case ProfileKind::Equilibrium:
      rho.setOnes();
      u.setZero();
      n.setOnes();
      v.setZero();
      break;
    case ProfileKind::LocalMaxwellianWave:
      for (Index i = 0; i < nx; ++i) {
        const double s = (grid.x(i) - grid.x_lo()) / grid.length();
        rho(i) = 1 + cfg.rho_amplitude * std::sin(2 * std::numbers::pi * s);
        u(i) = cfg.u_amplitude * bump((s - 0.5) / 0.4);
      }
      n.setOnes();
      v.setZero();
      break;
    case ProfileKind::Custom: {
      const StateArrays a = read_state(cfg.custom_file);
      rho = column(a, "rho", nx, cfg.custom_file);
      u = column(a, "u", nx, cfg.custom_file);
      n = column(a, "n", nx, cfg.custom_file);
      v = column(a, "v", nx, cfg.custom_file);
      // Order-0 compatibility: u and v vanish on the walls, to the accuracy of
      // a linear extrapolation of smooth cell data.
      for (const FieldD* w : {&u, &v}) {
        const auto [lo, hi] = wall_values(*w);
        const double tol = 10 * grid.dx() * grid.dx() * std::max(1.0, w->abs().maxCoeff());
        if (std::abs(lo) > tol || std::abs(hi) > tol)
          throw ConfigError("custom profile: velocity does not vanish at the walls");
      }
      break;
    }
  }
  if ((rho <= 0).any() || (n <= 0).any())
    throw ConfigError("initial profile: densities must be positive");

  InitialData d;
  d.kinetic = maxwellian(rho, u, grid);
  d.fluid.n = n;
  d.fluid.v = v;
  d.fluid.gamma = cfg.gamma;
  d.limit.rho = rho;
  d.limit.u = u;
  d.limit.fluid = d.fluid;

  // Kinetic entropy against its macroscopic value; the Maxwellian normalisation
  // contributes -(d/2) log(2 pi) per unit mass and is added back.
  const double log_norm = 0.5 * Grid::dim() * std::log(2 * std::numbers::pi);
  const FluidStateD no_fluid{FieldD::Ones(nx), FieldD::Zero(nx), cfg.gamma};
  const double kin = kinetic_entropy(d.kinetic.f, no_fluid, grid) - fluid_energy(no_fluid, grid);
  const double mac = quad_x(grid, FieldD(rho * rho.log() + rho * u.square() / 2));
  d.h1_residual = std::abs(kin - mac + log_norm * quad_x(grid, rho));
  const ScalingParamsD s = cfg.scaling(cfg.eps_list.front());
  d.h2_residual = relative_entropy(moment_state(d.kinetic.f, d.fluid, grid, s), d.limit, grid);
  return d;
}

TimeGrid align_time_grid(double t_final, double dt_max, int samples) {
  if (!(dt_max > 0) || !std::isfinite(dt_max)) throw SolverError("align_time_grid: no stable time step");
  TimeGrid tg;
  const double per_sample = t_final / samples;
  tg.steps_per_sample = std::max<long>(1, static_cast<long>(std::ceil(per_sample / dt_max - 1e-9)));
  tg.steps = tg.steps_per_sample * samples;
  tg.dt = t_final / static_cast<double>(tg.steps);
  return tg;
}

LimitRun run_limit(const ExperimentConfig& cfg, SolverMode mode) {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid grid = cfg.grid();
  const InitialData init = make_well_prepared(cfg);
  LimitRun run;
  run.mode = mode;

  if (mode == SolverMode::LimitPicard) {
    const SymHypStateD sh0 = to_symhyp(init.limit, grid);
    const double dt_max = cfg.dt ? *cfg.dt : picard_dt(sh0, cfg.gamma, cfg.picard_cfl, grid);
    const TimeGrid tg = align_time_grid(cfg.t_final, dt_max, cfg.samples);
    run.dt = tg.dt;
    run.steps = tg.steps;
    PicardConfigD pc;
    pc.dt = tg.dt;
    pc.steps = tg.steps;
    pc.gamma = cfg.gamma;
    SymHypPathD path = picard_initial(sh0, pc);
    for (int m = 0; m < cfg.picard_iterations; ++m) {
      auto [next, rep] = picard_iterate(path, pc, grid);
      run.picard.push_back(rep);
      path = std::move(next);
    }
    std::vector<FieldD> hp, vp;
    for (const auto& lvl : path.levels) {
      hp.push_back(lvl.h);
      vp.push_back(lvl.v);
    }
    run.positivity = density_positivity_check(hp, vp, tg.dt, grid);
    const double m_rho0 = quad_x(grid, init.limit.rho), m_n0 = fluid_mass(init.fluid, grid);
    for (int s = 0; s <= cfg.samples; ++s) {
      const double t = cfg.t_final * s / cfg.samples;
      const TwoPhaseStateD st = from_symhyp(path.levels[static_cast<std::size_t>(s * tg.steps_per_sample)],
                                            grid, cfg.gamma, t);
      run.rho_mass_drift = std::max(run.rho_mass_drift, std::abs(quad_x(grid, st.rho) - m_rho0));
      run.fluid_mass_drift = std::max(run.fluid_mass_drift, std::abs(quad_x(grid, st.fluid.n) - m_n0));
      run.times.push_back(t);
      run.samples.push_back(st);
    }
    run.seconds = seconds_since(t0);
    return run;
  }

  TwoPhaseStateD st = init.limit;
  const double dt_max = cfg.dt ? *cfg.dt : cfg.cfl * two_phase_max_dt(st, grid);
  const TimeGrid tg = align_time_grid(cfg.t_final, dt_max, cfg.samples);
  run.dt = tg.dt;
  run.steps = tg.steps;
  const double m_rho0 = quad_x(grid, st.rho), m_n0 = fluid_mass(st.fluid, grid);
  std::vector<FieldD> hp{FieldD(st.fluid.n - 1)}, vp{st.fluid.v};
  run.times.push_back(0);
  run.samples.push_back(st);
  for (long k = 1; k <= tg.steps; ++k) {
    TwoPhaseStepResult<double> r = two_phase_step(st, tg.dt, grid);
    st = std::move(r.state);
    run.max_exchange_antisymmetry =
        std::max(run.max_exchange_antisymmetry, std::abs(r.dP_particles + r.dP_fluid));
    run.rho_mass_drift = std::max(run.rho_mass_drift, std::abs(quad_x(grid, st.rho) - m_rho0));
    run.fluid_mass_drift = std::max(run.fluid_mass_drift, std::abs(quad_x(grid, st.fluid.n) - m_n0));
    hp.push_back(st.fluid.n - 1);
    vp.push_back(st.fluid.v);
    if (k % tg.steps_per_sample == 0) {
      const double t = cfg.t_final * static_cast<double>(k / tg.steps_per_sample) / cfg.samples;
      st.t = t;
      st.fluid.t = t;
      run.times.push_back(t);
      run.samples.push_back(st);
    }
  }
  run.positivity = density_positivity_check(hp, vp, tg.dt, grid);
  run.seconds = seconds_since(t0);
  return run;
}

CoupledRun run_coupled(const ExperimentConfig& cfg, double eps, const LimitRun* reference,
                       const std::string& dump_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid grid = cfg.grid();
  const ScalingParamsD s = cfg.scaling(eps);
  const BoundaryKernelD bc = make_boundary(cfg, grid);
  const InitialData init = make_well_prepared(cfg);
  if (reference && static_cast<int>(reference->samples.size()) != cfg.samples + 1)
    throw ConfigError("run_coupled: reference has a different sample count");

  KineticStateD k = init.kinetic;
  FluidStateD fl = init.fluid;
  const double vmax0 = fl.v.abs().maxCoeff();
  const double dt_stable = std::min({grid.dx() / grid.v_max(), grid.dv() / (grid.v_max() + vmax0),
                                     ns_max_dt(fl, grid)});
  const TimeGrid tg = align_time_grid(cfg.t_final, cfg.dt ? *cfg.dt : cfg.cfl * dt_stable, cfg.samples);

  CoupledRun run;
  run.eps = eps;
  run.dt = tg.dt;
  run.steps = tg.steps;
  const double mass0 = quad_xv(grid, k.f), fmass0 = fluid_mass(fl, grid);

  auto record = [&](double t, int sample) {
    const TwoPhaseStateD* ref = reference ? &reference->samples[static_cast<std::size_t>(sample)] : nullptr;
    run.times.push_back(t);
    run.reports.push_back(make_entropy_report(k.f, fl, grid, s, t, ref));
    run.moment_samples.push_back(moment_state(k.f, fl, grid, s, t));
    if (ref) run.gaps.push_back(maxwellian_gap(k.f, ref->rho, ref->u, grid));
  };
  record(0.0, 0);

  long step = 0;
  try {
    for (step = 1; step <= tg.steps; ++step) {
      auto [k1, rep] = kinetic_step(k, fl, tg.dt, grid, s, bc);
      k = std::move(k1);
      run.max_wall_flux = std::max(run.max_wall_flux, rep.max_wall_flux_rate);
      run.truncation_leak += rep.truncation_leak;

      const MomentSet<double> m = compute_moments(k.f, grid, s);
      FluidStateD f1 = ns_viscous_step(ns_hyperbolic_step(fl, tg.dt, grid), tg.dt, grid);
      const auto [dpk, dpf] = momentum_exchange(m.rho, m.u, f1.n, f1.v, tg.dt, grid);
      run.max_exchange_antisymmetry = std::max(run.max_exchange_antisymmetry, std::abs(dpk + dpf));
      f1.v = implicit_drag_velocity(m.rho, m.u, f1.n, f1.v, tg.dt);
      fl = std::move(f1);

      run.kinetic_mass_drift = std::max(run.kinetic_mass_drift, std::abs(quad_xv(grid, k.f) - mass0));
      run.fluid_mass_drift = std::max(run.fluid_mass_drift, std::abs(fluid_mass(fl, grid) - fmass0));
      if (step % tg.steps_per_sample == 0) {
        const int sample = static_cast<int>(step / tg.steps_per_sample);
        const double t = cfg.t_final * sample / cfg.samples;
        k.t = t;
        fl.t = t;
        record(t, sample);
      }
    }
  } catch (const SolverError& e) {
    std::ostringstream os;
    os << e.what() << " (eps " << eps << ", step " << step << ")";
    if (!dump_dir.empty()) {
      ensure_directory(dump_dir);
      const std::string stem = dump_dir + "/failure_state";
      write_state(stem, {{"f", k.f}, {"n", fl.n}, {"v", fl.v}},
                  {{"eps", eps}, {"step", step}, {"t", k.t}, {"error", e.what()}});
      os << "; state dumped to " << stem << ".bin";
    }
    throw SolverError(os.str());
  }
  run.final_kinetic = k;
  run.final_fluid = fl;
  run.audit = entropy_inequality_audit(run.reports, eps, Grid::dim());
  run.seconds = seconds_since(t0);
  return run;
}

std::pair<double, double> fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_log_log: need two or more points");
  const Index n = static_cast<Index>(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Index i = 0; i < n; ++i) {
    A(i, 0) = std::log(x[static_cast<std::size_t>(i)]);
    A(i, 1) = 1;
    b(i) = std::log(y[static_cast<std::size_t>(i)]);
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  return {c(0), c(1)};
}

ConvergenceTable run_convergence(const ExperimentConfig& cfg) {
  if (cfg.eps_list.size() < 3) throw ConfigError("run_convergence: eps_list needs at least 3 entries");
  ConvergenceTable table;
  table.reference = run_limit(cfg, SolverMode::LimitDirect);
  const Grid grid = cfg.grid();

  const std::size_t n = cfg.eps_list.size();
  std::vector<CoupledRun> runs(n);
  std::vector<std::exception_ptr> errors(n);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(n, cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : hw);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          runs[i] = run_coupled(cfg, cfg.eps_list[i], &table.reference);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  table.min_ck_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const CoupledRun& r = runs[i];
    ConvergenceRow row;
    row.eps = r.eps;
    for (std::size_t s = 0; s < r.moment_samples.size(); ++s) {
      const TwoPhaseStateD& a = r.moment_samples[s];
      const TwoPhaseStateD& b = table.reference.samples[s];
      row.sup_H = std::max(row.sup_H, relative_entropy(a, b, grid));
      row.sup_L1_rho = std::max(row.sup_L1_rho, l1_distance(grid, a.rho, b.rho));
      row.sup_L1_n = std::max(row.sup_L1_n, l1_distance(grid, a.fluid.n, b.fluid.n));
    }
    row.f_to_M_l1 = r.gaps.back().l1;
    for (const auto& g : r.gaps) table.min_ck_margin = std::min(table.min_ck_margin, g.ck_margin);
    table.rows.push_back(row);
    table.run_seconds.push_back(r.seconds);
  }

  // The discrete Maxwellian misses its moments by ~1e-12 on typical grids, so H
  // of an exact equilibrium sits near (1e-12)^2 * mass. Anything below this floor
  // is round-off and a log-log fit through it would be meaningless.
  const double floor_H = 1e-20 * quad_x(grid, table.reference.samples.front().rho);
  std::vector<double> xs, ys;
  for (const auto& row : table.rows) {
    xs.push_back(row.eps);
    ys.push_back(row.sup_H);
    if (!(row.sup_H > floor_H)) table.degenerate = true;
  }
  if (!table.degenerate) std::tie(table.slope, table.intercept) = fit_log_log(xs, ys);
  else table.slope = table.intercept = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 1; i < n; ++i) {
    if (!(table.rows[i].sup_H < table.rows[i - 1].sup_H)) table.monotone = false;
    table.f_to_M_ratios.push_back(table.rows[i].f_to_M_l1 / table.rows[i - 1].f_to_M_l1);
  }
  return table;
}

json summary_json(const CoupledRun& r) {
  json j;
  j["eps"] = r.eps;
  j["dt"] = r.dt;
  j["steps"] = r.steps;
  j["seconds"] = r.seconds;
  j["kinetic_mass_drift"] = r.kinetic_mass_drift;
  j["fluid_mass_drift"] = r.fluid_mass_drift;
  j["max_wall_flux"] = r.max_wall_flux;
  j["max_exchange_antisymmetry"] = r.max_exchange_antisymmetry;
  j["truncation_leak"] = r.truncation_leak;
  j["audit"] = {{"F0", r.audit.F0},
                {"mass0", r.audit.mass0},
                {"worst_slack_theorem", r.audit.worst_slack_theorem},
                {"worst_slack_sharp", r.audit.worst_slack_sharp},
                {"inferred_c_modified", r.audit.inferred_c_modified},
                {"min_D1", r.audit.min_D1},
                {"min_D2", r.audit.min_D2}};
  return j;
}

json summary_json(const LimitRun& r) {
  json j;
  j["mode"] = to_string(r.mode);
  j["dt"] = r.dt;
  j["steps"] = r.steps;
  j["seconds"] = r.seconds;
  j["rho_mass_drift"] = r.rho_mass_drift;
  j["fluid_mass_drift"] = r.fluid_mass_drift;
  j["max_exchange_antisymmetry"] = r.max_exchange_antisymmetry;
  j["min_one_plus_h"] = r.positivity.min_one_plus_h;
  j["characteristic_deviation"] = r.positivity.max_rel_deviation;
  json p = json::array();
  for (const auto& it : r.picard)
    p.push_back({{"m", it.m}, {"cauchy_l2", it.cauchy_l2},
                 {"contraction_ratio", std::isnan(it.contraction_ratio) ? json(nullptr) : json(it.contraction_ratio)}});
  j["picard"] = p;
  return j;
}

json summary_json(const ConvergenceTable& t) {
  json j;
  j["slope"] = t.degenerate ? json(nullptr) : json(t.slope);
  j["intercept"] = t.degenerate ? json(nullptr) : json(t.intercept);
  j["degenerate"] = t.degenerate;
  j["monotone"] = t.monotone;
  j["f_to_M_ratios"] = t.f_to_M_ratios;
  j["min_ck_margin"] = t.min_ck_margin;
  j["run_seconds"] = t.run_seconds;
  j["reference"] = summary_json(t.reference);
  return j;
}

}  // namespace kinfluid::harness
