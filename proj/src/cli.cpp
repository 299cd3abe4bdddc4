#include "marpo/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

#include "marpo/checks.hpp"
#include "marpo/csv.hpp"
#include "marpo/galerkin.hpp"
#include "marpo/identify.hpp"
#include "marpo/reaction.hpp"
#include "marpo/solver.hpp"
#include "marpo/tangent.hpp"
#include "marpo/transport.hpp"

namespace marpo {

namespace {

namespace fs = std::filesystem;

std::string snapshot_name(const std::string& dir, const std::string& prefix,
                          int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%06d.csv", prefix.c_str(), index);
  return dir + "/" + buf;
}

void write_snapshot(const std::string& path, const Grid& grid,
                    const TracerState& y) {
  CsvWriter csv(path, "cell_i,cell_j,cell_k,y1,y2");
  for (int c = 0; c < grid.cells(); ++c) {
    csv.field(grid.cell_i(c))
        .field(grid.cell_j(c))
        .field(grid.cell_layer(c))
        .field(y.y1[c])
        .field(y.y2[c]);
    csv.endrow();
  }
}

void write_snapshots(const std::string& dir, const std::string& prefix,
                     const Grid& grid, const Trajectory& traj, int stride) {
  for (int k = 0; k <= traj.steps; ++k)
    if (k % stride == 0 || k == traj.steps)
      write_snapshot(snapshot_name(dir, prefix, k), grid, traj.states[k]);
}

void write_diagnostics(const std::string& path, const Grid& grid,
                       const Environment& env, const ModelParams& params,
                       const Trajectory& traj) {
  CsvWriter csv(path, "t,total_mass,l2_y,h1_y,boundary_exchange");
  for (int k = 0; k <= traj.steps; ++k) {
    double t = k * traj.dt;
    const TracerState& y = traj.states[k];
    ReactionOutput r = reaction_eval(y, grid, env, params, t);
    double exchange = 0.0;
    for (size_t f = 0; f < grid.facets().size(); ++f)
      exchange += r.b1[f] * grid.facets()[f].area;
    csv.field(t)
        .field(total_mass(y, grid))
        .field(l2_norm(grid, y))
        .field(h1_norm(grid, y))
        .field(exchange);
    csv.endrow();
  }
}

void write_picard_report(const std::string& path, const PicardReport& rep) {
  CsvWriter csv(path, "iter,weighted_residual,ratio,wallclock_ms");
  for (size_t m = 0; m < rep.residuals.size(); ++m) {
    csv.field(static_cast<int>(m));
    csv.field(rep.residuals[m]);
    if (m == 0)
      csv.field("nan");
    else
      csv.field(rep.ratios[m - 1]);
    csv.field(rep.iter_ms[m]);
    csv.endrow();
  }
}

void write_energy_reports(const std::string& path,
                          const std::vector<EnergyReport>& reports) {
  CsvWriter csv(path, "lhs,rhs,C,C1,C2,margin,pass");
  for (const EnergyReport& er : reports) {
    csv.field(er.lhs)
        .field(er.rhs)
        .field(er.constants.C)
        .field(er.constants.C1)
        .field(er.constants.C2)
        .field(er.margin)
        .field(er.pass ? 1 : 0);
    csv.endrow();
  }
}

int cmd_forward(const RunConfig& cfg, const Assembled& a) {
  Trajectory traj;
  PicardReport rep;
  try {
    std::tie(traj, rep) = picard_solve(a.y0, *a.env, *a.grid, cfg.params,
                                       cfg.T, cfg.steps, cfg.solver);
  } catch (const PicardDivergence& e) {
    write_picard_report(cfg.output_dir + "/picard_report.csv", e.report);
    std::cerr << e.what() << "\n";
    return kExitSolverFailure;
  }
  write_snapshots(cfg.output_dir, "y", *a.grid, traj, cfg.snapshot_stride);
  write_diagnostics(cfg.output_dir + "/diagnostics.csv", *a.grid, *a.env,
                    cfg.params, traj);
  write_picard_report(cfg.output_dir + "/picard_report.csv", rep);
  std::cout << "forward: " << rep.iterations << " picard iterations, mass "
            << total_mass(traj.states.back(), *a.grid) << "\n";
  return kExitOk;
}

int cmd_picard(const RunConfig& cfg, const Assembled& a) {
  PicardReport rep;
  try {
    auto [traj, r] = picard_solve(a.y0, *a.env, *a.grid, cfg.params, cfg.T,
                                  cfg.steps, cfg.solver);
    (void)traj;
    rep = std::move(r);
  } catch (const PicardDivergence& e) {
    write_picard_report(cfg.output_dir + "/picard_report.csv", e.report);
    std::cerr << e.what() << "\n";
    return kExitSolverFailure;
  }
  write_picard_report(cfg.output_dir + "/picard_report.csv", rep);
  std::cout << "picard: converged in " << rep.iterations
            << " iterations, L_A = " << rep.L_A << "\n";
  return kExitOk;
}

int cmd_tangent(const RunConfig& cfg, const Assembled& a,
                const CommandFlags& flags) {
  ParamName pn = param_from_string(flags.param);
  PicardConfig tight = cfg.solver;
  tight.tol = std::min(tight.tol, 1e-12);
  if (tight.plain_tol <= 0.0) tight.plain_tol = tight.tol;
  auto [traj, rep] = picard_solve(a.y0, *a.env, *a.grid, cfg.params, cfg.T,
                                  cfg.steps, tight);
  (void)rep;
  Trajectory h = tangent_solve(traj, *a.env, *a.grid, cfg.params, pn);
  write_snapshots(cfg.output_dir, "h", *a.grid, h, cfg.snapshot_stride);

  if (flags.fd_check) {
    double p0 = param_get(cfg.params, pn);
    double delta = 1e-4 * p0;
    ModelParams pp = cfg.params, pm = cfg.params;
    param_set(pp, pn, p0 + delta);
    param_set(pm, pn, p0 - delta);
    auto [tp, rp] = picard_solve(a.y0, *a.env, *a.grid, pp, cfg.T, cfg.steps, tight);
    auto [tm, rm] = picard_solve(a.y0, *a.env, *a.grid, pm, cfg.T, cfg.steps, tight);
    (void)rp;
    (void)rm;
    double href = 0.0;
    for (int k = 0; k <= cfg.steps; ++k)
      href = std::max(href, l2_norm(*a.grid, h.states[k]));
    CsvWriter csv(cfg.output_dir + "/fd_check.csv",
                  "t_index,l2_tangent,l2_fd,rel_error");
    double worst = 0.0;
    for (int k = 0; k <= cfg.steps; ++k) {
      TracerState fd(a.grid->cells());
      for (int c = 0; c < a.grid->cells(); ++c) {
        fd.y1[c] = (tp.states[k].y1[c] - tm.states[k].y1[c]) / (2.0 * delta);
        fd.y2[c] = (tp.states[k].y2[c] - tm.states[k].y2[c]) / (2.0 * delta);
      }
      TracerState diff(a.grid->cells());
      for (int c = 0; c < a.grid->cells(); ++c) {
        diff.y1[c] = fd.y1[c] - h.states[k].y1[c];
        diff.y2[c] = fd.y2[c] - h.states[k].y2[c];
      }
      double rel = href > 0.0 ? l2_norm(*a.grid, diff) / href : 0.0;
      worst = std::max(worst, rel);
      csv.field(k)
          .field(l2_norm(*a.grid, h.states[k]))
          .field(l2_norm(*a.grid, fd))
          .field(rel);
      csv.endrow();
    }
    std::cout << "tangent fd-check: max relative error " << worst << "\n";
    if (worst > 1e-3) {
      std::cerr << "tangent fd-check exceeded 1e-3\n";
      return kExitSolverFailure;
    }
  }
  return kExitOk;
}

int cmd_identify(const RunConfig& cfg, const Assembled& a,
                 const CommandFlags& flags) {
  std::vector<ParamName> active;
  for (const std::string& s : cfg.identify_active)
    active.push_back(param_from_string(s));

  if (flags.synth) {
    SamplingPlan plan = plan_uniform(*a.grid, cfg.steps, 10);
    Observation obs = synthesize_observations(
        cfg.params, *a.env, *a.grid, a.y0, plan, flags.synth_sigma, flags.seed,
        cfg.T, cfg.steps, cfg.solver);
    std::string path = cfg.output_dir + "/observations.csv";
    write_observations(path, obs, *a.grid);
    std::cout << "identify: wrote " << obs.size() << " observations to "
              << path << "\n";
    return kExitOk;
  }

  if (flags.obs_path.empty()) {
    std::cerr << "identify: --obs FILE is required (or --synth)\n";
    return kExitConfigError;
  }
  Observation obs = read_observations(flags.obs_path, *a.grid);
  FitOptions opts;
  opts.max_iter = cfg.identify_max_iter;
  opts.solver = cfg.solver;
  if (opts.solver.plain_tol <= 0.0) opts.solver.plain_tol = opts.solver.tol;
  FitResult fit = gauss_newton(cfg.params, active, obs, *a.env, *a.grid, a.y0,
                               cfg.T, cfg.steps, opts);

  std::string header = "iter,misfit,step_norm";
  for (ParamName p : active) header += ",p_" + param_to_string(p);
  CsvWriter csv(cfg.output_dir + "/fit.csv", header);
  for (size_t it = 0; it < fit.misfit_history.size(); ++it) {
    csv.field(static_cast<int>(it))
        .field(fit.misfit_history[it])
        .field(fit.step_norms[it]);
    for (double v : fit.param_history[it]) csv.field(v);
    csv.endrow();
  }
  std::cout << "identify: " << (fit.converged ? "converged" : "stopped")
            << ", final misfit " << fit.misfit_history.back() << "\n";
  return kExitOk;
}

int cmd_galerkin(const RunConfig& cfg, const Assembled& a,
                 const CommandFlags& flags) {
  GalerkinConfig gcfg;
  gcfg.mx = std::min(flags.modes, a.grid->nx());
  gcfg.my = std::min(flags.modes, a.grid->ny());
  gcfg.mz = std::min(flags.modes, a.grid->column_layers(0));
  GalerkinSystem sys(*a.grid, *a.env, cfg.params, gcfg);
  std::vector<GalerkinCoeffs> traj = sys.solve(a.y0, cfg.T, cfg.steps);

  {
    CsvWriter csv(cfg.output_dir + "/galerkin_coeffs.csv",
                  "t_index,kx,ky,kz,u1,u2");
    for (int k = 0; k <= cfg.steps; ++k) {
      if (k % cfg.snapshot_stride != 0 && k != cfg.steps) continue;
      for (int kx = 0; kx < gcfg.mx; ++kx)
        for (int ky = 0; ky < gcfg.my; ++ky)
          for (int kz = 0; kz < gcfg.mz; ++kz) {
            int m = sys.mode_index(kx, ky, kz);
            csv.field(k).field(kx).field(ky).field(kz);
            csv.field(traj[k].u1[m]).field(traj[k].u2[m]);
            csv.endrow();
          }
    }
  }

  if (flags.compare) {
    auto [fv, rep] = picard_solve(a.y0, *a.env, *a.grid, cfg.params, cfg.T,
                                  cfg.steps, cfg.solver);
    (void)rep;
    CsvWriter csv(cfg.output_dir + "/galerkin_vs_fv.csv",
                  "t_index,l2_diff,l2_fv");
    double last_rel = 0.0;
    for (int k = 0; k <= cfg.steps; ++k) {
      TracerState g = sys.reconstruct(traj[k]);
      TracerState diff(a.grid->cells());
      for (int c = 0; c < a.grid->cells(); ++c) {
        diff.y1[c] = g.y1[c] - fv.states[k].y1[c];
        diff.y2[c] = g.y2[c] - fv.states[k].y2[c];
      }
      double dn = l2_norm(*a.grid, diff);
      double fn = l2_norm(*a.grid, fv.states[k]);
      csv.field(k).field(dn).field(fn);
      csv.endrow();
      last_rel = fn > 0.0 ? dn / fn : dn;
    }
    std::cout << "galerkin: final relative L2 discrepancy vs picard "
              << last_rel << "\n";
  }
  return kExitOk;
}

int cmd_check(const RunConfig& cfg, const Assembled& a,
              const CommandFlags& flags) {
  std::vector<EnergyReport> energy_reports;
  std::vector<checks::CheckRow> rows =
      checks::run_suite(flags.suite, flags.seed, a, cfg, &energy_reports);

  CsvWriter csv(cfg.output_dir + "/checks.csv",
                "suite,name,value,threshold,pass");
  CsvWriter consts(cfg.output_dir + "/constants.csv", "name,value");
  bool ok = true;
  for (const checks::CheckRow& r : rows) {
    if (r.constant_row) {
      consts.field(r.name).field(r.value);
      consts.endrow();
      std::cout << r.name << " = " << r.value << "\n";
      continue;
    }
    csv.field(r.suite).field(r.name).field(r.value).field(r.threshold);
    csv.field(r.pass ? 1 : 0);
    csv.endrow();
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.suite << "/" << r.name
              << " value=" << r.value << " threshold=" << r.threshold << "\n";
    ok = ok && r.pass;
  }
  if (!energy_reports.empty())
    write_energy_reports(cfg.output_dir + "/energy_report.csv",
                         energy_reports);
  return ok ? kExitOk : kExitCheckFailure;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg,
                const CommandFlags& flags) {
  try {
    Assembled a = assemble(cfg);
    fs::create_directories(cfg.output_dir);
    if (command == "forward") return cmd_forward(cfg, a);
    if (command == "picard") return cmd_picard(cfg, a);
    if (command == "tangent") return cmd_tangent(cfg, a, flags);
    if (command == "identify") return cmd_identify(cfg, a, flags);
    if (command == "galerkin") return cmd_galerkin(cfg, a, flags);
    if (command == "check") return cmd_check(cfg, a, flags);
    std::cerr << "unknown command: " << command << "\n";
    return kExitConfigError;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
  } catch (const SolverError& e) {
    std::cerr << e.what() << "\n";
    return kExitSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitSolverFailure;
  }
}

}  // namespace marpo
