#include "marpo/solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace marpo {

StepSolver::StepSolver(const Grid& grid, const Environment& env, double dt,
                       double gamma)
    : grid_(&grid), dt_(dt), gamma_(gamma), vol_(grid.cell_volume()) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (gamma < 0.0) throw std::invalid_argument("step: gamma must be >= 0");
  TransportOperator op(grid, env);
  base_triplets_ = op.triplets();
  int n = grid.cells();
  for (int c = 0; c < n; ++c) base_triplets_.emplace_back(c, c, vol_ / dt);
  S_.resize(n, n);
  S_.setFromTriplets(base_triplets_.begin(), base_triplets_.end());
  lu_ = std::make_unique<Eigen::SparseLU<SparseMat>>();
  lu_->compute(S_);
  if (lu_->info() != Eigen::Success)
    throw SolverError("step: factorization of the step matrix failed");
}

Eigen::VectorXd StepSolver::assemble_rhs(const std::vector<double>& y_k,
                                         const std::vector<double>* f,
                                         const std::vector<double>* g) const {
  int n = grid_->cells();
  Eigen::VectorXd rhs(n);
  for (int c = 0; c < n; ++c) rhs[c] = vol_ / dt_ * y_k[c];
  if (f)
    for (int c = 0; c < n; ++c) rhs[c] += vol_ * (*f)[c];
  if (g) {
    const auto& facets = grid_->facets();
    for (size_t i = 0; i < facets.size(); ++i)
      rhs[facets[i].cell] += facets[i].area * (*g)[i];
  }
  return rhs;
}

Eigen::VectorXd StepSolver::solve_component(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = lu_->solve(rhs);
  if (lu_->info() != Eigen::Success)
    throw SolverError("step: linear solve failed");
  double rhs_norm = rhs.norm();
  if (rhs_norm > 0.0) {
    double resid = (S_ * x - rhs).norm() / rhs_norm;
    if (!(resid <= 1e-12))
      throw SolverError("step: linear solve residual " +
                        std::to_string(resid) + " above 1e-12");
  }
  return x;
}

Eigen::VectorXd StepSolver::solve_monotone(const Eigen::VectorXd& rhs,
                                           const Eigen::VectorXd& x0) const {
  // Newton on S x + V m(x) = rhs; m is diagonal so its Jacobian is the
  // cellwise scalar derivative.
  int n = grid_->cells();
  Eigen::VectorXd x = x0;
  double rhs_scale = std::max(rhs.norm(), 1e-300);
  auto residual = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd r = S_ * v - rhs;
    for (int c = 0; c < n; ++c) r[c] += vol_ * monotone_scalar(v[c], gamma_);
    return r;
  };
  Eigen::VectorXd res = residual(x);
  for (int it = 0; it < 50; ++it) {
    if (res.norm() <= 1e-12 * rhs_scale) return x;
    std::vector<Eigen::Triplet<double>> trip = base_triplets_;
    for (int c = 0; c < n; ++c)
      trip.emplace_back(c, c, vol_ * monotone_scalar_derivative(x[c], gamma_));
    SparseMat J(n, n);
    J.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<SparseMat> lu(J);
    if (lu.info() != Eigen::Success)
      throw SolverError("step: Newton factorization failed");
    Eigen::VectorXd dx = lu.solve(-res);
    double step = 1.0;
    for (int half = 0; half < 30; ++half) {
      Eigen::VectorXd xn = x + step * dx;
      Eigen::VectorXd rn = residual(xn);
      if (rn.norm() < res.norm()) {
        x = xn;
        res = rn;
        break;
      }
      step *= 0.5;
      if (half == 29)
        throw SolverError("step: Newton line search stalled");
    }
  }
  if (res.norm() <= 1e-12 * rhs_scale) return x;
  throw SolverError("step: Newton for the monotone term did not converge");
}

TracerState StepSolver::step(const TracerState& y_k,
                             const TracerState* f_density,
                             const FacetPair* g) const {
  int n = grid_->cells();
  TracerState out(n);
  Eigen::VectorXd rhs1 = assemble_rhs(y_k.y1, f_density ? &f_density->y1 : nullptr,
                                      g ? &g->g1 : nullptr);
  Eigen::VectorXd rhs2 = assemble_rhs(y_k.y2, f_density ? &f_density->y2 : nullptr,
                                      g ? &g->g2 : nullptr);
  Eigen::VectorXd x1, x2;
  if (gamma_ == 0.0) {
    x1 = solve_component(rhs1);
    x2 = solve_component(rhs2);
  } else {
    Eigen::VectorXd init1 =
        Eigen::Map<const Eigen::VectorXd>(y_k.y1.data(), n);
    Eigen::VectorXd init2 =
        Eigen::Map<const Eigen::VectorXd>(y_k.y2.data(), n);
    x1 = solve_monotone(rhs1, init1);
    x2 = solve_monotone(rhs2, init2);
  }
  Eigen::Map<Eigen::VectorXd>(out.y1.data(), n) = x1;
  Eigen::Map<Eigen::VectorXd>(out.y2.data(), n) = x2;
  return out;
}

Trajectory solve_frozen(const Trajectory& z, const Environment& env,
                        const Grid& grid, const ModelParams& params,
                        const TracerState& y0, const ExternalSource& rhs,
                        double gamma, const StepSolver* reuse_stepper) {
  int steps = z.steps;
  double dt = z.dt;
  std::unique_ptr<StepSolver> own;
  const StepSolver* stepper = reuse_stepper;
  if (!stepper) {
    own = std::make_unique<StepSolver>(grid, env, dt, gamma);
    stepper = own.get();
  }

  Trajectory out;
  out.dt = dt;
  out.T = z.T;
  out.steps = steps;
  out.states.resize(steps + 1);
  out.states[0] = y0;

  int n = grid.cells();
  int nf = static_cast<int>(grid.facets().size());
  TracerState f(n);
  FacetPair g{std::vector<double>(nf, 0.0), std::vector<double>(nf, 0.0)};
  for (int k = 0; k < steps; ++k) {
    double t_next = (k + 1) * dt;
    ReactionOutput r = reaction_eval(z.states[k + 1], grid, env, params, t_next);
    const TracerState* fx = rhs.f_at(k + 1);
    const FacetPair* gx = rhs.g_at(k + 1);
    for (int c = 0; c < n; ++c) {
      f.y1[c] = -r.d1[c] + (fx ? fx->y1[c] : 0.0);
      f.y2[c] = -r.d2[c] + (fx ? fx->y2[c] : 0.0);
    }
    for (int i = 0; i < nf; ++i) {
      g.g1[i] = -r.b1[i] + (gx ? gx->g1[i] : 0.0);
      g.g2[i] = -r.b2[i] + (gx ? gx->g2[i] : 0.0);
    }
    out.states[k + 1] = stepper->step(out.states[k], &f, &g);
  }
  return out;
}

double weighted_norm(const std::vector<TracerState>& delta, double dt,
                     double C, const Grid& grid) {
  if (C < 0.0) throw std::invalid_argument("weighted_norm: C must be >= 0");
  double best = 0.0;
  for (size_t k = 0; k < delta.size(); ++k) {
    double l2 = l2_norm(grid, delta[k]);
    double v = l2 * l2 * std::exp(-C * (k * dt));
    best = std::max(best, v);
  }
  return std::sqrt(best);
}

double weighted_norm_diff(const Trajectory& a, const Trajectory& b, double C,
                          const Grid& grid) {
  double best = 0.0;
  for (size_t k = 0; k < a.states.size(); ++k) {
    double s = 0.0;
    const TracerState& ya = a.states[k];
    const TracerState& yb = b.states[k];
    for (int c = 0; c < ya.size(); ++c) {
      double d1 = ya.y1[c] - yb.y1[c];
      double d2 = ya.y2[c] - yb.y2[c];
      s += d1 * d1 + d2 * d2;
    }
    s *= grid.cell_volume();
    best = std::max(best, s * std::exp(-C * (k * a.dt)));
  }
  return std::sqrt(best);
}

double plain_sup_norm_diff(const Trajectory& a, const Trajectory& b,
                           const Grid& grid) {
  return weighted_norm_diff(a, b, 0.0, grid);
}

double contraction_bound(double L1, double epsilon, double T, double kappa_min,
                         double C) {
  return std::sqrt(1.0 / C * (L1 * L1 / (2.0 * epsilon)) *
                   std::exp(2.0 * T * kappa_min));
}

ResolvedPicard resolve_picard(const PicardConfig& cfg, const Environment& env,
                              const Grid& grid, const ModelParams& params,
                              double T) {
  ResolvedPicard r;
  r.lip = lipschitz_constants(params, grid);
  double kmin = env.kappa_min();
  r.epsilon = cfg.epsilon > 0.0 ? cfg.epsilon : kmin / 4.0;
  if (!(r.epsilon > 0.0 && r.epsilon < kmin / 2.0))
    throw std::invalid_argument(
        "picard: epsilon must satisfy 0 < epsilon < kappa_min/2");
  double threshold =
      r.lip.L1 * r.lip.L1 / (2.0 * r.epsilon) * std::exp(2.0 * T * kmin);
  // threshold degenerates to 0 when the reaction vanishes (L1 = 0); any
  // positive weight keeps the norm well-defined there
  r.weight_C =
      cfg.weight_C > 0.0 ? cfg.weight_C : std::max(4.0 * threshold, 1.0e-8);
  if (!(r.weight_C > 0.0))
    throw std::invalid_argument("picard: weight_C must be positive");
  r.L_A = contraction_bound(r.lip.L1, r.epsilon, T, kmin, r.weight_C);
  return r;
}

std::pair<Trajectory, PicardReport> picard_solve(
    const TracerState& y0, const Environment& env, const Grid& grid,
    const ModelParams& params, double T, int steps, const PicardConfig& cfg,
    const Trajectory* initial_iterate) {
  if (steps < 1) throw std::invalid_argument("picard: steps must be >= 1");
  ResolvedPicard rp = resolve_picard(cfg, env, grid, params, T);

  PicardReport report;
  report.L_A = rp.L_A;
  report.L1 = rp.lip.L1;
  report.epsilon = rp.epsilon;
  report.weight_C = rp.weight_C;

  Trajectory z = initial_iterate ? *initial_iterate
                                 : Trajectory::constant(y0, T, steps);
  if (initial_iterate &&
      (z.steps != steps || static_cast<int>(z.states.size()) != steps + 1))
    throw std::invalid_argument("picard: initial iterate time grid mismatch");

  StepSolver stepper(grid, env, T / steps, cfg.gamma);

  double wref = -1.0, pref = -1.0;
  for (int m = 0; m < cfg.max_iter; ++m) {
    auto t0 = std::chrono::steady_clock::now();
    Trajectory z_new =
        solve_frozen(z, env, grid, params, y0, {}, cfg.gamma, &stepper);
    double wres = weighted_norm_diff(z_new, z, rp.weight_C, grid);
    double pres = plain_sup_norm_diff(z_new, z, grid);
    auto t1 = std::chrono::steady_clock::now();
    report.residuals.push_back(wres);
    report.plain_residuals.push_back(pres);
    report.iter_ms.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());
    if (m > 0)
      report.ratios.push_back(report.residuals[m] / report.residuals[m - 1]);
    z = std::move(z_new);
    if (m == 0) {
      wref = wres;
      pref = pres;
      if (wres == 0.0 && pres == 0.0) {  // z0 already the fixed point
        report.converged = true;
        report.iterations = 0;
        return {std::move(z), std::move(report)};
      }
      continue;
    }
    bool weighted_ok = wres <= cfg.tol * wref;
    bool plain_ok = cfg.plain_tol <= 0.0 || pres <= cfg.plain_tol * pref;
    if (weighted_ok && plain_ok) {
      report.converged = true;
      report.iterations = m;
      return {std::move(z), std::move(report)};
    }
  }
  report.iterations = cfg.max_iter - 1;
  std::string msg = "picard: no convergence within max_iter = " +
                    std::to_string(cfg.max_iter) +
                    " (last weighted residual " +
                    std::to_string(report.residuals.back()) + ")";
  throw PicardDivergence(msg, std::move(report));
}

Trajectory tangent_solve(const Trajectory& y, const Environment& env,
                         const Grid& grid, const ModelParams& params,
                         const std::array<double, 7>& direction,
                         double inner_tol) {
  int steps = y.steps;
  double dt = y.dt;
  int n = grid.cells();
  int nf = static_cast<int>(grid.facets().size());
  StepSolver stepper(grid, env, dt, 0.0);

  Trajectory h;
  h.dt = dt;
  h.T = y.T;
  h.steps = steps;
  h.states.assign(steps + 1, TracerState(n));

  double vol = grid.cell_volume();
  const auto& facets = grid.facets();

  for (int k = 0; k < steps; ++k) {
    double t_next = (k + 1) * dt;
    const TracerState& y_next = y.states[k + 1];

    // parameter source, combined over the direction
    std::vector<double> f1(n, 0.0), f2(n, 0.0), g1(nf, 0.0), g2(nf, 0.0);
    for (size_t ip = 0; ip < kAllParams.size(); ++ip) {
      double w = direction[ip];
      if (w == 0.0) continue;
      ParamSourceSlice s =
          param_source_at(y_next, kAllParams[ip], grid, env, params, t_next);
      for (int c = 0; c < n; ++c) {
        f1[c] += w * s.f1[c];
        f2[c] += w * s.f2[c];
      }
      for (int i = 0; i < nf; ++i) {
        g1[i] += w * s.g1[i];
        g2[i] += w * s.g2[i];
      }
    }

    Eigen::VectorXd base1(n), base2(n);
    for (int c = 0; c < n; ++c) {
      base1[c] = vol / dt * h.states[k].y1[c] + vol * f1[c];
      base2[c] = vol / dt * h.states[k].y2[c] + vol * f2[c];
    }
    for (int i = 0; i < nf; ++i) {
      base1[facets[i].cell] += facets[i].area * g1[i];
      base2[facets[i].cell] += facets[i].area * g2[i];
    }

    // inner fixed point: the Jacobian action must hold at the new level so
    // the march is the exact derivative of the implicit forward recursion
    TracerState h_next = h.states[k];
    bool done = false;
    for (int inner = 0; inner < 200; ++inner) {
      JacobianResult jac =
          state_jacobian_apply(y_next, h_next, grid, env, params, t_next);
      Eigen::VectorXd rhs1 = base1, rhs2 = base2;
      for (int c = 0; c < n; ++c) {
        rhs1[c] -= vol * jac.d1[c];
        rhs2[c] -= vol * jac.d2[c];
      }
      for (int i = 0; i < nf; ++i) {
        rhs1[facets[i].cell] -= facets[i].area * jac.b1[i];
        rhs2[facets[i].cell] -= facets[i].area * jac.b2[i];
      }
      Eigen::VectorXd x1 = stepper.solve_component(rhs1);
      Eigen::VectorXd x2 = stepper.solve_component(rhs2);
      double diff = 0.0, scale = 0.0;
      for (int c = 0; c < n; ++c) {
        double a = x1[c] - h_next.y1[c];
        double b = x2[c] - h_next.y2[c];
        diff += a * a + b * b;
        scale += x1[c] * x1[c] + x2[c] * x2[c];
      }
      Eigen::Map<Eigen::VectorXd>(h_next.y1.data(), n) = x1;
      Eigen::Map<Eigen::VectorXd>(h_next.y2.data(), n) = x2;
      if (diff <= inner_tol * inner_tol * std::max(scale, 1e-300) ||
          (diff == 0.0 && scale == 0.0)) {
        done = true;
        break;
      }
    }
    if (!done)
      throw SolverError("tangent: inner Jacobian iteration did not converge");
    h.states[k + 1] = std::move(h_next);
  }
  return h;
}

Trajectory tangent_solve(const Trajectory& y, const Environment& env,
                         const Grid& grid, const ModelParams& params,
                         ParamName param, double inner_tol) {
  std::array<double, 7> dir{};
  for (size_t i = 0; i < kAllParams.size(); ++i)
    if (kAllParams[i] == param) dir[i] = 1.0;
  return tangent_solve(y, env, grid, params, dir, inner_tol);
}

EnergyConstants energy_constants(double L1, double epsilon, double T,
                                 double kappa_min) {
  EnergyConstants ec;
  ec.c1 = 2.0 * kappa_min + L1 * L1 / (2.0 * epsilon);
  ec.C1 = std::exp(T * ec.c1) * std::max(1.0, 1.0 / (2.0 * epsilon));
  ec.C2 = (ec.C1 * T * ec.c1 + std::max(1.0 / (2.0 * epsilon), 1.0)) /
          (2.0 * (kappa_min - 2.0 * epsilon));
  ec.C = std::sqrt(ec.C1) + std::sqrt(ec.C2);
  return ec;
}

EnergyReport energy_estimate_check(const Trajectory& y,
                                   const ExternalSource& forcing,
                                   const TracerState& y0, double L1,
                                   double epsilon, const Environment& env,
                                   const Grid& grid) {
  double kmin = env.kappa_min();
  if (!(epsilon > 0.0 && epsilon < kmin / 2.0))
    throw std::invalid_argument(
        "energy check: epsilon must satisfy 0 < epsilon < kappa_min/2");

  EnergyReport rep;
  rep.constants = energy_constants(L1, epsilon, y.T, kmin);

  double sup_l2 = 0.0;
  double h1_sq = 0.0;
  for (int k = 0; k <= y.steps; ++k) {
    double l2 = l2_norm(grid, y.states[k]);
    sup_l2 = std::max(sup_l2, l2);
    if (k >= 1) {
      double h1 = h1_norm(grid, y.states[k]);
      h1_sq += y.dt * h1 * h1;
    }
  }
  rep.lhs = sup_l2 + std::sqrt(h1_sq);

  double fdual_sq = 0.0;
  if (!forcing.f.empty()) {
    DualNormSolver dual(grid);
    double vol = grid.cell_volume();
    int n = grid.cells();
    for (int k = 1; k <= y.steps; ++k) {
      const TracerState* f = forcing.f_at(k);
      if (!f) continue;
      TracerState r(n);
      for (int c = 0; c < n; ++c) {
        r.y1[c] = vol * f->y1[c];
        r.y2[c] = vol * f->y2[c];
      }
      double d = dual.dual_norm(r);
      fdual_sq += y.dt * d * d;
    }
  }
  rep.f_dual = std::sqrt(fdual_sq);
  rep.rhs = rep.constants.C * (rep.f_dual + l2_norm(grid, y0));
  rep.margin = rep.rhs - rep.lhs;
  rep.pass = rep.lhs <= rep.rhs * (1.0 + 1e-12);
  return rep;
}

}  // namespace marpo
