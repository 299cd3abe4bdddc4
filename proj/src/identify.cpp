#include "marpo/identify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace marpo {

SamplingPlan plan_uniform(const Grid& grid, int steps, int t_stride,
                          int cell_stride) {
  if (t_stride < 1 || cell_stride < 1)
    throw std::invalid_argument("sampling plan: strides must be >= 1");
  SamplingPlan plan;
  for (int k = t_stride; k <= steps; k += t_stride)
    for (int c = 0; c < grid.cells(); c += cell_stride)
      for (int comp = 1; comp <= 2; ++comp)
        plan.points.push_back({k, c, comp});
  return plan;
}

Observation synthesize_observations(const ModelParams& true_params,
                                    const Environment& env, const Grid& grid,
                                    const TracerState& y0,
                                    const SamplingPlan& plan, double sigma,
                                    std::uint64_t seed, double T, int steps,
                                    const PicardConfig& cfg) {
  if (plan.points.empty())
    throw std::invalid_argument("synthesize_observations: empty plan");
  auto [traj, report] =
      picard_solve(y0, env, grid, true_params, T, steps, cfg);
  (void)report;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Observation obs;
  obs.reserve(plan.points.size());
  for (const auto& pt : plan.points) {
    const TracerState& s = traj.states.at(pt.t_index);
    double v = pt.component == 1 ? s.y1.at(pt.cell) : s.y2.at(pt.cell);
    if (sigma > 0.0) v += sigma * noise(rng);
    obs.push_back({pt.t_index, pt.cell, pt.component, v, sigma});
  }
  return obs;
}

void write_observations(const std::string& path, const Observation& obs,
                        const Grid& grid) {
  std::ofstream out(path);
  if (!out)
    throw std::invalid_argument("observations: cannot write " + path);
  out << "t_index,i,j,k,component,value,sigma\n";
  char buf[64];
  for (const ObsSample& s : obs) {
    out << s.t_index << ',' << grid.cell_i(s.cell) << ',' << grid.cell_j(s.cell)
        << ',' << grid.cell_layer(s.cell) << ',' << s.component << ',';
    std::snprintf(buf, sizeof buf, "%.17g", s.value);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", s.sigma);
    out << buf << '\n';
  }
}

Observation read_observations(const std::string& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("observations: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("observations: empty file " + path);
  Observation obs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    auto next = [&]() {
      if (!std::getline(ls, tok, ','))
        throw std::invalid_argument("observations: short row in " + path);
      return tok;
    };
    ObsSample s;
    s.t_index = std::stoi(next());
    int i = std::stoi(next());
    int j = std::stoi(next());
    int k = std::stoi(next());
    s.component = std::stoi(next());
    s.value = std::stod(next());
    s.sigma = std::stod(next());
    int col = grid.column_index(i, j);
    if (i < 0 || i >= grid.nx() || j < 0 || j >= grid.ny() ||
        !grid.column_wet(col) || k < 0 || k >= grid.column_layers(col))
      throw std::invalid_argument("observations: sample outside the grid");
    s.cell = grid.cell_index(col, k);
    obs.push_back(s);
  }
  return obs;
}

namespace {

Eigen::VectorXd sample_trajectory(const Trajectory& traj,
                                  const Observation& obs) {
  Eigen::VectorXd v(obs.size());
  for (size_t i = 0; i < obs.size(); ++i) {
    const TracerState& s = traj.states.at(obs[i].t_index);
    v[i] = obs[i].component == 1 ? s.y1.at(obs[i].cell) : s.y2.at(obs[i].cell);
  }
  return v;
}

}  // namespace

void misfit_and_jacobian(const ModelParams& p,
                         const std::vector<ParamName>& active,
                         const Observation& obs, const Environment& env,
                         const Grid& grid, const TracerState& y0, double T,
                         int steps, const PicardConfig& cfg,
                         Eigen::VectorXd& residual,
                         Eigen::MatrixXd& jacobian) {
  auto [traj, report] = picard_solve(y0, env, grid, p, T, steps, cfg);
  (void)report;
  Eigen::VectorXd model = sample_trajectory(traj, obs);
  residual.resize(obs.size());
  for (size_t i = 0; i < obs.size(); ++i) residual[i] = model[i] - obs[i].value;

  jacobian.resize(obs.size(), active.size());
  for (size_t j = 0; j < active.size(); ++j) {
    Trajectory h = tangent_solve(traj, env, grid, p, active[j]);
    jacobian.col(j) = sample_trajectory(h, obs);
  }
}

FitResult gauss_newton(const ModelParams& p0,
                       const std::vector<ParamName>& active,
                       const Observation& obs, const Environment& env,
                       const Grid& grid, const TracerState& y0, double T,
                       int steps, const FitOptions& opts) {
  if (active.empty())
    throw std::invalid_argument("gauss_newton: empty active set");

  FitResult fit;
  fit.p = p0;
  int m = static_cast<int>(active.size());

  auto record = [&](double misfit, double step_norm) {
    fit.misfit_history.push_back(misfit);
    fit.step_norms.push_back(step_norm);
    std::vector<double> vals(m);
    for (int j = 0; j < m; ++j) vals[j] = param_get(fit.p, active[j]);
    fit.param_history.push_back(vals);
  };

  auto misfit_only = [&](const ModelParams& p) {
    auto [traj, report] = picard_solve(y0, env, grid, p, T, steps, opts.solver);
    (void)report;
    Eigen::VectorXd model = sample_trajectory(traj, obs);
    double s = 0.0;
    for (size_t i = 0; i < obs.size(); ++i) {
      double r = model[i] - obs[i].value;
      s += r * r;
    }
    return 0.5 * s;
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  misfit_and_jacobian(fit.p, active, obs, env, grid, y0, T, steps, opts.solver,
                      r, J);
  double misfit = 0.5 * r.squaredNorm();
  record(misfit, 0.0);

  double mu = 0.0;  // Levenberg damping, raised when steps fail
  for (int it = 0; it < opts.max_iter; ++it) {
    Eigen::MatrixXd N = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * r;
    Eigen::VectorXd step;
    for (int attempt = 0;; ++attempt) {
      Eigen::MatrixXd Nd = N;
      for (int j = 0; j < m; ++j) Nd(j, j) += mu;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Nd);
      step = ldlt.solve(-g);
      if (ldlt.info() == Eigen::Success && step.allFinite()) break;
      mu = mu == 0.0 ? 1e-8 * N.trace() / m : mu * 10.0;
      if (attempt > 60)
        throw SolverError("gauss_newton: normal equations unsolvable");
    }

    double pnorm = 0.0;
    for (int j = 0; j < m; ++j) {
      double v = param_get(fit.p, active[j]);
      pnorm += v * v;
    }
    pnorm = std::sqrt(pnorm);

    // step halving until the misfit decreases
    double alpha = 1.0;
    bool accepted = false;
    ModelParams p_new = fit.p;
    double misfit_new = misfit;
    for (int half = 0; half < 16; ++half) {
      p_new = fit.p;
      for (int j = 0; j < m; ++j) {
        double v = param_get(fit.p, active[j]) + alpha * step[j];
        param_set(p_new, active[j], std::max(v, opts.param_floor));
      }
      if (active.end() != std::find(active.begin(), active.end(), ParamName::Nu))
        if (p_new.nu >= 1.0) p_new.nu = 1.0 - 1e-8;
      misfit_new = misfit_only(p_new);
      if (misfit_new < misfit) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      double scale = std::max(N.trace() / m, 1e-300);
      mu = mu == 0.0 ? 1e-8 * scale : mu * 10.0;
      if (mu < 1e12 * scale) continue;
      fit.converged = false;
      return fit;  // stagnation: misfit cannot be decreased further
    }

    double step_norm = alpha * step.norm();
    fit.p = p_new;
    misfit = misfit_new;
    mu *= 0.25;
    if (mu < 1e-300) mu = 0.0;

    misfit_and_jacobian(fit.p, active, obs, env, grid, y0, T, steps,
                        opts.solver, r, J);
    misfit = 0.5 * r.squaredNorm();
    record(misfit, step_norm);

    if (step_norm <= opts.step_tol * std::max(pnorm, 1e-30)) {
      fit.converged = true;
      return fit;
    }
  }
  fit.converged = false;
  return fit;
}

}  // namespace marpo
