/// @file identify.hpp
/// @brief Twin-experiment parameter identification: synthetic observations,
/// misfit and Jacobian via tangent solves, damped Gauss-Newton updates.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "marpo/fields.hpp"
#include "marpo/solver.hpp"
#include "marpo/tangent.hpp"

namespace marpo {

struct ObsSample {
  int t_index = 0;
  int cell = 0;
  int component = 1;  // 1 = PO4, 2 = DOP
  double value = 0.0;
  double sigma = 0.0;
};

using Observation = std::vector<ObsSample>;

struct SamplingPlan {
  struct Point {
    int t_index, cell, component;
  };
  std::vector<Point> points;
};

/// Every cell, both components, each t_stride-th time level (>= 1).
SamplingPlan plan_uniform(const Grid& grid, int steps, int t_stride,
                          int cell_stride = 1);

/// Forward-solves at the true parameters, samples the plan and adds seeded
/// Gaussian noise of the given standard deviation.
Observation synthesize_observations(const ModelParams& true_params,
                                    const Environment& env, const Grid& grid,
                                    const TracerState& y0,
                                    const SamplingPlan& plan, double sigma,
                                    std::uint64_t seed, double T, int steps,
                                    const PicardConfig& cfg);

void write_observations(const std::string& path, const Observation& obs,
                        const Grid& grid);
Observation read_observations(const std::string& path, const Grid& grid);

/// Residuals r_i = model(p) - obs and one Jacobian column per active
/// parameter, each column a sampled tangent trajectory.
void misfit_and_jacobian(const ModelParams& p,
                         const std::vector<ParamName>& active,
                         const Observation& obs, const Environment& env,
                         const Grid& grid, const TracerState& y0, double T,
                         int steps, const PicardConfig& cfg,
                         Eigen::VectorXd& residual, Eigen::MatrixXd& jacobian);

struct FitOptions {
  int max_iter = 30;
  double step_tol = 1e-6;     // on the relative step norm
  double param_floor = 1e-8;  // positivity floor during line search
  PicardConfig solver;
};

struct FitResult {
  ModelParams p;
  std::vector<double> misfit_history;  // 0.5 ||r||^2 per accepted iterate
  std::vector<double> step_norms;
  std::vector<std::vector<double>> param_history;  // active values per iterate
  bool converged = false;
};

/// Damped Gauss-Newton with step halving and Levenberg fallback; misfit is
/// nonincreasing over accepted steps.
FitResult gauss_newton(const ModelParams& p0,
                       const std::vector<ParamName>& active,
                       const Observation& obs, const Environment& env,
                       const Grid& grid, const TracerState& y0, double T,
                       int steps, const FitOptions& opts);

}  // namespace marpo
