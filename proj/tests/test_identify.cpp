#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "marpo/identify.hpp"
#include "marpo/transport.hpp"

using namespace marpo;

namespace {

struct Twin {
  Grid grid;
  Environment env;
  TracerState y0;
  ModelParams truth;
  double T = 0.5;
  int steps = 20;
  PicardConfig cfg;

  Twin()
      : grid(Grid::build([] {
          GridConfig gc;
          gc.nx = 3;
          gc.ny = 3;
          gc.dx = gc.dy = 1.0;
          gc.dz = 10.0;
          gc.he_bar = 100.0;
          gc.depth = {50, 100, 150, 100, 120, 80, 150, 60, 110};
          return gc;
        }())),
        env(grid, 0.5, 30.0),
        y0(grid.cells()) {
    for (int c = 0; c < grid.cells(); ++c) {
      y0.y1[c] = 1.0;
      y0.y2[c] = 0.2;
    }
    cfg.tol = 1e-12;
    cfg.plain_tol = 1e-12;
  }
};

}  // namespace

TEST_CASE("synthesis: determinism, exactness at sigma 0, noise statistics") {
  Twin tw;
  SamplingPlan plan = plan_uniform(tw.grid, tw.steps, 2);
  REQUIRE(!plan.points.empty());

  Observation a = synthesize_observations(tw.truth, tw.env, tw.grid, tw.y0,
                                          plan, 0.01, 7, tw.T, tw.steps,
                                          tw.cfg);
  Observation b = synthesize_observations(tw.truth, tw.env, tw.grid, tw.y0,
                                          plan, 0.01, 7, tw.T, tw.steps,
                                          tw.cfg);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].value == b[i].value);

  Observation clean = synthesize_observations(tw.truth, tw.env, tw.grid,
                                              tw.y0, plan, 0.0, 7, tw.T,
                                              tw.steps, tw.cfg);
  auto [traj, rep] =
      picard_solve(tw.y0, tw.env, tw.grid, tw.truth, tw.T, tw.steps, tw.cfg);
  for (const ObsSample& s : clean) {
    double v = s.component == 1 ? traj.states[s.t_index].y1[s.cell]
                                : traj.states[s.t_index].y2[s.cell];
    CHECK(s.value == v);
  }

  // noise standard deviation within 10% at >= 1000 samples
  REQUIRE(a.size() >= 1000);
  double sum = 0.0, sumsq = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i].value - clean[i].value;
    sum += d;
    sumsq += d * d;
  }
  double mean = sum / a.size();
  double sd = std::sqrt(sumsq / a.size() - mean * mean);
  CHECK(sd == doctest::Approx(0.01).epsilon(0.10));
}

TEST_CASE("observation CSV round trip") {
  Twin tw;
  SamplingPlan plan = plan_uniform(tw.grid, tw.steps, 10, 7);
  Observation obs = synthesize_observations(tw.truth, tw.env, tw.grid, tw.y0,
                                            plan, 0.005, 3, tw.T, tw.steps,
                                            tw.cfg);
  std::string path = "test_obs_tmp.csv";
  write_observations(path, obs, tw.grid);
  Observation rd = read_observations(path, tw.grid);
  REQUIRE(rd.size() == obs.size());
  for (size_t i = 0; i < obs.size(); ++i) {
    CHECK(rd[i].t_index == obs[i].t_index);
    CHECK(rd[i].cell == obs[i].cell);
    CHECK(rd[i].component == obs[i].component);
    CHECK(rd[i].value == obs[i].value);
    CHECK(rd[i].sigma == obs[i].sigma);
  }
  std::remove(path.c_str());
}

TEST_CASE("misfit: zero at the truth; duplicate rows stay duplicated") {
  Twin tw;
  SamplingPlan plan = plan_uniform(tw.grid, tw.steps, 10, 11);
  Observation obs = synthesize_observations(tw.truth, tw.env, tw.grid, tw.y0,
                                            plan, 0.0, 1, tw.T, tw.steps,
                                            tw.cfg);
  obs.push_back(obs.front());  // duplicate
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  std::vector<ParamName> active{ParamName::Lambda, ParamName::Alpha};
  misfit_and_jacobian(tw.truth, active, obs, tw.env, tw.grid, tw.y0, tw.T,
                      tw.steps, tw.cfg, r, J);
  CHECK(r.size() == static_cast<int>(obs.size()));
  CHECK(r.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(r[r.size() - 1] == r[0]);
  CHECK(J(J.rows() - 1, 0) == J(0, 0));
}

TEST_CASE("jacobian columns match parameter finite differences") {
  Twin tw;
  SamplingPlan plan = plan_uniform(tw.grid, tw.steps, 10, 5);
  Observation obs = synthesize_observations(tw.truth, tw.env, tw.grid, tw.y0,
                                            plan, 0.0, 1, tw.T, tw.steps,
                                            tw.cfg);
  std::vector<ParamName> active{ParamName::Lambda, ParamName::Alpha};
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  misfit_and_jacobian(tw.truth, active, obs, tw.env, tw.grid, tw.y0, tw.T,
                      tw.steps, tw.cfg, r, J);

  for (size_t j = 0; j < active.size(); ++j) {
    double p0 = param_get(tw.truth, active[j]);
    double delta = 1e-4 * p0;
    ModelParams pp = tw.truth, pm = tw.truth;
    param_set(pp, active[j], p0 + delta);
    param_set(pm, active[j], p0 - delta);
    Eigen::VectorXd rp, rm;
    Eigen::MatrixXd Jp;
    misfit_and_jacobian(pp, {active[j]}, obs, tw.env, tw.grid, tw.y0, tw.T,
                        tw.steps, tw.cfg, rp, Jp);
    misfit_and_jacobian(pm, {active[j]}, obs, tw.env, tw.grid, tw.y0, tw.T,
                        tw.steps, tw.cfg, rm, Jp);
    Eigen::VectorXd fd = (rp - rm) / (2.0 * delta);
    double rel = (fd - J.col(j)).norm() / J.col(j).norm();
    CHECK(rel <= 1e-3);
  }
}

TEST_CASE("gauss-newton from the truth stops immediately") {
  Twin tw;
  SamplingPlan plan = plan_uniform(tw.grid, tw.steps, 10, 5);
  Observation obs = synthesize_observations(tw.truth, tw.env, tw.grid, tw.y0,
                                            plan, 0.0, 1, tw.T, tw.steps,
                                            tw.cfg);
  std::vector<ParamName> active{ParamName::Lambda, ParamName::Alpha};
  FitOptions opts;
  opts.solver = tw.cfg;
  FitResult fit = gauss_newton(tw.truth, active, obs, tw.env, tw.grid, tw.y0,
                               tw.T, tw.steps, opts);
  CHECK(fit.misfit_history.front() <= 1e-16);
  CHECK(fit.misfit_history.size() <= 2);
}

TEST_CASE("gauss-newton recovers a 20 percent perturbation, noiseless") {
  Twin tw;
  SamplingPlan plan = plan_uniform(tw.grid, tw.steps, 5);
  Observation obs = synthesize_observations(tw.truth, tw.env, tw.grid, tw.y0,
                                            plan, 0.0, 1, tw.T, tw.steps,
                                            tw.cfg);
  ModelParams p0 = tw.truth;
  p0.lambda *= 1.2;
  p0.alpha *= 1.2;
  std::vector<ParamName> active{ParamName::Lambda, ParamName::Alpha};
  FitOptions opts;
  opts.solver = tw.cfg;
  FitResult fit = gauss_newton(p0, active, obs, tw.env, tw.grid, tw.y0, tw.T,
                               tw.steps, opts);
  CHECK(std::abs(fit.p.lambda - tw.truth.lambda) <= 0.01 * tw.truth.lambda);
  CHECK(std::abs(fit.p.alpha - tw.truth.alpha) <= 0.01 * tw.truth.alpha);
  // misfit history is nonincreasing over accepted iterates
  for (size_t i = 1; i < fit.misfit_history.size(); ++i)
    CHECK(fit.misfit_history[i] <= fit.misfit_history[i - 1] * (1 + 1e-12));
  CHECK(fit.misfit_history.back() <= 1e-8 * fit.misfit_history.front());
}
