#include <doctest.h>

#include <cmath>
#include <random>

#include "marpo/galerkin.hpp"
#include "marpo/solver.hpp"
#include "marpo/transport.hpp"

using namespace marpo;

namespace {

GridConfig box_config(int nx, int ny, int nz, double dz = 10.0,
                      double he_bar = 100.0) {
  GridConfig gc;
  gc.nx = nx;
  gc.ny = ny;
  gc.dx = gc.dy = 1.0;
  gc.dz = dz;
  gc.he_bar = he_bar;
  gc.depth.assign(static_cast<size_t>(nx) * ny, nz * dz);
  return gc;
}

ModelParams no_reaction() {
  ModelParams p;
  p.alpha = 0.0;
  p.lambda = 0.0;
  return p;
}

}  // namespace

TEST_CASE("rejects non-flat bathymetry and oversized mode counts") {
  GridConfig gc = box_config(4, 2, 6);
  gc.depth[3] = 30.0;
  Grid uneven = Grid::build(gc);
  Environment env(uneven, 0.5);
  GalerkinConfig cfg{2, 2, 2, 1e-12, 500};
  CHECK_THROWS_AS(GalerkinSystem(uneven, env, ModelParams{}, cfg),
                  std::invalid_argument);

  Grid flat = Grid::build(box_config(4, 2, 6));
  Environment env2(flat, 0.5);
  GalerkinConfig big{5, 2, 2, 1e-12, 500};
  CHECK_THROWS_AS(GalerkinSystem(flat, env2, ModelParams{}, big),
                  std::invalid_argument);
}

TEST_CASE("projection/reconstruction round trip at full mode count") {
  Grid g = Grid::build(box_config(6, 5, 8));
  Environment env(g, 0.5);
  GalerkinConfig cfg{6, 5, 8, 1e-12, 500};
  GalerkinSystem sys(g, env, ModelParams{}, cfg);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 1.0);
  TracerState y(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    y.y1[c] = nd(rng);
    y.y2[c] = nd(rng);
  }
  TracerState back = sys.reconstruct(sys.project(y));
  for (int c = 0; c < g.cells(); ++c) {
    CHECK(back.y1[c] == doctest::Approx(y.y1[c]).epsilon(1e-10));
    CHECK(back.y2[c] == doctest::Approx(y.y2[c]).epsilon(1e-10));
  }
}

TEST_CASE("mode eigenvalues follow the separable cosine formula") {
  Grid g = Grid::build(box_config(4, 3, 5));
  double kappa = 0.7;
  Environment env(g, kappa);
  GalerkinConfig cfg{3, 3, 3, 1e-12, 500};
  GalerkinSystem sys(g, env, ModelParams{}, cfg);
  double Lx = 4.0, Ly = 3.0, Lz = 50.0;
  for (int kx = 0; kx < 3; ++kx)
    for (int ky = 0; ky < 3; ++ky)
      for (int kz = 0; kz < 3; ++kz) {
        double mu = M_PI * M_PI *
                    (kx * kx / (Lx * Lx) + ky * ky / (Ly * Ly) +
                     kz * kz / (Lz * Lz));
        CHECK(sys.mode_eigenvalue(sys.mode_index(kx, ky, kz)) ==
              doctest::Approx(kappa * mu).epsilon(1e-14));
      }
}

TEST_CASE("heat decay: one mode follows the implicit-Euler factor exactly") {
  Grid g = Grid::build(box_config(8, 1, 10));
  double kappa = 0.5;
  Environment env(g, kappa);
  ModelParams off = no_reaction();
  GalerkinConfig cfg{4, 1, 4, 1e-13, 500};
  GalerkinSystem sys(g, env, off, cfg);

  int kx = 2, kz = 3;
  TracerState y0(g.cells());
  for (int c = 0; c < g.cells(); ++c)
    y0.y1[c] = std::cos(kx * M_PI * (g.cell_i(c) + 0.5) / 8.0) *
               std::cos(kz * M_PI * (g.cell_layer(c) + 0.5) / 10.0);

  double T = 1.0;
  int steps = 20;
  auto traj = sys.solve(y0, T, steps);
  int m = sys.mode_index(kx, 0, kz);
  double u0 = traj[0].u1[m];
  CHECK(u0 == doctest::Approx(1.0).epsilon(1e-12));
  double mu = sys.mode_eigenvalue(m);
  double dt = T / steps;
  for (int k = 0; k <= steps; ++k) {
    double expect = u0 / std::pow(1.0 + mu * dt, k);
    CHECK(traj[k].u1[m] == doctest::Approx(expect).epsilon(1e-12));
    // every other mode stays at zero
    for (int mm = 0; mm < sys.modes(); ++mm)
      if (mm != m) CHECK(std::abs(traj[k].u1[mm]) <= 1e-12);
  }
}

TEST_CASE("constant state with no reaction stays constant") {
  Grid g = Grid::build(box_config(4, 4, 5));
  Environment env(g, 0.5);
  ModelParams off = no_reaction();
  GalerkinConfig cfg{4, 4, 5, 1e-13, 500};
  GalerkinSystem sys(g, env, off, cfg);
  TracerState y0(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    y0.y1[c] = 1.7;
    y0.y2[c] = 0.4;
  }
  auto traj = sys.solve(y0, 1.0, 10);
  TracerState end = sys.reconstruct(traj.back());
  for (int c = 0; c < g.cells(); ++c) {
    CHECK(end.y1[c] == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(end.y2[c] == doctest::Approx(0.4).epsilon(1e-12));
  }
}

namespace {

// Relative final-time L2 distance between the spectral oracle and the
// picard finite-volume run on the same box.
double cross_method_rel(const Grid& g, const Environment& env,
                        const ModelParams& p, const TracerState& y0, double T,
                        int steps) {
  GalerkinConfig cfg{g.nx(), g.ny(), g.column_layers(0), 1e-12, 800};
  GalerkinSystem sys(g, env, p, cfg);
  auto gal = sys.solve(y0, T, steps);
  PicardConfig pc;
  pc.tol = 1e-11;
  auto [fv, rep] = picard_solve(y0, env, g, p, T, steps, pc);
  (void)rep;
  TracerState end = sys.reconstruct(gal.back());
  TracerState diff(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    diff.y1[c] = end.y1[c] - fv.states.back().y1[c];
    diff.y2[c] = end.y2[c] - fv.states.back().y2[c];
  }
  return l2_norm(g, diff) / l2_norm(g, fv.states.back());
}

}  // namespace

TEST_CASE("full nonlinear galerkin tracks the picard solver on a box") {
  // shallow box with kappa large enough that the seafloor flux layer
  // sqrt(kappa T) is comparable to dz; otherwise neither discretization
  // resolves it and the comparison measures only that mismatch
  Grid g = Grid::build(box_config(8, 8, 10, 1.0, 10.0));
  Environment env(g, 2.0, 30.0);
  ModelParams p;
  TracerState y0(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    double bump = std::cos(M_PI * (g.cell_i(c) + 0.5) / 8.0) *
                  std::cos(M_PI * (g.cell_layer(c) + 0.5) / 10.0);
    y0.y1[c] = 1.0 + 0.3 * bump;
    y0.y2[c] = 0.2;
  }
  double rel = cross_method_rel(g, env, p, y0, 0.5, 20);
  CHECK(rel < 0.05);
}

TEST_CASE("aphotic box: spectral and finite-volume solutions stay close") {
  Grid g = Grid::build(box_config(4, 4, 10, 2.0, 10.0));  // 10 m aphotic
  Environment env(g, 2.0, 30.0);
  ModelParams p;
  TracerState y0(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    y0.y1[c] = 1.0;
    y0.y2[c] = 0.2;
  }
  double rel = cross_method_rel(g, env, p, y0, 0.5, 20);
  CHECK(rel < 0.1);
}

TEST_CASE("projected stream velocity: the oracle still tracks the solver") {
  Grid g = Grid::build(box_config(8, 8, 10, 1.0, 10.0));
  Environment env(g, 2.0, 30.0);
  env.set_face_fluxes(stream_fluxes(g, make_gyre(g, 0.5)));
  ModelParams p;
  TracerState y0(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    double bump = std::cos(M_PI * (g.cell_i(c) + 0.5) / 8.0) *
                  std::cos(M_PI * (g.cell_layer(c) + 0.5) / 10.0);
    y0.y1[c] = 1.0 + 0.3 * bump;
    y0.y2[c] = 0.2;
  }
  double rel = cross_method_rel(g, env, p, y0, 0.5, 20);
  CHECK(rel < 0.06);
}
