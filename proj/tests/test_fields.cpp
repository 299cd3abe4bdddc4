#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "marpo/fields.hpp"
#include "marpo/saturation.hpp"

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

}  // namespace

TEST_CASE("params validation names the violated constraint") {
  ModelParams p;
  p.validate();  // defaults are valid
  p.nu = 1.5;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("0 < nu < 1"),
                       std::invalid_argument);
  p.nu = 0.5;
  p.alpha = -1.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("alpha"),
                       std::invalid_argument);
}

TEST_CASE("state finiteness check") {
  TracerState y(4);
  CHECK(y.finite());
  y.y2[2] = std::nan("");
  CHECK(!y.finite());
}

TEST_CASE("zero stream function gives zero fluxes") {
  Grid g = Grid::build(box_config(4, 3, 5));
  StreamFunction sf;
  sf.nx = 4;
  sf.nz = 5;
  sf.psi.assign(5 * 6, 0.0);
  auto flux = stream_fluxes(g, sf);
  for (double q : flux) CHECK(q == 0.0);
}

TEST_CASE("sine-sine stream function: divergence free to rounding") {
  Grid g = Grid::build(box_config(8, 2, 10));
  StreamFunction sf;
  sf.nx = 8;
  sf.nz = 10;
  sf.psi.resize(9 * 11);
  for (int k = 0; k <= 10; ++k)
    for (int i = 0; i <= 8; ++i)
      sf.psi[k * 9 + i] = std::sin(M_PI * i / 8.0) * std::sin(M_PI * k / 10.0);
  Environment env(g, 0.5);
  env.set_face_fluxes(stream_fluxes(g, sf));
  double qmax = env.max_abs_flux();
  CHECK(qmax > 0.0);
  for (double d : env.cell_divergence()) CHECK(std::abs(d) <= 1e-12 * qmax);
}

TEST_CASE("single perturbed interior corner: exactly 4 faces circulate") {
  Grid g = Grid::build(box_config(4, 1, 4));
  StreamFunction sf;
  sf.nx = 4;
  sf.nz = 4;
  sf.psi.assign(5 * 5, 0.0);
  sf.psi[2 * 5 + 2] = 1.0;  // corner (i=2, k=2)
  Environment env(g, 0.5);
  env.set_face_fluxes(stream_fluxes(g, sf));
  int nonzero = 0;
  for (double q : env.face_fluxes())
    if (q != 0.0) ++nonzero;
  CHECK(nonzero == 4);
  for (double d : env.cell_divergence()) CHECK(d == 0.0);
}

TEST_CASE("psi not constant along the boundary contour is rejected") {
  Grid g = Grid::build(box_config(4, 1, 4));
  StreamFunction sf;
  sf.nx = 4;
  sf.nz = 4;
  sf.psi.assign(5 * 5, 0.0);
  sf.psi[0 * 5 + 2] = 1.0;  // surface corner
  CHECK_THROWS_WITH_AS(stream_fluxes(g, sf), doctest::Contains("boundary"),
                       std::invalid_argument);
}

TEST_CASE("staircase bathymetry: step walls enforce the contour condition") {
  GridConfig gc = box_config(2, 1, 5);
  gc.depth = {50.0, 20.0};
  Grid g = Grid::build(gc);
  StreamFunction sf;
  sf.nx = 2;
  sf.nz = 5;
  sf.psi.assign(3 * 6, 0.0);
  sf.psi[3 * 3 + 1] = 1.0;  // corner (i=1,k=3) sits on the step wall
  CHECK_THROWS_AS(stream_fluxes(g, sf), std::invalid_argument);
}

TEST_CASE("gyre on an all-wet grid passes validation") {
  GridConfig gc = box_config(6, 4, 8);
  for (size_t i = 0; i < gc.depth.size(); ++i)
    gc.depth[i] = 50.0 + 10.0 * (i % 4);
  Grid g = Grid::build(gc);
  Environment env(g, 0.5);
  env.set_face_fluxes(stream_fluxes(g, make_gyre(g, 2.0)));
  double qmax = env.max_abs_flux();
  CHECK(qmax > 0.0);
  for (double d : env.cell_divergence()) CHECK(std::abs(d) <= 1e-12 * qmax);
}

TEST_CASE("insolation: constant and diurnal shapes") {
  Grid g = Grid::build(box_config(1, 1, 5));
  Environment cst(g, 0.5, 30.0, LightShape::Constant);
  CHECK(cst.insolation(0, 0.0) == 30.0);
  CHECK(cst.insolation(0, 0.73) == 30.0);
  Environment diu(g, 0.5, 30.0, LightShape::Diurnal, 1.0);
  CHECK(diu.insolation(0, 0.5) == 0.0);  // cos(pi) clipped at zero
  CHECK(diu.insolation(0, 0.0) == 30.0);
  CHECK(diu.insolation(0, 0.25) <= 30.0 * 1e-15);
}

TEST_CASE("light factor: half saturation, zero light, derived value") {
  ModelParams p;
  Grid g = Grid::build(box_config(1, 1, 5));

  // half saturation: choose K_I equal to the attenuated irradiance
  double zc = 5.0;
  double r = 30.0 * std::exp(-zc * p.K_W);
  ModelParams half = p;
  half.K_I = r;
  Environment env(g, 0.5, 30.0);
  CHECK(env.light_factor(half, 0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));

  // zero irradiance
  Environment dark(g, 0.5, 0.0);
  CHECK(dark.light_factor(p, 0, 0.0) == 0.0);

  // I0=30, K_W=0.02, z_c=5, K_I=30: 30 e^{-0.1}/(30 e^{-0.1}+30)
  double expect = r / (r + 30.0);
  CHECK(env.light_factor(p, 0, 0.0) == expect);
  CHECK(env.light_factor(p, 0, 0.0) == doctest::Approx(0.47502).epsilon(2e-4));
}

TEST_CASE("light factor rejects aphotic cells and stays in [0,1)") {
  ModelParams p;
  Grid g = Grid::build(box_config(1, 1, 15, 10.0, 100.0));
  Environment env(g, 0.5, 30.0);
  CHECK_THROWS_AS(env.light_factor(p, g.cell_index(0, 12), 0.0),
                  std::invalid_argument);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> td(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    double f = env.light_factor(p, g.cell_index(0, k), td(rng));
    CHECK(f >= 0.0);
    CHECK(f < 1.0);
  }
}

TEST_CASE("stream function file round trip") {
  StreamFunction sf;
  sf.nx = 3;
  sf.nz = 2;
  sf.psi = {0, 0, 0, 0, 0, 0.5, -0.25, 0, 0, 0, 0, 0};
  std::string path = "test_psi_tmp.txt";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fprintf(f, "%d %d\n", sf.nx, sf.nz);
    for (int k = 0; k <= sf.nz; ++k) {
      for (int i = 0; i <= sf.nx; ++i)
        std::fprintf(f, "%.17g ", sf.psi[k * (sf.nx + 1) + i]);
      std::fprintf(f, "\n");
    }
    std::fclose(f);
  }
  StreamFunction rd = read_stream_function(path);
  CHECK(rd.nx == sf.nx);
  CHECK(rd.nz == sf.nz);
  CHECK(rd.psi == sf.psi);
  std::remove(path.c_str());
}

TEST_CASE("constant trajectory spans the time grid") {
  TracerState y0(6);
  Trajectory tr = Trajectory::constant(y0, 2.0, 40);
  CHECK(tr.states.size() == 41);
  CHECK(tr.dt == doctest::Approx(0.05));
  CHECK(tr.steps * tr.dt == doctest::Approx(tr.T));
}
