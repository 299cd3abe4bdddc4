#include <doctest.h>

#include <cmath>
#include <random>

#include "marpo/checks.hpp"
#include "marpo/reaction.hpp"
#include "marpo/transport.hpp"

using namespace marpo;

namespace {

GridConfig column_config(double depth, double he_bar = 100.0,
                         double dx = 1.0) {
  GridConfig gc;
  gc.nx = gc.ny = 1;
  gc.dx = gc.dy = dx;
  gc.dz = 10.0;
  gc.he_bar = he_bar;
  gc.depth = {depth};
  return gc;
}

// Picks y1 per euphotic layer so that G(y1) equals the requested profile.
std::vector<double> invert_G_profile(const Grid& g, const Environment& env,
                                     const ModelParams& p,
                                     const std::vector<double>& G_target,
                                     double t) {
  std::vector<double> y1(g.cells(), 0.0);
  for (int k = 0; k < g.euphotic_layers(0); ++k) {
    int c = g.cell_index(0, k);
    double s = G_target[k] / (p.alpha * env.light_factor(p, c, t));
    y1[c] = p.K_P * s / (1.0 - s);
  }
  return y1;
}

}  // namespace

TEST_CASE("saturation: half saturation, zero, odd symmetry") {
  CHECK(saturation(0.5, 0.5) == 0.5);
  CHECK(saturation(0.0, 0.5) == 0.0);
  CHECK(saturation(-0.5, 0.5) == -0.5);
  CHECK(saturation(30.0, 30.0) == 0.5);
  CHECK_THROWS_AS(saturation(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(saturation(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("saturation derivative: value at zero and at K") {
  for (double K : {0.1, 0.5, 30.0}) {
    CHECK(saturation_derivative(0.0, K) == doctest::Approx(1.0 / K).epsilon(1e-15));
    CHECK(saturation_derivative(K, K) ==
          doctest::Approx(1.0 / (4.0 * K)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(saturation_derivative(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("saturation derivative: quadratic remainder away from zero") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> xd(-50.0, 50.0);
  double K = 0.5, h = 1e-4;
  for (int s = 0; s < 1000; ++s) {
    double x = xd(rng);
    if (std::abs(x) < 10 * h) continue;
    double resid =
        std::abs(saturation(x + h, K) - saturation(x, K) -
                 saturation_derivative(x, K) * h);
    CHECK(resid <= 2.0 * h * h / (K * K));
  }
}

TEST_CASE("uptake: zero state, half-saturation product, negative state") {
  ModelParams p;
  Grid g = Grid::build(column_config(10.0, 10.0));  // one euphotic cell
  double r = 30.0 * std::exp(-5.0 * p.K_W);
  p.K_I = r;  // light factor exactly one half
  Environment env(g, 0.5, 30.0);

  std::vector<double> zero(g.cells(), 0.0);
  for (double v : uptake_G(zero, g, env, p, 0.0)) CHECK(v == 0.0);

  std::vector<double> y1(g.cells(), p.K_P);
  auto G = uptake_G(y1, g, env, p, 0.0);
  CHECK(G[0] == doctest::Approx(p.alpha / 4.0).epsilon(1e-15));

  std::vector<double> yneg(g.cells(), -p.K_P);
  auto Gn = uptake_G(yneg, g, env, p, 0.0);
  CHECK(Gn[0] == doctest::Approx(-p.alpha / 2.0 * 0.5).epsilon(1e-15));
  CHECK(std::abs(Gn[0]) <= p.alpha);
}

TEST_CASE("export: constant integrand and zero state") {
  ModelParams p;
  p.K_W = 1e-9;  // nearly depth-independent light
  Grid g = Grid::build(column_config(100.0, 100.0));
  Environment env(g, 0.5, 30.0);
  std::vector<double> y1(g.cells(), p.K_P);
  double g0 = p.alpha * 0.5 * env.light_factor(p, 0, 0.0);
  double E = export_E(y1, g, env, p, 0.0, 0);
  // K_W = 1e-9 leaves a residual depth variation of order 1e-7 in G
  CHECK(E == doctest::Approx((1.0 - p.nu) * g0 * 100.0).epsilon(1e-6));

  std::vector<double> zero(g.cells(), 0.0);
  CHECK(export_E(zero, g, env, p, 0.0, 0) == 0.0);
}

TEST_CASE("export: hand-summed staircase profile gives 0.275") {
  ModelParams p;  // nu = 0.5
  Grid g = Grid::build(column_config(100.0, 100.0));
  Environment env(g, 0.5, 30.0);
  std::vector<double> G_target(10);
  for (int k = 0; k < 10; ++k) G_target[k] = (k + 1) * 1e-3;
  std::vector<double> y1 = invert_G_profile(g, env, p, G_target, 0.0);
  double E = export_E(y1, g, env, p, 0.0, 0);
  CHECK(E == doctest::Approx(0.275).epsilon(1e-12));
}

TEST_CASE("sinking layer mass: analytic antiderivative and telescoping") {
  ModelParams p;  // beta = 1
  CHECK(sinking_layer_mass(p, 100.0, 200.0, 100.0) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sinking_layer_mass(p, 130.0, 130.0, 100.0) == 0.0);

  // h = 2 he_bar split into 5 layers telescopes to 1 - (h/he)^-1 = 0.5
  double sum = 0.0;
  for (int k = 0; k < 5; ++k)
    sum += sinking_layer_mass(p, 100.0 + 20.0 * k, 100.0 + 20.0 * (k + 1),
                              100.0);
  CHECK(sum == doctest::Approx(0.5).epsilon(1e-14));

  CHECK_THROWS_AS(sinking_layer_mass(p, 90.0, 120.0, 100.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(sinking_layer_mass(p, 120.0, 110.0, 100.0),
                  std::invalid_argument);
}

TEST_CASE("reaction: homogeneity and pure remineralization") {
  ModelParams p;
  Grid g = Grid::build(column_config(150.0));
  Environment env(g, 0.5, 30.0);

  TracerState zero(g.cells());
  ReactionOutput r0 = reaction_eval(zero, g, env, p, 0.0);
  for (double v : r0.d1) CHECK(v == 0.0);
  for (double v : r0.d2) CHECK(v == 0.0);
  for (double v : r0.b1) CHECK(v == 0.0);
  for (double v : r0.b2) CHECK(v == 0.0);

  TracerState y(g.cells());
  double c0 = 0.7;
  for (int c = 0; c < g.cells(); ++c) y.y2[c] = c0;
  ReactionOutput r = reaction_eval(y, g, env, p, 0.0);
  for (int c = 0; c < g.cells(); ++c) {
    CHECK(r.d1[c] == -p.lambda * c0);
    CHECK(r.d2[c] == p.lambda * c0);
    CHECK(r.d1[c] + r.d2[c] == 0.0);
  }
}

TEST_CASE("reaction: d1+d2 equals the exported fraction on euphotic cells") {
  ModelParams p;
  Grid g = Grid::build(column_config(150.0));
  Environment env(g, 0.5, 30.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.5, 1.0);
  TracerState y(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    y.y1[c] = nd(rng);
    y.y2[c] = nd(rng);
  }
  ReactionOutput r = reaction_eval(y, g, env, p, 0.0);
  auto G = uptake_G(y.y1, g, env, p, 0.0);
  for (int k = 0; k < g.euphotic_layers(0); ++k) {
    int c = g.cell_index(0, k);
    CHECK(r.d1[c] + r.d2[c] ==
          doctest::Approx((1.0 - p.nu) * G[c]).epsilon(1e-13));
  }
  // aphotic d2 is exactly lambda y2
  for (int k = g.euphotic_layers(0); k < g.column_layers(0); ++k) {
    int c = g.cell_index(0, k);
    CHECK(r.d2[c] == p.lambda * y.y2[c]);
  }
  // surface facet carries no boundary value, b2 is identically zero
  for (const BoundaryFacet& f : g.facets())
    if (f.kind == FacetKind::Surface)
      CHECK(r.b1[&f - g.facets().data()] == 0.0);
  for (double v : r.b2) CHECK(v == 0.0);
}

TEST_CASE("boundary values from the 0.275 export column") {
  ModelParams p;
  // Gamma_1 case: depth = he_bar
  {
    Grid g = Grid::build(column_config(100.0, 100.0));
    Environment e(g, 0.5, 30.0);
    std::vector<double> G_target(10);
    for (int k = 0; k < 10; ++k) G_target[k] = (k + 1) * 1e-3;
    TracerState y(g.cells());
    y.y1 = invert_G_profile(g, e, p, G_target, 0.0);
    ReactionOutput r = reaction_eval(y, g, e, p, 0.0);
    CHECK(r.b1[g.bottom_facet(0)] == doctest::Approx(-0.275).epsilon(1e-12));
  }
  // Gamma_2 case: h = 2 he_bar, beta = 1 halves the exported value
  {
    Grid g = Grid::build(column_config(200.0, 100.0));
    Environment e(g, 0.5, 30.0);
    std::vector<double> G_target(10);
    for (int k = 0; k < 10; ++k) G_target[k] = (k + 1) * 1e-3;
    TracerState y(g.cells());
    y.y1 = invert_G_profile(g, e, p, G_target, 0.0);
    ReactionOutput r = reaction_eval(y, g, e, p, 0.0);
    CHECK(r.b1[g.bottom_facet(0)] == doctest::Approx(-0.1375).epsilon(1e-12));
  }
}

TEST_CASE("column mass balance closes for zero, euphotic and split columns") {
  ModelParams p;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd(0.0, 1.0);

  for (double depth : {100.0, 200.0}) {
    Grid g = Grid::build(column_config(depth, 100.0));
    Environment env(g, 0.5, 30.0);
    TracerState zero(g.cells());
    CHECK(column_mass_balance(zero, g, env, p, 0.0, 0) == 0.0);
    for (int trial = 0; trial < 20; ++trial) {
      TracerState y(g.cells());
      for (int c = 0; c < g.cells(); ++c) {
        y.y1[c] = nd(rng);
        y.y2[c] = nd(rng);
      }
      double r = column_mass_balance(y, g, env, p, 0.0, 0);
      CHECK(std::abs(r) <= 1e-13 * (p.alpha * g.h_max()));
    }
  }
}

TEST_CASE("lipschitz constants by substitution") {
  ModelParams p;
  GridConfig gc;
  gc.nx = 2;
  gc.ny = 1;
  gc.dz = 10.0;
  gc.he_bar = 100.0;
  gc.depth = {100.0, 150.0};  // h_max = 150
  Grid g = Grid::build(gc);
  LipschitzConstants L = lipschitz_constants(p, g);
  CHECK(L.L_d == doctest::Approx(std::sqrt(44.0)).epsilon(1e-15));
  CHECK(L.L_b == doctest::Approx(20.0).epsilon(1e-15));
  CHECK(L.c_tau == doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-15));
  CHECK(L.L1 == doctest::Approx(L.L_d + L.c_tau * L.L_b).epsilon(1e-15));

  // the export factor (1-nu) drives L_b to zero
  ModelParams p9 = p;
  p9.nu = 1.0 - 1e-9;
  LipschitzConstants L9 = lipschitz_constants(p9, g);
  CHECK(L9.L_b == doctest::Approx(L.L_b * 2e-9).epsilon(1e-6));
}

TEST_CASE("monotone term: examples and sampled monotonicity") {
  CHECK(monotone_scalar(0.0, 2.0) == 0.0);
  CHECK(monotone_scalar(1.0, 2.0) == 1.0);
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd(0.0, 10.0);
  for (int s = 0; s < 100000; ++s) {
    double a = nd(rng), b = nd(rng);
    double prod =
        (monotone_scalar(a, 2.0) - monotone_scalar(b, 2.0)) * (a - b);
    CHECK(prod >= -1e-30);
    CHECK(std::abs(monotone_scalar(a, 2.0)) <= 2.0 * std::abs(a) * (1 + 1e-15));
  }
  CHECK_THROWS_AS(monotone_term(TracerState(2), -1.0), std::invalid_argument);
}

TEST_CASE("sampled interior and boundary Lipschitz bounds hold") {
  auto rows = checks::lipschitz_suite(42, 4, 40);
  for (const auto& r : rows) {
    INFO(r.suite, "/", r.name, " value=", r.value, " thr=", r.threshold);
    CHECK(r.pass);
  }
}

TEST_CASE("saturation suite passes at reduced sample count") {
  auto rows = checks::saturation_suite(42, 5000);
  for (const auto& r : rows) {
    INFO(r.suite, "/", r.name, " value=", r.value, " thr=", r.threshold);
    CHECK(r.pass);
  }
}
