#include "marpo/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "marpo/reaction.hpp"
#include "marpo/tangent.hpp"
#include "marpo/transport.hpp"

namespace marpo::checks {

bool all_pass(const std::vector<CheckRow>& rows) {
  for (const CheckRow& r : rows)
    if (!r.pass) return false;
  return true;
}

GridConfig desk_grid_config() {
  GridConfig gc;
  gc.nx = 8;
  gc.ny = 8;
  gc.dx = 1.0;
  gc.dy = 1.0;
  gc.dz = 10.0;
  gc.he_bar = 100.0;
  gc.depth.resize(64);
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i)
      gc.depth[j * 8 + i] = 50.0 + 10.0 * ((3 * i + 5 * j) % 11);
  return gc;
}

GridConfig random_grid_config(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> nd(1, 4);
  std::uniform_real_distribution<double> dd(0.5, 2.0);
  std::uniform_int_distribution<int> hed(3, 12);
  std::uniform_int_distribution<int> depthd(3, 15);
  std::bernoulli_distribution dry(0.15);

  GridConfig gc;
  gc.nx = nd(rng);
  gc.ny = nd(rng);
  gc.dx = dd(rng);
  gc.dy = dd(rng);
  gc.dz = 10.0;
  gc.he_bar = 10.0 * hed(rng);
  gc.depth.resize(static_cast<size_t>(gc.nx) * gc.ny);
  bool any_wet = false;
  for (double& d : gc.depth) {
    if (dry(rng)) {
      d = 0.0;
    } else {
      d = 10.0 * depthd(rng);
      any_wet = true;
    }
  }
  if (!any_wet) gc.depth[0] = 10.0 * depthd(rng);
  return gc;
}

namespace {

struct Row {
  std::vector<CheckRow>& rows;
  std::string suite;
  void bound(const std::string& name, double value, double threshold) {
    rows.push_back({suite, name, value, threshold, value <= threshold, false});
  }
  void constant(const std::string& name, double value) {
    rows.push_back({suite, name, value, 0.0, true, true});
  }
};

TracerState random_state(std::mt19937_64& rng, int cells, double scale) {
  std::normal_distribution<double> nd(0.0, 1.0);
  TracerState y(cells);
  for (int c = 0; c < cells; ++c) {
    y.y1[c] = scale * nd(rng);
    y.y2[c] = scale * nd(rng);
  }
  return y;
}

std::vector<double> random_field(std::mt19937_64& rng, int cells,
                                 double scale) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(cells);
  for (double& x : v) x = scale * nd(rng);
  return v;
}

// Random stream function that vanishes near every wall in every y-row, so
// the contour condition holds exactly with nonzero interior circulation.
StreamFunction random_stream(std::mt19937_64& rng, const Grid& g,
                             double scale) {
  StreamFunction sf;
  sf.nx = g.nx();
  int nzmax = 0;
  for (int col = 0; col < g.columns(); ++col)
    nzmax = std::max(nzmax, g.column_layers(col));
  sf.nz = nzmax;
  sf.psi.assign(static_cast<size_t>(sf.nx + 1) * (sf.nz + 1), 0.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int i = 1; i < sf.nx; ++i) {
    for (int k = 1; k <= sf.nz; ++k) {
      // corner (i,k): interior in every row iff both adjacent columns keep
      // at least k+1 wet layers there
      bool interior = true;
      for (int j = 0; j < g.ny() && interior; ++j) {
        int la = g.column_layers(g.column_index(i - 1, j));
        int lb = g.column_layers(g.column_index(i, j));
        if (std::min(la, lb) < k + 1) interior = false;
      }
      if (interior) sf.psi[k * (sf.nx + 1) + i] = scale * nd(rng);
    }
  }
  return sf;
}

}  // namespace

std::vector<CheckRow> saturation_suite(std::uint64_t seed, int samples) {
  std::vector<CheckRow> rows;
  Row row{rows, "saturation"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(-3.0, 6.0);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto draw = [&]() { return uni(rng) * std::pow(10.0, mag(rng)); };

  for (double K : {0.1, 0.5, 30.0}) {
    std::string suffix = "_K" + std::to_string(K).substr(0, 4);
    double max_abs = 0.0, max_lip = 0.0, max_deriv = 0.0, min_deriv = 1e300;
    double max_fd = 0.0;
    double h = 1e-4;
    for (int s = 0; s < samples; ++s) {
      double a = draw(), b = draw();
      double fa = saturation(a, K), fb = saturation(b, K);
      max_abs = std::max({max_abs, std::abs(fa), std::abs(fb)});
      if (a != b)
        max_lip = std::max(max_lip, std::abs(fa - fb) * K / std::abs(a - b));
      double d = saturation_derivative(a, K);
      max_deriv = std::max(max_deriv, d * K);
      min_deriv = std::min(min_deriv, d);
      if (std::abs(a) > 10 * h) {
        double resid = std::abs(saturation(a + h, K) - fa - d * h) / (h * h);
        max_fd = std::max(max_fd, resid * K * K);
      }
    }
    row.bound("abs_bound" + suffix, max_abs, 1.0);
    row.bound("lipschitz" + suffix, max_lip, 1.0);
    row.bound("deriv_upper" + suffix, max_deriv, 1.0);
    row.bound("deriv_positive" + suffix, min_deriv > 0.0 ? 0.0 : 1.0, 0.0);
    row.bound("deriv_at_zero" + suffix,
              std::abs(saturation_derivative(0.0, K) * K - 1.0), 1e-15);
    row.bound("fd_quadratic" + suffix, max_fd, 2.0);
    row.bound("half_saturation" + suffix,
              std::abs(saturation(K, K) - 0.5), 1e-15);
  }
  return rows;
}

std::vector<CheckRow> lipschitz_suite(std::uint64_t seed, int grids,
                                      int pairs_per_grid) {
  std::vector<CheckRow> rows;
  Row row{rows, "lipschitz"};
  std::mt19937_64 rng(seed);
  const double scales[3] = {0.2, 1.0, 5.0};

  double max_interior = 0.0, max_boundary = 0.0, max_homog = 0.0;
  double max_power = 0.0;
  for (int g = 0; g < grids; ++g) {
    GridConfig gc =
        g == 0 ? desk_grid_config() : random_grid_config(seed + 1000 + g);
    Grid grid = Grid::build(gc);
    Environment env(grid, 0.5);
    ModelParams params;
    LipschitzConstants L = lipschitz_constants(params, grid);

    if (g == 0) {
      row.bound("default_Ld_sqrt44", std::abs(L.L_d - std::sqrt(44.0)), 1e-12);
      row.bound("default_Lb_20", std::abs(L.L_b - 20.0), 1e-12);
    }

    TracerState zero(grid.cells());
    ReactionOutput r0 = reaction_eval(zero, grid, env, params, 0.0);
    double h0 = 0.0;
    for (double v : r0.d1) h0 = std::max(h0, std::abs(v));
    for (double v : r0.d2) h0 = std::max(h0, std::abs(v));
    for (double v : r0.b1) h0 = std::max(h0, std::abs(v));
    for (double v : r0.b2) h0 = std::max(h0, std::abs(v));
    max_homog = std::max(max_homog, h0);

    for (int c = 0; c < grid.cells(); ++c)
      if (grid.cell_zone(c) == Zone::Aphotic)
        max_power = std::max(
            max_power, std::pow(grid.cell_center_depth(c) / grid.he_bar(),
                                -params.beta));

    for (int s = 0; s < pairs_per_grid; ++s) {
      double scale = scales[s % 3];
      TracerState y = random_state(rng, grid.cells(), scale);
      TracerState z = random_state(rng, grid.cells(), scale);
      TracerState diff(grid.cells());
      for (int c = 0; c < grid.cells(); ++c) {
        diff.y1[c] = y.y1[c] - z.y1[c];
        diff.y2[c] = y.y2[c] - z.y2[c];
      }
      double dn = l2_norm(grid, diff);
      if (dn == 0.0) continue;
      ReactionOutput ry = reaction_eval(y, grid, env, params, 0.0);
      ReactionOutput rz = reaction_eval(z, grid, env, params, 0.0);
      TracerState dd(grid.cells());
      for (int c = 0; c < grid.cells(); ++c) {
        dd.y1[c] = ry.d1[c] - rz.d1[c];
        dd.y2[c] = ry.d2[c] - rz.d2[c];
      }
      std::vector<double> db1(grid.facets().size()), db2(grid.facets().size());
      for (size_t f = 0; f < grid.facets().size(); ++f) {
        db1[f] = ry.b1[f] - rz.b1[f];
        db2[f] = ry.b2[f] - rz.b2[f];
      }
      max_interior =
          std::max(max_interior, l2_norm(grid, dd) / (L.L_d * dn));
      max_boundary =
          std::max(max_boundary, boundary_l2(grid, db1, db2) / (L.L_b * dn));
    }
  }
  row.bound("interior_Ld", max_interior, 1.0);
  row.bound("boundary_Lb", max_boundary, 1.0);
  row.bound("homogeneity", max_homog, 0.0);
  row.bound("power_factor", max_power, 1.0);
  return rows;
}

std::vector<CheckRow> skew_suite(std::uint64_t seed, int trials) {
  std::vector<CheckRow> rows;
  Row row{rows, "skew"};
  std::mt19937_64 rng(seed);

  double max_div = 0.0, max_skew = 0.0, max_garding = 0.0, max_bmono = 0.0;
  double max_cons = 0.0;
  for (int t = 0; t < trials; ++t) {
    GridConfig gc = t == 0 ? desk_grid_config()
                           : random_grid_config(seed + 2000 + t);
    Grid grid = Grid::build(gc);
    Environment env(grid, 0.5);
    StreamFunction sf = random_stream(rng, grid, 1.0 + t % 5);
    env.set_face_fluxes(stream_fluxes(grid, sf));
    double qmax = env.max_abs_flux();

    std::vector<double> div = env.cell_divergence();
    double dmax = 0.0;
    for (double v : div) dmax = std::max(dmax, std::abs(v));
    if (qmax > 0.0) max_div = std::max(max_div, dmax / qmax);
    else if (dmax > 0.0) max_div = 1e300;

    TransportOperator op(grid, env);
    std::vector<double> w = random_field(rng, grid.cells(), 1.0);
    double wn2 = l2_norm_field(grid, w);
    wn2 *= wn2;
    double skew = std::abs(op.advection_skew_check(w));
    if (qmax > 0.0 && wn2 > 0.0)
      max_skew = std::max(max_skew, skew / (wn2 * qmax));
    else if (skew > 0.0) max_skew = 1e300;

    TracerState u = random_state(rng, grid.cells(), 1.0);
    GardingReport gr = garding_check(u, env, grid);
    double scale = std::max(std::abs(gr.rhs), 1.0);
    max_garding = std::max(max_garding, std::max(0.0, -gr.margin) / scale);

    TracerState v = random_state(rng, grid.cells(), 1.0);
    TracerState delta(grid.cells());
    for (int c = 0; c < grid.cells(); ++c) {
      delta.y1[c] = u.y1[c] - v.y1[c];
      delta.y2[c] = u.y2[c] - v.y2[c];
    }
    double bdd = op.apply_B(delta, delta);
    double h1 = h1_norm(grid, delta);
    max_bmono = std::max(
        max_bmono, std::max(0.0, -bdd) / std::max(1.0, env.kappa_max() * h1 * h1));

    // interior transport moves no mass: zero column sums
    std::vector<double> out(grid.cells(), 0.0);
    op.add_diffusion(w, out);
    double sum = 0.0, abssum = 0.0;
    for (double x : out) {
      sum += x;
      abssum += std::abs(x);
    }
    max_cons = std::max(max_cons, std::abs(sum) / std::max(abssum, 1e-300));
    std::fill(out.begin(), out.end(), 0.0);
    op.add_advection(w, out);
    sum = abssum = 0.0;
    for (double x : out) {
      sum += x;
      abssum += std::abs(x);
    }
    if (abssum > 0.0)
      max_cons = std::max(max_cons, std::abs(sum) / abssum);
  }
  row.bound("flux_divergence", max_div, 1e-12);
  row.bound("advection_skew", max_skew, 1e-12);
  row.bound("garding", max_garding, 1e-12);
  row.bound("B_monotone", max_bmono, 1e-12);
  row.bound("operator_zero_sum", max_cons, 1e-12);

  // boundedness: the empirical C_B from one sample family keeps bounding
  // fresh pairs (max statistics are stable at this sample size)
  {
    Grid grid = Grid::build(desk_grid_config());
    Environment env(grid, 0.5);
    env.set_face_fluxes(stream_fluxes(grid, make_gyre(grid, 2.0)));
    double cb = empirical_C_B(env, grid, seed + 7777, 200);
    double fresh = empirical_C_B(env, grid, seed + 8888, 200);
    row.bound("B_bounded_stability", fresh / cb, 1.25);
  }
  return rows;
}

std::vector<CheckRow> balance_suite(std::uint64_t seed, int grids,
                                    int states_per_grid) {
  std::vector<CheckRow> rows;
  Row row{rows, "balance"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> td(0.0, 1.0);
  const double scales[3] = {0.2, 1.0, 5.0};

  double worst = 0.0;
  for (int g = 0; g < grids; ++g) {
    GridConfig gc =
        g == 0 ? desk_grid_config() : random_grid_config(seed + 3000 + g);
    Grid grid = Grid::build(gc);
    ModelParams params;
    Environment env(grid, 0.5, 30.0,
                    g % 2 == 0 ? LightShape::Constant : LightShape::Diurnal);
    double norm = params.alpha * grid.h_max();
    for (int s = 0; s < states_per_grid; ++s) {
      TracerState y = random_state(rng, grid.cells(), scales[s % 3]);
      double t = td(rng);
      for (int col = 0; col < grid.columns(); ++col) {
        if (!grid.column_wet(col)) continue;
        double r = column_mass_balance(y, grid, env, params, t, col);
        worst = std::max(worst, std::abs(r) / norm);
      }
    }
  }
  row.bound("column_budget", worst, 1e-13);
  return rows;
}

std::vector<CheckRow> light_suite(std::uint64_t seed, int samples) {
  std::vector<CheckRow> rows;
  Row row{rows, "light"};
  std::mt19937_64 rng(seed);
  Grid grid = Grid::build(desk_grid_config());
  ModelParams params;
  Environment env(grid, 0.5, 30.0, LightShape::Diurnal, 1.0);

  std::uniform_real_distribution<double> td(0.0, 1.0);
  std::uniform_int_distribution<int> cd(0, grid.cells() - 1);
  double fmax = 0.0, fmin = 1e300;
  double ins_max = 0.0, ins_min = 1e300;
  for (int s = 0; s < samples; ++s) {
    int c = cd(rng);
    if (grid.cell_zone(c) != Zone::Euphotic) continue;
    double t = td(rng);
    double f = env.light_factor(params, c, t);
    fmax = std::max(fmax, f);
    fmin = std::min(fmin, f);
    double ins = env.insolation(grid.cell_column(c), t);
    ins_max = std::max(ins_max, ins);
    ins_min = std::min(ins_min, ins);
  }
  row.bound("factor_below_one", fmax, 1.0 - 1e-300);
  rows.back().pass = fmax < 1.0;
  row.bound("factor_nonneg", std::max(0.0, -fmin), 0.0);
  row.bound("insolation_upper", ins_max, env.I0());
  row.bound("insolation_nonneg", std::max(0.0, -ins_min), 0.0);
  row.bound("diurnal_half_period",
            std::abs(env.insolation(0, 0.5)), 0.0);
  row.bound("diurnal_at_zero", std::abs(env.insolation(0, 0.0) - env.I0()),
            0.0);

  // monotone in irradiance at fixed attenuation
  std::uniform_real_distribution<double> id(0.0, 100.0);
  double viol = 0.0;
  for (int s = 0; s < samples; ++s) {
    double a = id(rng), b = id(rng);
    if (a > b) std::swap(a, b);
    viol = std::max(viol, saturation(a, params.K_I) - saturation(b, params.K_I));
  }
  row.bound("monotone_in_I", viol, 4e-16);
  return rows;
}

std::vector<CheckRow> monotone_suite(std::uint64_t seed, int samples) {
  std::vector<CheckRow> rows;
  Row row{rows, "monotone"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(-3.0, 3.0);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto draw = [&]() { return uni(rng) * std::pow(10.0, mag(rng)); };
  double gamma = 2.0;

  double mono_viol = 0.0, bound_viol = 0.0;
  for (int s = 0; s < samples; ++s) {
    double a = draw(), b = draw();
    double prod = (monotone_scalar(a, gamma) - monotone_scalar(b, gamma)) *
                  (a - b);
    mono_viol = std::max(mono_viol, -prod);
    double m = std::abs(monotone_scalar(a, gamma));
    double cap = gamma * std::abs(a);
    if (cap > 0.0)
      bound_viol = std::max(bound_viol, (m - cap) / cap);
  }
  row.bound("pairwise_monotone", mono_viol, 1e-30);
  row.bound("linear_bound", bound_viol, 1e-15);
  row.bound("zero_at_zero", std::abs(monotone_scalar(0.0, gamma)), 0.0);
  row.bound("example_1_2", std::abs(monotone_scalar(1.0, 2.0) - 1.0), 0.0);
  return rows;
}

std::vector<CheckRow> jacobian_suite(std::uint64_t seed, const Grid& grid,
                                     const Environment& env,
                                     const ModelParams& params) {
  std::vector<CheckRow> rows;
  Row row{rows, "jacobian"};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  int n = grid.cells();
  double t = 0.3;

  // linearization point bounded away from the |y1| kink
  TracerState y(n);
  for (int c = 0; c < n; ++c) {
    double u = nd(rng);
    y.y1[c] = (0.1 * params.K_P + std::abs(u)) * (u >= 0 ? 1.0 : -1.0);
    y.y2[c] = nd(rng);
  }
  TracerState h(n);
  for (int c = 0; c < n; ++c) {
    h.y1[c] = nd(rng);
    h.y2[c] = nd(rng);
  }

  auto state_shift = [&](double s) {
    TracerState ys(n);
    for (int c = 0; c < n; ++c) {
      ys.y1[c] = y.y1[c] + s * h.y1[c];
      ys.y2[c] = y.y2[c] + s * h.y2[c];
    }
    return ys;
  };

  {  // dG against a central difference of uptake_G
    double delta = 1e-4;
    std::vector<double> gp = uptake_G(state_shift(delta).y1, grid, env, params, t);
    std::vector<double> gm = uptake_G(state_shift(-delta).y1, grid, env, params, t);
    std::vector<double> jg = dG(y.y1, h.y1, grid, env, params, t);
    double num = 0.0, den = 0.0;
    for (int c = 0; c < n; ++c) {
      double fd = (gp[c] - gm[c]) / (2.0 * delta);
      num += (fd - jg[c]) * (fd - jg[c]);
      den += jg[c] * jg[c];
    }
    row.bound("dG_fd", std::sqrt(num / std::max(den, 1e-300)), 1e-6);
  }

  {  // dE against a central difference of export_E
    double delta = 1e-4;
    double num = 0.0, den = 0.0;
    TracerState yp = state_shift(delta), ym = state_shift(-delta);
    for (int col = 0; col < grid.columns(); ++col) {
      if (!grid.column_wet(col)) continue;
      double fd = (export_E(yp.y1, grid, env, params, t, col) -
                   export_E(ym.y1, grid, env, params, t, col)) /
                  (2.0 * delta);
      double je = dE(y.y1, h.y1, grid, env, params, t, col);
      num += (fd - je) * (fd - je);
      den += je * je;
    }
    row.bound("dE_fd", std::sqrt(num / std::max(den, 1e-300)), 1e-6);
  }

  auto jac_fd_error = [&](double delta) {
    ReactionOutput rp = reaction_eval(state_shift(delta), grid, env, params, t);
    ReactionOutput rm = reaction_eval(state_shift(-delta), grid, env, params, t);
    JacobianResult j = state_jacobian_apply(y, h, grid, env, params, t);
    double num = 0.0, den = 0.0;
    for (int c = 0; c < n; ++c) {
      double fd1 = (rp.d1[c] - rm.d1[c]) / (2.0 * delta);
      double fd2 = (rp.d2[c] - rm.d2[c]) / (2.0 * delta);
      num += (fd1 - j.d1[c]) * (fd1 - j.d1[c]) +
             (fd2 - j.d2[c]) * (fd2 - j.d2[c]);
      den += j.d1[c] * j.d1[c] + j.d2[c] * j.d2[c];
    }
    for (size_t f = 0; f < grid.facets().size(); ++f) {
      double fd = (rp.b1[f] - rm.b1[f]) / (2.0 * delta);
      num += (fd - j.b1[f]) * (fd - j.b1[f]);
      den += j.b1[f] * j.b1[f];
    }
    return std::sqrt(num / std::max(den, 1e-300));
  };
  row.bound("state_jacobian_fd", jac_fd_error(5e-4), 1e-5);
  {
    // least-squares slope of log error against log delta
    std::vector<double> deltas = {4e-3, 2e-3, 1e-3, 5e-4};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (double d : deltas) {
      double e = jac_fd_error(d);
      if (e <= 0.0) continue;
      double lx = std::log(d), ly = std::log(e);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
      ++m;
    }
    double slope = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 2.0;
    row.bound("state_jacobian_order", std::max(0.0, 1.9 - slope), 0.0);
    rows.back().value = slope;  // report the observed order itself
    rows.back().threshold = 1.9;
    rows.back().pass = slope >= 1.9;
  }

  {  // linearity of the action
    TracerState h2(n);
    for (int c = 0; c < n; ++c) {
      h2.y1[c] = nd(rng);
      h2.y2[c] = nd(rng);
    }
    double a = 1.7;
    TracerState comb(n);
    for (int c = 0; c < n; ++c) {
      comb.y1[c] = a * h.y1[c] + h2.y1[c];
      comb.y2[c] = a * h.y2[c] + h2.y2[c];
    }
    JacobianResult j1 = state_jacobian_apply(y, h, grid, env, params, t);
    JacobianResult j2 = state_jacobian_apply(y, h2, grid, env, params, t);
    JacobianResult jc = state_jacobian_apply(y, comb, grid, env, params, t);
    double num = 0.0, den = 0.0;
    for (int c = 0; c < n; ++c) {
      double e1 = jc.d1[c] - (a * j1.d1[c] + j2.d1[c]);
      double e2 = jc.d2[c] - (a * j1.d2[c] + j2.d2[c]);
      num += e1 * e1 + e2 * e2;
      den += jc.d1[c] * jc.d1[c] + jc.d2[c] * jc.d2[c];
    }
    row.bound("action_linearity", std::sqrt(num / std::max(den, 1e-300)),
              1e-12);
  }

  // parameter sources against central differences in each parameter
  for (ParamName pn : kAllParams) {
    double p0 = param_get(params, pn);
    double delta = 1e-4 * p0;
    ModelParams pp = params, pm = params;
    param_set(pp, pn, p0 + delta);
    param_set(pm, pn, p0 - delta);
    ReactionOutput rp = reaction_eval(y, grid, env, pp, t);
    ReactionOutput rm = reaction_eval(y, grid, env, pm, t);
    ParamSourceSlice s = param_source_at(y, pn, grid, env, params, t);
    double num = 0.0, den = 0.0;
    for (int c = 0; c < n; ++c) {
      double fd1 = (rp.d1[c] - rm.d1[c]) / (2.0 * delta);
      double fd2 = (rp.d2[c] - rm.d2[c]) / (2.0 * delta);
      num += (fd1 + s.f1[c]) * (fd1 + s.f1[c]) +
             (fd2 + s.f2[c]) * (fd2 + s.f2[c]);
      den += s.f1[c] * s.f1[c] + s.f2[c] * s.f2[c];
    }
    for (size_t f = 0; f < grid.facets().size(); ++f) {
      double fd = (rp.b1[f] - rm.b1[f]) / (2.0 * delta);
      num += (fd + s.g1[f]) * (fd + s.g1[f]);
      den += s.g1[f] * s.g1[f];
    }
    double rel = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    row.bound("param_source_fd_" + param_to_string(pn), rel, 1e-6);
  }
  return rows;
}

std::vector<CheckRow> constants_suite(const Grid& grid, const Environment& env,
                                      const ModelParams& params, double T,
                                      const PicardConfig& cfg) {
  std::vector<CheckRow> rows;
  Row row{rows, "constants"};
  ResolvedPicard rp = resolve_picard(cfg, env, grid, params, T);
  row.constant("L_d", rp.lip.L_d);
  row.constant("L_b", rp.lip.L_b);
  row.constant("c_tau", rp.lip.c_tau);
  row.constant("L1", rp.lip.L1);
  row.constant("epsilon", rp.epsilon);
  row.constant("weight_C", rp.weight_C);
  row.constant("L_A", rp.L_A);
  EnergyConstants ec =
      energy_constants(rp.lip.L1, rp.epsilon, T, env.kappa_min());
  row.constant("c1", ec.c1);
  row.constant("C1", ec.C1);
  row.constant("C2", ec.C2);
  row.constant("C", ec.C);
  row.constant("kappa_min", env.kappa_min());
  row.constant("kappa_max", env.kappa_max());
  row.constant("h_max", grid.h_max());
  row.constant("he_bar", grid.he_bar());
  row.constant("C_B_empirical", empirical_C_B(env, grid, 12345, 200));
  return rows;
}

std::vector<CheckRow> energy_suite(std::uint64_t seed, const Grid& grid,
                                   const Environment& env,
                                   const ModelParams& params, double T,
                                   int steps, const PicardConfig& cfg,
                                   int linear_runs, int nonlinear_runs,
                                   std::vector<EnergyReport>* reports) {
  std::vector<CheckRow> rows;
  Row row{rows, "energy"};
  std::mt19937_64 rng(seed);
  double eps = env.kappa_min() / 4.0;

  // linear family: reaction switched off, random y0 and constant forcing
  ModelParams off = params;
  off.alpha = 0.0;
  off.lambda = 0.0;
  double worst_linear = 0.0;
  for (int r = 0; r < linear_runs; ++r) {
    TracerState y0 = random_state(rng, grid.cells(), 1.0);
    ExternalSource src;
    src.f.push_back(random_state(rng, grid.cells(), 0.5));
    Trajectory z = Trajectory::constant(TracerState(grid.cells()), T, steps);
    Trajectory y = solve_frozen(z, env, grid, off, y0, src);
    EnergyReport er = energy_estimate_check(y, src, y0, 0.0, eps, env, grid);
    if (reports) reports->push_back(er);
    worst_linear = std::max(worst_linear, er.lhs / er.rhs);
    if (!er.pass) worst_linear = std::max(worst_linear, 2.0);
  }
  if (linear_runs > 0) row.bound("linear_runs", worst_linear, 1.0);

  // nonlinear family: the full model, estimate against C ||y0||
  LipschitzConstants L = lipschitz_constants(params, grid);
  double worst_nonlinear = 0.0;
  for (int r = 0; r < nonlinear_runs; ++r) {
    TracerState y0 = random_state(rng, grid.cells(), 1.0);
    for (int c = 0; c < grid.cells(); ++c) {
      y0.y1[c] = std::abs(y0.y1[c]) + 0.1;
      y0.y2[c] = std::abs(y0.y2[c]) * 0.3 + 0.05;
    }
    auto [y, rep] = picard_solve(y0, env, grid, params, T, steps, cfg);
    (void)rep;
    EnergyReport er =
        energy_estimate_check(y, {}, y0, L.L1, eps, env, grid);
    if (reports) reports->push_back(er);
    worst_nonlinear = std::max(worst_nonlinear, er.lhs / er.rhs);
    if (!er.pass) worst_nonlinear = std::max(worst_nonlinear, 2.0);
  }
  if (nonlinear_runs > 0) row.bound("nonlinear_runs", worst_nonlinear, 1.0);
  return rows;
}

std::vector<CheckRow> mass_suite(const Grid& grid, const Environment& env,
                                 const ModelParams& params,
                                 const TracerState& y0, double T, int steps,
                                 const PicardConfig& cfg) {
  std::vector<CheckRow> rows;
  Row row{rows, "mass"};
  auto [traj, rep] = picard_solve(y0, env, grid, params, T, steps, cfg);
  (void)rep;
  double m0 = total_mass(y0, grid);
  double drift = 0.0;
  for (const TracerState& s : traj.states)
    drift = std::max(drift, std::abs(total_mass(s, grid) - m0));
  row.bound("total_phosphorus_drift", drift / std::abs(m0), 1e-10);
  return rows;
}

std::vector<std::string> suite_names() {
  return {"saturation", "lipschitz", "skew",      "balance",  "light",
          "monotone",   "jacobian",  "constants", "energy",   "mass"};
}

std::vector<CheckRow> run_suite(const std::string& name, std::uint64_t seed,
                                const Assembled& assembled,
                                const RunConfig& cfg,
                                std::vector<EnergyReport>* energy_reports) {
  const Grid& grid = *assembled.grid;
  const Environment& env = *assembled.env;
  if (name == "all") {
    std::vector<CheckRow> all;
    for (const std::string& n : suite_names()) {
      auto rows = run_suite(n, seed, assembled, cfg, energy_reports);
      all.insert(all.end(), rows.begin(), rows.end());
    }
    return all;
  }
  if (name == "saturation") return saturation_suite(seed, 100000);
  if (name == "lipschitz") return lipschitz_suite(seed, 10, 100);
  if (name == "skew") return skew_suite(seed, 100);
  if (name == "balance") return balance_suite(seed, 10, 20);
  if (name == "light") return light_suite(seed, 10000);
  if (name == "monotone") return monotone_suite(seed, 100000);
  if (name == "jacobian")
    return jacobian_suite(seed, grid, env, cfg.params);
  if (name == "constants")
    return constants_suite(grid, env, cfg.params, cfg.T, cfg.solver);
  if (name == "energy")
    return energy_suite(seed, grid, env, cfg.params, cfg.T, cfg.steps,
                        cfg.solver, 3, 2, energy_reports);
  if (name == "mass")
    return mass_suite(grid, env, cfg.params, assembled.y0, cfg.T, cfg.steps,
                      cfg.solver);
  throw ConfigError("check: unknown suite '" + name + "'");
}

}  // namespace marpo::checks
