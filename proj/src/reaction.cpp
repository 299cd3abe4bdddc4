#include "marpo/reaction.hpp"

#include <cmath>
#include <stdexcept>

namespace marpo {

std::vector<double> uptake_G(const std::vector<double>& y1, const Grid& grid,
                             const Environment& env, const ModelParams& p,
                             double t) {
  std::vector<double> G(grid.cells(), 0.0);
  for (int col = 0; col < grid.columns(); ++col) {
    if (!grid.column_wet(col)) continue;
    int ne = grid.euphotic_layers(col);
    for (int k = 0; k < ne; ++k) {
      int c = grid.cell_index(col, k);
      G[c] = p.alpha * saturation(y1[c], p.K_P) * env.light_factor(p, c, t);
    }
  }
  return G;
}

namespace {

double column_export(const std::vector<double>& y1, const Grid& grid,
                     const Environment& env, const ModelParams& p, double t,
                     int column) {
  int ne = grid.euphotic_layers(column);
  double sum = 0.0;
  for (int k = 0; k < ne; ++k) {
    int c = grid.cell_index(column, k);
    sum += p.alpha * saturation(y1[c], p.K_P) * env.light_factor(p, c, t);
  }
  return (1.0 - p.nu) * sum * grid.dz();
}

}  // namespace

double export_E(const std::vector<double>& y1, const Grid& grid,
                const Environment& env, const ModelParams& p, double t,
                int column) {
  if (column < 0 || column >= grid.columns() || !grid.column_wet(column))
    throw std::invalid_argument("export_E: dry or invalid column");
  return column_export(y1, grid, env, p, t, column);
}

double sinking_layer_mass(const ModelParams& p, double z_top, double z_bot,
                          double he_bar) {
  if (z_top < he_bar)
    throw std::invalid_argument(
        "sinking_layer_mass: layer must start at or below he_bar");
  if (z_bot < z_top)
    throw std::invalid_argument("sinking_layer_mass: z_bot < z_top");
  return std::pow(z_top / he_bar, -p.beta) - std::pow(z_bot / he_bar, -p.beta);
}

ReactionOutput reaction_eval(const TracerState& y, const Grid& grid,
                             const Environment& env, const ModelParams& p,
                             double t) {
  ReactionOutput out;
  out.d1.assign(grid.cells(), 0.0);
  out.d2.assign(grid.cells(), 0.0);
  out.b1.assign(grid.facets().size(), 0.0);
  out.b2.assign(grid.facets().size(), 0.0);

  double dz = grid.dz();
  double he_bar = grid.he_bar();
  for (int col = 0; col < grid.columns(); ++col) {
    if (!grid.column_wet(col)) continue;
    int L = grid.column_layers(col);
    int ne = grid.euphotic_layers(col);

    double Gsum = 0.0;
    for (int k = 0; k < ne; ++k) {
      int c = grid.cell_index(col, k);
      double G = p.alpha * saturation(y.y1[c], p.K_P) * env.light_factor(p, c, t);
      Gsum += G;
      out.d1[c] = -p.lambda * y.y2[c] + G;
      out.d2[c] = p.lambda * y.y2[c] - p.nu * G;
    }
    double E = (1.0 - p.nu) * Gsum * dz;

    // Aphotic redistribution: per-cell value reproducing the exact analytic
    // layer mass of the power law, so column budgets close at machine
    // precision.
    for (int k = ne; k < L; ++k) {
      int c = grid.cell_index(col, k);
      double mass = sinking_layer_mass(p, k * dz, (k + 1) * dz, he_bar);
      double Fbar = -E * mass / dz;
      out.d1[c] = -p.lambda * y.y2[c] + Fbar;
      out.d2[c] = p.lambda * y.y2[c];
    }

    const BoundaryFacet& bot = grid.facets()[grid.bottom_facet(col)];
    if (bot.kind == FacetKind::BottomEuphotic) {
      out.b1[grid.bottom_facet(col)] = -E;
    } else {
      out.b1[grid.bottom_facet(col)] =
          -E * std::pow(bot.depth / he_bar, -p.beta);
    }
  }
  return out;
}

void reaction_d(const TracerState& y, const Grid& grid, const Environment& env,
                const ModelParams& p, double t, std::vector<double>& d1,
                std::vector<double>& d2) {
  ReactionOutput out = reaction_eval(y, grid, env, p, t);
  d1 = std::move(out.d1);
  d2 = std::move(out.d2);
}

void boundary_b(const TracerState& y, const Grid& grid, const Environment& env,
                const ModelParams& p, double t, std::vector<double>& b1,
                std::vector<double>& b2) {
  ReactionOutput out = reaction_eval(y, grid, env, p, t);
  b1 = std::move(out.b1);
  b2 = std::move(out.b2);
}

double column_mass_balance(const TracerState& y, const Grid& grid,
                           const Environment& env, const ModelParams& p,
                           double t, int column) {
  if (column < 0 || column >= grid.columns() || !grid.column_wet(column))
    throw std::invalid_argument("column_mass_balance: dry or invalid column");

  double dz = grid.dz();
  double he_bar = grid.he_bar();
  double vol = grid.cell_volume();
  int L = grid.column_layers(column);
  int ne = grid.euphotic_layers(column);

  double Gsum = 0.0;
  double interior = 0.0;
  for (int k = 0; k < ne; ++k) {
    int c = grid.cell_index(column, k);
    double G =
        p.alpha * saturation(y.y1[c], p.K_P) * env.light_factor(p, c, t);
    Gsum += G;
    // d1+d2 = (1-nu) G on euphotic cells, the lambda terms cancel
    interior += (1.0 - p.nu) * G * vol;
  }
  double E = (1.0 - p.nu) * Gsum * dz;
  for (int k = ne; k < L; ++k) {
    double mass = sinking_layer_mass(p, k * dz, (k + 1) * dz, he_bar);
    interior += (-E * mass / dz) * vol;  // d1+d2 = Fbar on aphotic cells
  }

  const BoundaryFacet& bot = grid.facets()[grid.bottom_facet(column)];
  double b1 = bot.kind == FacetKind::BottomEuphotic
                  ? -E
                  : -E * std::pow(bot.depth / he_bar, -p.beta);
  return interior + b1 * bot.area;
}

LipschitzConstants lipschitz_constants(const ModelParams& p, const Grid& grid) {
  LipschitzConstants L;
  double he = grid.he_bar();
  double hmax = grid.h_max();
  double a_over_kp = p.alpha / p.K_P;
  double term1 = std::max(
      p.lambda * p.lambda,
      a_over_kp * a_over_kp *
          (1.0 + (hmax / he - 1.0) * p.beta * p.beta * (1.0 - p.nu) *
                     (1.0 - p.nu)));
  double term2 = std::max(p.lambda * p.lambda,
                          a_over_kp * a_over_kp * p.nu * p.nu);
  L.L_d = std::sqrt(2.0 * (term1 + term2));
  L.L_b = p.alpha * (1.0 - p.nu) * std::sqrt(he) / p.K_P;

  double ratio = 0.0;
  double vol = grid.cell_volume();
  for (const BoundaryFacet& f : grid.facets())
    ratio = std::max(ratio, f.area / vol);
  L.c_tau = std::sqrt(ratio);
  L.L1 = L.L_d + L.c_tau * L.L_b;
  return L;
}

double monotone_scalar(double v, double gamma) {
  return gamma * v / (1.0 + std::abs(v));
}

double monotone_scalar_derivative(double v, double gamma) {
  double s = 1.0 + std::abs(v);
  return gamma / (s * s);
}

TracerState monotone_term(const TracerState& y, double gamma) {
  if (gamma < 0.0)
    throw std::invalid_argument("monotone_term: gamma must be >= 0");
  TracerState m(y.size());
  for (int c = 0; c < y.size(); ++c) {
    m.y1[c] = monotone_scalar(y.y1[c], gamma);
    m.y2[c] = monotone_scalar(y.y2[c], gamma);
  }
  return m;
}

}  // namespace marpo
