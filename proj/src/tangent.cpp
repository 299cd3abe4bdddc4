#include "marpo/tangent.hpp"

#include <cmath>
#include <stdexcept>

#include "marpo/saturation.hpp"

namespace marpo {

ParamName param_from_string(const std::string& name) {
  if (name == "lambda") return ParamName::Lambda;
  if (name == "alpha") return ParamName::Alpha;
  if (name == "K_P") return ParamName::KP;
  if (name == "K_I") return ParamName::KI;
  if (name == "K_W") return ParamName::KW;
  if (name == "beta") return ParamName::Beta;
  if (name == "nu") return ParamName::Nu;
  throw std::invalid_argument("unknown parameter name: " + name);
}

std::string param_to_string(ParamName p) {
  switch (p) {
    case ParamName::Lambda: return "lambda";
    case ParamName::Alpha: return "alpha";
    case ParamName::KP: return "K_P";
    case ParamName::KI: return "K_I";
    case ParamName::KW: return "K_W";
    case ParamName::Beta: return "beta";
    case ParamName::Nu: return "nu";
  }
  return "?";
}

double param_get(const ModelParams& p, ParamName name) {
  switch (name) {
    case ParamName::Lambda: return p.lambda;
    case ParamName::Alpha: return p.alpha;
    case ParamName::KP: return p.K_P;
    case ParamName::KI: return p.K_I;
    case ParamName::KW: return p.K_W;
    case ParamName::Beta: return p.beta;
    case ParamName::Nu: return p.nu;
  }
  return 0.0;
}

void param_set(ModelParams& p, ParamName name, double value) {
  switch (name) {
    case ParamName::Lambda: p.lambda = value; return;
    case ParamName::Alpha: p.alpha = value; return;
    case ParamName::KP: p.K_P = value; return;
    case ParamName::KI: p.K_I = value; return;
    case ParamName::KW: p.K_W = value; return;
    case ParamName::Beta: p.beta = value; return;
    case ParamName::Nu: p.nu = value; return;
  }
}

std::vector<double> dG(const std::vector<double>& y1,
                       const std::vector<double>& h1, const Grid& grid,
                       const Environment& env, const ModelParams& p,
                       double t) {
  std::vector<double> out(grid.cells(), 0.0);
  for (int col = 0; col < grid.columns(); ++col) {
    if (!grid.column_wet(col)) continue;
    int ne = grid.euphotic_layers(col);
    for (int k = 0; k < ne; ++k) {
      int c = grid.cell_index(col, k);
      out[c] = p.alpha * saturation_derivative(y1[c], p.K_P) * h1[c] *
               env.light_factor(p, c, t);
    }
  }
  return out;
}

double dE(const std::vector<double>& y1, const std::vector<double>& h1,
          const Grid& grid, const Environment& env, const ModelParams& p,
          double t, int column) {
  if (column < 0 || column >= grid.columns() || !grid.column_wet(column))
    throw std::invalid_argument("dE: dry or invalid column");
  int ne = grid.euphotic_layers(column);
  double sum = 0.0;
  for (int k = 0; k < ne; ++k) {
    int c = grid.cell_index(column, k);
    sum += p.alpha * saturation_derivative(y1[c], p.K_P) * h1[c] *
           env.light_factor(p, c, t);
  }
  return (1.0 - p.nu) * sum * grid.dz();
}

namespace {

// Shared propagation: a perturbation DG of the uptake on euphotic cells
// enters d via (DG, -nu DG), the aphotic cells via DE and the power-law
// layer masses, and the bottom facet via -DE (times the Gamma_2 factor).
struct Propagated {
  std::vector<double> d1, d2, b1;
};

Propagated propagate_uptake(const std::vector<double>& DG, const Grid& grid,
                            const ModelParams& p) {
  Propagated out;
  out.d1.assign(grid.cells(), 0.0);
  out.d2.assign(grid.cells(), 0.0);
  out.b1.assign(grid.facets().size(), 0.0);
  double dz = grid.dz();
  double he_bar = grid.he_bar();
  for (int col = 0; col < grid.columns(); ++col) {
    if (!grid.column_wet(col)) continue;
    int L = grid.column_layers(col);
    int ne = grid.euphotic_layers(col);
    double sum = 0.0;
    for (int k = 0; k < ne; ++k) {
      int c = grid.cell_index(col, k);
      sum += DG[c];
      out.d1[c] = DG[c];
      out.d2[c] = -p.nu * DG[c];
    }
    double DE = (1.0 - p.nu) * sum * dz;
    for (int k = ne; k < L; ++k) {
      int c = grid.cell_index(col, k);
      double mass =
          std::pow(k * dz / he_bar, -p.beta) -
          std::pow((k + 1) * dz / he_bar, -p.beta);
      out.d1[c] = -DE * mass / dz;
    }
    const BoundaryFacet& bot = grid.facets()[grid.bottom_facet(col)];
    out.b1[grid.bottom_facet(col)] =
        bot.kind == FacetKind::BottomEuphotic
            ? -DE
            : -DE * std::pow(bot.depth / he_bar, -p.beta);
  }
  return out;
}

}  // namespace

JacobianResult state_jacobian_apply(const TracerState& y, const TracerState& h,
                                    const Grid& grid, const Environment& env,
                                    const ModelParams& p, double t) {
  std::vector<double> DG = dG(y.y1, h.y1, grid, env, p, t);
  Propagated prop = propagate_uptake(DG, grid, p);
  JacobianResult out;
  out.d1 = std::move(prop.d1);
  out.d2 = std::move(prop.d2);
  out.b1 = std::move(prop.b1);
  out.b2.assign(grid.facets().size(), 0.0);
  for (int c = 0; c < grid.cells(); ++c) {
    out.d1[c] += -p.lambda * h.y2[c];
    out.d2[c] += p.lambda * h.y2[c];
  }
  return out;
}

ParamSourceSlice param_source_at(const TracerState& y, ParamName param,
                                 const Grid& grid, const Environment& env,
                                 const ModelParams& p, double t) {
  int n = grid.cells();
  int nf = static_cast<int>(grid.facets().size());
  ParamSourceSlice s;
  s.f1.assign(n, 0.0);
  s.f2.assign(n, 0.0);
  s.g1.assign(nf, 0.0);
  s.g2.assign(nf, 0.0);

  double dz = grid.dz();
  double he_bar = grid.he_bar();

  auto negate_propagated = [&](const Propagated& prop) {
    for (int c = 0; c < n; ++c) {
      s.f1[c] = -prop.d1[c];
      s.f2[c] = -prop.d2[c];
    }
    for (int f = 0; f < nf; ++f) s.g1[f] = -prop.b1[f];
  };

  switch (param) {
    case ParamName::Lambda: {
      // d1 has -lambda y2, d2 has +lambda y2; b does not depend on lambda
      for (int c = 0; c < n; ++c) {
        s.f1[c] = y.y2[c];
        s.f2[c] = -y.y2[c];
      }
      return s;
    }
    case ParamName::Alpha: {
      std::vector<double> DG(n, 0.0);
      for (int col = 0; col < grid.columns(); ++col) {
        if (!grid.column_wet(col)) continue;
        int ne = grid.euphotic_layers(col);
        for (int k = 0; k < ne; ++k) {
          int c = grid.cell_index(col, k);
          DG[c] = saturation(y.y1[c], p.K_P) * env.light_factor(p, c, t);
        }
      }
      negate_propagated(propagate_uptake(DG, grid, p));
      return s;
    }
    case ParamName::KP: {
      std::vector<double> DG(n, 0.0);
      for (int col = 0; col < grid.columns(); ++col) {
        if (!grid.column_wet(col)) continue;
        int ne = grid.euphotic_layers(col);
        for (int k = 0; k < ne; ++k) {
          int c = grid.cell_index(col, k);
          double denom = std::abs(y.y1[c]) + p.K_P;
          DG[c] = p.alpha * (-y.y1[c] / (denom * denom)) *
                  env.light_factor(p, c, t);
        }
      }
      negate_propagated(propagate_uptake(DG, grid, p));
      return s;
    }
    case ParamName::KI: {
      std::vector<double> DG(n, 0.0);
      for (int col = 0; col < grid.columns(); ++col) {
        if (!grid.column_wet(col)) continue;
        int ne = grid.euphotic_layers(col);
        for (int k = 0; k < ne; ++k) {
          int c = grid.cell_index(col, k);
          double zc = grid.cell_center_depth(c);
          double r = env.insolation(col, t) * std::exp(-zc * p.K_W);
          double denom = std::abs(r) + p.K_I;
          DG[c] = p.alpha * saturation(y.y1[c], p.K_P) *
                  (-r / (denom * denom));
        }
      }
      negate_propagated(propagate_uptake(DG, grid, p));
      return s;
    }
    case ParamName::KW: {
      std::vector<double> DG(n, 0.0);
      for (int col = 0; col < grid.columns(); ++col) {
        if (!grid.column_wet(col)) continue;
        int ne = grid.euphotic_layers(col);
        for (int k = 0; k < ne; ++k) {
          int c = grid.cell_index(col, k);
          double zc = grid.cell_center_depth(c);
          double r = env.insolation(col, t) * std::exp(-zc * p.K_W);
          DG[c] = p.alpha * saturation(y.y1[c], p.K_P) *
                  saturation_derivative(r, p.K_I) * (-zc * r);
        }
      }
      negate_propagated(propagate_uptake(DG, grid, p));
      return s;
    }
    case ParamName::Beta: {
      // Only the power-law factors carry beta.
      for (int col = 0; col < grid.columns(); ++col) {
        if (!grid.column_wet(col)) continue;
        int L = grid.column_layers(col);
        int ne = grid.euphotic_layers(col);
        double Gsum = 0.0;
        for (int k = 0; k < ne; ++k) {
          int c = grid.cell_index(col, k);
          Gsum += p.alpha * saturation(y.y1[c], p.K_P) *
                  env.light_factor(p, c, t);
        }
        double E = (1.0 - p.nu) * Gsum * dz;
        for (int k = ne; k < L; ++k) {
          int c = grid.cell_index(col, k);
          double rt = k * dz / he_bar;
          double rb = (k + 1) * dz / he_bar;
          double dmass = -std::log(rt) * std::pow(rt, -p.beta) +
                         std::log(rb) * std::pow(rb, -p.beta);
          // d(Fbar)/d(beta) = -E dmass/dz ; f = -that
          s.f1[c] = E * dmass / dz;
        }
        const BoundaryFacet& bot = grid.facets()[grid.bottom_facet(col)];
        if (bot.kind == FacetKind::BottomAphotic) {
          double rh = bot.depth / he_bar;
          // d(b1)/d(beta) = E log(rh) rh^-beta ; g = -that
          s.g1[grid.bottom_facet(col)] =
              -E * std::log(rh) * std::pow(rh, -p.beta);
        }
      }
      return s;
    }
    case ParamName::Nu: {
      for (int col = 0; col < grid.columns(); ++col) {
        if (!grid.column_wet(col)) continue;
        int L = grid.column_layers(col);
        int ne = grid.euphotic_layers(col);
        double Gsum = 0.0;
        for (int k = 0; k < ne; ++k) {
          int c = grid.cell_index(col, k);
          double G = p.alpha * saturation(y.y1[c], p.K_P) *
                     env.light_factor(p, c, t);
          Gsum += G;
          // d(d2)/d(nu) = -G ; f2 = +G
          s.f2[c] = G;
        }
        double dE_dnu = -Gsum * dz;  // E = (1-nu) * Gsum * dz
        for (int k = ne; k < L; ++k) {
          int c = grid.cell_index(col, k);
          double mass =
              std::pow(k * dz / he_bar, -p.beta) -
              std::pow((k + 1) * dz / he_bar, -p.beta);
          // d(Fbar)/d(nu) = -dE_dnu mass/dz ; f1 = -that
          s.f1[c] = dE_dnu * mass / dz;
        }
        const BoundaryFacet& bot = grid.facets()[grid.bottom_facet(col)];
        double factor = bot.kind == FacetKind::BottomEuphotic
                            ? 1.0
                            : std::pow(bot.depth / he_bar, -p.beta);
        // d(b1)/d(nu) = -dE_dnu * factor ; g1 = -that
        s.g1[grid.bottom_facet(col)] = dE_dnu * factor;
      }
      return s;
    }
  }
  throw std::invalid_argument("param_source_at: unknown parameter");
}

std::vector<ParamSourceSlice> param_source(const Trajectory& y,
                                           ParamName param, const Grid& grid,
                                           const Environment& env,
                                           const ModelParams& p) {
  std::vector<ParamSourceSlice> out;
  out.reserve(y.states.size());
  for (int k = 0; k < static_cast<int>(y.states.size()); ++k)
    out.push_back(param_source_at(y.states[k], param, grid, env, p, k * y.dt));
  return out;
}

}  // namespace marpo
