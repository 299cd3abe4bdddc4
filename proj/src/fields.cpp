#include "marpo/fields.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "marpo/saturation.hpp"

namespace marpo {

bool TracerState::finite() const {
  for (double v : y1)
    if (!std::isfinite(v)) return false;
  for (double v : y2)
    if (!std::isfinite(v)) return false;
  return true;
}

void ModelParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0))
      throw std::invalid_argument(std::string("params: ") + name +
                                  " must satisfy " + name + " > 0");
  };
  positive(lambda, "lambda");
  positive(alpha, "alpha");
  positive(K_P, "K_P");
  positive(K_I, "K_I");
  positive(K_W, "K_W");
  positive(beta, "beta");
  if (!(nu > 0.0 && nu < 1.0))
    throw std::invalid_argument("params: nu must satisfy 0 < nu < 1");
}

Environment::Environment(const Grid& grid, double kappa, double I0,
                         LightShape shape, double period)
    : grid_(&grid), I0_(I0), shape_(shape), period_(period) {
  if (!(kappa > 0.0))
    throw std::invalid_argument("environment: kappa must be positive");
  if (I0 < 0.0)
    throw std::invalid_argument("environment: I0 must be nonnegative");
  if (!(period > 0.0))
    throw std::invalid_argument("environment: light period must be positive");
  kappa_ = {kappa};
  kappa_min_ = kappa_max_ = kappa;
  flux_.assign(grid.faces().size(), 0.0);
}

void Environment::set_kappa_field(std::vector<double> kappa_per_cell) {
  if (static_cast<int>(kappa_per_cell.size()) != grid_->cells())
    throw std::invalid_argument("environment: kappa field size mismatch");
  kappa_min_ = std::numeric_limits<double>::infinity();
  kappa_max_ = 0.0;
  for (double k : kappa_per_cell) {
    if (!(k > 0.0))
      throw std::invalid_argument("environment: kappa must be positive");
    kappa_min_ = std::min(kappa_min_, k);
    kappa_max_ = std::max(kappa_max_, k);
  }
  kappa_ = std::move(kappa_per_cell);
}

void Environment::set_face_fluxes(std::vector<double> fluxes) {
  if (fluxes.size() != grid_->faces().size())
    throw std::invalid_argument("environment: flux array size mismatch");
  flux_ = std::move(fluxes);
}

double Environment::kappa_face(const Face& f) const {
  if (kappa_.size() == 1) return kappa_[0];
  double ka = kappa_[f.a], kb = kappa_[f.b];
  return 2.0 * ka * kb / (ka + kb);
}

double Environment::max_abs_flux() const {
  double m = 0.0;
  for (double q : flux_) m = std::max(m, std::abs(q));
  return m;
}

std::vector<double> Environment::cell_divergence() const {
  std::vector<double> div(grid_->cells(), 0.0);
  const auto& faces = grid_->faces();
  for (size_t f = 0; f < faces.size(); ++f) {
    div[faces[f].a] += flux_[f];
    div[faces[f].b] -= flux_[f];
  }
  return div;
}

double Environment::insolation(int column, double t) const {
  (void)column;  // uniform surface field
  switch (shape_) {
    case LightShape::Constant:
      return I0_;
    case LightShape::Diurnal:
      return I0_ * std::max(0.0, std::cos(2.0 * M_PI * t / period_));
  }
  return I0_;
}

double Environment::light_factor(const ModelParams& p, int cell,
                                 double t) const {
  if (grid_->cell_zone(cell) != Zone::Euphotic)
    throw std::invalid_argument(
        "light_factor: uptake is undefined on aphotic cells");
  double zc = grid_->cell_center_depth(cell);
  double r = insolation(grid_->cell_column(cell), t) * std::exp(-zc * p.K_W);
  return saturation(r, p.K_I);
}

// ---- stream functions ----------------------------------------------------

namespace {

// Wall faces must carry zero flux: the two psi corners bounding any boundary
// face of a row's wet region have to agree (up to rounding in sampled psi).
void validate_contour(const Grid& g, const StreamFunction& sf) {
  double psi_max = 0.0;
  for (double v : sf.psi) psi_max = std::max(psi_max, std::abs(v));
  double tol = 1e-12 * psi_max;

  auto layers = [&](int i, int j) {
    if (i < 0 || i >= g.nx()) return 0;
    return g.column_layers(g.column_index(i, j));
  };
  auto corner = [&](int i, int k) {
    if (k > sf.nz) return sf.at(i, sf.nz);
    return sf.at(i, k);
  };
  auto reject = [&](int i, int j, int k, const char* what) {
    throw std::invalid_argument(
        "stream function: psi not constant along the boundary contour (" +
        std::string(what) + " at i=" + std::to_string(i) +
        ", j=" + std::to_string(j) + ", k=" + std::to_string(k) + ")");
  };

  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      int L = layers(i, j);
      if (L == 0) continue;
      // surface and bottom of the column
      if (std::abs(corner(i, 0) - corner(i + 1, 0)) > tol)
        reject(i, j, 0, "surface");
      if (std::abs(corner(i, L) - corner(i + 1, L)) > tol)
        reject(i, j, L, "bottom");
      // west wall segment (domain edge, dry neighbor or staircase step)
      int Lw = layers(i - 1, j);
      for (int k = Lw; k < L; ++k)
        if (std::abs(corner(i, k) - corner(i, k + 1)) > tol)
          reject(i, j, k, "west wall");
      // east wall segment
      int Le = layers(i + 1, j);
      for (int k = Le; k < L; ++k)
        if (std::abs(corner(i + 1, k) - corner(i + 1, k + 1)) > tol)
          reject(i, j, k, "east wall");
    }
  }
}

}  // namespace

std::vector<double> stream_fluxes(const Grid& grid, const StreamFunction& sf) {
  if (sf.nx != grid.nx())
    throw std::invalid_argument("stream function: nx mismatch");
  if (static_cast<int>(sf.psi.size()) != (sf.nx + 1) * (sf.nz + 1))
    throw std::invalid_argument("stream function: psi size mismatch");
  validate_contour(grid, sf);

  auto corner = [&](int i, int k) {
    if (k > sf.nz) return sf.at(i, sf.nz);
    return sf.at(i, k);
  };

  const auto& faces = grid.faces();
  std::vector<double> flux(faces.size(), 0.0);
  for (size_t f = 0; f < faces.size(); ++f) {
    const Face& fc = faces[f];
    int k = grid.cell_layer(fc.a);
    int i = grid.cell_i(fc.a);
    switch (fc.axis) {
      case 0:  // between columns i and i+1; face at corner x-index i+1
        flux[f] = (corner(i + 1, k + 1) - corner(i + 1, k)) * grid.dy();
        break;
      case 1:  // replicated slices drive no y-flow
        flux[f] = 0.0;
        break;
      case 2:  // between layers k and k+1; face at corner z-index k+1
        flux[f] = (corner(i, k + 1) - corner(i + 1, k + 1)) * grid.dy();
        break;
    }
  }
  return flux;
}

StreamFunction make_gyre(const Grid& grid, double psi0) {
  int kmin = 0;
  for (int col = 0; col < grid.columns(); ++col) {
    if (!grid.column_wet(col))
      throw std::invalid_argument("gyre: requires an all-wet grid");
    int L = grid.column_layers(col);
    kmin = kmin == 0 ? L : std::min(kmin, L);
  }
  StreamFunction sf;
  sf.nx = grid.nx();
  sf.nz = kmin;
  sf.psi.assign((sf.nx + 1) * (sf.nz + 1), 0.0);
  for (int k = 0; k <= sf.nz; ++k)
    for (int i = 0; i <= sf.nx; ++i)
      sf.psi[k * (sf.nx + 1) + i] =
          psi0 * std::sin(M_PI * i / sf.nx) * std::sin(M_PI * k / sf.nz);
  return sf;
}

StreamFunction read_stream_function(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("stream function: cannot open " + path);
  StreamFunction sf;
  if (!(in >> sf.nx >> sf.nz))
    throw std::invalid_argument("stream function: first line must be 'nx nz'");
  sf.psi.resize(static_cast<size_t>(sf.nx + 1) * (sf.nz + 1));
  for (double& v : sf.psi)
    if (!(in >> v))
      throw std::invalid_argument("stream function: expected " +
                                  std::to_string(sf.psi.size()) + " values");
  return sf;
}

Trajectory Trajectory::constant(const TracerState& y0, double T, int steps) {
  Trajectory tr;
  tr.T = T;
  tr.steps = steps;
  tr.dt = T / steps;
  tr.states.assign(steps + 1, y0);
  return tr;
}

}  // namespace marpo
