/// @file fields.hpp
/// @brief Tracer states, biogeochemical parameters and the prescribed
/// environment: divergence-free face fluxes, diffusivity and insolation.
#pragma once

#include <string>
#include <vector>

#include "marpo/geometry.hpp"

namespace marpo {

/// Two-tracer cell-centered field (mmol P m^-3), one time slice.
struct TracerState {
  std::vector<double> y1;  // phosphate
  std::vector<double> y2;  // dissolved organic phosphorus

  TracerState() = default;
  explicit TracerState(int cells) : y1(cells, 0.0), y2(cells, 0.0) {}
  int size() const { return static_cast<int>(y1.size()); }
  bool finite() const;
};

/// The seven model parameters. All rates per unit model time.
struct ModelParams {
  double lambda = 0.5;  // remineralization rate (1/time)
  double alpha = 2.0;   // maximum uptake rate (mmol P m^-3 / time)
  double K_P = 0.5;     // phosphate half saturation (mmol P m^-3)
  double K_I = 30.0;    // light half saturation (W m^-2)
  double K_W = 0.02;    // light attenuation (1/m)
  double beta = 1.0;    // sinking power-law exponent
  double nu = 0.5;      // DOP fraction of uptake

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

enum class LightShape { Constant, Diurnal };

/// Prescribed circulation, diffusivity and insolation. Immutable once built.
class Environment {
 public:
  /// Zero velocity, spatially constant diffusivity.
  Environment(const Grid& grid, double kappa, double I0 = 30.0,
              LightShape shape = LightShape::Constant, double period = 1.0);

  void set_kappa_field(std::vector<double> kappa_per_cell);
  void set_face_fluxes(std::vector<double> fluxes);  // aligned with grid.faces()

  const Grid& grid() const { return *grid_; }
  double kappa_cell(int cell) const {
    return kappa_.size() == 1 ? kappa_[0] : kappa_[cell];
  }
  /// Harmonic mean across a face; equals kappa for a constant field.
  double kappa_face(const Face& f) const;
  double kappa_min() const { return kappa_min_; }
  double kappa_max() const { return kappa_max_; }

  const std::vector<double>& face_fluxes() const { return flux_; }
  double max_abs_flux() const;
  /// Signed flux sum per cell; zero to rounding for stream-built fluxes.
  std::vector<double> cell_divergence() const;

  /// I(x', t) = I0 * shape(t), uniform over the surface. Nonnegative, <= I0.
  double insolation(int column, double t) const;
  /// f_{K_I}(I(x',t) e^{-z_c K_W}) at the cell center. Throws on an aphotic
  /// cell; uptake is undefined there.
  double light_factor(const ModelParams& p, int cell, double t) const;

  double I0() const { return I0_; }

 private:
  const Grid* grid_;
  std::vector<double> kappa_;  // size 1 (constant) or cells
  double kappa_min_ = 0.0;
  double kappa_max_ = 0.0;
  std::vector<double> flux_;   // per interior face, signed a->b (m^3/time)
  double I0_ = 30.0;
  LightShape shape_ = LightShape::Constant;
  double period_ = 1.0;
};

/// Stream-function corner lattice for one (x,z) slice, replicated across
/// y-rows. psi[k*(nx+1)+i] is the corner at (i*dx, k*dz), k = 0 at the
/// surface; units m^2/time, fluxes are corner differences times dy.
struct StreamFunction {
  int nx = 0;
  int nz = 0;  // deepest layer count covered by the lattice
  std::vector<double> psi;  // (nz+1) rows of (nx+1) values

  double at(int i, int k) const { return psi[k * (nx + 1) + i]; }
};

/// Builds exactly divergence-free face fluxes from a slice stream function.
/// Rejects a psi that is not constant along the wetted boundary contour of
/// every y-row (that would put flux through a wall).
std::vector<double> stream_fluxes(const Grid& grid, const StreamFunction& sf);

/// sin-sin gyre confined to the shallowest wet envelope; valid on all-wet
/// grids. psi0 scales the circulation strength.
StreamFunction make_gyre(const Grid& grid, double psi0);

StreamFunction read_stream_function(const std::string& path);

/// Time-indexed sequence of states, t_k = k*dt, steps*dt = T.
struct Trajectory {
  std::vector<TracerState> states;  // steps+1 entries
  double dt = 0.0;
  double T = 0.0;
  int steps = 0;

  static Trajectory constant(const TracerState& y0, double T, int steps);
};

}  // namespace marpo
