/// @file checks.hpp
/// @brief Seeded invariant suites behind the CLI `check` command; the
/// acceptance tests run the same machinery at the full sample counts.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "marpo/config.hpp"
#include "marpo/solver.hpp"

namespace marpo::checks {

struct CheckRow {
  std::string suite;
  std::string name;
  double value = 0.0;      // measured quantity (max violation, residual, ...)
  double threshold = 0.0;  // bound it must stay below
  bool pass = true;
  bool constant_row = false;  // reported value, no bound attached
};

bool all_pass(const std::vector<CheckRow>& rows);

/// Canonical 8x8 demo bathymetry (depths 50..150 m, dz = 10, he_bar = 100).
GridConfig desk_grid_config();

/// Deterministic random grid family used by the property suites.
GridConfig random_grid_config(std::uint64_t seed);

// ---- suites ---------------------------------------------------------------

/// |f_K| <= 1, Lipschitz 1/K and derivative range, per K in {0.1, 0.5, 30}.
std::vector<CheckRow> saturation_suite(std::uint64_t seed, int samples);

/// ||d(y)-d(z)|| <= L_d ||y-z||, ||b(y)-b(z)|| <= L_b ||y-z||, homogeneity
/// and the power-law factor bound, over random grids and state pairs.
std::vector<CheckRow> lipschitz_suite(std::uint64_t seed, int grids,
                                      int pairs_per_grid);

/// Discrete skew-symmetry of advection, flux-divergence freedom, the Garding
/// inequality, monotonicity of B and zero-sum conservation of the operators.
std::vector<CheckRow> skew_suite(std::uint64_t seed, int trials);

/// Column budget residuals for random states on random grids.
std::vector<CheckRow> balance_suite(std::uint64_t seed, int grids,
                                    int states_per_grid);

/// Light factor in [0,1), monotone in irradiance; insolation bounds.
std::vector<CheckRow> light_suite(std::uint64_t seed, int samples);

/// Pointwise monotonicity and the linear bound of the gamma term.
std::vector<CheckRow> monotone_suite(std::uint64_t seed, int samples);

/// Finite-difference oracles for dG, dE, the state-Jacobian action and the
/// seven parameter sources; linearity of the action.
std::vector<CheckRow> jacobian_suite(std::uint64_t seed, const Grid& grid,
                                     const Environment& env,
                                     const ModelParams& params);

/// Reported constants (L_d, L_b, c_tau, L1, L_A, energy constants).
std::vector<CheckRow> constants_suite(const Grid& grid, const Environment& env,
                                      const ModelParams& params, double T,
                                      const PicardConfig& cfg);

/// Energy estimate on linear runs with random (y0, f) and on nonlinear runs.
std::vector<CheckRow> energy_suite(std::uint64_t seed, const Grid& grid,
                                   const Environment& env,
                                   const ModelParams& params, double T,
                                   int steps, const PicardConfig& cfg,
                                   int linear_runs, int nonlinear_runs,
                                   std::vector<EnergyReport>* reports);

/// Total-phosphorus drift of one full nonlinear forward run.
std::vector<CheckRow> mass_suite(const Grid& grid, const Environment& env,
                                 const ModelParams& params,
                                 const TracerState& y0, double T, int steps,
                                 const PicardConfig& cfg);

/// Named suite dispatch for the CLI; "all" concatenates every suite.
std::vector<CheckRow> run_suite(const std::string& name, std::uint64_t seed,
                                const Assembled& assembled,
                                const RunConfig& cfg,
                                std::vector<EnergyReport>* energy_reports);

std::vector<std::string> suite_names();

}  // namespace marpo::checks
