/// @file config.hpp
/// @brief Flat key=value run configuration with strict validation: unknown
/// and duplicate keys are rejected, downstream invariants are checked at
/// parse time.
#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "marpo/fields.hpp"
#include "marpo/geometry.hpp"
#include "marpo/solver.hpp"

namespace marpo {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // grid section: either a bathymetry file or an inline uniform box
  std::string grid_bathymetry;  // path; empty = inline
  GridConfig grid;              // used when inline (uniform grid.depth)
  double grid_uniform_depth = 0.0;

  // fields section
  double kappa = 0.5;
  std::string stream_psi;   // path to a stream-function file; empty = none
  double gyre_psi0 = 0.0;   // built-in gyre amplitude; 0 disables

  // light section
  double I0 = 30.0;
  LightShape light_shape = LightShape::Constant;
  double light_period = 1.0;

  ModelParams params;

  // initial state (uniform)
  double init_y1 = 1.0;
  double init_y2 = 0.1;

  // time section
  double T = 1.0;
  int steps = 100;

  PicardConfig solver;

  // output section
  std::string output_dir = "out";
  int snapshot_stride = 10;

  // identify section
  std::vector<std::string> identify_active = {"lambda", "alpha"};
  int identify_max_iter = 30;
};

/// Everything a command needs, built and validated from a RunConfig.
/// Heap-owned so the environment's grid reference stays stable.
struct Assembled {
  std::unique_ptr<Grid> grid;
  std::unique_ptr<Environment> env;
  TracerState y0;
};

/// Parses and fully validates; error messages name the key and constraint.
RunConfig parse_config(const std::string& path);

/// Builds grid, environment and initial state; throws ConfigError on any
/// violated invariant.
Assembled assemble(const RunConfig& cfg);

}  // namespace marpo
