#include "marpo/config.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace marpo {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class KeyValueFile {
 public:
  explicit KeyValueFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config: line " + std::to_string(lineno) +
                          " is not key=value");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError("config: empty key on line " +
                          std::to_string(lineno));
      if (kv_.count(key))
        throw ConfigError("config: duplicate key '" + key + "'");
      kv_[key] = value;
    }
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    consumed_.insert(key);
    return it->second;
  }

  double take_double(const std::string& key, double fallback) {
    auto v = take(key);
    if (!v) return fallback;
    try {
      size_t pos = 0;
      double d = std::stod(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("");
      return d;
    } catch (...) {
      throw ConfigError("config: key '" + key + "' is not a number: " + *v);
    }
  }

  int take_int(const std::string& key, int fallback) {
    auto v = take(key);
    if (!v) return fallback;
    try {
      size_t pos = 0;
      int i = std::stoi(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("");
      return i;
    } catch (...) {
      throw ConfigError("config: key '" + key + "' is not an integer: " + *v);
    }
  }

  void finish() const {
    for (const auto& [key, value] : kv_)
      if (!consumed_.count(key))
        throw ConfigError("config: unknown key '" + key + "'");
  }

 private:
  std::map<std::string, std::string> kv_;
  std::set<std::string> consumed_;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config: " + msg);
}

}  // namespace

RunConfig parse_config(const std::string& path) {
  KeyValueFile kv(path);
  RunConfig cfg;

  if (auto bathy = kv.take("grid.bathymetry")) {
    cfg.grid_bathymetry = *bathy;
    std::ifstream probe(*bathy);
    require(static_cast<bool>(probe),
            "grid.bathymetry file does not exist: " + *bathy);
  } else {
    cfg.grid.nx = kv.take_int("grid.nx", 8);
    cfg.grid.ny = kv.take_int("grid.ny", 8);
    cfg.grid.dx = kv.take_double("grid.dx", 1.0);
    cfg.grid.dy = kv.take_double("grid.dy", 1.0);
    cfg.grid.dz = kv.take_double("grid.dz", 10.0);
    cfg.grid.he_bar = kv.take_double("grid.he_bar", 100.0);
    cfg.grid_uniform_depth = kv.take_double("grid.depth", 100.0);
  }

  cfg.kappa = kv.take_double("fields.kappa", cfg.kappa);
  if (auto psi = kv.take("fields.stream_psi")) {
    cfg.stream_psi = *psi;
    std::ifstream probe(*psi);
    require(static_cast<bool>(probe),
            "fields.stream_psi file does not exist: " + *psi);
  }
  cfg.gyre_psi0 = kv.take_double("fields.gyre_psi0", cfg.gyre_psi0);
  require(cfg.stream_psi.empty() || cfg.gyre_psi0 == 0.0,
          "fields.stream_psi and fields.gyre_psi0 are mutually exclusive");

  cfg.I0 = kv.take_double("light.I0", cfg.I0);
  if (auto shape = kv.take("light.shape")) {
    if (*shape == "constant")
      cfg.light_shape = LightShape::Constant;
    else if (*shape == "diurnal")
      cfg.light_shape = LightShape::Diurnal;
    else
      throw ConfigError("config: light.shape must be constant|diurnal, got " +
                        *shape);
  }
  cfg.light_period = kv.take_double("light.period", cfg.light_period);

  cfg.params.lambda = kv.take_double("params.lambda", cfg.params.lambda);
  cfg.params.alpha = kv.take_double("params.alpha", cfg.params.alpha);
  cfg.params.K_P = kv.take_double("params.K_P", cfg.params.K_P);
  cfg.params.K_I = kv.take_double("params.K_I", cfg.params.K_I);
  cfg.params.K_W = kv.take_double("params.K_W", cfg.params.K_W);
  cfg.params.beta = kv.take_double("params.beta", cfg.params.beta);
  cfg.params.nu = kv.take_double("params.nu", cfg.params.nu);

  cfg.init_y1 = kv.take_double("init.y1", cfg.init_y1);
  cfg.init_y2 = kv.take_double("init.y2", cfg.init_y2);

  cfg.T = kv.take_double("time.T", cfg.T);
  cfg.steps = kv.take_int("time.steps", cfg.steps);

  if (auto eps = kv.take("solver.epsilon")) {
    if (*eps != "auto") {
      std::istringstream ss(*eps);
      if (!(ss >> cfg.solver.epsilon))
        throw ConfigError("config: solver.epsilon must be a number or auto");
    }
  }
  if (auto c = kv.take("solver.weight_C")) {
    if (*c != "auto") {
      std::istringstream ss(*c);
      if (!(ss >> cfg.solver.weight_C))
        throw ConfigError("config: solver.weight_C must be a number or auto");
    }
  }
  cfg.solver.tol = kv.take_double("solver.tol", cfg.solver.tol);
  cfg.solver.plain_tol =
      kv.take_double("solver.plain_tol", cfg.solver.plain_tol);
  cfg.solver.max_iter = kv.take_int("solver.max_iter", cfg.solver.max_iter);
  cfg.solver.gamma = kv.take_double("solver.gamma", cfg.solver.gamma);

  if (auto dir = kv.take("output.dir")) cfg.output_dir = *dir;
  cfg.snapshot_stride =
      kv.take_int("output.snapshot_stride", cfg.snapshot_stride);

  if (auto act = kv.take("identify.active")) {
    cfg.identify_active.clear();
    std::istringstream ss(*act);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (!tok.empty()) cfg.identify_active.push_back(tok);
    }
    require(!cfg.identify_active.empty(),
            "identify.active must name at least one parameter");
  }
  cfg.identify_max_iter =
      kv.take_int("identify.max_iter", cfg.identify_max_iter);

  kv.finish();

  // downstream invariants, checked now so commands start from a valid state
  require(cfg.T > 0.0, "time.T must satisfy T > 0");
  require(cfg.steps >= 1, "time.steps must be >= 1");
  require(cfg.kappa > 0.0, "fields.kappa must satisfy kappa > 0");
  require(cfg.solver.tol > 0.0, "solver.tol must be positive");
  require(cfg.solver.max_iter >= 1, "solver.max_iter must be >= 1");
  require(cfg.solver.gamma >= 0.0, "solver.gamma must be >= 0");
  require(cfg.snapshot_stride >= 1, "output.snapshot_stride must be >= 1");
  try {
    cfg.params.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const std::string& name : cfg.identify_active) {
    try {
      param_from_string(name);
    } catch (const std::exception&) {
      throw ConfigError("config: identify.active names unknown parameter '" +
                        name + "'");
    }
  }

  assemble(cfg);  // exercises grid/environment/solver invariants
  return cfg;
}

Assembled assemble(const RunConfig& cfg) {
  try {
    GridConfig gc;
    if (!cfg.grid_bathymetry.empty()) {
      gc = read_bathymetry(cfg.grid_bathymetry);
    } else {
      gc = cfg.grid;
      gc.depth.assign(static_cast<size_t>(gc.nx) * gc.ny,
                      cfg.grid_uniform_depth);
    }
    auto grid = std::make_unique<Grid>(Grid::build(gc));
    auto env = std::make_unique<Environment>(*grid, cfg.kappa, cfg.I0,
                                             cfg.light_shape, cfg.light_period);
    if (!cfg.stream_psi.empty())
      env->set_face_fluxes(
          stream_fluxes(*grid, read_stream_function(cfg.stream_psi)));
    else if (cfg.gyre_psi0 != 0.0)
      env->set_face_fluxes(
          stream_fluxes(*grid, make_gyre(*grid, cfg.gyre_psi0)));

    // epsilon/weight_C invariants are preconditions of the solve
    resolve_picard(cfg.solver, *env, *grid, cfg.params, cfg.T);

    TracerState y0(grid->cells());
    for (int c = 0; c < grid->cells(); ++c) {
      y0.y1[c] = cfg.init_y1;
      y0.y2[c] = cfg.init_y2;
    }
    return Assembled{std::move(grid), std::move(env), std::move(y0)};
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace marpo
