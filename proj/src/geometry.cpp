#include "marpo/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace marpo {

namespace {

// Snaps x to an integer multiple of dz; returns -1 if it is not one.
int layers_of(double depth, double dz) {
  if (depth <= 0.0) return 0;
  double q = depth / dz;
  double r = std::round(q);
  if (r < 1.0 || std::abs(q - r) > 1e-9 * std::max(1.0, q)) return -1;
  return static_cast<int>(r);
}

}  // namespace

Grid Grid::build(const GridConfig& cfg) {
  if (cfg.nx < 1 || cfg.ny < 1)
    throw std::invalid_argument("grid: nx and ny must be >= 1");
  if (cfg.dx <= 0.0 || cfg.dy <= 0.0 || cfg.dz <= 0.0)
    throw std::invalid_argument("grid: dx, dy, dz must be positive");
  if (static_cast<int>(cfg.depth.size()) != cfg.nx * cfg.ny)
    throw std::invalid_argument("grid: depth array must hold nx*ny values");
  int he_layers = layers_of(cfg.he_bar, cfg.dz);
  if (he_layers <= 0)
    throw std::invalid_argument(
        "grid: he_bar must be a positive multiple of dz");

  Grid g;
  g.cfg_ = cfg;
  // snap to the layer lattice so euphotic tops compare exactly against it
  g.cfg_.he_bar = he_layers * cfg.dz;
  int ncol = cfg.nx * cfg.ny;
  g.col_layers_.assign(ncol, 0);
  g.col_euphotic_.assign(ncol, 0);
  g.col_offset_.assign(ncol, -1);
  g.col_bottom_facet_.assign(ncol, -1);

  int offset = 0;
  for (int j = 0; j < cfg.ny; ++j) {
    for (int i = 0; i < cfg.nx; ++i) {
      int col = j * cfg.nx + i;
      double d = cfg.depth[col];
      if (d < 0.0)
        throw std::invalid_argument("grid: negative depth at column (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      int L = layers_of(d, cfg.dz);
      if (L < 0)
        throw std::invalid_argument("grid: depth not a multiple of dz at column (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      g.col_layers_[col] = L;
      if (L > 0) {
        g.col_offset_[col] = offset;
        offset += L;
        double he = std::min(cfg.he_bar, d);
        g.col_euphotic_[col] = static_cast<int>(std::round(he / cfg.dz));
        g.h_max_ = std::max(g.h_max_, d);
      }
    }
  }
  g.n_cells_ = offset;
  if (g.n_cells_ == 0)
    throw std::invalid_argument("grid: no wet columns");

  g.cell_col_.resize(g.n_cells_);
  g.cell_k_.resize(g.n_cells_);
  for (int col = 0; col < ncol; ++col) {
    for (int k = 0; k < g.col_layers_[col]; ++k) {
      int c = g.col_offset_[col] + k;
      g.cell_col_[c] = col;
      g.cell_k_[c] = k;
    }
  }

  // Boundary facets: one surface and one bottom facet per wet column.
  double area = cfg.dx * cfg.dy;
  for (int col = 0; col < ncol; ++col) {
    int L = g.col_layers_[col];
    if (L == 0) continue;
    BoundaryFacet surf;
    surf.cell = g.col_offset_[col];
    surf.column = col;
    surf.kind = FacetKind::Surface;
    surf.area = area;
    surf.depth = 0.0;
    g.facets_.push_back(surf);

    BoundaryFacet bot;
    bot.cell = g.col_offset_[col] + L - 1;
    bot.column = col;
    double d = L * cfg.dz;
    bot.kind = d > cfg.he_bar ? FacetKind::BottomAphotic
                              : FacetKind::BottomEuphotic;
    bot.area = area;
    bot.depth = d;
    g.col_bottom_facet_[col] = static_cast<int>(g.facets_.size());
    g.facets_.push_back(bot);
  }

  // Interior faces, in cell order: +x, +y, +z neighbor of each cell.
  for (int c = 0; c < g.n_cells_; ++c) {
    int col = g.cell_col_[c];
    int i = col % cfg.nx;
    int j = col / cfg.nx;
    int k = g.cell_k_[c];
    if (i + 1 < cfg.nx) {
      int nb = col + 1;
      if (k < g.col_layers_[nb]) {
        Face f;
        f.a = c;
        f.b = g.col_offset_[nb] + k;
        f.axis = 0;
        f.area = cfg.dy * cfg.dz;
        f.dist = cfg.dx;
        g.faces_.push_back(f);
      }
    }
    if (j + 1 < cfg.ny) {
      int nb = col + cfg.nx;
      if (k < g.col_layers_[nb]) {
        Face f;
        f.a = c;
        f.b = g.col_offset_[nb] + k;
        f.axis = 1;
        f.area = cfg.dx * cfg.dz;
        f.dist = cfg.dy;
        g.faces_.push_back(f);
      }
    }
    if (k + 1 < g.col_layers_[col]) {
      Face f;
      f.a = c;
      f.b = c + 1;
      f.axis = 2;
      f.area = cfg.dx * cfg.dy;
      f.dist = cfg.dz;
      g.faces_.push_back(f);
    }
  }

  return g;
}

double Grid::euphotic_depth(int col) const {
  if (col < 0 || col >= columns() || col_layers_[col] == 0)
    throw std::invalid_argument("euphotic_depth: dry or invalid column " +
                                std::to_string(col));
  return std::min(cfg_.he_bar, column_depth(col));
}

Zone Grid::cell_zone(int cell) const {
  if (cell < 0 || cell >= n_cells_)
    throw std::invalid_argument("cell_zone: invalid cell id");
  int col = cell_col_[cell];
  double he = std::min(cfg_.he_bar, column_depth(col));
  return cell_center_depth(cell) < he ? Zone::Euphotic : Zone::Aphotic;
}

GridConfig read_bathymetry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("bathymetry: cannot open " + path);
  GridConfig cfg;
  std::string header;
  if (!std::getline(in, header))
    throw std::invalid_argument("bathymetry: empty file " + path);
  std::istringstream hs(header);
  if (!(hs >> cfg.nx >> cfg.ny >> cfg.dx >> cfg.dy >> cfg.dz >> cfg.he_bar))
    throw std::invalid_argument(
        "bathymetry: first line must be 'nx ny dx dy dz he_bar'");
  cfg.depth.resize(static_cast<size_t>(cfg.nx) * cfg.ny);
  for (double& d : cfg.depth)
    if (!(in >> d))
      throw std::invalid_argument("bathymetry: expected " +
                                  std::to_string(cfg.depth.size()) +
                                  " depth values in " + path);
  return cfg;
}

void write_bathymetry(const std::string& path, const GridConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("bathymetry: cannot write " + path);
  out << cfg.nx << " " << cfg.ny << " " << cfg.dx << " " << cfg.dy << " "
      << cfg.dz << " " << cfg.he_bar << "\n";
  for (int j = 0; j < cfg.ny; ++j) {
    for (int i = 0; i < cfg.nx; ++i) {
      out << cfg.depth[j * cfg.nx + i];
      out << (i + 1 == cfg.nx ? '\n' : ' ');
    }
  }
}

}  // namespace marpo
