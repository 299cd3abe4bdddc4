/// @file geometry.hpp
/// @brief Discrete water-body domain: column-structured grid with staircase
/// bathymetry, euphotic/aphotic partition, boundary facets and face topology.
#pragma once

#include <string>
#include <vector>

namespace marpo {

/// Surface grid plus per-column bathymetry. Depths are meters, 0 marks a dry
/// column, every wet depth must be a positive multiple of dz.
struct GridConfig {
  int nx = 0;
  int ny = 0;
  double dx = 1.0;  // m
  double dy = 1.0;  // m
  double dz = 1.0;  // m, uniform layer thickness
  double he_bar = 0.0;  // maximal euphotic depth (m), multiple of dz
  std::vector<double> depth;  // ny rows of nx values, row-major
};

enum class Zone { Euphotic, Aphotic };

enum class FacetKind { Surface, BottomEuphotic, BottomAphotic };

/// Bottom or surface boundary facet with vertical outward normal.
struct BoundaryFacet {
  int cell = -1;      // adjacent wet cell
  int column = -1;    // surface index j*nx+i
  FacetKind kind = FacetKind::Surface;
  double area = 0.0;  // m^2
  double depth = 0.0; // x3 of the facet plane: 0 at surface, h at bottom
};

/// Interior face between two wet cells; fluxes are oriented a -> b.
struct Face {
  int a = -1;
  int b = -1;
  int axis = 0;       // 0=x, 1=y, 2=z (z points downward)
  double area = 0.0;  // m^2
  double dist = 0.0;  // center-to-center distance (m)
};

class Grid {
 public:
  /// Validates the configuration and assembles cells, facets and faces.
  /// Throws std::invalid_argument naming the offending column on bad depths.
  static Grid build(const GridConfig& cfg);

  int nx() const { return cfg_.nx; }
  int ny() const { return cfg_.ny; }
  double dx() const { return cfg_.dx; }
  double dy() const { return cfg_.dy; }
  double dz() const { return cfg_.dz; }
  double he_bar() const { return cfg_.he_bar; }
  double h_max() const { return h_max_; }
  double column_area() const { return cfg_.dx * cfg_.dy; }
  double cell_volume() const { return cfg_.dx * cfg_.dy * cfg_.dz; }

  int columns() const { return cfg_.nx * cfg_.ny; }
  int column_index(int i, int j) const { return j * cfg_.nx + i; }
  bool column_wet(int col) const { return col_layers_[col] > 0; }
  int column_layers(int col) const { return col_layers_[col]; }
  int euphotic_layers(int col) const { return col_euphotic_[col]; }
  double column_depth(int col) const { return col_layers_[col] * cfg_.dz; }

  /// h_e(x') = min(he_bar, h(x')). Throws on a dry column.
  double euphotic_depth(int col) const;

  int cells() const { return n_cells_; }
  int cell_index(int col, int k) const { return col_offset_[col] + k; }
  int cell_column(int cell) const { return cell_col_[cell]; }
  int cell_layer(int cell) const { return cell_k_[cell]; }
  int cell_i(int cell) const { return cell_col_[cell] % cfg_.nx; }
  int cell_j(int cell) const { return cell_col_[cell] / cfg_.nx; }
  double cell_center_depth(int cell) const {
    return (cell_k_[cell] + 0.5) * cfg_.dz;
  }

  /// Euphotic iff the cell center lies above h_e of its column.
  /// Throws on an invalid cell id.
  Zone cell_zone(int cell) const;

  const std::vector<BoundaryFacet>& facets() const { return facets_; }
  const std::vector<Face>& faces() const { return faces_; }

  /// Bottom facet index of a wet column (every wet column has exactly one).
  int bottom_facet(int col) const { return col_bottom_facet_[col]; }

  const GridConfig& config() const { return cfg_; }

 private:
  GridConfig cfg_;
  double h_max_ = 0.0;
  int n_cells_ = 0;
  std::vector<int> col_layers_;
  std::vector<int> col_euphotic_;
  std::vector<int> col_offset_;
  std::vector<int> col_bottom_facet_;
  std::vector<int> cell_col_;
  std::vector<int> cell_k_;
  std::vector<BoundaryFacet> facets_;
  std::vector<Face> faces_;
};

/// Plain-text bathymetry: first line "nx ny dx dy dz he_bar", then ny rows
/// of nx depth values in meters; 0 marks dry columns.
GridConfig read_bathymetry(const std::string& path);
void write_bathymetry(const std::string& path, const GridConfig& cfg);

}  // namespace marpo
