/// @file tangent.hpp
/// @brief Derivatives of the reaction couplings: the state-Jacobian action
/// (matrix-free) and the parameter-derivative inhomogeneities (f, g) of the
/// linearized equation.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "marpo/fields.hpp"
#include "marpo/geometry.hpp"

namespace marpo {

enum class ParamName { Lambda, Alpha, KP, KI, KW, Beta, Nu };

constexpr std::array<ParamName, 7> kAllParams = {
    ParamName::Lambda, ParamName::Alpha, ParamName::KP, ParamName::KI,
    ParamName::KW,     ParamName::Beta,  ParamName::Nu};

ParamName param_from_string(const std::string& name);  // throws on unknown
std::string param_to_string(ParamName p);
double param_get(const ModelParams& p, ParamName name);
void param_set(ModelParams& p, ParamName name, double value);

/// dG(y1)[h1] = alpha K_P h1 / (|y1|+K_P)^2 * light factor, euphotic cells;
/// zero entries on aphotic cells.
std::vector<double> dG(const std::vector<double>& y1,
                       const std::vector<double>& h1, const Grid& grid,
                       const Environment& env, const ModelParams& p, double t);

/// dE(y1)[h1] = (1-nu) sum_{euphotic} dG dz, same quadrature as export_E.
double dE(const std::vector<double>& y1, const std::vector<double>& h1,
          const Grid& grid, const Environment& env, const ModelParams& p,
          double t, int column);

/// Result of applying the state Jacobian at a linearization point to a
/// perturbation: interior pair per cell plus boundary pair per facet.
struct JacobianResult {
  std::vector<double> d1, d2;  // per cell
  std::vector<double> b1, b2;  // per facet (b2 stays zero)
};

/// Linear action h -> (d_y d(y) h, d_y b(y) h). The expressions of E and
/// Fbar are kept, with G replaced by dG, plus the linear lambda/nu parts.
JacobianResult state_jacobian_apply(const TracerState& y, const TracerState& h,
                                    const Grid& grid, const Environment& env,
                                    const ModelParams& p, double t);

/// One time slice of the linearized equation's right-hand side for one
/// parameter: f = -d_p d(y;p), g = -d_p b(y;p). The b2/g2 component is zero
/// for every parameter.
struct ParamSourceSlice {
  std::vector<double> f1, f2;  // per cell
  std::vector<double> g1, g2;  // per facet
};

ParamSourceSlice param_source_at(const TracerState& y, ParamName param,
                                 const Grid& grid, const Environment& env,
                                 const ModelParams& p, double t);

/// Sources along a whole trajectory, one slice per time level.
std::vector<ParamSourceSlice> param_source(const Trajectory& y,
                                           ParamName param, const Grid& grid,
                                           const Environment& env,
                                           const ModelParams& p);

}  // namespace marpo
