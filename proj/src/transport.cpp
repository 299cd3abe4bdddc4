#include "marpo/transport.hpp"

#include <cmath>
#include <random>

namespace marpo {

TransportOperator::TransportOperator(const Grid& grid, const Environment& env)
    : grid_(&grid), env_(&env), flux_(env.face_fluxes()) {
  const auto& faces = grid.faces();
  diff_coef_.resize(faces.size());
  for (size_t f = 0; f < faces.size(); ++f)
    diff_coef_[f] = env.kappa_face(faces[f]) * faces[f].area / faces[f].dist;
}

void TransportOperator::add_diffusion(const std::vector<double>& u,
                                      std::vector<double>& out) const {
  const auto& faces = grid_->faces();
  for (size_t f = 0; f < faces.size(); ++f) {
    double q = diff_coef_[f] * (u[faces[f].a] - u[faces[f].b]);
    out[faces[f].a] += q;
    out[faces[f].b] -= q;
  }
}

void TransportOperator::add_advection(const std::vector<double>& u,
                                      std::vector<double>& out) const {
  const auto& faces = grid_->faces();
  for (size_t f = 0; f < faces.size(); ++f) {
    // central face average; with cellwise zero flux divergence this is the
    // skew-symmetric flux form
    double q = flux_[f] * 0.5 * (u[faces[f].a] + u[faces[f].b]);
    out[faces[f].a] += q;
    out[faces[f].b] -= q;
  }
}

std::vector<double> TransportOperator::apply(
    const std::vector<double>& u) const {
  std::vector<double> out(u.size(), 0.0);
  add_diffusion(u, out);
  add_advection(u, out);
  return out;
}

double TransportOperator::apply_B(const TracerState& u,
                                  const TracerState& w) const {
  std::vector<double> a1 = apply(u.y1);
  std::vector<double> a2 = apply(u.y2);
  double s = 0.0;
  for (size_t c = 0; c < a1.size(); ++c)
    s += a1[c] * w.y1[c] + a2[c] * w.y2[c];
  return s;
}

double TransportOperator::advection_skew_check(
    const std::vector<double>& w) const {
  std::vector<double> out(w.size(), 0.0);
  add_advection(w, out);
  double s = 0.0;
  for (size_t c = 0; c < w.size(); ++c) s += out[c] * w[c];
  return s;
}

std::vector<Eigen::Triplet<double>> TransportOperator::triplets() const {
  std::vector<Eigen::Triplet<double>> t;
  const auto& faces = grid_->faces();
  t.reserve(faces.size() * 8);
  for (size_t f = 0; f < faces.size(); ++f) {
    int a = faces[f].a, b = faces[f].b;
    double c = diff_coef_[f];
    t.emplace_back(a, a, c);
    t.emplace_back(a, b, -c);
    t.emplace_back(b, b, c);
    t.emplace_back(b, a, -c);
    double q = 0.5 * flux_[f];
    if (q != 0.0) {
      t.emplace_back(a, a, q);
      t.emplace_back(a, b, q);
      t.emplace_back(b, a, -q);
      t.emplace_back(b, b, -q);
    }
  }
  return t;
}

// ---- norms ----------------------------------------------------------------

double l2_norm_field(const Grid& grid, const std::vector<double>& u) {
  double vol = grid.cell_volume();
  double s = 0.0;
  for (double v : u) s += v * v;
  return std::sqrt(s * vol);
}

double l2_norm(const Grid& grid, const TracerState& u) {
  double vol = grid.cell_volume();
  double s = 0.0;
  for (int c = 0; c < u.size(); ++c)
    s += u.y1[c] * u.y1[c] + u.y2[c] * u.y2[c];
  return std::sqrt(s * vol);
}

double grad_seminorm_sq(const Grid& grid, const std::vector<double>& u) {
  double s = 0.0;
  for (const Face& f : grid.faces()) {
    double d = u[f.a] - u[f.b];
    s += f.area / f.dist * d * d;
  }
  return s;
}

double h1_norm(const Grid& grid, const TracerState& u) {
  double l2 = l2_norm(grid, u);
  double g = grad_seminorm_sq(grid, u.y1) + grad_seminorm_sq(grid, u.y2);
  return std::sqrt(l2 * l2 + g);
}

double boundary_l2(const Grid& grid, const std::vector<double>& b1,
                   const std::vector<double>& b2) {
  double s = 0.0;
  const auto& facets = grid.facets();
  for (size_t f = 0; f < facets.size(); ++f)
    s += (b1[f] * b1[f] + b2[f] * b2[f]) * facets[f].area;
  return std::sqrt(s);
}

double boundary_term(const Grid& grid, const std::vector<double>& b1,
                     const std::vector<double>& b2, const TracerState& w) {
  double s = 0.0;
  const auto& facets = grid.facets();
  for (size_t f = 0; f < facets.size(); ++f) {
    int c = facets[f].cell;
    s += (b1[f] * w.y1[c] + b2[f] * w.y2[c]) * facets[f].area;
  }
  return s;
}

double total_mass(const TracerState& y, const Grid& grid) {
  double s = 0.0;
  for (int c = 0; c < y.size(); ++c) s += y.y1[c] + y.y2[c];
  return s * grid.cell_volume();
}

GardingReport garding_check(const TracerState& u, const Environment& env,
                            const Grid& grid) {
  TransportOperator op(grid, env);
  double kmin = env.kappa_min();
  double h1 = h1_norm(grid, u);
  double l2 = l2_norm(grid, u);
  GardingReport r;
  r.lhs = kmin * h1 * h1;
  r.rhs = op.apply_B(u, u) + kmin * l2 * l2;
  r.margin = r.rhs - r.lhs;
  r.holds = r.margin >= -1e-12 * std::max(1.0, std::abs(r.rhs));
  return r;
}

double empirical_C_B(const Environment& env, const Grid& grid,
                     std::uint64_t seed, int samples) {
  TransportOperator op(grid, env);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto draw = [&]() {
    TracerState u(grid.cells());
    for (int c = 0; c < grid.cells(); ++c) {
      u.y1[c] = nd(rng);
      u.y2[c] = nd(rng);
    }
    return u;
  };
  double cb = 0.0;
  for (int s = 0; s < samples; ++s) {
    TracerState u = draw();
    TracerState w = draw();
    double hu = h1_norm(grid, u);
    double hw = h1_norm(grid, w);
    if (hu == 0.0 || hw == 0.0) continue;
    cb = std::max(cb, std::abs(op.apply_B(u, w)) / (hu * hw));
  }
  return cb;
}

DualNormSolver::DualNormSolver(const Grid& grid) : n_(grid.cells()) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(grid.faces().size() * 4 + n_);
  double vol = grid.cell_volume();
  for (int c = 0; c < n_; ++c) t.emplace_back(c, c, vol);
  for (const Face& f : grid.faces()) {
    double c = f.area / f.dist;
    t.emplace_back(f.a, f.a, c);
    t.emplace_back(f.a, f.b, -c);
    t.emplace_back(f.b, f.b, c);
    t.emplace_back(f.b, f.a, -c);
  }
  SparseMat m(n_, n_);
  m.setFromTriplets(t.begin(), t.end());
  chol_ = std::make_unique<Eigen::SimplicialLDLT<SparseMat>>(m);
}

double DualNormSolver::dual_norm(const TracerState& r) const {
  Eigen::VectorXd r1 = Eigen::Map<const Eigen::VectorXd>(r.y1.data(), n_);
  Eigen::VectorXd r2 = Eigen::Map<const Eigen::VectorXd>(r.y2.data(), n_);
  Eigen::VectorXd z1 = chol_->solve(r1);
  Eigen::VectorXd z2 = chol_->solve(r2);
  return std::sqrt(r1.dot(z1) + r2.dot(z2));
}

}  // namespace marpo
