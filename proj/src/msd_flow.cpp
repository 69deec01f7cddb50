#include "poromix/msd_flow.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <cmath>
#include <stdexcept>

#include "poromix/errors.hpp"

namespace poromix {

namespace {

// RT0 basis function of face `lf` of cell `c`, evaluated at a point. The
// normal component across the global face normal equals 1 on its own face.
Vec2 rt0_basis(const SimplicialMesh& mesh, int cell, int lf, Vec2 x) {
  const int face = mesh.cell_faces[cell][lf];
  const Face& f = mesh.faces[face];
  const Vec2 opp = mesh.vertices[mesh.cell_face_opposite_vertex[cell][lf]];
  const double s = mesh.cell_face_sign[cell][lf];
  const double coeff = s * f.length / (2.0 * mesh.cell_area[cell]);
  return coeff * (x - opp);
}

std::array<Vec2, 3> edge_midpoints(const SimplicialMesh& mesh, int cell) {
  const auto& v = mesh.cells[cell];
  const Vec2 p0 = mesh.vertices[v[0]], p1 = mesh.vertices[v[1]], p2 = mesh.vertices[v[2]];
  return {0.5 * (p0 + p1), 0.5 * (p1 + p2), 0.5 * (p2 + p0)};
}

}  // namespace

CellMobility mobility_coefficients(const MixtureSpec& mix, const FrictionParams& friction,
                                   std::span<const double> c, double porosity,
                                   double permeability) {
  check_admissible(mix, c);
  if (!(porosity > 0.0 && porosity < 1.0))
    throw std::domain_error("mobility_coefficients: porosity must lie in (0,1)");
  const int m = mix.size();
  CellMobility out;
  out.drag.resize(m);
  out.friction = Eigen::MatrixXd::Zero(m, m);
  const double kappa = kozeny_carman(porosity, friction.reference_porosity);
  double total = 0.0;
  for (double ci : c) total += ci;
  for (int i = 0; i < m; ++i) {
    out.drag[i] = mix.component(i).viscosity / (kappa * permeability);
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      out.friction(i, j) = c[i] * c[j] / (total * total * friction.diffusivity(i, j));
    }
  }
  return out;
}

double rt0_l2_norm_sq(const SimplicialMesh& mesh, const FaceField& normal_flux) {
  double sum = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto mids = edge_midpoints(mesh, c);
    double cell_sum = 0.0;
    for (const Vec2& mid : mids) {
      Vec2 u{0.0, 0.0};
      for (int lf = 0; lf < 3; ++lf)
        u = u + normal_flux[mesh.cell_faces[c][lf]] * rt0_basis(mesh, c, lf, mid);
      cell_sum += dot(u, u);
    }
    sum += cell_sum * mesh.cell_area[c] / 3.0;
  }
  return sum;
}

VelocitySolver::VelocitySolver(const SimplicialMesh& mesh, const MixtureSpec& mix,
                               FrictionParams friction, bool consistent_mass)
    : mesh_(mesh), mix_(mix), friction_(std::move(friction)), consistent_mass_(consistent_mass) {
  const int m = mix_.size();
  if (friction_.diffusivity.rows() != m || friction_.diffusivity.cols() != m)
    throw std::invalid_argument("VelocitySolver: diffusivity matrix must be MxM");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      if (!(friction_.diffusivity(i, j) > 0.0) ||
          friction_.diffusivity(i, j) != friction_.diffusivity(j, i))
        throw std::invalid_argument("VelocitySolver: D_ij must be symmetric and positive");
    }
  if (static_cast<int>(friction_.permeability.size()) != mesh_.n_cells())
    throw std::invalid_argument("VelocitySolver: permeability field size mismatch");

  weight_plus_.assign(mesh_.n_faces(), 0.0);
  weight_minus_.assign(mesh_.n_faces(), 0.0);
  gram_.assign(mesh_.n_cells(), Eigen::Matrix3d::Zero());
  for (int c = 0; c < mesh_.n_cells(); ++c) {
    const auto mids = edge_midpoints(mesh_, c);
    Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
    for (const Vec2& mid : mids) {
      std::array<Vec2, 3> psi;
      for (int lf = 0; lf < 3; ++lf) psi[lf] = rt0_basis(mesh_, c, lf, mid);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) g(a, b) += dot(psi[a], psi[b]);
    }
    g *= mesh_.cell_area[c] / 3.0;
    gram_[c] = g;
    for (int lf = 0; lf < 3; ++lf) {
      const int f = mesh_.cell_faces[c][lf];
      if (mesh_.faces[f].cell_plus == c)
        weight_plus_[f] = g(lf, lf);
      else
        weight_minus_[f] = g(lf, lf);
    }
  }
}

void VelocitySolver::begin_step(const std::vector<CellField>& c_old,
                                const BoundaryData& boundary) {
  const int m = mix_.size();
  const int nc = mesh_.n_cells();
  w_.assign(static_cast<std::size_t>(m) * m, CellField(nc, 0.0));
  std::vector<double> state(m);
  for (int k = 0; k < nc; ++k) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) total += c_old[i][k];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        w_[i * m + j][k] = c_old[i][k] * c_old[j][k] / (total * total * friction_.diffusivity(i, j));
      }
  }
  boundary_ = &boundary;
  active_faces_ = mesh_.interior_faces;
  for (int f : mesh_.boundary_faces)
    if (boundary.ghost(f) >= 0) active_faces_.push_back(f);
}

void VelocitySolver::drag_coefficients(const CellField& porosity_iter, int comp,
                                       CellField& out) const {
  out.resize(mesh_.n_cells());
  const double eta = mix_.component(comp).viscosity;
  for (int k = 0; k < mesh_.n_cells(); ++k) {
    const double kappa = kozeny_carman(porosity_iter[k], friction_.reference_porosity);
    out[k] = eta / (kappa * friction_.permeability[k]);
  }
}

CellField VelocitySolver::sigma_coefficient(int comp, const CellField& porosity_iter) const {
  const int m = mix_.size();
  CellField sigma;
  drag_coefficients(porosity_iter, comp, sigma);
  for (int j = 0; j < m; ++j) {
    if (j == comp) continue;
    const CellField& w = w_[comp * m + j];
    for (int k = 0; k < mesh_.n_cells(); ++k) sigma[k] += w[k];
  }
  return sigma;
}

double VelocitySolver::lumped_face_mass(int face, const CellField& coefficient) const {
  const Face& f = mesh_.faces[face];
  double v = coefficient[f.cell_plus] * weight_plus_[face];
  if (!f.boundary()) v += coefficient[f.cell_minus] * weight_minus_[face];
  return v;
}

FaceField VelocitySolver::force_term(int comp, const CellField& mu_i,
                                     const FaceField& upwind_i) const {
  FaceField force(mesh_.n_faces(), 0.0);
  for (int f : active_faces_) {
    const Face& face = mesh_.faces[f];
    double dmu;
    if (!face.boundary()) {
      dmu = mu_i[face.cell_plus] - mu_i[face.cell_minus];
    } else {
      const GhostState& g = boundary_->ghosts[boundary_->ghost(f)];
      dmu = mu_i[face.cell_plus] - g.mu[comp];
    }
    force[f] = dmu * upwind_i[f] * face.length;
  }
  return force;
}

void VelocitySolver::solve_lumped(int comp, const CellField& sigma, const FaceField& force,
                                  std::vector<FaceField>& velocity) const {
  const int m = mix_.size();
  FaceField& u = velocity[comp];
  for (int f : active_faces_) {
    double diag = lumped_face_mass(f, sigma);
    double acc = force[f];
    for (int j = 0; j < m; ++j) {
      if (j == comp) continue;
      acc += lumped_face_mass(f, w_[comp * m + j]) * velocity[j][f];
    }
    if (!(diag > 0.0))
      throw StepFailure("velocity solve breakdown at face " + std::to_string(f) +
                        ": non-positive lumped diagonal");
    u[f] = acc / diag;
  }
}

void VelocitySolver::solve_consistent(int comp, const CellField& sigma, const FaceField& force,
                                      std::vector<FaceField>& velocity) const {
  const int m = mix_.size();
  // Index the active faces.
  std::vector<int> index(mesh_.n_faces(), -1);
  for (std::size_t k = 0; k < active_faces_.size(); ++k) index[active_faces_[k]] = static_cast<int>(k);
  const int n = static_cast<int>(active_faces_.size());

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) rhs[k] = force[active_faces_[k]];

  for (int c = 0; c < mesh_.n_cells(); ++c) {
    const Eigen::Matrix3d& g = gram_[c];
    for (int a = 0; a < 3; ++a) {
      const int fa = mesh_.cell_faces[c][a];
      const int ia = index[fa];
      if (ia < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int fb = mesh_.cell_faces[c][b];
        const int ib = index[fb];
        if (ib >= 0) trips.emplace_back(ia, ib, sigma[c] * g(a, b));
        // Friction coupling to the other components' velocities.
        for (int j = 0; j < m; ++j) {
          if (j == comp) continue;
          rhs[ia] += w_[comp * m + j][c] * g(a, b) * velocity[j][fb];
        }
      }
    }
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success)
    throw StepFailure("velocity solve breakdown: consistent RT0 factorization failed");
  Eigen::VectorXd x = solver.solve(rhs);
  const double residual = (a * x - rhs).norm();
  if (residual > 1e-12 * std::max(rhs.norm(), 1.0))
    throw StepFailure("velocity solve breakdown: residual " + std::to_string(residual));
  FaceField& u = velocity[comp];
  for (int k = 0; k < n; ++k) u[active_faces_[k]] = x[k];
}

void VelocitySolver::solve_component_velocity(int comp, const CellField& mu_i,
                                              const FaceField& upwind_i,
                                              const CellField& porosity_iter,
                                              std::vector<FaceField>& velocity) const {
  const CellField sigma = sigma_coefficient(comp, porosity_iter);
  const FaceField force = force_term(comp, mu_i, upwind_i);
  if (consistent_mass_)
    solve_consistent(comp, sigma, force, velocity);
  else
    solve_lumped(comp, sigma, force, velocity);
}

void VelocitySolver::component_sweep(const std::vector<CellField>& mu,
                                     const std::vector<FaceField>& upwind,
                                     const CellField& porosity_iter,
                                     std::vector<FaceField>& velocity) const {
  for (int i = 0; i < mix_.size(); ++i)
    solve_component_velocity(i, mu[i], upwind[i], porosity_iter, velocity);
}

}  // namespace poromix
