#include "poromix/transport.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>

#include "poromix/errors.hpp"

namespace poromix {

CellField solve_transport(const TransportSystem& system) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(system.matrix);
  if (solver.info() != Eigen::Success)
    throw StepFailure("transport solve breakdown: factorization failed");
  const Eigen::VectorXd zeta = solver.solve(system.rhs);
  const double residual = (system.matrix * zeta - system.rhs).norm();
  if (residual > 1e-12 * std::max(system.rhs.norm(), 1.0))
    throw StepFailure("transport solve breakdown: residual " + std::to_string(residual));
  CellField out(system.base.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = system.base[k] + system.scale[k] * zeta[k];
  return out;
}

CellField recover_last_component(const CellField& total,
                                 const std::vector<CellField>& components) {
  CellField out = total;
  for (const CellField& ci : components)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= ci[k];
  return out;
}

TransportAssembler::TransportAssembler(const SimplicialMesh& mesh, const MixtureSpec& mix,
                                       double penalty)
    : mesh_(mesh), mix_(mix), penalty_(penalty) {
  if (!(penalty_ > 0.0)) throw std::invalid_argument("TransportAssembler: penalty must be > 0");
}

void TransportAssembler::begin_step(const std::vector<CellField>& c_old, const CellField& phi_old,
                                    const CellField& permeability, const BoundaryData& boundary,
                                    double theta) {
  const int m = mix_.size();
  const int nc = mesh_.n_cells();
  c_old_ = &c_old;
  phi_old_ = &phi_old;
  boundary_ = &boundary;
  theta_ = theta;
  tau_ = 0.0;

  c_old_total_.assign(nc, 0.0);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < nc; ++k) c_old_total_[k] += c_old[i][k];

  scale_.resize(nc);
  mu_old_.assign(m, CellField(nc, 0.0));
  mu_old_total_.assign(nc, 0.0);
  f_old_.resize(nc);
  std::vector<double> state(m), mu(m);
  for (int k = 0; k < nc; ++k) {
    scale_[k] = stabilization_scale(mix_, c_old_total_[k]);
    for (int i = 0; i < m; ++i) state[i] = c_old[i][k];
    chemical_potentials(mix_, state, mu);
    for (int i = 0; i < m; ++i) {
      mu_old_[i][k] = mu[i];
      mu_old_total_[k] += mu[i];
    }
    f_old_[k] = helmholtz(mix_, state);
  }

  // Arithmetic average of the adjacent cell permeabilities (one-sided on
  // boundary faces).
  face_perm_.assign(mesh_.n_faces(), 0.0);
  for (int f = 0; f < mesh_.n_faces(); ++f) {
    const Face& face = mesh_.faces[f];
    face_perm_[f] = face.boundary()
                        ? permeability[face.cell_plus]
                        : 0.5 * (permeability[face.cell_plus] + permeability[face.cell_minus]);
  }

  active_faces_ = mesh_.interior_faces;
  for (int f : mesh_.boundary_faces)
    if (boundary.ghost(f) >= 0) active_faces_.push_back(f);
}

void TransportAssembler::set_tau(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("TransportAssembler: tau must be > 0");
  tau_ = tau;
}

double TransportAssembler::penalty_weight(int face) const {
  return penalty_ * face_perm_[face] * theta_ * MixtureSpec::kGasConstant * mix_.temperature();
}

double TransportAssembler::mu_old_jump(int comp, int face) const {
  const Face& f = mesh_.faces[face];
  const CellField& mu = comp < 0 ? mu_old_total_ : mu_old_[comp];
  if (!f.boundary()) return mu[f.cell_plus] - mu[f.cell_minus];
  const GhostState& g = boundary_->ghosts[boundary_->ghost(face)];
  return mu[f.cell_plus] - (comp < 0 ? g.mu_total : g.mu[comp]);
}

Eigen::SparseMatrix<double> TransportAssembler::build_matrix(const CellField& phi_iter) const {
  const int nc = mesh_.n_cells();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(nc + 4 * active_faces_.size());
  for (int k = 0; k < nc; ++k)
    trips.emplace_back(k, k, phi_iter[k] * mesh_.cell_area[k] * scale_[k] / tau_);
  for (int f : active_faces_) {
    const Face& face = mesh_.faces[f];
    const double w = penalty_weight(f);
    const int p = face.cell_plus;
    if (face.boundary()) {
      trips.emplace_back(p, p, w);  // ghost increment is zero
      continue;
    }
    const int q = face.cell_minus;
    trips.emplace_back(p, p, w);
    trips.emplace_back(q, q, w);
    trips.emplace_back(p, q, -w);
    trips.emplace_back(q, p, -w);
  }
  Eigen::SparseMatrix<double> a(nc, nc);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

Eigen::VectorXd TransportAssembler::component_rhs(int comp, const CellField& phi_iter,
                                                  const FaceField& velocity,
                                                  const FaceField& upwind) const {
  const int nc = mesh_.n_cells();
  const CellField& ci = comp < 0 ? c_old_total_ : (*c_old_)[comp];
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nc);
  for (int k = 0; k < nc; ++k)
    rhs[k] = -(phi_iter[k] - (*phi_old_)[k]) * ci[k] * mesh_.cell_area[k] / tau_;
  for (int f : active_faces_) {
    const Face& face = mesh_.faces[f];
    const double flux =
        upwind[f] * velocity[f] * face.length + penalty_ * face_perm_[f] * mu_old_jump(comp, f);
    rhs[face.cell_plus] -= flux;
    if (!face.boundary()) rhs[face.cell_minus] += flux;
  }
  return rhs;
}

Eigen::VectorXd TransportAssembler::total_rhs(const CellField& phi_iter,
                                              const std::vector<FaceField>& velocities,
                                              const std::vector<FaceField>& upwinds) const {
  const int nc = mesh_.n_cells();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nc);
  for (int k = 0; k < nc; ++k)
    rhs[k] = -(phi_iter[k] - (*phi_old_)[k]) * c_old_total_[k] * mesh_.cell_area[k] / tau_;
  const int m = mix_.size();
  for (int f : active_faces_) {
    const Face& face = mesh_.faces[f];
    double flux = penalty_ * face_perm_[f] * mu_old_jump(-1, f);
    for (int i = 0; i < m; ++i) flux += upwinds[i][f] * velocities[i][f] * face.length;
    rhs[face.cell_plus] -= flux;
    if (!face.boundary()) rhs[face.cell_minus] += flux;
  }
  return rhs;
}

TransportSystem TransportAssembler::assemble_component_system(int comp, const CellField& phi_iter,
                                                              const FaceField& velocity,
                                                              const FaceField& upwind) const {
  TransportSystem sys;
  sys.matrix = build_matrix(phi_iter);
  sys.rhs = component_rhs(comp, phi_iter, velocity, upwind);
  sys.base = (*c_old_)[comp];
  sys.scale = scale_;
  return sys;
}

TransportSystem TransportAssembler::assemble_total_system(
    const CellField& phi_iter, const std::vector<FaceField>& velocities,
    const std::vector<FaceField>& upwinds) const {
  TransportSystem sys;
  sys.matrix = build_matrix(phi_iter);
  sys.rhs = total_rhs(phi_iter, velocities, upwinds);
  sys.base = c_old_total_;
  sys.scale = scale_;
  return sys;
}

FaceField TransportAssembler::upwind_traces(int comp, const FaceField& velocity) const {
  const CellField& ci = (*c_old_)[comp];
  FaceField out(mesh_.n_faces(), 0.0);
  for (int f : active_faces_) {
    const Face& face = mesh_.faces[f];
    if (!face.boundary()) {
      out[f] = upwind_trace(ci, mesh_, f, velocity[f]);
    } else {
      const GhostState& g = boundary_->ghosts[boundary_->ghost(f)];
      out[f] = velocity[f] >= 0.0 ? ci[face.cell_plus] : g.c[comp];
    }
  }
  return out;
}

CellField TransportAssembler::local_residual(int comp, const CellField& phi_new,
                                             const CellField& c_new, const CellField& mu_new,
                                             const FaceField& velocity,
                                             const FaceField& upwind) const {
  const int nc = mesh_.n_cells();
  const CellField& ci = comp < 0 ? c_old_total_ : (*c_old_)[comp];
  CellField r(nc, 0.0);
  for (int k = 0; k < nc; ++k)
    r[k] = (phi_new[k] * c_new[k] - (*phi_old_)[k] * ci[k]) * mesh_.cell_area[k] / tau_;
  for (int f : active_faces_) {
    const Face& face = mesh_.faces[f];
    double dmu;
    if (!face.boundary()) {
      dmu = mu_new[face.cell_plus] - mu_new[face.cell_minus];
    } else {
      const GhostState& g = boundary_->ghosts[boundary_->ghost(f)];
      dmu = mu_new[face.cell_plus] - (comp < 0 ? g.mu_total : g.mu[comp]);
    }
    const double flux = upwind[f] * velocity[f] * face.length + penalty_ * face_perm_[f] * dmu;
    r[face.cell_plus] += flux;
    if (!face.boundary()) r[face.cell_minus] -= flux;
  }
  return r;
}

}  // namespace poromix
