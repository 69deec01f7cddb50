#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "poromix/boundary.hpp"
#include "poromix/mesh.hpp"
#include "poromix/thermo.hpp"

namespace poromix {

/// Linear system of one mass-balance solve. The unknown is the scaled
/// increment zeta = (c^{l+1} - c^n) / (c^n (1 - beta* c^n)): in that
/// variable the stabilized-potential penalty is a symmetric graph Laplacian
/// with face weight sigma K_e theta R T, so the matrix is an SPD M-matrix
/// shared by the total and all component systems of an iteration.
struct TransportSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  CellField base;   // c^n of the solved quantity
  CellField scale;  // c^n (1 - beta* c^n) per cell
};

/// Recovered solution field c^{l+1} = base + scale * zeta. Throws
/// StepFailure when the linear residual exceeds 1e-12 relative.
CellField solve_transport(const TransportSystem& system);

/// c_M = c - sum_{i<M} c_i, cell-wise.
CellField recover_last_component(const CellField& total, const std::vector<CellField>& components);

/// Assembles the mass-balance systems of one time step. All explicit data
/// (t^n state, face permeabilities, stabilization) is fixed by begin_step;
/// the matrix additionally depends on the porosity iterate.
class TransportAssembler {
 public:
  TransportAssembler(const SimplicialMesh& mesh, const MixtureSpec& mix, double penalty);

  void begin_step(const std::vector<CellField>& c_old, const CellField& phi_old,
                  const CellField& permeability, const BoundaryData& boundary, double theta);

  /// The adaptive step size is computed from the same t^n data after
  /// begin_step; it must be set before any assembly.
  void set_tau(double tau);

  /// Shared system matrix for the current porosity iterate.
  Eigen::SparseMatrix<double> build_matrix(const CellField& phi_iter) const;

  Eigen::VectorXd component_rhs(int comp, const CellField& phi_iter, const FaceField& velocity,
                                const FaceField& upwind) const;
  Eigen::VectorXd total_rhs(const CellField& phi_iter, const std::vector<FaceField>& velocities,
                            const std::vector<FaceField>& upwinds) const;

  TransportSystem assemble_component_system(int comp, const CellField& phi_iter,
                                            const FaceField& velocity,
                                            const FaceField& upwind) const;
  TransportSystem assemble_total_system(const CellField& phi_iter,
                                        const std::vector<FaceField>& velocities,
                                        const std::vector<FaceField>& upwinds) const;

  /// Residual of the component balance at self-consistent (accepted) fields,
  /// one value per cell.
  CellField local_residual(int comp, const CellField& phi_new, const CellField& c_new,
                           const CellField& mu_new, const FaceField& velocity,
                           const FaceField& upwind) const;

  /// Upwind face traces of c_comp^n with respect to the given fluxes
  /// (ghost value on open inflow boundary faces).
  FaceField upwind_traces(int comp, const FaceField& velocity) const;

  const CellField& scale() const { return scale_; }
  const std::vector<CellField>& mu_old() const { return mu_old_; }
  const CellField& mu_old_total() const { return mu_old_total_; }
  const CellField& face_permeability() const { return face_perm_; }
  double theta() const { return theta_; }
  double tau() const { return tau_; }
  double penalty() const { return penalty_; }
  const CellField& helmholtz_old() const { return f_old_; }
  const CellField& c_old(int comp) const { return (*c_old_)[comp]; }
  const CellField& c_old_total() const { return c_old_total_; }
  const CellField& phi_old() const { return *phi_old_; }
  const std::vector<int>& active_faces() const { return active_faces_; }

  /// Explicit potential jump of component `comp` (or of the total when comp
  /// is -1) across a face, oriented K+ -> K-/ghost.
  double mu_old_jump(int comp, int face) const;

 private:
  double penalty_weight(int face) const;  // sigma K_e theta R T

  const SimplicialMesh& mesh_;
  const MixtureSpec& mix_;
  double penalty_;

  double theta_ = 0.0;
  double tau_ = 0.0;
  const std::vector<CellField>* c_old_ = nullptr;
  const CellField* phi_old_ = nullptr;
  const BoundaryData* boundary_ = nullptr;
  CellField c_old_total_;
  CellField scale_;
  std::vector<CellField> mu_old_;
  CellField mu_old_total_;
  CellField f_old_;
  CellField face_perm_;
  std::vector<int> active_faces_;
};

}  // namespace poromix
