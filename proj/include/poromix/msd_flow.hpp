#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "poromix/boundary.hpp"
#include "poromix/mesh.hpp"
#include "poromix/thermo.hpp"

namespace poromix {

/// Frictional coefficients of the Maxwell-Stefan-Darcy closure.
struct FrictionParams {
  Eigen::MatrixXd diffusivity;   // rescaled binary coefficients, symmetric off-diagonal
  CellField permeability;        // m^2 per cell
  double reference_porosity = 0.2;
};

/// d_i = eta_i / (kappa(phi) K) and w_ij = c_i c_j / (c^2 D_ij) at one cell.
struct CellMobility {
  std::vector<double> drag;   // d_i
  Eigen::MatrixXd friction;   // w_ij, zero diagonal
};

CellMobility mobility_coefficients(const MixtureSpec& mix, const FrictionParams& friction,
                                   std::span<const double> c, double porosity,
                                   double permeability);

/// Elementwise L2 norm squared of an RT0 field given its per-face normal
/// fluxes (midpoint quadrature, exact for the affine integrand).
double rt0_l2_norm_sq(const SimplicialMesh& mesh, const FaceField& normal_flux);

/// Lowest-order Raviart-Thomas solver for the component velocity systems.
/// The RT0 mass matrices are mass-lumped by default, which turns each
/// component solve into an independent scalar update per face; the
/// consistent-mass assembly is kept behind a switch for comparison.
class VelocitySolver {
 public:
  VelocitySolver(const SimplicialMesh& mesh, const MixtureSpec& mix, FrictionParams friction,
                 bool consistent_mass = false);

  /// Fixes the t^n composition for the step (friction weights w_ij).
  void begin_step(const std::vector<CellField>& c_old, const BoundaryData& boundary);

  /// Ordered Gauss-Seidel sweep over components: component i sees already
  /// updated velocities for j < i and previous-level velocities for j > i.
  /// `mu` are the stabilized potentials at the new iterate, `upwind` the
  /// face traces of c_i^n, `porosity_iter` the freshest porosity iterate.
  void component_sweep(const std::vector<CellField>& mu, const std::vector<FaceField>& upwind,
                       const CellField& porosity_iter,
                       std::vector<FaceField>& velocity) const;

  /// Single-component solve, exposed for tests. Components j < i are read
  /// from `velocity` at the updated level, j > i at the previous level, so
  /// callers must pass the mixed-level array exactly as the sweep would.
  void solve_component_velocity(int comp, const CellField& mu_i, const FaceField& upwind_i,
                                const CellField& porosity_iter,
                                std::vector<FaceField>& velocity) const;

  /// Lumped face mass of a cellwise coefficient (sum of both side
  /// contributions of int |psi_e|^2).
  double lumped_face_mass(int face, const CellField& coefficient) const;

  const FrictionParams& friction() const { return friction_; }

 private:
  void drag_coefficients(const CellField& porosity_iter, int comp, CellField& out) const;
  CellField sigma_coefficient(int comp, const CellField& porosity_iter) const;
  FaceField force_term(int comp, const CellField& mu_i, const FaceField& upwind_i) const;
  void solve_lumped(int comp, const CellField& sigma, const FaceField& force,
                    std::vector<FaceField>& velocity) const;
  void solve_consistent(int comp, const CellField& sigma, const FaceField& force,
                        std::vector<FaceField>& velocity) const;

  const SimplicialMesh& mesh_;
  const MixtureSpec& mix_;
  FrictionParams friction_;
  bool consistent_mass_;

  // int_K |psi_e|^2 for the K+ / K- side of every face.
  std::vector<double> weight_plus_;
  std::vector<double> weight_minus_;
  // Per-cell 3x3 Gram matrices int_K psi_a . psi_b (global orientation).
  std::vector<Eigen::Matrix3d> gram_;

  // Step state
  std::vector<CellField> w_;  // friction weights, w_[i*M+j]
  const BoundaryData* boundary_ = nullptr;
  std::vector<int> active_faces_;  // interior + open boundary faces
};

}  // namespace poromix
