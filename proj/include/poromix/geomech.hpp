#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <functional>
#include <vector>

#include "poromix/mesh.hpp"

namespace poromix {

struct ElasticParams {
  double lame_lambda = 0.0;   // first Lame parameter (gamma in the momentum balance)
  double lame_mu = 0.0;       // second Lame parameter
  double biot_alpha = 1.0;
  double biot_modulus = 0.0;  // N
  double dg_penalty = 0.0;    // sigma_1
};

/// Discontinuous piecewise-linear vector field: 6 dofs per cell, laid out as
/// dof(cell, vertex, component) = 6 cell + 2 vertex + component.
using DGDisplacementField = Eigen::VectorXd;

/// Interior-penalty DG discretization of quasi-static linear elasticity with
/// Biot pressure coupling on traction-free boundaries. The pure-Neumann
/// rigid-body kernel is removed with mean-displacement and mean-rotation
/// constraint rows; the constrained operator is factored once and reused for
/// every pressure right-hand side.
class ElasticitySolver {
 public:
  ElasticitySolver(const SimplicialMesh& mesh, const ElasticParams& params);

  int n_dofs() const { return 6 * mesh_.n_cells(); }

  /// Displacement with zero mean and zero rotation moment.
  DGDisplacementField solve_displacement(const CellField& pressure) const;

  /// Test hook: prescribed boundary traction (constant per boundary face)
  /// and prescribed constraint moments.
  DGDisplacementField solve_displacement(const CellField& pressure,
                                         const std::vector<Vec2>& boundary_traction,
                                         const Eigen::Vector3d& moments) const;

  /// phi^{l+1} = phi^n + (p^{l+1}-p^n)/N + alpha div(dw) averaged per cell
  /// minus the distributed face-jump correction. Throws InvariantViolation
  /// when a cell leaves (0,1).
  CellField porosity_update(const CellField& phi_old, const CellField& p_new,
                            const CellField& p_old, const DGDisplacementField& w_new,
                            const DGDisplacementField& w_old) const;

  CellField cell_divergence(const DGDisplacementField& w) const;

  double strain_energy(const DGDisplacementField& w) const;        // 1/2 (sigma_e, eps)
  double jump_penalty_energy(const DGDisplacementField& w) const;  // sum s1/(2h) |[w]|^2
  double consistency_term(const DGDisplacementField& w) const;     // sum <{sigma_e n},[w]>

  const ElasticParams& params() const { return params_; }
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }
  const Eigen::SparseMatrix<double>& constraints() const { return constraints_; }
  double stiffness_asymmetry() const;
  /// Smallest pivot of the shifted-stiffness factorization, negative when
  /// the penalty is too small for coercivity.
  double coercivity_margin() const { return coercivity_margin_; }

  /// A(w, p, v) evaluated against every test function; zero at a solution.
  Eigen::VectorXd bilinear_residual(const DGDisplacementField& w, const CellField& pressure) const;

 private:
  void assemble();
  Eigen::VectorXd pressure_load(const CellField& pressure) const;

  const SimplicialMesh& mesh_;
  ElasticParams params_;

  Eigen::SparseMatrix<double> stiffness_;    // SIPG elastic operator
  Eigen::SparseMatrix<double> coupling_;     // n_dofs x n_cells, rhs = -coupling * p
  Eigen::SparseMatrix<double> constraints_;  // 3 x n_dofs rigid-mode rows
  Eigen::SparseLU<Eigen::SparseMatrix<double>> kkt_;
  double coercivity_margin_ = 0.0;

  // Per-cell strain operator (Voigt, 3x6) and stiffness application.
  std::vector<Eigen::Matrix<double, 3, 6>> strain_op_;
  Eigen::Matrix3d voigt_d_;
  // Per interior face: rows mapping the 12 neighbor dofs to the traction
  // average (2x12) and the jump integral (2x12).
  struct FaceOps {
    Eigen::Matrix<double, 2, 12> traction_avg;
    Eigen::Matrix<double, 2, 12> jump_integral;
    std::array<int, 12> dofs;
  };
  std::vector<FaceOps> face_ops_;  // indexed by interior-face position
};

/// p^{l+1} = sum_i c_i^n mu_i^{l+1} - f(c^n), cell-wise.
CellField update_pressure(const std::vector<CellField>& c_old, const std::vector<CellField>& mu_new,
                          const CellField& helmholtz_old);

}  // namespace poromix
