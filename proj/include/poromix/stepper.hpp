#pragma once

#include <memory>
#include <string>
#include <vector>

#include "poromix/boundary.hpp"
#include "poromix/diagnostics.hpp"
#include "poromix/geomech.hpp"
#include "poromix/mesh.hpp"
#include "poromix/msd_flow.hpp"
#include "poromix/thermo.hpp"
#include "poromix/transport.hpp"

namespace poromix {

struct TimeStepControls {
  double delta_comp_lower = 0.3;   // delta_{i,1}
  double delta_comp_upper = 0.3;   // delta_{i,2}
  double delta_total_lower = 0.3;  // delta_1
  double delta_total_upper = 0.3;  // delta_2
  double epsilon = 1e-30;          // denominator guard
  double tau_max = 1000.0;         // s
  double tol_x_rel = 1e-12;        // convergence: X1+X2 <= tol_x_rel * (first X1+X2)
  double tol_x_floor = 1e-30;
  int max_iterations = 50;
  double theta_safety = 1.1;
  double theta_floor = 1e-6;
  bool retry_with_halving = false;  // off-protocol robustness switch
  bool consistent_velocity_mass = false;
};

struct IterationErrorRecord {
  int iteration = 0;
  double x1 = 0.0;
  double x2 = 0.0;
};

struct StepReport {
  double tau = 0.0;
  double theta = 0.0;
  int iterations = 0;
  std::vector<IterationErrorRecord> history;
  double max_local_residual = 0.0;  // relative to the cell mass-rate scale
  double energy = 0.0;
  std::vector<double> component_mass;
  bool x_monotone = true;
  double contraction_ratio = 0.0;  // max X^{l+1}/X^l over l >= 1
  int clamped_cells = 0;           // cells where delta_{i,.} was clamped
  double stabilization_slack = 0.0;   // max of f(c^{n+1})-f(c^n)-mu.dc
  double transport_dissipation = 0.0; // sum [mu] c* u.n h  (>= 0 at the fixed point)
  double solid_energy_slack = 0.0;    // dPsi_s - (dphi, p^{n+1})
  bool off_protocol = false;          // a halved-tau retry was used
};

struct SimulationState {
  double time = 0.0;
  int step = 0;
  std::vector<CellField> c;  // molar densities per component
  CellField porosity;
  CellField pressure;
  std::vector<CellField> mu;  // potentials at the accepted level
  DGDisplacementField displacement;
  std::vector<FaceField> velocity;

  CellField total_density() const;
};

/// How the certified properties are enforced. Closed systems carry the
/// paper-grade guarantees and fail hard; Dirichlet-density runs downgrade the
/// conservation/energy checks to warnings unless strict mode is requested.
enum class Certification { HardClosed, WarnOpen, HardOpen };

struct TauResult {
  double tau = 0.0;
  int clamped_cells = 0;
  int limiting_cell = -1;
  int limiting_component = -1;  // -1 = total-density balance
};

/// Adaptive step bound of the bound-preserving theorem: cell/component
/// minimum of the outflow and inflow formulas, the total-density analog, and
/// tau_max. Throws StepFailure when a numerator is non-positive (the
/// porosity-ratio assumption is violated).
TauResult compute_adaptive_tau(const SimplicialMesh& mesh, const MixtureSpec& mix,
                               const TransportAssembler& transport, const BoundaryData& boundary,
                               const CellField& phi_iter,
                               const std::vector<FaceField>& velocity,
                               const std::vector<FaceField>& upwind,
                               const TimeStepControls& controls);

/// Owns the per-step solvers and drives the stabilized linear fixed-point
/// iteration. One instance per (mesh, mixture, parameter set); steps are
/// strictly sequential.
class Stepper {
 public:
  Stepper(const SimplicialMesh& mesh, const MixtureSpec& mix, FrictionParams friction,
          ElasticParams elastic, double transport_penalty, TimeStepControls controls,
          BoundaryData boundary, Certification certification);

  /// Completes the initial state: potentials, EoS pressure, displacement and
  /// a velocity solve consistent with the initial composition. Records the
  /// reference energy and masses.
  void initialize(SimulationState& state);

  /// One accepted time step; advances the state in place.
  StepReport advance(SimulationState& state);

  const ElasticitySolver& elasticity() const { return *elasticity_; }
  const TimeStepControls& controls() const { return controls_; }
  const BoundaryData& boundary() const { return boundary_; }
  double initial_energy() const { return energy_reference_; }
  double last_energy() const { return last_energy_; }
  const std::vector<double>& initial_mass() const { return mass_reference_; }

  /// Closed-system certification warnings collected on open-boundary runs.
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  StepReport attempt_step(SimulationState& state, double tau_scale);
  void certify(const std::string& what);

  const SimplicialMesh& mesh_;
  const MixtureSpec& mix_;
  ElasticParams elastic_params_;
  TimeStepControls controls_;
  BoundaryData boundary_;
  Certification certification_;

  std::unique_ptr<ElasticitySolver> elasticity_;
  std::unique_ptr<VelocitySolver> velocity_solver_;
  std::unique_ptr<TransportAssembler> transport_;
  CellField permeability_;

  double energy_reference_ = 0.0;
  double last_energy_ = 0.0;
  std::vector<double> mass_reference_;
  std::vector<std::string> warnings_;
};

}  // namespace poromix
