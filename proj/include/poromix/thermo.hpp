#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "poromix/mesh.hpp"

namespace poromix {

/// Critical properties and transport data of one gas component. Strict SI;
/// configuration files accept the critical pressure in bar and convert on
/// ingestion.
struct ComponentSpec {
  std::string name;
  double critical_temperature = 0.0;  // K
  double critical_pressure = 0.0;     // Pa
  double acentric_factor = 0.0;
  double molar_weight = 0.0;          // kg/mol
  double viscosity = 0.0;             // Pa.s
};

/// chi(omega) of the Peng-Robinson attraction correction; omega = 0.49
/// belongs to the first branch.
double chi(double acentric_factor);

struct PureParams {
  double alpha = 0.0;  // Pa m^6 / mol^2
  double beta = 0.0;   // m^3 / mol
};

PureParams pure_params(const ComponentSpec& spec, double temperature);

/// An isothermal mixture: ordered component list, symmetric binary
/// interaction matrix with zero diagonal, fixed temperature. Pure-component
/// EoS parameters are cached at construction.
class MixtureSpec {
 public:
  static constexpr double kGasConstant = 8.314;  // J/(mol K)

  MixtureSpec(std::vector<ComponentSpec> components, Eigen::MatrixXd interaction,
              double temperature);

  int size() const { return static_cast<int>(components_.size()); }
  double temperature() const { return temperature_; }
  const ComponentSpec& component(int i) const { return components_[i]; }
  const std::vector<ComponentSpec>& components() const { return components_; }
  const Eigen::MatrixXd& interaction() const { return interaction_; }

  double alpha_pure(int i) const { return alpha_pure_[i]; }
  double beta_pure(int i) const { return beta_pure_[i]; }
  /// beta* = max_i beta_i; the admissibility guard is beta* c < 1.
  double beta_star() const { return beta_star_; }
  /// sqrt(alpha_i alpha_j) (1 - iota_ij), cached.
  double attraction(int i, int j) const { return attraction_(i, j); }

 private:
  std::vector<ComponentSpec> components_;
  Eigen::MatrixXd interaction_;
  double temperature_;
  std::vector<double> alpha_pure_;
  std::vector<double> beta_pure_;
  Eigen::MatrixXd attraction_;
  double beta_star_ = 0.0;
};

/// Throws std::domain_error unless all c_i > 0 and beta* c < 1 - 1e-12.
/// Every thermo entry point calls this; downstream proofs assume it.
void check_admissible(const MixtureSpec& mix, std::span<const double> c);

struct MixedParams {
  double alpha = 0.0;
  double beta = 0.0;
};

MixedParams mixing(const MixtureSpec& mix, std::span<const double> c);

/// Helmholtz free energy density (J/m^3) of the PR EoS at fixed T, with the
/// heat-capacity correction dropped.
double helmholtz(const MixtureSpec& mix, std::span<const double> c);

/// Analytic gradient of helmholtz; mu.size() == mix.size().
void chemical_potentials(const MixtureSpec& mix, std::span<const double> c,
                         std::span<double> mu);

/// p = sum_i c_i mu_i - f(c).
double pressure(const MixtureSpec& mix, std::span<const double> c);

/// Closed-form PR pressure c R T/(1-beta c) - alpha c^2/(1+2 beta c-(beta c)^2).
/// Independent route used to cross-check `pressure`.
double pressure_closed_form(const MixtureSpec& mix, std::span<const double> c);

/// c (1 - beta* c) evaluated at a previous-step state; the denominator of the
/// stabilization increment. Throws std::domain_error when beta* c >= 1.
double stabilization_scale(const MixtureSpec& mix, double c_total_old);

/// mu_i^{n+1} = mu_i(c^n) + theta R T (c_i^{n+1} - c_i^n) / (c^n (1 - beta* c^n)).
/// The same affine form serves the per-component and the total potential.
double stabilized_mu(const MixtureSpec& mix, double mu_old, double theta,
                     double c_total_old, double c_old, double c_new);

/// Stabilization parameter from the Gershgorin row bound of f''/2, computed
/// by central differences of the analytic gradient, scaled by `safety` and
/// clamped below by `floor_value`. Throws std::domain_error naming the
/// offending cell when a state is inadmissible.
double estimate_theta(const MixtureSpec& mix, const std::vector<CellField>& c_cells,
                      double safety, double floor_value);

/// Kozeny-Carman porosity multiplier (phi/phi_r)^3 ((1-phi_r)/(1-phi))^2.
double kozeny_carman(double phi, double phi_reference);

}  // namespace poromix
