#pragma once

#include <string>
#include <vector>

#include "poromix/geomech.hpp"
#include "poromix/mesh.hpp"
#include "poromix/thermo.hpp"

namespace poromix {

/// Compensated (Neumaier) summation; diagnostics sums must stay accurate to
/// the 1e-12 |E0| and 1e-10 relative tolerances they certify.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct DiagnosticsRecord {
  int step = 0;
  double time = 0.0;
  double tau = 0.0;
  double energy = 0.0;                // J per unit depth
  std::vector<double> component_mass; // mol per unit depth
  std::vector<double> c_min, c_max;
  double beta_c_min = 0.0, beta_c_max = 0.0;
  double phi_min = 0.0, phi_max = 0.0;
  int iterations = 0;
  double x1 = 0.0, x2 = 0.0;
  double max_residual = 0.0;
};

/// Discrete total energy: fluid free energy, strain energy, storage term,
/// displacement jump penalty minus the consistency face term.
double discrete_energy(const SimplicialMesh& mesh, const MixtureSpec& mix,
                       const ElasticitySolver& elasticity, const std::vector<CellField>& c,
                       const CellField& porosity, const CellField& pressure,
                       const DGDisplacementField& displacement);

/// Total moles of one component: sum_K phi c_i |K|.
double component_mass(const SimplicialMesh& mesh, const CellField& porosity,
                      const CellField& c_i);

struct BoundsReport {
  std::vector<double> c_min, c_max;
  double beta_c_min = 0.0, beta_c_max = 0.0;
  double phi_min = 0.0, phi_max = 0.0;
  std::vector<std::string> flags;  // empty when all fields are admissible
  bool ok() const { return flags.empty(); }
};

BoundsReport bounds_report(const MixtureSpec& mix, const std::vector<CellField>& c,
                           const CellField& porosity);

}  // namespace poromix
