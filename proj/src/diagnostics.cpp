#include "poromix/diagnostics.hpp"

#include <cmath>
#include <limits>

namespace poromix {

double discrete_energy(const SimplicialMesh& mesh, const MixtureSpec& mix,
                       const ElasticitySolver& elasticity, const std::vector<CellField>& c,
                       const CellField& porosity, const CellField& pressure,
                       const DGDisplacementField& displacement) {
  const int m = mix.size();
  std::vector<double> state(m);
  KahanSum fluid;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    for (int i = 0; i < m; ++i) state[i] = c[i][k];
    fluid.add(mesh.cell_area[k] * porosity[k] * helmholtz(mix, state));
  }
  KahanSum storage;
  for (int k = 0; k < mesh.n_cells(); ++k)
    storage.add(mesh.cell_area[k] * pressure[k] * pressure[k]);
  return fluid.value() + elasticity.strain_energy(displacement) +
         elasticity.jump_penalty_energy(displacement) - elasticity.consistency_term(displacement) +
         0.5 * storage.value() / elasticity.params().biot_modulus;
}

double component_mass(const SimplicialMesh& mesh, const CellField& porosity,
                      const CellField& c_i) {
  KahanSum s;
  for (int k = 0; k < mesh.n_cells(); ++k) s.add(mesh.cell_area[k] * porosity[k] * c_i[k]);
  return s.value();
}

BoundsReport bounds_report(const MixtureSpec& mix, const std::vector<CellField>& c,
                           const CellField& porosity) {
  const int m = mix.size();
  const std::size_t n = porosity.size();
  BoundsReport r;
  r.c_min.assign(m, std::numeric_limits<double>::infinity());
  r.c_max.assign(m, -std::numeric_limits<double>::infinity());
  r.beta_c_min = std::numeric_limits<double>::infinity();
  r.beta_c_max = -std::numeric_limits<double>::infinity();
  r.phi_min = std::numeric_limits<double>::infinity();
  r.phi_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      const double v = c[i][k];
      total += v;
      r.c_min[i] = std::min(r.c_min[i], v);
      r.c_max[i] = std::max(r.c_max[i], v);
      if (!(v > 0.0))
        r.flags.push_back("c[" + mix.component(i).name + "] <= 0 in cell " + std::to_string(k));
    }
    const double bc = mix.beta_star() * total;
    r.beta_c_min = std::min(r.beta_c_min, bc);
    r.beta_c_max = std::max(r.beta_c_max, bc);
    if (!(bc < 1.0)) r.flags.push_back("beta* c >= 1 in cell " + std::to_string(k));
    r.phi_min = std::min(r.phi_min, porosity[k]);
    r.phi_max = std::max(r.phi_max, porosity[k]);
    if (!(porosity[k] > 0.0 && porosity[k] < 1.0))
      r.flags.push_back("porosity outside (0,1) in cell " + std::to_string(k));
  }
  return r;
}

}  // namespace poromix
