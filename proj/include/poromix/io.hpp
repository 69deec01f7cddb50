#pragma once

#include <map>
#include <string>
#include <vector>

#include "poromix/diagnostics.hpp"
#include "poromix/mesh.hpp"
#include "poromix/stepper.hpp"
#include "poromix/thermo.hpp"

namespace poromix {

/// Deterministic formatting used by every writer: shortest representation
/// with 17 significant digits.
std::string format_double(double v);

/// Legacy ASCII VTK unstructured-grid snapshot: triangle cells, CELL_DATA
/// scalars for the molar densities, total density, pressure, porosity,
/// potentials and permeability, POINT_DATA displacement vectors
/// (vertex-averaged for visualization).
void write_vtk(const SimplicialMesh& mesh, const MixtureSpec& mix, const SimulationState& state,
               const CellField& permeability, const std::string& path);

/// Minimal reader for the writer's own output: CELL_DATA scalar arrays by
/// name (round-trip checks).
std::map<std::string, std::vector<double>> read_vtk_cell_data(const std::string& path);

/// Time-series CSV: header then one row per record.
void write_timeseries(const std::vector<DiagnosticsRecord>& records,
                      const std::vector<std::string>& component_names, const std::string& path);

struct DiffResult {
  bool equal = true;
  std::string message;
};

/// Field-wise comparison of two time-series files at a relative tolerance.
DiffResult diff_timeseries(const std::string& path_a, const std::string& path_b, double rtol);

}  // namespace poromix
