#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "poromix/config.hpp"
#include "poromix/diagnostics.hpp"
#include "poromix/stepper.hpp"

namespace poromix {

struct RunOptions {
  std::string out_dir;              // empty = no file output
  std::optional<int> max_steps;     // overrides the config step budget
  std::optional<int> vtk_every;
  std::optional<unsigned long long> seed;
  bool strict = false;              // promote open-boundary warnings to failures
  bool quiet = false;
};

struct RunResult {
  std::vector<DiagnosticsRecord> records;
  SimulationState state;
  std::vector<std::string> warnings;
  std::string csv_path;
};

/// Builds the discrete problem from a scenario, runs the time loop at the
/// configured cadence, writes the time-series CSV and VTK snapshots under
/// out_dir, and returns the full diagnostics series.
RunResult run_simulation(const ScenarioConfig& config, const RunOptions& options);

/// Initial fields and mesh construction, shared with tests.
struct DiscreteProblem {
  SimplicialMesh mesh;
  MixtureSpec mixture;
  CellField permeability;
  SimulationState state;       // fields at t = 0 (before Stepper::initialize)
  BoundaryData boundary;
  FrictionParams friction;
};

DiscreteProblem build_problem(const ScenarioConfig& config, unsigned long long seed);

}  // namespace poromix
