#include "poromix/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "poromix/errors.hpp"
#include "poromix/io.hpp"
#include "poromix/permeability.hpp"

namespace poromix {

namespace {

DiagnosticsRecord make_record(const SimplicialMesh& mesh, const MixtureSpec& mix,
                              const SimulationState& state, double energy,
                              const StepReport* report) {
  DiagnosticsRecord r;
  r.step = state.step;
  r.time = state.time;
  r.energy = energy;
  const BoundsReport b = bounds_report(mix, state.c, state.porosity);
  r.c_min = b.c_min;
  r.c_max = b.c_max;
  r.beta_c_min = b.beta_c_min;
  r.beta_c_max = b.beta_c_max;
  r.phi_min = b.phi_min;
  r.phi_max = b.phi_max;
  r.component_mass.resize(mix.size());
  for (int i = 0; i < mix.size(); ++i)
    r.component_mass[i] = component_mass(mesh, state.porosity, state.c[i]);
  if (report) {
    r.tau = report->tau;
    r.iterations = report->iterations;
    if (!report->history.empty()) {
      r.x1 = report->history.back().x1;
      r.x2 = report->history.back().x2;
    }
    r.max_residual = report->max_local_residual;
  }
  return r;
}

}  // namespace

DiscreteProblem build_problem(const ScenarioConfig& config, unsigned long long seed) {
  DiscreteProblem p{build_structured_triangulation(config.mesh.nx, config.mesh.ny, config.mesh.lx,
                                                   config.mesh.ly),
                    config.make_mixture(),
                    {},
                    {},
                    {},
                    {}};
  p.permeability = gen_permeability(config.permeability, p.mesh, seed);

  const int m = p.mixture.size();
  const int nc = p.mesh.n_cells();
  p.state.c.assign(m, CellField(nc, 0.0));
  p.state.porosity.assign(nc, config.background_porosity);
  for (int k = 0; k < nc; ++k) {
    const Vec2 x = p.mesh.cell_centroid[k];
    const std::vector<double>* c = &config.background_c;
    for (const InitialRegion& region : config.initial_regions)
      if (region.box.contains(x.x, x.y)) c = &region.c;
    for (int i = 0; i < m; ++i) p.state.c[i][k] = (*c)[i];
    for (const auto& [box, value] : config.porosity_regions)
      if (box.contains(x.x, x.y)) p.state.porosity[k] = value;
  }

  p.boundary = BoundaryData::closed(p.mesh);
  if (!config.boundary.closed) {
    const double lx = config.mesh.lx, ly = config.mesh.ly;
    const double tol = 1e-9 * std::max(lx, ly);
    for (int f : p.mesh.boundary_faces) {
      const Vec2 mid = p.mesh.faces[f].midpoint;
      int edge = -1;
      if (std::abs(mid.x) < tol)
        edge = 0;
      else if (std::abs(mid.x - lx) < tol)
        edge = 1;
      else if (std::abs(mid.y) < tol)
        edge = 2;
      else if (std::abs(mid.y - ly) < tol)
        edge = 3;
      if (edge < 0 || !config.boundary.edges[edge]) continue;
      GhostState g;
      g.c = config.boundary.edges[edge]->c;
      g.mu.resize(m);
      chemical_potentials(p.mixture, g.c, g.mu);
      for (int i = 0; i < m; ++i) {
        g.mu_total += g.mu[i];
        g.c_total += g.c[i];
      }
      p.boundary.ghost_of_face[f] = static_cast<int>(p.boundary.ghosts.size());
      p.boundary.ghosts.push_back(std::move(g));
    }
  }

  p.friction.diffusivity = config.diffusivity;
  p.friction.permeability = p.permeability;
  p.friction.reference_porosity = config.reference_porosity;
  return p;
}

RunResult run_simulation(const ScenarioConfig& config, const RunOptions& options) {
  const unsigned long long seed = options.seed.value_or(config.seed);
  DiscreteProblem problem = build_problem(config, seed);

  const Certification cert = config.boundary.closed
                                 ? Certification::HardClosed
                                 : (options.strict ? Certification::HardOpen
                                                   : Certification::WarnOpen);
  Stepper stepper(problem.mesh, problem.mixture, problem.friction, config.elasticity,
                  config.transport_penalty, config.controls, problem.boundary, cert);

  RunResult result;
  result.state = std::move(problem.state);
  stepper.initialize(result.state);

  const int max_steps = options.max_steps.value_or(config.max_steps);
  const int vtk_every = options.vtk_every.value_or(config.vtk_every);

  std::vector<std::string> names;
  for (int i = 0; i < problem.mixture.size(); ++i)
    names.push_back(problem.mixture.component(i).name);

  namespace fs = std::filesystem;
  const bool writing = !options.out_dir.empty();
  if (writing) fs::create_directories(options.out_dir);

  if (!options.quiet) {
    std::cout << "poromix run: " << problem.mesh.n_cells() << " cells, "
              << problem.mixture.size() << " components, T = " << config.temperature
              << " K, seed = " << seed << "\n";
    std::cout << "permeability conversion: 1 md = " << format_double(kMillidarcy)
              << " m^2; energies in J per unit depth (plane strain)\n";
  }

  auto snapshot = [&](int step) {
    if (!writing || vtk_every <= 0) return;
    if (step % vtk_every != 0) return;
    char name[64];
    std::snprintf(name, sizeof(name), "snapshot_%06d.vtk", step);
    write_vtk(problem.mesh, problem.mixture, result.state, problem.permeability,
              (fs::path(options.out_dir) / name).string());
  };

  result.records.push_back(
      make_record(problem.mesh, problem.mixture, result.state, stepper.initial_energy(), nullptr));
  snapshot(0);

  for (int n = 0; n < max_steps && result.state.time < config.t_end; ++n) {
    StepReport report = stepper.advance(result.state);
    if (result.state.step % config.output_cadence == 0 || n + 1 == max_steps)
      result.records.push_back(
          make_record(problem.mesh, problem.mixture, result.state, report.energy, &report));
    snapshot(result.state.step);
    if (!options.quiet && (result.state.step % 100 == 0))
      std::cout << "step " << result.state.step << "  t = " << result.state.time
                << "  tau = " << report.tau << "  iters = " << report.iterations << "\n";
  }

  result.warnings = stepper.warnings();
  if (!options.quiet)
    for (const std::string& w : result.warnings) std::cout << "warning: " << w << "\n";

  if (writing) {
    result.csv_path = (fs::path(options.out_dir) / "timeseries.csv").string();
    write_timeseries(result.records, names, result.csv_path);
    write_vtk(problem.mesh, problem.mixture, result.state, problem.permeability,
              (fs::path(options.out_dir) / "final.vtk").string());
  }
  return result;
}

}  // namespace poromix
