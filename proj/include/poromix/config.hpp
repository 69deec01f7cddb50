#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "poromix/stepper.hpp"
#include "poromix/thermo.hpp"

namespace poromix {

/// 1 millidarcy in m^2; printed in run headers.
constexpr double kMillidarcy = 9.869233e-16;
/// Configuration files give critical pressures in bar.
constexpr double kBar = 1e5;

struct MeshConfig {
  int nx = 0, ny = 0;
  double lx = 0.0, ly = 0.0;
};

/// Axis-aligned box [x0,x1] x [y0,y1].
struct BoxRegion {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

struct InitialRegion {
  BoxRegion box;
  std::vector<double> c;  // mol/m^3 per component
};

struct PermeabilityConfig {
  enum class Kind { Uniform, Channels, Noise, Raster };
  Kind kind = Kind::Uniform;
  double uniform_md = 100.0;
  double matrix_md = 1.0;
  double channel_md = 200.0;
  std::vector<BoxRegion> channels;  // defaults to the two injection strips
  double noise_min_md = 1.0;
  double noise_max_md = 100.0;
  double noise_scale = 4.0;  // lattice cells across the domain
  int noise_octaves = 3;
  std::string raster_path;
  bool raster_in_md = true;
};

struct EdgeDirichlet {
  std::vector<double> c;  // full ghost composition
};

struct BoundaryConfig {
  bool closed = true;
  // left, right, bottom, top
  std::array<std::optional<EdgeDirichlet>, 4> edges;
};

struct ScenarioConfig {
  MeshConfig mesh;
  double temperature = 0.0;
  std::vector<ComponentSpec> components;
  Eigen::MatrixXd interaction;
  Eigen::MatrixXd diffusivity;
  double reference_porosity = 0.2;
  double background_porosity = 0.2;
  std::vector<std::pair<BoxRegion, double>> porosity_regions;
  std::vector<double> background_c;
  std::vector<InitialRegion> initial_regions;
  PermeabilityConfig permeability;
  ElasticParams elasticity;
  double transport_penalty = 0.0;
  TimeStepControls controls;
  BoundaryConfig boundary;
  double t_end = std::numeric_limits<double>::infinity();
  int max_steps = 0;
  int output_cadence = 1;
  int vtk_every = 0;
  unsigned long long seed = 0;

  MixtureSpec make_mixture() const;
};

/// Parses and validates a scenario file. Parse errors report line/column;
/// validation collects every violation before throwing ConfigError.
ScenarioConfig load_config(const std::string& path);

/// Same, from an in-memory document (tests).
ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<memory>");

}  // namespace poromix
