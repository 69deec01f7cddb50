#pragma once

#include <string>

#include "poromix/config.hpp"
#include "poromix/mesh.hpp"

namespace poromix {

/// Per-cell permeability in m^2, deterministic in the seed.
CellField gen_permeability(const PermeabilityConfig& spec, const SimplicialMesh& mesh,
                           unsigned long long seed);

/// ASCII raster: header "rows cols", then rows*cols values row-major with row
/// 0 at y = 0. Sampled at the nearest cell center. Errors report the token
/// position.
CellField read_raster_field(const std::string& path, const SimplicialMesh& mesh);

/// Seeded lattice value-noise in [0,1] with bilinear smoothstep blending and
/// octave stacking; x and y are normalized domain coordinates.
double value_noise(double x, double y, double cells_across, int octaves,
                   unsigned long long seed);

}  // namespace poromix
