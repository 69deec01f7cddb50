#include "poromix/permeability.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "poromix/errors.hpp"

namespace poromix {

namespace {

// splitmix64 of the lattice coordinates; order-independent determinism.
double lattice_value(std::int64_t ix, std::int64_t iy, int octave, unsigned long long seed) {
  std::uint64_t z = static_cast<std::uint64_t>(ix) * 0x9E3779B97F4A7C15ULL ^
                    static_cast<std::uint64_t>(iy) * 0xC2B2AE3D27D4EB4FULL ^
                    (static_cast<std::uint64_t>(octave) << 32) ^ seed;
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

}  // namespace

double value_noise(double x, double y, double cells_across, int octaves,
                   unsigned long long seed) {
  double sum = 0.0, amplitude = 1.0, norm = 0.0;
  double freq = cells_across;
  for (int o = 0; o < octaves; ++o) {
    const double fx = x * freq, fy = y * freq;
    const std::int64_t ix = static_cast<std::int64_t>(std::floor(fx));
    const std::int64_t iy = static_cast<std::int64_t>(std::floor(fy));
    const double tx = smoothstep(fx - ix), ty = smoothstep(fy - iy);
    const double v00 = lattice_value(ix, iy, o, seed);
    const double v10 = lattice_value(ix + 1, iy, o, seed);
    const double v01 = lattice_value(ix, iy + 1, o, seed);
    const double v11 = lattice_value(ix + 1, iy + 1, o, seed);
    const double v = (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) +
                     ty * ((1.0 - tx) * v01 + tx * v11);
    sum += amplitude * v;
    norm += amplitude;
    amplitude *= 0.5;
    freq *= 2.0;
  }
  return sum / norm;
}

CellField gen_permeability(const PermeabilityConfig& spec, const SimplicialMesh& mesh,
                           unsigned long long seed) {
  const int nc = mesh.n_cells();
  CellField out(nc, 0.0);
  switch (spec.kind) {
    case PermeabilityConfig::Kind::Uniform:
      for (int k = 0; k < nc; ++k) out[k] = spec.uniform_md * kMillidarcy;
      break;
    case PermeabilityConfig::Kind::Channels:
      for (int k = 0; k < nc; ++k) {
        const Vec2 c = mesh.cell_centroid[k];
        double v = spec.matrix_md;
        for (const BoxRegion& b : spec.channels)
          if (b.contains(c.x, c.y)) v = spec.channel_md;
        out[k] = v * kMillidarcy;
      }
      break;
    case PermeabilityConfig::Kind::Noise: {
      double lx = 0.0, ly = 0.0;
      for (const Vec2& v : mesh.vertices) {
        lx = std::max(lx, v.x);
        ly = std::max(ly, v.y);
      }
      const double log_min = std::log(spec.noise_min_md);
      const double log_max = std::log(spec.noise_max_md);
      for (int k = 0; k < nc; ++k) {
        const Vec2 c = mesh.cell_centroid[k];
        const double v =
            value_noise(c.x / lx, c.y / ly, spec.noise_scale, spec.noise_octaves, seed);
        out[k] = std::exp(log_min + v * (log_max - log_min)) * kMillidarcy;
      }
      break;
    }
    case PermeabilityConfig::Kind::Raster: {
      CellField raw = read_raster_field(spec.raster_path, mesh);
      for (int k = 0; k < nc; ++k) out[k] = spec.raster_in_md ? raw[k] * kMillidarcy : raw[k];
      break;
    }
  }
  return out;
}

CellField read_raster_field(const std::string& path, const SimplicialMesh& mesh) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open raster file: " + path);
  long rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 1 || cols < 1)
    throw ConfigError("raster " + path + ": malformed header, expected 'rows cols'");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rows) * cols);
  for (long k = 0; k < rows * cols; ++k) {
    double v;
    if (!(in >> v)) {
      throw ConfigError("raster " + path + ": non-numeric or missing entry at index " +
                        std::to_string(k) + " (row " + std::to_string(k / cols) + ", col " +
                        std::to_string(k % cols) + ")");
    }
    values.push_back(v);
  }

  double lx = 0.0, ly = 0.0;
  for (const Vec2& v : mesh.vertices) {
    lx = std::max(lx, v.x);
    ly = std::max(ly, v.y);
  }
  CellField out(mesh.n_cells(), 0.0);
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const Vec2 c = mesh.cell_centroid[k];
    // Nearest raster cell; row 0 covers y in [0, Ly/rows).
    long col = static_cast<long>(c.x / lx * cols);
    long row = static_cast<long>(c.y / ly * rows);
    col = std::min(std::max(col, 0L), cols - 1);
    row = std::min(std::max(row, 0L), rows - 1);
    out[k] = values[static_cast<std::size_t>(row) * cols + col];
  }
  return out;
}

}  // namespace poromix
