#pragma once

#include <vector>

#include "poromix/mesh.hpp"

namespace poromix {

/// Prescribed molar-density state just outside an open boundary face.
/// Chemical potentials are evaluated once at construction; the ghost state
/// does not evolve within a step.
struct GhostState {
  std::vector<double> c;
  std::vector<double> mu;
  double mu_total = 0.0;
  double c_total = 0.0;
};

/// Face-wise boundary behaviour. ghost_of_face[f] is -1 for impermeable
/// faces (the default everywhere) or an index into `ghosts` where a
/// Dirichlet molar-density datum is prescribed.
struct BoundaryData {
  std::vector<int> ghost_of_face;
  std::vector<GhostState> ghosts;

  bool open() const { return !ghosts.empty(); }
  int ghost(int face) const { return ghost_of_face.empty() ? -1 : ghost_of_face[face]; }

  static BoundaryData closed(const SimplicialMesh& mesh) {
    BoundaryData b;
    b.ghost_of_face.assign(mesh.n_faces(), -1);
    return b;
  }
};

}  // namespace poromix
