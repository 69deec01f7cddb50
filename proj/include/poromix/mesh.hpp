#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace poromix {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// One value per cell (molar density, potential, pressure, porosity, ...).
using CellField = std::vector<double>;
/// One constant normal flux per face; boundary entries stay zero on closed
/// boundaries.
using FaceField = std::vector<double>;

/// Oriented face of a 2D triangulation. The unit normal points from
/// cell_plus (K+) into cell_minus (K-); for boundary faces cell_minus is -1
/// and the normal points out of the domain.
struct Face {
  int v0 = -1;
  int v1 = -1;
  int cell_plus = -1;
  int cell_minus = -1;
  double length = 0.0;
  Vec2 normal;
  Vec2 midpoint;
  bool boundary() const { return cell_minus < 0; }
};

/// Immutable 2D conforming triangulation. Face orientation is fixed once at
/// construction (K+ is the lower cell index) so jump signs are stable for
/// the whole run.
struct SimplicialMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> cells;  // CCW vertex triples
  std::vector<double> cell_area;
  std::vector<Vec2> cell_centroid;
  std::vector<Face> faces;
  std::vector<int> interior_faces;
  std::vector<int> boundary_faces;
  std::vector<std::array<int, 3>> cell_faces;
  std::vector<std::array<int, 3>> cell_face_sign;   // +1 where the cell is K+
  std::vector<std::array<int, 3>> cell_face_opposite_vertex;

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_faces() const { return static_cast<int>(faces.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }

  double total_area() const;

  /// Orientation sign of `face` as seen from `cell` (+1 if cell is K+).
  int face_sign(int cell, int face) const;

  /// Checks the structural invariants (closed polygons, positive measures,
  /// well-formed adjacency). Throws std::logic_error on violation.
  void validate() const;
};

/// Uniform nx-by-ny grid of squares on [0,Lx]x[0,Ly], each square split along
/// the lower-left to upper-right diagonal. Rejects zero counts and
/// non-positive lengths.
SimplicialMesh build_structured_triangulation(int nx, int ny, double lx, double ly);

/// jump = psi(K+) - psi(K-); average = (psi(K+) + psi(K-))/2.
/// Both require an interior face.
double jump(const CellField& field, const SimplicialMesh& mesh, int face);
double average(const CellField& field, const SimplicialMesh& mesh, int face);

/// Upwind trace of a cell field on an interior face: the K+ value when the
/// normal flux is >= 0, the K- value otherwise.
double upwind_trace(const CellField& cell_values, const SimplicialMesh& mesh,
                    int face, double normal_flux);

}  // namespace poromix
