#include "poromix/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace poromix {

double SimplicialMesh::total_area() const {
  double sum = 0.0;
  for (double a : cell_area) sum += a;
  return sum;
}

int SimplicialMesh::face_sign(int cell, int face) const {
  const auto& fs = cell_faces[cell];
  for (int k = 0; k < 3; ++k) {
    if (fs[k] == face) return cell_face_sign[cell][k];
  }
  throw std::logic_error("face " + std::to_string(face) + " is not incident to cell " +
                         std::to_string(cell));
}

void SimplicialMesh::validate() const {
  for (int c = 0; c < n_cells(); ++c) {
    if (!(cell_area[c] > 0.0)) throw std::logic_error("non-positive cell area");
    Vec2 closure{0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
      const Face& f = faces[cell_faces[c][k]];
      closure = closure + (cell_face_sign[c][k] * f.length) * f.normal;
    }
    if (std::abs(closure.x) > 1e-12 || std::abs(closure.y) > 1e-12)
      throw std::logic_error("cell face closure violated for cell " + std::to_string(c));
  }
  for (const Face& f : faces) {
    if (!(f.length > 0.0)) throw std::logic_error("non-positive face length");
    if (f.cell_plus < 0) throw std::logic_error("face without K+ cell");
    if (!f.boundary() && f.cell_plus == f.cell_minus)
      throw std::logic_error("interior face with identical neighbors");
  }
}

SimplicialMesh build_structured_triangulation(int nx, int ny, double lx, double ly) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_structured_triangulation: cell counts must be >= 1");
  if (!(lx > 0.0) || !(ly > 0.0))
    throw std::invalid_argument("build_structured_triangulation: side lengths must be > 0");

  SimplicialMesh m;
  const double dx = lx / nx;
  const double dy = ly / ny;

  m.vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.vertices.push_back({i * dx, j * dy});

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  // Split each square along the lower-left -> upper-right diagonal, CCW.
  m.cells.reserve(static_cast<std::size_t>(2) * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      m.cells.push_back({a, b, c});
      m.cells.push_back({a, c, d});
    }
  }

  const int nc = m.n_cells();
  m.cell_area.resize(nc);
  m.cell_centroid.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const Vec2 p0 = m.vertices[m.cells[c][0]];
    const Vec2 p1 = m.vertices[m.cells[c][1]];
    const Vec2 p2 = m.vertices[m.cells[c][2]];
    m.cell_area[c] = 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
    m.cell_centroid[c] = (1.0 / 3.0) * (p0 + p1 + p2);
  }

  // Faces keyed by sorted vertex pair; K+ is the lower incident cell index.
  std::map<std::pair<int, int>, int> edge_to_face;
  m.cell_faces.assign(nc, {-1, -1, -1});
  m.cell_face_sign.assign(nc, {0, 0, 0});
  m.cell_face_opposite_vertex.assign(nc, {-1, -1, -1});
  for (int c = 0; c < nc; ++c) {
    for (int k = 0; k < 3; ++k) {
      const int a = m.cells[c][k];
      const int b = m.cells[c][(k + 1) % 3];
      const int opp = m.cells[c][(k + 2) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_to_face.find(key);
      int fid;
      if (it == edge_to_face.end()) {
        fid = m.n_faces();
        Face f;
        f.v0 = key.first;
        f.v1 = key.second;
        f.cell_plus = c;
        const Vec2 p = m.vertices[f.v0];
        const Vec2 q = m.vertices[f.v1];
        f.length = norm(q - p);
        f.midpoint = 0.5 * (p + q);
        Vec2 n{(q - p).y / f.length, -(q - p).x / f.length};
        // Point the normal away from K+.
        if (dot(n, f.midpoint - m.cell_centroid[c]) < 0.0) n = -1.0 * n;
        f.normal = n;
        m.faces.push_back(f);
        edge_to_face.emplace(key, fid);
      } else {
        fid = it->second;
        m.faces[fid].cell_minus = c;  // second visitor has the higher index
      }
      m.cell_faces[c][k] = fid;
      m.cell_face_opposite_vertex[c][k] = opp;
    }
  }

  for (int c = 0; c < nc; ++c)
    for (int k = 0; k < 3; ++k)
      m.cell_face_sign[c][k] = (m.faces[m.cell_faces[c][k]].cell_plus == c) ? 1 : -1;

  for (int f = 0; f < m.n_faces(); ++f) {
    if (m.faces[f].boundary())
      m.boundary_faces.push_back(f);
    else
      m.interior_faces.push_back(f);
  }

  m.validate();
  return m;
}

namespace {
const Face& interior_face_or_throw(const SimplicialMesh& mesh, int face) {
  const Face& f = mesh.faces.at(face);
  if (f.boundary())
    throw std::invalid_argument("two-sided trace requested on boundary face " +
                                std::to_string(face));
  return f;
}
}  // namespace

double jump(const CellField& field, const SimplicialMesh& mesh, int face) {
  const Face& f = interior_face_or_throw(mesh, face);
  return field[f.cell_plus] - field[f.cell_minus];
}

double average(const CellField& field, const SimplicialMesh& mesh, int face) {
  const Face& f = interior_face_or_throw(mesh, face);
  return 0.5 * (field[f.cell_plus] + field[f.cell_minus]);
}

double upwind_trace(const CellField& cell_values, const SimplicialMesh& mesh, int face,
                    double normal_flux) {
  const Face& f = interior_face_or_throw(mesh, face);
  return normal_flux >= 0.0 ? cell_values[f.cell_plus] : cell_values[f.cell_minus];
}

}  // namespace poromix
