#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <tuple>

#include "poromix/mesh.hpp"

using namespace poromix;

TEST_SUITE_BEGIN("mesh");

TEST_CASE("single square splits into two triangles with one interior face") {
  const SimplicialMesh m = build_structured_triangulation(1, 1, 1.0, 1.0);
  CHECK(m.n_cells() == 2);
  CHECK(m.interior_faces.size() == 1);
  CHECK(m.boundary_faces.size() == 4);
  CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("cell count is 2 nx ny and the area partitions the domain") {
  for (auto [nx, ny, lx, ly] : {std::tuple{3, 2, 5.0, 7.0}, std::tuple{4, 4, 100.0, 100.0}}) {
    const SimplicialMesh m = build_structured_triangulation(nx, ny, lx, ly);
    CHECK(m.n_cells() == 2 * nx * ny);
    CHECK(std::abs(m.total_area() - lx * ly) <= 1e-10 * lx * ly);
  }
}

TEST_CASE("invalid arguments are rejected") {
  CHECK_THROWS_AS(build_structured_triangulation(0, 1, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_structured_triangulation(1, 1, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_structured_triangulation(1, 1, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("per-cell face closure holds on every constructed mesh") {
  for (auto [nx, ny] : {std::pair{1, 1}, std::pair{5, 3}, std::pair{8, 8}}) {
    const SimplicialMesh m = build_structured_triangulation(nx, ny, 3.0, 2.0);
    for (int c = 0; c < m.n_cells(); ++c) {
      Vec2 sum{0.0, 0.0};
      for (int k = 0; k < 3; ++k) {
        const Face& f = m.faces[m.cell_faces[c][k]];
        sum = sum + (m.cell_face_sign[c][k] * f.length) * f.normal;
      }
      CHECK(std::abs(sum.x) <= 1e-12);
      CHECK(std::abs(sum.y) <= 1e-12);
    }
  }
}

TEST_CASE("jump and average definitions and orientation antisymmetry") {
  const SimplicialMesh m = build_structured_triangulation(1, 1, 1.0, 1.0);
  const int f = m.interior_faces[0];

  CellField constant(m.n_cells(), 4.5);
  CHECK(jump(constant, m, f) == 0.0);
  CHECK(average(constant, m, f) == 4.5);

  CellField field(m.n_cells());
  field[m.faces[f].cell_plus] = 3.0;
  field[m.faces[f].cell_minus] = 1.0;
  CHECK(jump(field, m, f) == 2.0);
  CHECK(average(field, m, f) == 2.0);

  // Swapping the orientation negates the jump and keeps the average.
  std::swap(field[m.faces[f].cell_plus], field[m.faces[f].cell_minus]);
  CHECK(jump(field, m, f) == -2.0);
  CHECK(average(field, m, f) == 2.0);

  CHECK_THROWS_AS(jump(field, m, m.boundary_faces[0]), std::invalid_argument);
  CHECK_THROWS_AS(average(field, m, m.boundary_faces[0]), std::invalid_argument);
}

TEST_CASE("upwind trace picks the K+ value for nonnegative flux") {
  const SimplicialMesh m = build_structured_triangulation(1, 1, 1.0, 1.0);
  const int f = m.interior_faces[0];
  CellField c(m.n_cells());
  c[m.faces[f].cell_plus] = 300.0;
  c[m.faces[f].cell_minus] = 10.0;
  CHECK(upwind_trace(c, m, f, 1.0) == 300.0);
  CHECK(upwind_trace(c, m, f, -1.0) == 10.0);
  CHECK(upwind_trace(c, m, f, 0.0) == 300.0);  // ties resolve to K+
}

TEST_CASE("face-sum identity: sum of jump*average equals half the trace-square difference") {
  const SimplicialMesh m = build_structured_triangulation(6, 5, 2.0, 3.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int trial = 0; trial < 10; ++trial) {
    CellField psi(m.n_cells());
    for (double& v : psi) v = dist(rng);
    double lhs = 0.0, rhs = 0.0;
    for (int f : m.interior_faces) {
      lhs += jump(psi, m, f) * average(psi, m, f);
      const double p = psi[m.faces[f].cell_plus];
      const double q = psi[m.faces[f].cell_minus];
      rhs += 0.5 * (p * p - q * q);
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("upwind trace always returns one of the two trace values") {
  const SimplicialMesh m = build_structured_triangulation(4, 4, 1.0, 1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  CellField c(m.n_cells());
  for (double& v : c) v = 100.0 + 50.0 * dist(rng);
  for (int f : m.interior_faces) {
    const double flux = dist(rng);
    const double u = upwind_trace(c, m, f, flux);
    const bool is_plus = u == c[m.faces[f].cell_plus];
    const bool is_minus = u == c[m.faces[f].cell_minus];
    CHECK((is_plus || is_minus));
  }
}

TEST_SUITE_END();
