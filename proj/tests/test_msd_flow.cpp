#include <doctest.h>

#include <cmath>
#include <random>

#include "poromix/msd_flow.hpp"
#include "test_fixtures.hpp"

using namespace poromix;
using namespace poromix::testing;

TEST_SUITE_BEGIN("msd_flow");

namespace {

// Independent evaluation of int_K |psi_e|^2 for the RT0 basis of face e:
// (h_e / 2|K|)^2 * (|K|/3) * sum over edge midpoints of |x - P_opp|^2.
double side_weight(const SimplicialMesh& m, int cell, int face) {
  int lf = -1;
  for (int k = 0; k < 3; ++k)
    if (m.cell_faces[cell][k] == face) lf = k;
  REQUIRE(lf >= 0);
  const Vec2 opp = m.vertices[m.cell_face_opposite_vertex[cell][lf]];
  const auto& v = m.cells[cell];
  const Vec2 p0 = m.vertices[v[0]], p1 = m.vertices[v[1]], p2 = m.vertices[v[2]];
  const Vec2 mids[3] = {0.5 * (p0 + p1), 0.5 * (p1 + p2), 0.5 * (p2 + p0)};
  double sum = 0.0;
  for (const Vec2& q : mids) sum += dot(q - opp, q - opp);
  const double h = m.faces[face].length;
  const double a = m.cell_area[cell];
  return h * h / (4.0 * a * a) * (a / 3.0) * sum;
}

FrictionParams friction_for(const SimplicialMesh& mesh, const MixtureSpec& mix, double k_perm,
                            double d12) {
  FrictionParams f;
  f.diffusivity = Eigen::MatrixXd::Constant(mix.size(), mix.size(), d12);
  for (int i = 0; i < mix.size(); ++i) f.diffusivity(i, i) = 0.0;
  f.permeability.assign(mesh.n_cells(), k_perm);
  f.reference_porosity = 0.2;
  return f;
}

}  // namespace

TEST_CASE("mobility coefficients: reference porosity, friction weights, guards") {
  MixtureSpec mix = binary_co2_ch4();
  FrictionParams friction;
  friction.diffusivity = Eigen::MatrixXd::Constant(2, 2, 1e-9);
  friction.diffusivity(0, 0) = friction.diffusivity(1, 1) = 0.0;
  friction.permeability.assign(1, 1e-13);
  friction.reference_porosity = 0.2;

  // kappa(phi_r) = 1 so d_i = eta_i / K.
  std::vector<double> c{100.0, 50.0};
  CellMobility mob = mobility_coefficients(mix, friction, c, 0.2, 1e-13);
  CHECK(mob.drag[0] == doctest::Approx(1.5e-5 / 1e-13).epsilon(1e-14));
  CHECK(mob.drag[1] == doctest::Approx(1.1e-5 / 1e-13).epsilon(1e-14));
  // eta_i = 1e-5 gives the round 1e8.
  ComponentSpec a = carbon_dioxide(), b = methane();
  a.viscosity = b.viscosity = 1e-5;
  MixtureSpec round({a, b}, Eigen::MatrixXd::Zero(2, 2), 300.0);
  CHECK(mobility_coefficients(round, friction, c, 0.2, 1e-13).drag[0] ==
        doctest::Approx(1e8).epsilon(1e-14));

  // w_12 = c1 c2 / (c^2 D_12), exactly symmetric.
  CHECK(mob.friction(0, 1) ==
        doctest::Approx(100.0 * 50.0 / (150.0 * 150.0 * 1e-9)).epsilon(1e-14));
  CHECK(mob.friction(0, 1) == mob.friction(1, 0));

  std::vector<double> zero{0.0, 50.0};
  CHECK_THROWS_AS(mobility_coefficients(mix, friction, zero, 0.2, 1e-13), std::domain_error);
  CHECK_THROWS_AS(mobility_coefficients(mix, friction, c, 1.5, 1e-13), std::domain_error);
}

TEST_CASE("zero potentials give zero velocity; boundary fluxes stay zero") {
  const SimplicialMesh mesh = build_structured_triangulation(3, 3, 1.0, 1.0);
  MixtureSpec mix = binary_co2_ch4();
  VelocitySolver solver(mesh, mix, friction_for(mesh, mix, 1e-13, 1e-9));
  std::vector<CellField> c_old(2, CellField(mesh.n_cells(), 100.0));
  const BoundaryData bc = BoundaryData::closed(mesh);
  solver.begin_step(c_old, bc);

  std::vector<CellField> mu(2, CellField(mesh.n_cells(), 5.0));  // constant: zero jumps
  std::vector<FaceField> upwind(2, FaceField(mesh.n_faces(), 100.0));
  std::vector<FaceField> u(2, FaceField(mesh.n_faces(), 0.0));
  CellField phi(mesh.n_cells(), 0.2);
  solver.component_sweep(mu, upwind, phi, u);
  for (int i = 0; i < 2; ++i)
    for (int f = 0; f < mesh.n_faces(); ++f) CHECK(u[i][f] == 0.0);
}

TEST_CASE("single component reduces to the lumped Darcy update on two cells") {
  const SimplicialMesh mesh = build_structured_triangulation(1, 1, 1.0, 1.0);
  MixtureSpec mix = pure(carbon_dioxide());
  FrictionParams friction;
  friction.diffusivity = Eigen::MatrixXd::Zero(1, 1);
  friction.permeability.assign(2, 2e-13);
  friction.reference_porosity = 0.2;
  VelocitySolver solver(mesh, mix, friction);
  std::vector<CellField> c_old{CellField(2, 100.0)};
  const BoundaryData bc = BoundaryData::closed(mesh);
  solver.begin_step(c_old, bc);

  const int f = mesh.interior_faces[0];
  std::vector<CellField> mu{CellField(2, 0.0)};
  mu[0][mesh.faces[f].cell_plus] = 7.0;  // [mu] = 7
  std::vector<FaceField> upwind{FaceField(mesh.n_faces(), 100.0)};
  std::vector<FaceField> u{FaceField(mesh.n_faces(), 0.0)};
  CellField phi(2, 0.2);
  solver.component_sweep(mu, upwind, phi, u);

  // Hand-solved 1x1 lumped system: U = [mu] c* h / (d (q+ + q-)).
  const double d = carbon_dioxide().viscosity / (1.0 * 2e-13);
  const double lam = d * (side_weight(mesh, mesh.faces[f].cell_plus, f) +
                          side_weight(mesh, mesh.faces[f].cell_minus, f));
  const double expected = 7.0 * 100.0 * mesh.faces[f].length / lam;
  CHECK(u[0][f] == doctest::Approx(expected).epsilon(1e-13));
  // Positive jump drives flow from K+ into K-.
  CHECK(u[0][f] > 0.0);
}

TEST_CASE("friction back-coupling: a zero-force component moves with its partner") {
  const SimplicialMesh mesh = build_structured_triangulation(1, 1, 1.0, 1.0);
  MixtureSpec mix = binary_co2_ch4();
  VelocitySolver solver(mesh, mix, friction_for(mesh, mix, 1e-13, 1e-9));
  std::vector<CellField> c_old(2, CellField(2, 100.0));
  const BoundaryData bc = BoundaryData::closed(mesh);
  solver.begin_step(c_old, bc);

  const int f = mesh.interior_faces[0];
  std::vector<CellField> mu(2, CellField(2, 0.0));
  mu[0][mesh.faces[f].cell_plus] = 3.0;  // only component 0 is forced
  std::vector<FaceField> upwind(2, FaceField(mesh.n_faces(), 100.0));
  std::vector<FaceField> u(2, FaceField(mesh.n_faces(), 0.0));
  CellField phi(2, 0.2);
  solver.component_sweep(mu, upwind, phi, u);

  // Two-stage hand solve of the Gauss-Seidel sweep.
  const double w = 100.0 * 100.0 / (200.0 * 200.0 * 1e-9);
  const double qp = side_weight(mesh, mesh.faces[f].cell_plus, f);
  const double qm = side_weight(mesh, mesh.faces[f].cell_minus, f);
  const double sigma0 = carbon_dioxide().viscosity / 1e-13 + w;
  const double sigma1 = methane().viscosity / 1e-13 + w;
  const double u0 = 3.0 * 100.0 * mesh.faces[f].length / (sigma0 * (qp + qm));
  const double u1 = w * (qp + qm) * u0 / (sigma1 * (qp + qm));
  CHECK(u[0][f] == doctest::Approx(u0).epsilon(1e-13));
  CHECK(u[1][f] == doctest::Approx(u1).epsilon(1e-13));
  CHECK(u[1][f] != 0.0);
}

TEST_CASE("component relabeling yields permuted velocities after sweep convergence") {
  const SimplicialMesh mesh = build_structured_triangulation(2, 2, 1.0, 1.0);
  MixtureSpec mix_a = binary_co2_ch4();
  MixtureSpec mix_b({methane(), carbon_dioxide()}, Eigen::MatrixXd::Zero(2, 2), 300.0);
  // Friction strong enough that a single sweep is order dependent, yet the
  // per-face Gauss-Seidel still contracts well within the sweep budget.
  FrictionParams fr_a = friction_for(mesh, mix_a, 1e-13, 1e-9);
  FrictionParams fr_b = friction_for(mesh, mix_b, 1e-13, 1e-9);

  std::vector<CellField> c_a{CellField(mesh.n_cells()), CellField(mesh.n_cells())};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(50.0, 300.0);
  for (int k = 0; k < mesh.n_cells(); ++k) {
    c_a[0][k] = dist(rng);
    c_a[1][k] = dist(rng);
  }
  std::vector<CellField> c_b{c_a[1], c_a[0]};

  std::vector<CellField> mu_a{CellField(mesh.n_cells()), CellField(mesh.n_cells())};
  for (int k = 0; k < mesh.n_cells(); ++k) {
    mu_a[0][k] = 10.0 * std::sin(2.0 + k);
    mu_a[1][k] = -4.0 * std::cos(1.0 + 2.0 * k);
  }
  std::vector<CellField> mu_b{mu_a[1], mu_a[0]};

  const BoundaryData bc = BoundaryData::closed(mesh);
  CellField phi(mesh.n_cells(), 0.2);
  auto converge = [&](const MixtureSpec& mix, FrictionParams fr, const std::vector<CellField>& c,
                      const std::vector<CellField>& mu) {
    VelocitySolver solver(mesh, mix, std::move(fr), false);
    solver.begin_step(c, bc);
    std::vector<FaceField> upwind(2, FaceField(mesh.n_faces(), 1.0));
    for (int i = 0; i < 2; ++i)
      for (int f : mesh.interior_faces) upwind[i][f] = upwind_trace(c[i], mesh, f, 0.0);
    std::vector<FaceField> u(2, FaceField(mesh.n_faces(), 0.0));
    for (int sweep = 0; sweep < 250; ++sweep) solver.component_sweep(mu, upwind, phi, u);
    return u;
  };
  const auto u_a = converge(mix_a, std::move(fr_a), c_a, mu_a);
  const auto u_b = converge(mix_b, std::move(fr_b), c_b, mu_b);
  for (int f : mesh.interior_faces) {
    CHECK(u_a[0][f] == doctest::Approx(u_b[1][f]).epsilon(1e-10));
    CHECK(u_a[1][f] == doctest::Approx(u_b[0][f]).epsilon(1e-10));
  }
}

TEST_CASE("consistent-mass variant agrees with a dense RT0 solve for one component") {
  const SimplicialMesh mesh = build_structured_triangulation(2, 1, 2.0, 1.0);
  MixtureSpec mix = pure(carbon_dioxide());
  FrictionParams friction;
  friction.diffusivity = Eigen::MatrixXd::Zero(1, 1);
  friction.permeability.assign(mesh.n_cells(), 1e-13);
  friction.reference_porosity = 0.2;
  VelocitySolver solver(mesh, mix, friction, /*consistent_mass=*/true);
  std::vector<CellField> c_old{CellField(mesh.n_cells(), 120.0)};
  const BoundaryData bc = BoundaryData::closed(mesh);
  solver.begin_step(c_old, bc);

  std::vector<CellField> mu{CellField(mesh.n_cells())};
  for (int k = 0; k < mesh.n_cells(); ++k) mu[0][k] = 3.0 * k;
  std::vector<FaceField> upwind{FaceField(mesh.n_faces(), 120.0)};
  std::vector<FaceField> u{FaceField(mesh.n_faces(), 0.0)};
  CellField phi(mesh.n_cells(), 0.2);
  solver.component_sweep(mu, upwind, phi, u);

  // Dense oracle on the interior-face dofs with exact Gram matrices.
  const double d = carbon_dioxide().viscosity / (1.0 * 1e-13);
  const int n = static_cast<int>(mesh.interior_faces.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  std::vector<int> index(mesh.n_faces(), -1);
  for (int k = 0; k < n; ++k) index[mesh.interior_faces[k]] = k;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& v = mesh.cells[c];
    const Vec2 p0 = mesh.vertices[v[0]], p1 = mesh.vertices[v[1]], p2 = mesh.vertices[v[2]];
    const Vec2 mids[3] = {0.5 * (p0 + p1), 0.5 * (p1 + p2), 0.5 * (p2 + p0)};
    auto basis = [&](int lf, Vec2 x) {
      const int face = mesh.cell_faces[c][lf];
      const Vec2 opp = mesh.vertices[mesh.cell_face_opposite_vertex[c][lf]];
      const double s = mesh.cell_face_sign[c][lf];
      return (s * mesh.faces[face].length / (2.0 * mesh.cell_area[c])) * (x - opp);
    };
    for (int la = 0; la < 3; ++la)
      for (int lb = 0; lb < 3; ++lb) {
        const int fa = mesh.cell_faces[c][la], fb = mesh.cell_faces[c][lb];
        if (index[fa] < 0 || index[fb] < 0) continue;
        double g = 0.0;
        for (const Vec2& q : mids) g += dot(basis(la, q), basis(lb, q));
        a(index[fa], index[fb]) += d * g * mesh.cell_area[c] / 3.0;
      }
  }
  for (int k = 0; k < n; ++k) {
    const int f = mesh.interior_faces[k];
    rhs[k] = (mu[0][mesh.faces[f].cell_plus] - mu[0][mesh.faces[f].cell_minus]) * 120.0 *
             mesh.faces[f].length;
  }
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * a.cwiseAbs().maxCoeff());
  const Eigen::VectorXd x = a.ldlt().solve(rhs);
  for (int k = 0; k < n; ++k)
    CHECK(u[0][mesh.interior_faces[k]] == doctest::Approx(x[k]).epsilon(1e-10));
}

TEST_CASE("converged velocities dissipate: sum of [mu] c* u h is nonnegative") {
  const SimplicialMesh mesh = build_structured_triangulation(3, 2, 1.0, 1.0);
  MixtureSpec mix = binary_co2_ch4();
  for (bool consistent : {false, true}) {
    VelocitySolver solver(mesh, mix, friction_for(mesh, mix, 1e-13, 1e-10), consistent);
    std::vector<CellField> c_old(2, CellField(mesh.n_cells(), 0.0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(20.0, 400.0);
    for (int k = 0; k < mesh.n_cells(); ++k) {
      c_old[0][k] = dist(rng);
      c_old[1][k] = dist(rng);
    }
    const BoundaryData bc = BoundaryData::closed(mesh);
    solver.begin_step(c_old, bc);
    std::vector<CellField> mu(2, CellField(mesh.n_cells()));
    for (int k = 0; k < mesh.n_cells(); ++k) {
      mu[0][k] = 100.0 * std::sin(3.0 * k);
      mu[1][k] = 80.0 * std::cos(1.0 + k);
    }
    std::vector<FaceField> upwind(2, FaceField(mesh.n_faces(), 0.0));
    for (int i = 0; i < 2; ++i)
      for (int f : mesh.interior_faces) upwind[i][f] = upwind_trace(c_old[i], mesh, f, 0.0);
    CellField phi(mesh.n_cells(), 0.2);
    std::vector<FaceField> u(2, FaceField(mesh.n_faces(), 0.0));
    for (int sweep = 0; sweep < 300; ++sweep) solver.component_sweep(mu, upwind, phi, u);

    double dissipation = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int f : mesh.interior_faces) {
        const Face& face = mesh.faces[f];
        dissipation += (mu[i][face.cell_plus] - mu[i][face.cell_minus]) * upwind[i][f] *
                       u[i][f] * face.length;
      }
    CHECK(dissipation >= -1e-12 * std::abs(dissipation));
  }
}

TEST_CASE("rt0 cell norm matches a hand integration on one triangle pair") {
  const SimplicialMesh mesh = build_structured_triangulation(1, 1, 1.0, 1.0);
  FaceField u(mesh.n_faces(), 0.0);
  const int f = mesh.interior_faces[0];
  u[f] = 2.0;
  // Only the diagonal face is active; per adjacent cell the field is
  // 2 psi_f, so the norm is 4 (q+ + q-).
  const double expected = 4.0 * (side_weight(mesh, mesh.faces[f].cell_plus, f) +
                                 side_weight(mesh, mesh.faces[f].cell_minus, f));
  CHECK(rt0_l2_norm_sq(mesh, u) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_SUITE_END();
