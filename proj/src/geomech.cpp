#include "poromix/geomech.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>

#include "poromix/errors.hpp"

namespace poromix {

namespace {

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)

Eigen::Vector2d barycentric_gradient(const SimplicialMesh& mesh, int cell, int k) {
  const Vec2 a = mesh.vertices[mesh.cells[cell][(k + 1) % 3]];
  const Vec2 b = mesh.vertices[mesh.cells[cell][(k + 2) % 3]];
  const double inv = 1.0 / (2.0 * mesh.cell_area[cell]);
  return {(a.y - b.y) * inv, -(a.x - b.x) * inv};
}

// Barycentric coordinates of a point in a cell.
Eigen::Vector3d barycentric(const SimplicialMesh& mesh, int cell, Vec2 x) {
  Eigen::Vector3d lam;
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector2d g = barycentric_gradient(mesh, cell, k);
    const Vec2 vk = mesh.vertices[mesh.cells[cell][k]];
    lam[k] = 1.0 + g[0] * (x.x - vk.x) + g[1] * (x.y - vk.y);
  }
  return lam;
}

}  // namespace

ElasticitySolver::ElasticitySolver(const SimplicialMesh& mesh, const ElasticParams& params)
    : mesh_(mesh), params_(params) {
  if (!(params_.lame_lambda > 0.0) || !(params_.lame_mu > 0.0))
    throw std::invalid_argument("ElasticitySolver: Lame parameters must be positive");
  if (!(params_.biot_modulus > 0.0))
    throw std::invalid_argument("ElasticitySolver: Biot modulus must be positive");
  if (!(params_.biot_alpha > 0.0 && params_.biot_alpha <= 1.0))
    throw std::invalid_argument("ElasticitySolver: Biot constant must lie in (0,1]");
  if (!(params_.dg_penalty > 0.0))
    throw std::invalid_argument("ElasticitySolver: DG penalty must be positive");
  assemble();
}

void ElasticitySolver::assemble() {
  const int nc = mesh_.n_cells();
  const int nd = n_dofs();
  const double lam = params_.lame_lambda;
  const double mu = params_.lame_mu;
  const double alpha = params_.biot_alpha;

  voigt_d_ << lam + 2.0 * mu, lam, 0.0, lam, lam + 2.0 * mu, 0.0, 0.0, 0.0, mu;

  strain_op_.resize(nc);
  std::vector<Eigen::Triplet<double>> ktrips, btrips, ctrips;

  for (int c = 0; c < nc; ++c) {
    Eigen::Matrix<double, 3, 6> b = Eigen::Matrix<double, 3, 6>::Zero();
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d g = barycentric_gradient(mesh_, c, k);
      b(0, 2 * k) = g[0];
      b(1, 2 * k + 1) = g[1];
      b(2, 2 * k) = g[1];
      b(2, 2 * k + 1) = g[0];
    }
    strain_op_[c] = b;
    const Eigen::Matrix<double, 6, 6> kvol = mesh_.cell_area[c] * b.transpose() * voigt_d_ * b;
    for (int r = 0; r < 6; ++r)
      for (int s = 0; s < 6; ++s)
        if (kvol(r, s) != 0.0) ktrips.emplace_back(6 * c + r, 6 * c + s, kvol(r, s));

    // Volume part of the pressure coupling: -alpha (p, div v).
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d g = barycentric_gradient(mesh_, c, k);
      btrips.emplace_back(6 * c + 2 * k, c, -alpha * mesh_.cell_area[c] * g[0]);
      btrips.emplace_back(6 * c + 2 * k + 1, c, -alpha * mesh_.cell_area[c] * g[1]);
    }
  }

  face_ops_.clear();
  face_ops_.reserve(mesh_.interior_faces.size());
  for (int f : mesh_.interior_faces) {
    const Face& face = mesh_.faces[f];
    const int cp = face.cell_plus;
    const int cm = face.cell_minus;
    FaceOps ops;
    for (int k = 0; k < 6; ++k) {
      ops.dofs[k] = 6 * cp + k;
      ops.dofs[6 + k] = 6 * cm + k;
    }

    // Average traction {sigma_e(w) n}: constant on the face.
    Eigen::Matrix<double, 2, 3> nmat;
    nmat << face.normal.x, 0.0, face.normal.y, 0.0, face.normal.y, face.normal.x;
    ops.traction_avg.setZero();
    ops.traction_avg.block<2, 6>(0, 0) = 0.5 * nmat * voigt_d_ * strain_op_[cp];
    ops.traction_avg.block<2, 6>(0, 6) = 0.5 * nmat * voigt_d_ * strain_op_[cm];

    // int_e [v] ds: the jump is linear, midpoint quadrature is exact.
    ops.jump_integral.setZero();
    const Eigen::Vector3d lp = barycentric(mesh_, cp, face.midpoint);
    const Eigen::Vector3d lm = barycentric(mesh_, cm, face.midpoint);
    for (int k = 0; k < 3; ++k)
      for (int d = 0; d < 2; ++d) {
        ops.jump_integral(d, 2 * k + d) = face.length * lp[k];
        ops.jump_integral(d, 6 + 2 * k + d) = -face.length * lm[k];
      }

    // Consistency terms -<{sigma(w)n},[v]> - <[w],{sigma(v)n}>.
    Eigen::Matrix<double, 12, 12> kface =
        -ops.jump_integral.transpose() * ops.traction_avg -
        ops.traction_avg.transpose() * ops.jump_integral;

    // Penalty (s1/h) int_e [w].[v] with two-point Gauss (exact).
    const Vec2 a = mesh_.vertices[face.v0];
    const Vec2 b = mesh_.vertices[face.v1];
    for (double t : {-kGauss, kGauss}) {
      const Vec2 x = 0.5 * ((1.0 - t) * a + (1.0 + t) * b);
      const Eigen::Vector3d gp = barycentric(mesh_, cp, x);
      const Eigen::Vector3d gm = barycentric(mesh_, cm, x);
      Eigen::Matrix<double, 2, 12> jump = Eigen::Matrix<double, 2, 12>::Zero();
      for (int k = 0; k < 3; ++k)
        for (int d = 0; d < 2; ++d) {
          jump(d, 2 * k + d) = gp[k];
          jump(d, 6 + 2 * k + d) = -gm[k];
        }
      const double wq = 0.5 * face.length;  // half the length per Gauss point
      kface += (params_.dg_penalty / face.length) * wq * jump.transpose() * jump;
    }

    for (int r = 0; r < 12; ++r)
      for (int s = 0; s < 12; ++s)
        if (kface(r, s) != 0.0) ktrips.emplace_back(ops.dofs[r], ops.dofs[s], kface(r, s));

    // Face part of the pressure coupling: +alpha <{p n},[v]>.
    const Eigen::Vector2d n{face.normal.x, face.normal.y};
    const Eigen::Matrix<double, 12, 1> jn = ops.jump_integral.transpose() * n;
    for (int r = 0; r < 12; ++r) {
      btrips.emplace_back(ops.dofs[r], cp, 0.5 * alpha * jn[r]);
      btrips.emplace_back(ops.dofs[r], cm, 0.5 * alpha * jn[r]);
    }
    face_ops_.push_back(ops);
  }

  stiffness_.resize(nd, nd);
  stiffness_.setFromTriplets(ktrips.begin(), ktrips.end());
  coupling_.resize(nd, nc);
  coupling_.setFromTriplets(btrips.begin(), btrips.end());

  // Mean displacement and mean rotation rows (3-midpoint quadrature, exact
  // for the linear-times-linear rotation integrand).
  const double xc_area = [&] {
    double sa = 0.0;
    for (int c = 0; c < nc; ++c) sa += mesh_.cell_area[c];
    return sa;
  }();
  Vec2 center{0.0, 0.0};
  for (int c = 0; c < nc; ++c) center = center + mesh_.cell_area[c] * mesh_.cell_centroid[c];
  center = (1.0 / xc_area) * center;

  for (int c = 0; c < nc; ++c) {
    const auto& v = mesh_.cells[c];
    const Vec2 p0 = mesh_.vertices[v[0]], p1 = mesh_.vertices[v[1]], p2 = mesh_.vertices[v[2]];
    const std::array<Vec2, 3> mids = {0.5 * (p0 + p1), 0.5 * (p1 + p2), 0.5 * (p2 + p0)};
    for (int k = 0; k < 3; ++k) {
      ctrips.emplace_back(0, 6 * c + 2 * k, mesh_.cell_area[c] / 3.0);
      ctrips.emplace_back(1, 6 * c + 2 * k + 1, mesh_.cell_area[c] / 3.0);
      double mom_x = 0.0, mom_y = 0.0;  // int lambda_k (x-xc), int lambda_k (y-yc)
      for (const Vec2& q : mids) {
        const double lk = barycentric(mesh_, c, q)[k];
        mom_x += lk * (q.x - center.x);
        mom_y += lk * (q.y - center.y);
      }
      mom_x *= mesh_.cell_area[c] / 3.0;
      mom_y *= mesh_.cell_area[c] / 3.0;
      ctrips.emplace_back(2, 6 * c + 2 * k, -mom_y);
      ctrips.emplace_back(2, 6 * c + 2 * k + 1, mom_x);
    }
  }
  constraints_.resize(3, nd);
  constraints_.setFromTriplets(ctrips.begin(), ctrips.end());

  // KKT system [S C^T; C 0], factored once.
  std::vector<Eigen::Triplet<double>> kkt_trips;
  for (int k = 0; k < stiffness_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness_, k); it; ++it)
      kkt_trips.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < constraints_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(constraints_, k); it; ++it) {
      kkt_trips.emplace_back(nd + it.row(), it.col(), it.value());
      kkt_trips.emplace_back(it.col(), nd + it.row(), it.value());
    }
  Eigen::SparseMatrix<double> kkt(nd + 3, nd + 3);
  kkt.setFromTriplets(kkt_trips.begin(), kkt_trips.end());
  kkt_.compute(kkt);
  if (kkt_.info() != Eigen::Success)
    throw StepFailure("DG elasticity: singular constrained system");

  // Coercivity check: power iteration on (rho I - S), with the three rigid
  // modes projected out, drives the iterate toward the smallest eigenvalue
  // of S on the rigid-mode complement. A negative Rayleigh quotient is a
  // certificate that the penalty is too small.
  double diag_scale = 0.0;
  for (int k = 0; k < nd; ++k) diag_scale += stiffness_.coeff(k, k);
  diag_scale /= nd;
  double rho = 0.0;  // Gershgorin upper bound of the spectrum
  {
    Eigen::VectorXd row_abs = Eigen::VectorXd::Zero(nd);
    for (int k = 0; k < stiffness_.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness_, k); it; ++it)
        row_abs[it.row()] += std::abs(it.value());
    rho = row_abs.maxCoeff();
  }
  Eigen::MatrixXd rigid(nd, 3);
  for (int c = 0; c < nc; ++c)
    for (int k = 0; k < 3; ++k) {
      const Vec2 x = mesh_.vertices[mesh_.cells[c][k]];
      rigid(6 * c + 2 * k, 0) = 1.0;
      rigid(6 * c + 2 * k + 1, 0) = 0.0;
      rigid(6 * c + 2 * k, 1) = 0.0;
      rigid(6 * c + 2 * k + 1, 1) = 1.0;
      rigid(6 * c + 2 * k, 2) = -x.y;
      rigid(6 * c + 2 * k + 1, 2) = x.x;
    }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(rigid);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(nd, 3);
  Eigen::VectorXd v(nd);
  for (int k = 0; k < nd; ++k) v[k] = std::sin(0.7 * k + 0.3);
  double min_rayleigh = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    v -= q * (q.transpose() * v);
    const double nrm = v.norm();
    if (!(nrm > 0.0)) break;
    v /= nrm;
    const Eigen::VectorXd sv = stiffness_ * v;
    min_rayleigh = std::min(min_rayleigh, v.dot(sv));
    v = rho * v - sv;
  }
  coercivity_margin_ = min_rayleigh / diag_scale;
  if (coercivity_margin_ < -1e-10)
    throw InvariantViolation(
        "DG elasticity penalty too small for coercivity: smallest constrained eigenvalue "
        "estimate " +
        std::to_string(min_rayleigh));
}

Eigen::VectorXd ElasticitySolver::pressure_load(const CellField& pressure) const {
  Eigen::Map<const Eigen::VectorXd> p(pressure.data(), pressure.size());
  return -(coupling_ * p);
}

DGDisplacementField ElasticitySolver::solve_displacement(const CellField& pressure) const {
  return solve_displacement(pressure, {}, Eigen::Vector3d::Zero());
}

DGDisplacementField ElasticitySolver::solve_displacement(
    const CellField& pressure, const std::vector<Vec2>& boundary_traction,
    const Eigen::Vector3d& moments) const {
  const int nd = n_dofs();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nd + 3);
  rhs.head(nd) = pressure_load(pressure);
  if (!boundary_traction.empty()) {
    for (std::size_t k = 0; k < mesh_.boundary_faces.size(); ++k) {
      const int f = mesh_.boundary_faces[k];
      const Face& face = mesh_.faces[f];
      const Vec2 g = boundary_traction[k];
      const int c = face.cell_plus;
      const Eigen::Vector3d lam = barycentric(mesh_, c, face.midpoint);
      for (int kk = 0; kk < 3; ++kk) {
        rhs[6 * c + 2 * kk] += face.length * lam[kk] * g.x;
        rhs[6 * c + 2 * kk + 1] += face.length * lam[kk] * g.y;
      }
    }
  }
  rhs.tail(3) = moments;
  Eigen::VectorXd sol = kkt_.solve(rhs);
  if (kkt_.info() != Eigen::Success) throw StepFailure("DG elasticity solve failed");
  DGDisplacementField w = sol.head(nd);
  // Residual check on the constrained system.
  Eigen::VectorXd residual = stiffness_ * w + constraints_.transpose() * sol.tail(3);
  residual -= rhs.head(nd);
  const double scale = std::max(rhs.head(nd).norm(), 1.0);
  if (residual.norm() > 1e-12 * scale)
    throw StepFailure("DG elasticity solve residual too large: " +
                      std::to_string(residual.norm() / scale));
  return w;
}

CellField ElasticitySolver::cell_divergence(const DGDisplacementField& w) const {
  CellField div(mesh_.n_cells(), 0.0);
  for (int c = 0; c < mesh_.n_cells(); ++c) {
    const Eigen::Matrix<double, 3, 6>& b = strain_op_[c];
    const Eigen::Matrix<double, 6, 1> wc = w.segment<6>(6 * c);
    const Eigen::Vector3d eps = b * wc;
    div[c] = eps[0] + eps[1];
  }
  return div;
}

CellField ElasticitySolver::porosity_update(const CellField& phi_old, const CellField& p_new,
                                            const CellField& p_old,
                                            const DGDisplacementField& w_new,
                                            const DGDisplacementField& w_old) const {
  const int nc = mesh_.n_cells();
  const DGDisplacementField dw = w_new - w_old;
  const CellField div_dw = cell_divergence(dw);
  CellField phi(nc, 0.0);
  for (int c = 0; c < nc; ++c) {
    phi[c] = phi_old[c] + (p_new[c] - p_old[c]) / params_.biot_modulus +
             params_.biot_alpha * div_dw[c];
  }
  // Face-jump correction: -alpha <{phi_test n},[dw]> distributes half of the
  // jump flux to each adjacent cell.
  for (std::size_t idx = 0; idx < face_ops_.size(); ++idx) {
    const int f = mesh_.interior_faces[idx];
    const Face& face = mesh_.faces[f];
    Eigen::Matrix<double, 12, 1> local;
    for (int k = 0; k < 12; ++k) local[k] = dw[face_ops_[idx].dofs[k]];
    const Eigen::Vector2d jump_int = face_ops_[idx].jump_integral * local;
    const double flux = 0.5 * params_.biot_alpha *
                        (face.normal.x * jump_int[0] + face.normal.y * jump_int[1]);
    phi[face.cell_plus] -= flux / mesh_.cell_area[face.cell_plus];
    phi[face.cell_minus] -= flux / mesh_.cell_area[face.cell_minus];
  }
  for (int c = 0; c < nc; ++c) {
    if (!(phi[c] > 0.0 && phi[c] < 1.0))
      throw InvariantViolation("porosity left (0,1) in cell " + std::to_string(c) + ": " +
                               std::to_string(phi[c]));
  }
  return phi;
}

double ElasticitySolver::strain_energy(const DGDisplacementField& w) const {
  double sum = 0.0;
  for (int c = 0; c < mesh_.n_cells(); ++c) {
    const Eigen::Vector3d eps = strain_op_[c] * w.segment<6>(6 * c);
    sum += 0.5 * mesh_.cell_area[c] * eps.dot(voigt_d_ * eps);
  }
  return sum;
}

double ElasticitySolver::jump_penalty_energy(const DGDisplacementField& w) const {
  double sum = 0.0;
  for (std::size_t idx = 0; idx < face_ops_.size(); ++idx) {
    const int f = mesh_.interior_faces[idx];
    const Face& face = mesh_.faces[f];
    const Vec2 a = mesh_.vertices[face.v0];
    const Vec2 b = mesh_.vertices[face.v1];
    const int cp = face.cell_plus, cm = face.cell_minus;
    double norm_sq = 0.0;
    for (double t : {-kGauss, kGauss}) {
      const Vec2 x = 0.5 * ((1.0 - t) * a + (1.0 + t) * b);
      const Eigen::Vector3d gp = barycentric(mesh_, cp, x);
      const Eigen::Vector3d gm = barycentric(mesh_, cm, x);
      Eigen::Vector2d jump = Eigen::Vector2d::Zero();
      for (int k = 0; k < 3; ++k)
        for (int d = 0; d < 2; ++d)
          jump[d] += gp[k] * w[6 * cp + 2 * k + d] - gm[k] * w[6 * cm + 2 * k + d];
      norm_sq += 0.5 * face.length * jump.squaredNorm();
    }
    sum += 0.5 * params_.dg_penalty / face.length * norm_sq;
  }
  return sum;
}

double ElasticitySolver::consistency_term(const DGDisplacementField& w) const {
  double sum = 0.0;
  for (const FaceOps& ops : face_ops_) {
    Eigen::Matrix<double, 12, 1> local;
    for (int k = 0; k < 12; ++k) local[k] = w[ops.dofs[k]];
    sum += (ops.traction_avg * local).dot(ops.jump_integral * local);
  }
  return sum;
}

double ElasticitySolver::stiffness_asymmetry() const {
  Eigen::SparseMatrix<double> diff = stiffness_ - Eigen::SparseMatrix<double>(stiffness_.transpose());
  double max_abs = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
      max_abs = std::max(max_abs, std::abs(it.value()));
  return max_abs;
}

Eigen::VectorXd ElasticitySolver::bilinear_residual(const DGDisplacementField& w,
                                                    const CellField& pressure) const {
  return stiffness_ * w - pressure_load(pressure);
}

CellField update_pressure(const std::vector<CellField>& c_old,
                          const std::vector<CellField>& mu_new, const CellField& helmholtz_old) {
  CellField p(helmholtz_old.size(), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    double s = -helmholtz_old[k];
    for (std::size_t i = 0; i < c_old.size(); ++i) s += c_old[i][k] * mu_new[i][k];
    p[k] = s;
  }
  return p;
}

}  // namespace poromix
