#include "poromix/stepper.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <sstream>

#include "poromix/errors.hpp"

namespace poromix {

namespace {

// Bound envelope of the accepted iterate with a floating-point slack.
constexpr double kEnvelopeSlack = 1e-12;

double clamped_delta(double delta, double ratio) { return std::min(delta, 0.9 * ratio); }

}  // namespace

CellField SimulationState::total_density() const {
  CellField total(c.empty() ? 0 : c[0].size(), 0.0);
  for (const CellField& ci : c)
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += ci[k];
  return total;
}

TauResult compute_adaptive_tau(const SimplicialMesh& mesh, const MixtureSpec& mix,
                               const TransportAssembler& transport, const BoundaryData& boundary,
                               const CellField& phi_iter,
                               const std::vector<FaceField>& velocity,
                               const std::vector<FaceField>& upwind,
                               const TimeStepControls& controls) {
  const int m = mix.size();
  const int nc = mesh.n_cells();
  const double sigma = transport.penalty();
  const CellField& phi_old = transport.phi_old();
  const CellField& c_total = transport.c_old_total();

  TauResult result;
  result.tau = controls.tau_max;

  // Per-cell face sums: outflow advective + positive explicit-jump penalty
  // feed tau*, the inflow/negative mirror feeds tau_star. comp == m plays the
  // role of the total-density balance.
  std::vector<double> out_sum(static_cast<std::size_t>(nc) * (m + 1), 0.0);
  std::vector<double> in_sum(static_cast<std::size_t>(nc) * (m + 1), 0.0);

  auto accumulate = [&](int cell, int slot, double adv, double pen) {
    const std::size_t at = static_cast<std::size_t>(cell) * (m + 1) + slot;
    if (adv > 0.0)
      out_sum[at] += adv;
    else
      in_sum[at] += adv;
    if (pen > 0.0)
      out_sum[at] += pen;
    else
      in_sum[at] += pen;
  };

  for (int f : transport.active_faces()) {
    const Face& face = mesh.faces[f];
    const double ke = transport.face_permeability()[f];
    for (int side = 0; side < (face.boundary() ? 1 : 2); ++side) {
      const int cell = side == 0 ? face.cell_plus : face.cell_minus;
      const double s = side == 0 ? 1.0 : -1.0;
      double adv_total = 0.0;
      for (int i = 0; i < m; ++i) {
        const double un = s * velocity[i][f];
        // On outflow faces the upwind trace is the cell's own value.
        const double adv = (un > 0.0 ? transport.c_old(i)[cell] : upwind[i][f]) * un * face.length;
        const double pen = s * sigma * ke * transport.mu_old_jump(i, f);
        accumulate(cell, i, adv, pen);
        adv_total += adv;
      }
      const double pen_total = s * sigma * ke * transport.mu_old_jump(-1, f);
      accumulate(cell, m, adv_total, pen_total);
    }
  }

  for (int k = 0; k < nc; ++k) {
    const double scale = transport.scale()[k];  // c^n (1 - beta* c^n)
    bool clamped = false;
    for (int slot = 0; slot <= m; ++slot) {
      double d1, d2, c_ref;
      if (slot < m) {
        const double ratio = transport.c_old(slot)[k] / c_total[k];
        d1 = clamped_delta(controls.delta_comp_lower, ratio);
        d2 = clamped_delta(controls.delta_comp_upper, ratio);
        clamped = clamped || d1 < controls.delta_comp_lower || d2 < controls.delta_comp_upper;
        c_ref = transport.c_old(slot)[k];
      } else {
        d1 = controls.delta_total_lower;
        d2 = controls.delta_total_upper;
        c_ref = c_total[k];
      }
      const double dphi = phi_iter[k] - phi_old[k];
      const double num_out = (phi_iter[k] * scale * d1 - dphi * c_ref) * mesh.cell_area[k];
      const double num_in = (phi_iter[k] * scale * d2 + dphi * c_ref) * mesh.cell_area[k];
      if (!(num_out > 0.0) || !(num_in > 0.0)) {
        std::ostringstream msg;
        msg << "adaptive tau breakdown in cell " << k << " (component "
            << (slot < m ? std::to_string(slot) : std::string("total"))
            << "): porosity-ratio assumption violated, phi^{l}/phi^n = "
            << phi_iter[k] / phi_old[k];
        throw StepFailure(msg.str());
      }
      const std::size_t at = static_cast<std::size_t>(k) * (m + 1) + slot;
      const double tau_out = num_out / (out_sum[at] + controls.epsilon);
      const double tau_in = num_in / (-in_sum[at] + controls.epsilon);
      const double candidate = std::min(tau_out, tau_in);
      if (candidate < result.tau) {
        result.tau = candidate;
        result.limiting_cell = k;
        result.limiting_component = slot < m ? slot : -1;
      }
    }
    if (clamped) ++result.clamped_cells;
  }
  return result;
}

Stepper::Stepper(const SimplicialMesh& mesh, const MixtureSpec& mix, FrictionParams friction,
                 ElasticParams elastic, double transport_penalty, TimeStepControls controls,
                 BoundaryData boundary, Certification certification)
    : mesh_(mesh),
      mix_(mix),
      elastic_params_(elastic),
      controls_(controls),
      boundary_(std::move(boundary)),
      certification_(certification),
      permeability_(friction.permeability) {
  elasticity_ = std::make_unique<ElasticitySolver>(mesh_, elastic_params_);
  velocity_solver_ = std::make_unique<VelocitySolver>(mesh_, mix_, std::move(friction),
                                                      controls_.consistent_velocity_mass);
  transport_ = std::make_unique<TransportAssembler>(mesh_, mix_, transport_penalty);
}

void Stepper::certify(const std::string& what) {
  if (certification_ == Certification::WarnOpen)
    warnings_.push_back(what);
  else
    throw InvariantViolation(what);
}

void Stepper::initialize(SimulationState& state) {
  const int m = mix_.size();
  const int nc = mesh_.n_cells();
  std::vector<double> cell(m), mu(m);
  state.mu.assign(m, CellField(nc, 0.0));
  state.pressure.assign(nc, 0.0);
  for (int k = 0; k < nc; ++k) {
    for (int i = 0; i < m; ++i) cell[i] = state.c[i][k];
    check_admissible(mix_, cell);
    if (!(state.porosity[k] > 0.0 && state.porosity[k] < 1.0))
      throw InvariantViolation("initial porosity outside (0,1) in cell " + std::to_string(k));
    chemical_potentials(mix_, cell, mu);
    double p = -helmholtz(mix_, cell);
    for (int i = 0; i < m; ++i) {
      state.mu[i][k] = mu[i];
      p += cell[i] * mu[i];
    }
    state.pressure[k] = p;
  }
  state.displacement = elasticity_->solve_displacement(state.pressure);

  // Velocity consistent with the initial potentials: sweep the lumped
  // component systems to their fixed point.
  state.velocity.assign(m, FaceField(mesh_.n_faces(), 0.0));
  velocity_solver_->begin_step(state.c, boundary_);
  transport_->begin_step(state.c, state.porosity, permeability_, boundary_, 1.0);
  std::vector<FaceField> upwind(m);
  for (int sweep = 0; sweep < 50; ++sweep) {
    std::vector<FaceField> previous = state.velocity;
    for (int i = 0; i < m; ++i) upwind[i] = transport_->upwind_traces(i, state.velocity[i]);
    velocity_solver_->component_sweep(state.mu, upwind, state.porosity, state.velocity);
    double delta = 0.0, scale = 0.0;
    for (int i = 0; i < m; ++i)
      for (int f = 0; f < mesh_.n_faces(); ++f) {
        delta = std::max(delta, std::abs(state.velocity[i][f] - previous[i][f]));
        scale = std::max(scale, std::abs(state.velocity[i][f]));
      }
    if (delta <= 1e-14 * std::max(scale, 1e-300)) break;
  }

  last_energy_ = discrete_energy(mesh_, mix_, *elasticity_, state.c, state.porosity,
                                 state.pressure, state.displacement);
  energy_reference_ = last_energy_;
  mass_reference_.resize(m);
  for (int i = 0; i < m; ++i)
    mass_reference_[i] = component_mass(mesh_, state.porosity, state.c[i]);
}

StepReport Stepper::advance(SimulationState& state) {
  if (!controls_.retry_with_halving) return attempt_step(state, 1.0);
  double scale = 1.0;
  for (int attempt = 0;; ++attempt) {
    try {
      StepReport r = attempt_step(state, scale);
      r.off_protocol = attempt > 0;
      return r;
    } catch (const StepFailure&) {
      if (attempt >= 10) throw;
      scale *= 0.5;
    }
  }
}

StepReport Stepper::attempt_step(SimulationState& state, double tau_scale) {
  const int m = mix_.size();
  const int nc = mesh_.n_cells();
  const double rt = MixtureSpec::kGasConstant * mix_.temperature();
  StepReport report;

  // theta_n is fixed once per step from the t^n states.
  const double theta =
      estimate_theta(mix_, state.c, controls_.theta_safety, controls_.theta_floor);
  report.theta = theta;

  transport_->begin_step(state.c, state.porosity, permeability_, boundary_, theta);
  velocity_solver_->begin_step(state.c, boundary_);

  const CellField c_total_old = state.c.empty() ? CellField{} : [&] {
    CellField t(nc, 0.0);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < nc; ++k) t[k] += state.c[i][k];
    return t;
  }();
  const CellField& scale_c = transport_->scale();

  // Iterate-l fields, initialized from t^n (so phi^{n+1,0} = phi^n).
  std::vector<CellField> c_iter = state.c;
  CellField phi_iter = state.porosity;
  CellField p_iter = state.pressure;
  DGDisplacementField w_iter = state.displacement;
  std::vector<FaceField> u_iter = state.velocity;
  std::vector<CellField> mu_iter = transport_->mu_old();

  std::vector<FaceField> upwind(m);
  for (int i = 0; i < m; ++i) upwind[i] = transport_->upwind_traces(i, u_iter[i]);

  const TauResult tau_result = compute_adaptive_tau(mesh_, mix_, *transport_, boundary_, phi_iter,
                                                    u_iter, upwind, controls_);
  const double tau = std::min(tau_result.tau * tau_scale, controls_.tau_max);
  report.tau = tau;
  report.clamped_cells = tau_result.clamped_cells;
  transport_->set_tau(tau);

  double tol = controls_.tol_x_floor;
  bool converged = false;
  double previous_x = 0.0;

  for (int iter = 0; iter < controls_.max_iterations; ++iter) {
    if (iter > 0)
      for (int i = 0; i < m; ++i) upwind[i] = transport_->upwind_traces(i, u_iter[i]);

    // (1) total + first M-1 component balances with explicit velocities.
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(transport_->build_matrix(phi_iter));
    if (solver.info() != Eigen::Success)
      throw StepFailure("transport factorization failed at iteration " + std::to_string(iter));
    auto solve_zeta = [&](const Eigen::VectorXd& rhs) {
      Eigen::VectorXd z = solver.solve(rhs);
      if (solver.info() != Eigen::Success) throw StepFailure("transport solve failed");
      return z;
    };
    const Eigen::VectorXd zeta_total = solve_zeta(transport_->total_rhs(phi_iter, u_iter, upwind));
    CellField c_total_new(nc);
    for (int k = 0; k < nc; ++k) c_total_new[k] = c_total_old[k] + scale_c[k] * zeta_total[k];

    std::vector<CellField> c_new(m, CellField(nc, 0.0));
    for (int i = 0; i < m - 1; ++i) {
      const Eigen::VectorXd zi = solve_zeta(transport_->component_rhs(i, phi_iter, u_iter[i], upwind[i]));
      for (int k = 0; k < nc; ++k) c_new[i][k] = state.c[i][k] + scale_c[k] * zi[k];
    }
    // (2) algebraic recovery of the last component.
    for (int k = 0; k < nc; ++k) {
      double rest = c_total_new[k];
      for (int i = 0; i < m - 1; ++i) rest -= c_new[i][k];
      c_new[m - 1][k] = rest;
    }

    // Bound envelope of the bound-preserving theorem, asserted per iterate.
    for (int k = 0; k < nc; ++k) {
      const double g = 1.0 - mix_.beta_star() * c_total_old[k];
      const double lower = (1.0 - controls_.delta_total_lower * g) * c_total_old[k];
      const double upper = (1.0 + controls_.delta_total_upper * g) * c_total_old[k];
      const double slack = kEnvelopeSlack * c_total_old[k];
      if (!(c_total_new[k] >= lower - slack) || !(c_total_new[k] <= upper + slack))
        throw InvariantViolation("total molar density left the bound envelope in cell " +
                                 std::to_string(k) + ": c = " + std::to_string(c_total_new[k]) +
                                 ", envelope [" + std::to_string(lower) + ", " +
                                 std::to_string(upper) + "]");
      for (int i = 0; i < m; ++i) {
        if (!(c_new[i][k] > 0.0))
          throw InvariantViolation("molar density of component " + std::to_string(i) +
                                   " non-positive in cell " + std::to_string(k));
        if (!(c_new[i][k] <= c_total_new[k] * (1.0 + kEnvelopeSlack)))
          throw InvariantViolation("component density exceeds the total in cell " +
                                   std::to_string(k));
      }
      if (!(mix_.beta_star() * c_total_new[k] < 1.0))
        throw InvariantViolation("beta* c reached 1 in cell " + std::to_string(k));
    }

    // (3) stabilized potentials; (4) pressure; (5) displacement; (6) porosity.
    std::vector<CellField> mu_new(m, CellField(nc, 0.0));
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < nc; ++k)
        mu_new[i][k] = transport_->mu_old()[i][k] +
                       theta * rt * (c_new[i][k] - state.c[i][k]) / scale_c[k];
    CellField p_new = update_pressure(state.c, mu_new, transport_->helmholtz_old());
    DGDisplacementField w_new = elasticity_->solve_displacement(p_new);
    CellField phi_new = elasticity_->porosity_update(state.porosity, p_new, state.pressure, w_new,
                                                     state.displacement);

    // Porosity-ratio regime of the tau theorem, checked on the iterate that
    // the next transport solve will consume.
    for (int k = 0; k < nc; ++k) {
      const double g = 1.0 - mix_.beta_star() * c_total_old[k];
      double dmin = controls_.delta_comp_lower;
      for (int i = 0; i < m; ++i)
        dmin = std::min(dmin, clamped_delta(controls_.delta_comp_lower,
                                            state.c[i][k] / c_total_old[k]));
      if (!(phi_new[k] / state.porosity[k] < 1.0 / (1.0 - g * dmin)))
        throw StepFailure("porosity-ratio regime violated in cell " + std::to_string(k) +
                          ": phi ratio " + std::to_string(phi_new[k] / state.porosity[k]));
    }

    // (7) Gauss-Seidel velocity sweep at the new potentials.
    std::vector<FaceField> u_new = u_iter;
    velocity_solver_->component_sweep(mu_new, upwind, phi_new, u_new);

    // (8) contraction monitors.
    double x1 = 0.0, x2 = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < nc; ++k) {
        const double d = c_new[i][k] - c_iter[i][k];
        x1 += d * d * mesh_.cell_area[k];
      }
      for (int f : mesh_.interior_faces) {
        const Face& face = mesh_.faces[f];
        const double dj = (c_new[i][face.cell_plus] - c_iter[i][face.cell_plus]) -
                          (c_new[i][face.cell_minus] - c_iter[i][face.cell_minus]);
        x1 += dj * dj;
      }
      FaceField du(mesh_.n_faces(), 0.0);
      for (int f = 0; f < mesh_.n_faces(); ++f) du[f] = u_new[i][f] - u_iter[i][f];
      x2 += rt0_l2_norm_sq(mesh_, du);
    }
    report.history.push_back({iter + 1, x1, x2});

    c_iter = std::move(c_new);
    mu_iter = std::move(mu_new);
    p_iter = std::move(p_new);
    w_iter = std::move(w_new);
    phi_iter = std::move(phi_new);
    u_iter = std::move(u_new);

    const double x = x1 + x2;
    if (iter == 0) {
      tol = std::max(controls_.tol_x_rel * x, controls_.tol_x_floor);
    } else {
      if (x > previous_x) report.x_monotone = false;
      if (previous_x > 0.0)
        report.contraction_ratio = std::max(report.contraction_ratio, x / previous_x);
    }
    previous_x = x;
    if (x <= tol) {
      converged = true;
      report.iterations = iter + 1;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "fixed-point iteration did not converge within " << controls_.max_iterations
        << " iterations (tau " << tau << ", X1 " << report.history.back().x1 << ", X2 "
        << report.history.back().x2 << ", tol " << tol
        << "); reduce tau_max or increase the penalty parameters";
    throw StepFailure(msg.str());
  }

  // Accepted-step certification quantities, evaluated on the self-consistent
  // final iterate.
  std::vector<FaceField> upwind_final(m);
  for (int i = 0; i < m; ++i) upwind_final[i] = transport_->upwind_traces(i, u_iter[i]);

  double max_rel_residual = 0.0;
  const auto fold_residual = [&](const CellField& r, const CellField& cfield) {
    for (int k = 0; k < nc; ++k) {
      const double scale = std::abs(phi_iter[k] * cfield[k] * mesh_.cell_area[k] / tau);
      max_rel_residual = std::max(max_rel_residual, std::abs(r[k]) / std::max(scale, 1e-300));
    }
  };
  for (int i = 0; i < m - 1; ++i)
    fold_residual(
        transport_->local_residual(i, phi_iter, c_iter[i], mu_iter[i], u_iter[i], upwind_final[i]),
        c_iter[i]);
  {
    // Total balance: each component advects with its own velocity.
    CellField c_total_new(nc, 0.0), mu_total(nc, 0.0);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < nc; ++k) {
        c_total_new[k] += c_iter[j][k];
        mu_total[k] += mu_iter[j][k];
      }
    CellField r(nc, 0.0);
    for (int k = 0; k < nc; ++k)
      r[k] = (phi_iter[k] * c_total_new[k] - state.porosity[k] * c_total_old[k]) *
             mesh_.cell_area[k] / tau;
    for (int f : transport_->active_faces()) {
      const Face& face = mesh_.faces[f];
      double flux = transport_->penalty() * transport_->face_permeability()[f] *
                    (face.boundary()
                         ? mu_total[face.cell_plus] - boundary_.ghosts[boundary_.ghost(f)].mu_total
                         : mu_total[face.cell_plus] - mu_total[face.cell_minus]);
      for (int j = 0; j < m; ++j) flux += upwind_final[j][f] * u_iter[j][f] * face.length;
      r[face.cell_plus] += flux;
      if (!face.boundary()) r[face.cell_minus] -= flux;
    }
    fold_residual(r, c_total_new);
  }
  report.max_local_residual = max_rel_residual;

  // Stabilization inequality f(c^{n+1}) - f(c^n) <= mu^{n+1} . (c^{n+1}-c^n).
  double stab_slack = -std::numeric_limits<double>::infinity();
  {
    std::vector<double> cell(m);
    for (int k = 0; k < nc; ++k) {
      for (int i = 0; i < m; ++i) cell[i] = c_iter[i][k];
      const double f_new = helmholtz(mix_, cell);
      double bound = transport_->helmholtz_old()[k];
      for (int i = 0; i < m; ++i) bound += mu_iter[i][k] * (c_iter[i][k] - state.c[i][k]);
      const double slack = f_new - bound;
      stab_slack = std::max(stab_slack, slack);
      if (!(slack <= 1e-10 * std::abs(transport_->helmholtz_old()[k])))
        certify("stabilization inequality violated in cell " + std::to_string(k) +
                " (slack " + std::to_string(slack) + "); theta = " + std::to_string(theta));
    }
  }
  report.stabilization_slack = stab_slack;

  // Transport dissipation sign at the fixed point.
  {
    double dissipation = 0.0, magnitude = 0.0;
    for (int f : transport_->active_faces()) {
      const Face& face = mesh_.faces[f];
      for (int i = 0; i < m; ++i) {
        const double dmu =
            face.boundary()
                ? mu_iter[i][face.cell_plus] - boundary_.ghosts[boundary_.ghost(f)].mu[i]
                : mu_iter[i][face.cell_plus] - mu_iter[i][face.cell_minus];
        const double term = dmu * upwind_final[i][f] * u_iter[i][f] * face.length;
        dissipation += term;
        magnitude += std::abs(term);
      }
    }
    report.transport_dissipation = dissipation;
    if (!(dissipation >= -1e-10 * magnitude))
      certify("transport dissipation sign violated: " + std::to_string(dissipation));
  }

  // Solid/storage energy inequality of the DG momentum + porosity updates.
  {
    const auto solid_energy = [&](const DGDisplacementField& w, const CellField& p) {
      double e = elasticity_->strain_energy(w) + elasticity_->jump_penalty_energy(w) -
                 elasticity_->consistency_term(w);
      KahanSum storage;
      for (int k = 0; k < nc; ++k) storage.add(mesh_.cell_area[k] * p[k] * p[k]);
      return e + 0.5 * storage.value() / elastic_params_.biot_modulus;
    };
    const double before = solid_energy(state.displacement, state.pressure);
    const double after = solid_energy(w_iter, p_iter);
    KahanSum coupling;
    for (int k = 0; k < nc; ++k)
      coupling.add((phi_iter[k] - state.porosity[k]) * p_iter[k] * mesh_.cell_area[k]);
    const double slack = after - before - coupling.value();
    report.solid_energy_slack = slack;
    if (!(slack <= 1e-10 * std::max(std::abs(last_energy_), 1.0)))
      certify("solid energy inequality violated: slack " + std::to_string(slack));
  }

  // Accept.
  state.c = std::move(c_iter);
  state.mu = std::move(mu_iter);
  state.pressure = std::move(p_iter);
  state.displacement = std::move(w_iter);
  state.porosity = std::move(phi_iter);
  state.velocity = std::move(u_iter);
  state.time += tau;
  state.step += 1;

  // Energy decay and per-component mass conservation.
  const double energy = discrete_energy(mesh_, mix_, *elasticity_, state.c, state.porosity,
                                        state.pressure, state.displacement);
  report.energy = energy;
  if (!(energy <= last_energy_ + 1e-12 * std::abs(energy_reference_)))
    certify("discrete energy increased: " + std::to_string(last_energy_) + " -> " +
            std::to_string(energy));
  last_energy_ = energy;

  report.component_mass.resize(m);
  for (int i = 0; i < m; ++i) {
    report.component_mass[i] = component_mass(mesh_, state.porosity, state.c[i]);
    const double drift = std::abs(report.component_mass[i] - mass_reference_[i]);
    if (!(drift <= 1e-10 * std::max(std::abs(mass_reference_[i]), 1e-300)))
      certify("component mass drifted: " + mix_.component(i).name + " by " +
              std::to_string(drift));
  }

  return report;
}

}  // namespace poromix
