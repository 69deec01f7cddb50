#include "poromix/thermo.hpp"

#include <cmath>
#include <stdexcept>

namespace poromix {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kAdmissibleMargin = 1e-12;
}  // namespace

double chi(double omega) {
  if (omega <= 0.49) return 0.37464 + 1.54226 * omega - 0.26992 * omega * omega;
  return 0.379642 + 1.485030 * omega - 0.164423 * omega * omega +
         0.016666 * omega * omega * omega;
}

PureParams pure_params(const ComponentSpec& spec, double temperature) {
  if (!(temperature > 0.0)) throw std::domain_error("pure_params: temperature must be > 0");
  const double r = MixtureSpec::kGasConstant;
  const double tc = spec.critical_temperature;
  const double pc = spec.critical_pressure;
  const double bracket = 1.0 + chi(spec.acentric_factor) * (1.0 - std::sqrt(temperature / tc));
  PureParams p;
  p.alpha = 0.45724 * r * r * tc * tc / pc * bracket * bracket;
  p.beta = 0.07780 * r * tc / pc;
  return p;
}

MixtureSpec::MixtureSpec(std::vector<ComponentSpec> components, Eigen::MatrixXd interaction,
                         double temperature)
    : components_(std::move(components)),
      interaction_(std::move(interaction)),
      temperature_(temperature) {
  const int m = size();
  if (m < 1) throw std::invalid_argument("MixtureSpec: at least one component required");
  if (!(temperature_ > 0.0)) throw std::invalid_argument("MixtureSpec: temperature must be > 0");
  if (interaction_.rows() != m || interaction_.cols() != m)
    throw std::invalid_argument("MixtureSpec: interaction matrix must be MxM");
  for (int i = 0; i < m; ++i) {
    const ComponentSpec& c = components_[i];
    if (!(c.critical_temperature > 0.0) || !(c.critical_pressure > 0.0))
      throw std::invalid_argument("MixtureSpec: critical properties of '" + c.name +
                                  "' must be positive");
    if (!(c.viscosity > 0.0))
      throw std::invalid_argument("MixtureSpec: viscosity of '" + c.name + "' must be positive");
    if (interaction_(i, i) != 0.0)
      throw std::invalid_argument("MixtureSpec: interaction diagonal must be zero");
    for (int j = 0; j < m; ++j)
      if (interaction_(i, j) != interaction_(j, i))
        throw std::invalid_argument("MixtureSpec: interaction matrix must be symmetric");
  }

  alpha_pure_.resize(m);
  beta_pure_.resize(m);
  for (int i = 0; i < m; ++i) {
    const PureParams p = pure_params(components_[i], temperature_);
    alpha_pure_[i] = p.alpha;
    beta_pure_[i] = p.beta;
    beta_star_ = std::max(beta_star_, p.beta);
  }
  attraction_.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      attraction_(i, j) = std::sqrt(alpha_pure_[i] * alpha_pure_[j]) * (1.0 - interaction_(i, j));
}

void check_admissible(const MixtureSpec& mix, std::span<const double> c) {
  if (static_cast<int>(c.size()) != mix.size())
    throw std::invalid_argument("state size does not match component count");
  double total = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i] > 0.0))
      throw std::domain_error("inadmissible state: c[" + std::to_string(i) + "] = " +
                              std::to_string(c[i]) + " must be > 0");
    total += c[i];
  }
  if (!(mix.beta_star() * total < 1.0 - kAdmissibleMargin))
    throw std::domain_error("inadmissible state: beta* c = " +
                            std::to_string(mix.beta_star() * total) + " must be < 1");
}

MixedParams mixing(const MixtureSpec& mix, std::span<const double> c) {
  check_admissible(mix, c);
  const int m = mix.size();
  double total = 0.0;
  for (int i = 0; i < m; ++i) total += c[i];
  MixedParams out;
  for (int i = 0; i < m; ++i) {
    out.beta += c[i] / total * mix.beta_pure(i);
    for (int j = 0; j < m; ++j) out.alpha += c[i] * c[j] * mix.attraction(i, j);
  }
  out.alpha /= total * total;
  return out;
}

namespace {

// f, mu and p share the representation in the linear aggregates
//   A = sum_ij a_ij c_i c_j,  B = sum_k beta_k c_k,  c = sum_k c_k,
// for which f = RT sum c_k (ln c_k - 1) - c RT ln(1-B) + A/(2 sqrt2 B) L(B)
// with L(x) = ln((1+(1-sqrt2)x)/(1+(1+sqrt2)x)).
struct Aggregates {
  double total = 0.0;
  double a = 0.0;
  double b = 0.0;
};

Aggregates aggregates(const MixtureSpec& mix, std::span<const double> c) {
  Aggregates g;
  const int m = mix.size();
  for (int i = 0; i < m; ++i) {
    g.total += c[i];
    g.b += mix.beta_pure(i) * c[i];
    for (int j = 0; j < m; ++j) g.a += mix.attraction(i, j) * c[i] * c[j];
  }
  return g;
}

double log_ratio(double x) {
  return std::log((1.0 + (1.0 - kSqrt2) * x) / (1.0 + (1.0 + kSqrt2) * x));
}

}  // namespace

double helmholtz(const MixtureSpec& mix, std::span<const double> c) {
  check_admissible(mix, c);
  const double rt = MixtureSpec::kGasConstant * mix.temperature();
  const Aggregates g = aggregates(mix, c);
  double ideal = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) ideal += c[i] * (std::log(c[i]) - 1.0);
  const double repulsion = -g.total * rt * std::log(1.0 - g.b);
  const double attraction =
      g.b > 1e-14 ? g.a / (2.0 * kSqrt2 * g.b) * log_ratio(g.b) : -g.a;  // B->0 limit
  return rt * ideal + repulsion + attraction;
}

void chemical_potentials(const MixtureSpec& mix, std::span<const double> c,
                         std::span<double> mu) {
  check_admissible(mix, c);
  const int m = mix.size();
  if (static_cast<int>(mu.size()) != m)
    throw std::invalid_argument("chemical_potentials: output size mismatch");
  const double rt = MixtureSpec::kGasConstant * mix.temperature();
  const Aggregates g = aggregates(mix, c);
  const double one_minus_b = 1.0 - g.b;
  const double lr = g.b > 1e-14 ? log_ratio(g.b) : 0.0;
  const double d = 1.0 + 2.0 * g.b - g.b * g.b;
  for (int i = 0; i < m; ++i) {
    double a_i = 0.0;  // d(A)/dc_i / 2
    for (int j = 0; j < m; ++j) a_i += mix.attraction(i, j) * c[j];
    const double beta_i = mix.beta_pure(i);
    double v = rt * std::log(c[i]) - rt * std::log(one_minus_b) +
               g.total * rt * beta_i / one_minus_b;
    if (g.b > 1e-14) {
      v += lr / (2.0 * kSqrt2) * (2.0 * a_i / g.b - g.a * beta_i / (g.b * g.b));
      v -= g.a * beta_i / (g.b * d);
    } else {
      v += -2.0 * a_i;  // B->0 limit of the attraction gradient
    }
    mu[i] = v;
  }
}

double pressure(const MixtureSpec& mix, std::span<const double> c) {
  std::vector<double> mu(c.size());
  chemical_potentials(mix, c, mu);
  double p = -helmholtz(mix, c);
  for (std::size_t i = 0; i < c.size(); ++i) p += c[i] * mu[i];
  return p;
}

double pressure_closed_form(const MixtureSpec& mix, std::span<const double> c) {
  check_admissible(mix, c);
  const MixedParams mp = mixing(mix, c);
  double total = 0.0;
  for (double ci : c) total += ci;
  const double rt = MixtureSpec::kGasConstant * mix.temperature();
  const double bc = mp.beta * total;
  return total * rt / (1.0 - bc) - mp.alpha * total * total / (1.0 + 2.0 * bc - bc * bc);
}

double stabilization_scale(const MixtureSpec& mix, double c_total_old) {
  const double scaled = mix.beta_star() * c_total_old;
  if (!(c_total_old > 0.0) || !(scaled < 1.0))
    throw std::domain_error("stabilization_scale: need 0 < beta* c < 1, got beta* c = " +
                            std::to_string(scaled));
  return c_total_old * (1.0 - scaled);
}

double stabilized_mu(const MixtureSpec& mix, double mu_old, double theta, double c_total_old,
                     double c_old, double c_new) {
  const double rt = MixtureSpec::kGasConstant * mix.temperature();
  return mu_old + theta * rt * (c_new - c_old) / stabilization_scale(mix, c_total_old);
}

double estimate_theta(const MixtureSpec& mix, const std::vector<CellField>& c_cells,
                      double safety, double floor_value) {
  const int m = mix.size();
  if (static_cast<int>(c_cells.size()) != m)
    throw std::invalid_argument("estimate_theta: expected one field per component");
  const std::size_t n = c_cells.empty() ? 0 : c_cells[0].size();
  const double rt = MixtureSpec::kGasConstant * mix.temperature();

  double theta = floor_value;
  std::vector<double> state(m), probe(m), mu_plus(m), mu_minus(m);
  Eigen::MatrixXd hess(m, m);
  for (std::size_t cell = 0; cell < n; ++cell) {
    for (int i = 0; i < m; ++i) state[i] = c_cells[i][cell];
    try {
      check_admissible(mix, state);
    } catch (const std::domain_error& e) {
      throw std::domain_error("estimate_theta: cell " + std::to_string(cell) + ": " + e.what());
    }
    // f'' by central differences of the analytic gradient.
    for (int j = 0; j < m; ++j) {
      const double h = 1e-5 * std::max(state[j], 1.0);
      probe = state;
      probe[j] = state[j] + h;
      chemical_potentials(mix, probe, mu_plus);
      probe[j] = state[j] - h;
      chemical_potentials(mix, probe, mu_minus);
      for (int i = 0; i < m; ++i) hess(i, j) = (mu_plus[i] - mu_minus[i]) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();

    double row_bound = 0.0;  // Gershgorin bound of f''/2
    for (int i = 0; i < m; ++i) {
      double r = 0.5 * hess(i, i);
      for (int j = 0; j < m; ++j)
        if (j != i) r += 0.5 * std::abs(hess(i, j));
      row_bound = std::max(row_bound, r);
    }
    double total = 0.0;
    for (int i = 0; i < m; ++i) total += state[i];
    const double scale = stabilization_scale(mix, total);
    theta = std::max(theta, safety * row_bound * scale / rt);
  }
  return theta;
}

double kozeny_carman(double phi, double phi_reference) {
  if (!(phi > 0.0 && phi < 1.0))
    throw std::domain_error("kozeny_carman: porosity must lie in (0,1), got " +
                            std::to_string(phi));
  if (!(phi_reference > 0.0 && phi_reference < 1.0))
    throw std::domain_error("kozeny_carman: reference porosity must lie in (0,1), got " +
                            std::to_string(phi_reference));
  const double ratio = phi / phi_reference;
  const double solid = (1.0 - phi_reference) / (1.0 - phi);
  return ratio * ratio * ratio * solid * solid;
}

}  // namespace poromix
