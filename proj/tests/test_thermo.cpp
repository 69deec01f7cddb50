#include <doctest.h>

#include <cmath>
#include <random>

#include "poromix/thermo.hpp"
#include "test_fixtures.hpp"

using namespace poromix;
using namespace poromix::testing;

TEST_SUITE_BEGIN("thermo");

namespace {

// Richardson-extrapolated central difference of the free energy.
double fd_potential(const MixtureSpec& mix, std::vector<double> c, int i, double rel_step) {
  const double h = rel_step * c[i];
  auto central = [&](double step) {
    std::vector<double> probe = c;
    probe[i] = c[i] + step;
    const double fp = helmholtz(mix, probe);
    probe[i] = c[i] - step;
    const double fm = helmholtz(mix, probe);
    return (fp - fm) / (2.0 * step);
  };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

}  // namespace

TEST_CASE("chi: branch values") {
  CHECK(chi(0.0) == doctest::Approx(0.37464).epsilon(1e-14));
  // Frozen from an independent high-precision evaluation of the printed
  // polynomials.
  CHECK(std::abs(chi(0.011) - 0.39157219968) <= 1e-9);
  CHECK(std::abs(chi(0.5) - 1.0831345) <= 1e-6);
  // omega = 0.49 belongs to the first branch.
  CHECK(chi(0.49) == doctest::Approx(0.37464 + 1.54226 * 0.49 - 0.26992 * 0.49 * 0.49)
                         .epsilon(1e-14));
}

TEST_CASE("pure parameters at the critical temperature and the beta values") {
  const ComponentSpec co2 = carbon_dioxide();
  const double r = MixtureSpec::kGasConstant;
  // At T = Tc the chi bracket collapses to one.
  const PureParams at_tc = pure_params(co2, co2.critical_temperature);
  CHECK(at_tc.alpha ==
        doctest::Approx(0.45724 * r * r * co2.critical_temperature * co2.critical_temperature /
                        co2.critical_pressure)
            .epsilon(1e-14));
  // Frozen beta values, independently evaluated from the table data.
  CHECK(std::abs(pure_params(co2, 300.0).beta - 2.6674797679728813e-5) <= 1e-12);
  CHECK(std::abs(pure_params(methane(), 300.0).beta - 2.6801429082844096e-5) <= 1e-12);
  CHECK_THROWS_AS(pure_params(co2, -1.0), std::domain_error);
}

TEST_CASE("mixing rules: collapse, bounds, permutation symmetry") {
  // Single component: mixture parameters equal the pure ones.
  MixtureSpec one = pure(carbon_dioxide());
  std::vector<double> c1{100.0};
  const MixedParams mp1 = mixing(one, c1);
  CHECK(mp1.alpha == doctest::Approx(one.alpha_pure(0)).epsilon(1e-14));
  CHECK(mp1.beta == doctest::Approx(one.beta_pure(0)).epsilon(1e-14));

  // Identical specs and zero interaction: alpha is composition independent.
  MixtureSpec twin({carbon_dioxide(), carbon_dioxide()}, Eigen::MatrixXd::Zero(2, 2), 300.0);
  std::vector<double> ca{100.0, 13.0}, cb{1.0, 240.0};
  CHECK(mixing(twin, ca).alpha == doctest::Approx(mixing(twin, cb).alpha).epsilon(1e-13));

  // Binary CO2/CH4 against a brute-force double loop.
  MixtureSpec mix = binary_co2_ch4();
  std::vector<double> c{100.0, 50.0};
  double alpha = 0.0, beta = 0.0;
  const double total = 150.0;
  for (int i = 0; i < 2; ++i) {
    beta += c[i] / total * mix.beta_pure(i);
    for (int j = 0; j < 2; ++j)
      alpha += c[i] * c[j] / (total * total) *
               std::sqrt(mix.alpha_pure(i) * mix.alpha_pure(j));
  }
  const MixedParams mp = mixing(mix, c);
  CHECK(mp.alpha == doctest::Approx(alpha).epsilon(1e-14));
  CHECK(mp.beta == doctest::Approx(beta).epsilon(1e-14));
  CHECK(mp.beta >= std::min(mix.beta_pure(0), mix.beta_pure(1)));
  CHECK(mp.beta <= std::max(mix.beta_pure(0), mix.beta_pure(1)));

  // Permuting components with permuted composition leaves alpha unchanged.
  MixtureSpec swapped({methane(), carbon_dioxide()}, Eigen::MatrixXd::Zero(2, 2), 300.0);
  std::vector<double> c_swapped{50.0, 100.0};
  CHECK(mixing(swapped, c_swapped).alpha == doctest::Approx(mp.alpha).epsilon(1e-14));

  std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(mixing(mix, zero), std::domain_error);
}

TEST_CASE("helmholtz: ideal limit, independent evaluation, symmetric splitting") {
  const double rt = MixtureSpec::kGasConstant * 300.0;

  // Forced ideal limit: alpha and beta driven to zero through an absurd
  // critical pressure, so only the ideal term survives.
  ComponentSpec ideal;
  ideal.name = "ideal";
  ideal.critical_temperature = 300.0;
  ideal.critical_pressure = 1e20;
  ideal.acentric_factor = 0.0;
  ideal.molar_weight = 0.01;
  ideal.viscosity = 1e-5;
  MixtureSpec ideal_mix({ideal, ideal}, Eigen::MatrixXd::Zero(2, 2), 300.0);
  std::vector<double> ci{120.0, 30.0};
  const double f_ideal =
      rt * (ci[0] * (std::log(ci[0]) - 1.0) + ci[1] * (std::log(ci[1]) - 1.0));
  CHECK(helmholtz(ideal_mix, ci) == doctest::Approx(f_ideal).epsilon(1e-12));
  std::vector<double> mu_ideal(2);
  chemical_potentials(ideal_mix, ci, mu_ideal);
  CHECK(mu_ideal[0] == doctest::Approx(rt * std::log(ci[0])).epsilon(1e-12));
  CHECK(mu_ideal[1] == doctest::Approx(rt * std::log(ci[1])).epsilon(1e-12));

  // Pure CO2 at c = 100 mol/m^3, T = 300 K against a term-by-term
  // independent evaluation.
  MixtureSpec co2 = pure(carbon_dioxide());
  std::vector<double> c{100.0};
  const double a = co2.alpha_pure(0);
  const double b = co2.beta_pure(0);
  const double total = 100.0;
  const double expected = rt * (total * (std::log(total) - 1.0)) -
                          total * rt * std::log(1.0 - b * total) +
                          a * total / (2.0 * std::sqrt(2.0) * b) *
                              std::log((1.0 + (1.0 - std::sqrt(2.0)) * b * total) /
                                       (1.0 + (1.0 + std::sqrt(2.0)) * b * total));
  CHECK(helmholtz(co2, c) == doctest::Approx(expected).epsilon(1e-10));

  // Symmetric binary with identical specs vs the pure fluid at doubled
  // density: they differ by the ideal mixing term only.
  MixtureSpec twin({carbon_dioxide(), carbon_dioxide()}, Eigen::MatrixXd::Zero(2, 2), 300.0);
  const double aa = 80.0;
  std::vector<double> split{aa, aa};
  std::vector<double> merged{2.0 * aa};
  const double f_split = helmholtz(twin, split);
  const double f_merged = helmholtz(co2, merged);
  const double mixing_term = rt * (2.0 * aa * std::log(aa) - 2.0 * aa * std::log(2.0 * aa));
  CHECK(f_split - f_merged == doctest::Approx(mixing_term).epsilon(1e-9));

  std::vector<double> negative{-1.0};
  CHECK_THROWS_AS(helmholtz(co2, negative), std::domain_error);
  std::vector<double> too_dense{1.0 / co2.beta_pure(0)};
  CHECK_THROWS_AS(helmholtz(co2, too_dense), std::domain_error);
}

TEST_CASE("chemical potentials: symmetry and finite-difference oracle") {
  // Identical-spec binary with equal composition: equal potentials.
  MixtureSpec twin({carbon_dioxide(), carbon_dioxide()}, Eigen::MatrixXd::Zero(2, 2), 300.0);
  std::vector<double> c_eq{70.0, 70.0}, mu_eq(2);
  chemical_potentials(twin, c_eq, mu_eq);
  CHECK(mu_eq[0] == doctest::Approx(mu_eq[1]).epsilon(1e-13));

  // CO2/CH4 at (100, 50): analytic gradient matches the Richardson oracle.
  MixtureSpec mix = binary_co2_ch4();
  std::vector<double> c{100.0, 50.0}, mu(2);
  chemical_potentials(mix, c, mu);
  for (int i = 0; i < 2; ++i) {
    const double fd = fd_potential(mix, c, i, 1e-4);
    CHECK(std::abs(mu[i] - fd) <= 1e-6 * std::abs(fd));
  }
}

TEST_CASE("gradient and pressure identities on 200 random ternary states") {
  MixtureSpec mix = ternary();
  const double rt = MixtureSpec::kGasConstant * 300.0;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> log_c(std::log(1.0), std::log(2000.0));
  std::vector<double> c(3), mu(3);
  for (int trial = 0; trial < 200; ++trial) {
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
      c[i] = std::exp(log_c(rng));
      total += c[i];
    }
    if (mix.beta_star() * total >= 0.9) {
      const double shrink = 0.9 / (mix.beta_star() * total);
      for (double& v : c) v *= shrink;
      total *= shrink;
    }
    chemical_potentials(mix, c, mu);
    for (int i = 0; i < 3; ++i) {
      // The difference step is floored at a fraction of the total density:
      // f scales with the total, so stepping only with a tiny c_i puts the
      // cancellation noise of the oracle above its own tolerance.
      const double h = 1e-4 * std::max(c[i], 1e-2 * total);
      auto central = [&](double step) {
        std::vector<double> probe = c;
        probe[i] = c[i] + step;
        const double fp = helmholtz(mix, probe);
        probe[i] = c[i] - step;
        const double fm = helmholtz(mix, probe);
        return (fp - fm) / (2.0 * step);
      };
      const double fd = (4.0 * central(0.5 * h) - central(h)) / 3.0;
      // Relative floor: R T is the natural potential unit.
      CHECK(std::abs(mu[i] - fd) <= 1e-6 * std::max(std::abs(fd), rt));
    }
    const double p_identity = pressure(mix, c);
    const double p_closed = pressure_closed_form(mix, c);
    CHECK(std::abs(p_identity - p_closed) <= 1e-8 * std::max(std::abs(p_closed), 1.0));
  }
}

TEST_CASE("pressure: ideal-gas value and the closed-form cross-check") {
  // Forced ideal limit: the identity reduces to c R T = 249420 Pa.
  ComponentSpec ideal;
  ideal.name = "ideal";
  ideal.critical_temperature = 300.0;
  ideal.critical_pressure = 1e20;
  ideal.acentric_factor = 0.0;
  ideal.molar_weight = 0.01;
  ideal.viscosity = 1e-5;
  MixtureSpec ideal_mix = pure(ideal);
  std::vector<double> c_ideal{100.0};
  CHECK(pressure(ideal_mix, c_ideal) == doctest::Approx(249420.0).epsilon(1e-12));

  MixtureSpec co2 = pure(carbon_dioxide());
  std::vector<double> c{100.0};
  const double p = pressure(co2, c);
  CHECK(std::abs(p - pressure_closed_form(co2, c)) <= 1e-8 * std::abs(p));
  CHECK(p == doctest::Approx(100.0 * MixtureSpec::kGasConstant * 300.0).epsilon(0.05));

  // Binary cross-check at the potentials example state.
  MixtureSpec mix = binary_co2_ch4();
  std::vector<double> cb{100.0, 50.0};
  CHECK(std::abs(pressure(mix, cb) - pressure_closed_form(mix, cb)) <=
        1e-8 * std::abs(pressure(mix, cb)));
}

TEST_CASE("stabilized potential: zero increment, affinity, direct evaluation") {
  MixtureSpec mix = binary_co2_ch4();
  std::vector<double> c{100.0, 50.0}, mu(2);
  chemical_potentials(mix, c, mu);
  const double rt = MixtureSpec::kGasConstant * 300.0;
  const double total = 150.0;
  const double theta = 2.0;

  CHECK(stabilized_mu(mix, mu[0], theta, total, c[0], c[0]) == mu[0]);

  const double up1 = stabilized_mu(mix, mu[0], theta, total, c[0], c[0] + 1.0);
  const double up2 = stabilized_mu(mix, mu[0], theta, total, c[0], c[0] + 2.0);
  CHECK(up2 - mu[0] == doctest::Approx(2.0 * (up1 - mu[0])).epsilon(1e-13));

  // Hand evaluation for the increment (+1, -1).
  const double denom = total * (1.0 - mix.beta_star() * total);
  CHECK(stabilized_mu(mix, mu[0], theta, total, c[0], c[0] + 1.0) ==
        doctest::Approx(mu[0] + theta * rt / denom).epsilon(1e-14));
  CHECK(stabilized_mu(mix, mu[1], theta, total, c[1], c[1] - 1.0) ==
        doctest::Approx(mu[1] - theta * rt / denom).epsilon(1e-14));

  // Affinity across three increments: interpolation reproduces the middle.
  const double a = stabilized_mu(mix, mu[0], theta, total, c[0], c[0] + 0.5);
  const double b = stabilized_mu(mix, mu[0], theta, total, c[0], c[0] + 1.5);
  CHECK(0.5 * (a + b) == doctest::Approx(up1).epsilon(1e-14));

  CHECK_THROWS_AS(stabilization_scale(mix, 2.0 / mix.beta_star()), std::domain_error);
}

TEST_CASE("theta estimate: ideal-gas analytic value and degenerate reporting") {
  // A formally ideal gas: beta* ~ 0 via enormous critical pressure, alpha ~ 0
  // via omega tuned so the attraction nearly vanishes at T = Tc.
  ComponentSpec ideal;
  ideal.name = "ideal";
  ideal.critical_temperature = 300.0;
  ideal.critical_pressure = 1e14;  // beta ~ 1.9e-13
  ideal.acentric_factor = 0.0;
  ideal.molar_weight = 0.01;
  ideal.viscosity = 1e-5;
  MixtureSpec mix({ideal, ideal}, Eigen::MatrixXd::Zero(2, 2), 300.0);

  // c_1 = c_2 = c/2: the Gershgorin bound of the ideal Hessian gives exactly
  // theta = 1, so safety 1.1 returns 1.1 (the PR corrections at this scale
  // are ~1e-8).
  std::vector<CellField> cells{{50.0}, {50.0}};
  const double theta = estimate_theta(mix, cells, 1.1, 1e-6);
  CHECK(theta == doctest::Approx(1.1).epsilon(1e-5));

  // The floor applies when the Hessian bound is numerically zero; with a
  // tiny safety factor the bound drops below the floor.
  const double floored = estimate_theta(mix, cells, 1e-12, 1e-6);
  CHECK(floored == 1e-6);

  // Degenerate states are reported with the offending cell.
  std::vector<CellField> bad{{50.0, -1.0}, {50.0, 1.0}};
  CHECK_THROWS_WITH_AS(estimate_theta(mix, bad, 1.1, 1e-6),
                       doctest::Contains("cell 1"), std::domain_error);
}

TEST_CASE("kozeny-carman multiplier") {
  CHECK(kozeny_carman(0.2, 0.2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kozeny_carman(0.3, 0.2) == doctest::Approx(4.4081632653).epsilon(1e-6));
  CHECK(kozeny_carman(0.25, 0.2) < kozeny_carman(0.3, 0.2));
  CHECK_THROWS_AS(kozeny_carman(0.0, 0.2), std::domain_error);
  CHECK_THROWS_AS(kozeny_carman(0.3, 1.0), std::domain_error);
}

TEST_CASE("admissibility guard rejects the boundary of the domain") {
  MixtureSpec mix = binary_co2_ch4();
  std::vector<double> ok{100.0, 50.0};
  CHECK_NOTHROW(check_admissible(mix, ok));
  std::vector<double> zero{0.0, 50.0};
  CHECK_THROWS_AS(check_admissible(mix, zero), std::domain_error);
  std::vector<double> saturated{1.0 / mix.beta_star(), 1.0};
  CHECK_THROWS_AS(check_admissible(mix, saturated), std::domain_error);
}

TEST_SUITE_END();
