#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include "poromix/config.hpp"
#include "poromix/errors.hpp"
#include "poromix/io.hpp"
#include "poromix/permeability.hpp"
#include "poromix/runner.hpp"

namespace {

using namespace poromix;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const StepFailure*>(&e)) return 3;
  if (dynamic_cast<const InvariantViolation*>(&e)) return 4;
  return 1;
}

struct CheckOutcome {
  int failures = 0;
  void report(const std::string& name, bool pass, const std::string& detail = "") {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    if (!pass) ++failures;
  }
};

// Property suite for the configured mixture: analytic potentials against
// Richardson-extrapolated differences, the pressure identity against the
// closed-form equation of state, mixing-rule bounds and symmetry, and the
// affinity of the stabilized potential.
int check_thermo(const ScenarioConfig& cfg, unsigned long long seed) {
  MixtureSpec mix = cfg.make_mixture();
  const int m = mix.size();
  std::mt19937_64 rng(seed ^ 0x746865726d6fULL);
  std::uniform_real_distribution<double> log_c(std::log(1.0), std::log(2000.0));

  CheckOutcome out;
  double max_grad_err = 0.0, max_p_err = 0.0;
  int tested = 0;
  std::vector<double> c(m), mu(m), probe(m), mu_p(m), mu_m(m);
  while (tested < 200) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      c[i] = std::exp(log_c(rng));
      total += c[i];
    }
    if (mix.beta_star() * total >= 0.9) {
      const double shrink = 0.9 / (mix.beta_star() * total);
      for (int i = 0; i < m; ++i) c[i] *= shrink;
    }
    ++tested;
    total = 0.0;
    for (int i = 0; i < m; ++i) total += c[i];
    const double rt = MixtureSpec::kGasConstant * mix.temperature();
    chemical_potentials(mix, c, mu);
    for (int i = 0; i < m; ++i) {
      // Step floored at a fraction of the total density to keep the oracle's
      // cancellation noise below its tolerance; R T is the relative floor.
      const double h = 1e-4 * std::max(c[i], 1e-2 * total);
      auto central = [&](double step) {
        probe = c;
        probe[i] = c[i] + step;
        const double fp = helmholtz(mix, probe);
        probe[i] = c[i] - step;
        const double fm = helmholtz(mix, probe);
        return (fp - fm) / (2.0 * step);
      };
      const double d_h = central(h);
      const double d_h2 = central(0.5 * h);
      const double richardson = (4.0 * d_h2 - d_h) / 3.0;
      max_grad_err = std::max(max_grad_err,
                              std::abs(mu[i] - richardson) / std::max(std::abs(richardson), rt));
    }
    const double p_id = pressure(mix, c);
    const double p_cf = pressure_closed_form(mix, c);
    max_p_err = std::max(max_p_err, std::abs(p_id - p_cf) / std::max(std::abs(p_cf), 1.0));

    const MixedParams mp = mixing(mix, c);
    double bmin = mix.beta_pure(0), bmax = mix.beta_pure(0);
    for (int i = 1; i < m; ++i) {
      bmin = std::min(bmin, mix.beta_pure(i));
      bmax = std::max(bmax, mix.beta_pure(i));
    }
    if (!(mp.beta >= bmin - 1e-15 && mp.beta <= bmax + 1e-15)) {
      out.report("mixing beta within pure-component bounds", false);
      return 1;
    }
  }
  out.report("analytic potentials vs Richardson differences (200 states)",
             max_grad_err <= 1e-6, "max rel err " + format_double(max_grad_err));
  out.report("pressure identity vs closed form", max_p_err <= 1e-8,
             "max rel err " + format_double(max_p_err));
  out.report("mixing beta within pure-component bounds", true);

  // Affinity of the stabilized potential in the increment.
  {
    std::vector<double> state(m, 100.0);
    const double c_tot = 100.0 * m;
    chemical_potentials(mix, state, mu);
    const double a = stabilized_mu(mix, mu[0], 2.0, c_tot, state[0], state[0] + 1.0);
    const double b = stabilized_mu(mix, mu[0], 2.0, c_tot, state[0], state[0] + 3.0);
    const double mid = stabilized_mu(mix, mu[0], 2.0, c_tot, state[0], state[0] + 2.0);
    out.report("stabilized potential affine in the increment",
               std::abs(0.5 * (a + b) - mid) <= 1e-9 * std::abs(mid));
  }
  {
    std::vector<CellField> cells(m, CellField(1, 100.0));
    const double theta = estimate_theta(mix, cells, 1.1, 1e-6);
    out.report("stabilization parameter finite and positive", theta > 0.0,
               "theta = " + format_double(theta));
  }
  return out.failures == 0 ? 0 : 4;
}

int generate_permeability_raster(const ScenarioConfig& cfg, const std::string& out_path,
                                 unsigned long long seed) {
  const SimplicialMesh mesh =
      build_structured_triangulation(cfg.mesh.nx, cfg.mesh.ny, cfg.mesh.lx, cfg.mesh.ly);
  const CellField field = gen_permeability(cfg.permeability, mesh, seed);
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot open output file: " + out_path);
  out << cfg.mesh.ny << " " << cfg.mesh.nx << "\n";
  for (int j = 0; j < cfg.mesh.ny; ++j) {
    for (int i = 0; i < cfg.mesh.nx; ++i) {
      const int cell = 2 * (j * cfg.mesh.nx + i);
      const double md = 0.5 * (field[cell] + field[cell + 1]) / kMillidarcy;
      out << format_double(md) << (i + 1 == cfg.mesh.nx ? "" : " ");
    }
    out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"poromix: multicomponent gas flow in poroelastic media"};
  app.require_subcommand(1);

  std::string config_path, out_dir, path_a, path_b, out_path;
  int vtk_every = -1, max_steps = -1;
  long long seed_flag = -1;
  bool strict = false;
  double rtol = 0.0;

  CLI::App* run = app.add_subcommand("run", "run a scenario");
  run->add_option("config", config_path, "scenario file")->required();
  run->add_option("--out-dir", out_dir, "output directory");
  run->add_option("--vtk-every", vtk_every, "snapshot cadence (0 = off)");
  run->add_option("--max-steps", max_steps, "step budget override");
  run->add_option("--seed", seed_flag, "seed override");
  run->add_flag("--strict", strict, "fail on open-boundary certification warnings");

  CLI::App* check = app.add_subcommand("check-thermo", "thermo property suite");
  check->add_option("config", config_path, "scenario file")->required();
  check->add_option("--seed", seed_flag, "seed override");

  CLI::App* gen = app.add_subcommand("gen-perm", "write the permeability field as a raster (md)");
  gen->add_option("config", config_path, "scenario file")->required();
  gen->add_option("out", out_path, "output raster path")->required();
  gen->add_option("--seed", seed_flag, "seed override");

  CLI::App* diff = app.add_subcommand("diff", "compare two time-series files");
  diff->add_option("a", path_a, "first file")->required();
  diff->add_option("b", path_b, "second file")->required();
  diff->add_option("--rtol", rtol, "relative tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const ScenarioConfig cfg = poromix::load_config(config_path);
      poromix::RunOptions opts;
      opts.out_dir = out_dir;
      if (vtk_every >= 0) opts.vtk_every = vtk_every;
      if (max_steps >= 0) opts.max_steps = max_steps;
      if (seed_flag >= 0) opts.seed = static_cast<unsigned long long>(seed_flag);
      opts.strict = strict;
      poromix::RunResult result = poromix::run_simulation(cfg, opts);
      std::cout << "completed " << result.state.step << " steps, t = " << result.state.time
                << " s\n";
      return 0;
    }
    if (check->parsed()) {
      const ScenarioConfig cfg = poromix::load_config(config_path);
      return check_thermo(cfg, seed_flag >= 0 ? seed_flag : cfg.seed);
    }
    if (gen->parsed()) {
      const ScenarioConfig cfg = poromix::load_config(config_path);
      return generate_permeability_raster(cfg, out_path,
                                          seed_flag >= 0 ? seed_flag : cfg.seed);
    }
    if (diff->parsed()) {
      const poromix::DiffResult r = poromix::diff_timeseries(path_a, path_b, rtol);
      if (!r.equal) {
        std::cerr << "diff: " << r.message << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
