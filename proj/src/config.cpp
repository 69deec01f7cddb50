#include "poromix/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "poromix/errors.hpp"

namespace poromix {

using nlohmann::json;

namespace {

// Byte offset -> line:column for parse diagnostics.
std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

class Validator {
 public:
  void fail(const std::string& path, const std::string& message) {
    problems_.push_back(path + ": " + message);
  }
  bool ok() const { return problems_.empty(); }
  std::string summary(const std::string& origin) const {
    std::ostringstream out;
    out << "invalid configuration (" << origin << "):";
    for (const std::string& p : problems_) out << "\n  - " << p;
    return out.str();
  }

 private:
  std::vector<std::string> problems_;
};

double require_number(const json& j, const std::string& path, const char* key, Validator& v,
                      double fallback = 0.0) {
  if (!j.contains(key) || !j[key].is_number()) {
    v.fail(path + "." + key, "required number missing");
    return fallback;
  }
  return j[key].get<double>();
}

int require_int(const json& j, const std::string& path, const char* key, Validator& v,
                int fallback = 0) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    v.fail(path + "." + key, "required integer missing");
    return fallback;
  }
  return j[key].get<int>();
}

BoxRegion parse_box(const json& j, const std::string& path, Validator& v) {
  BoxRegion b;
  if (!j.is_array() || j.size() != 4) {
    v.fail(path, "box must be [x0, y0, x1, y1]");
    return b;
  }
  b.x0 = j[0].get<double>();
  b.y0 = j[1].get<double>();
  b.x1 = j[2].get<double>();
  b.y1 = j[3].get<double>();
  if (!(b.x1 > b.x0) || !(b.y1 > b.y0)) v.fail(path, "box must have positive extent");
  return b;
}

std::vector<double> parse_density_vector(const json& j, const std::string& path, int m,
                                         Validator& v) {
  std::vector<double> out;
  if (!j.is_array() || static_cast<int>(j.size()) != m) {
    v.fail(path, "expected one molar density per component (" + std::to_string(m) + ")");
    return out;
  }
  for (const auto& e : j) out.push_back(e.get<double>());
  for (double x : out)
    if (!(x > 0.0)) v.fail(path, "molar densities must be positive");
  return out;
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& path, int m, Validator& v) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  if (!j.is_array() || static_cast<int>(j.size()) != m) {
    v.fail(path, "expected an " + std::to_string(m) + "x" + std::to_string(m) + " matrix");
    return out;
  }
  for (int i = 0; i < m; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != m) {
      v.fail(path, "row " + std::to_string(i) + " must have " + std::to_string(m) + " entries");
      return out;
    }
    for (int k = 0; k < m; ++k) out(i, k) = j[i][k].get<double>();
  }
  return out;
}

}  // namespace

MixtureSpec ScenarioConfig::make_mixture() const {
  return MixtureSpec(components, interaction, temperature);
}

ScenarioConfig parse_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error in " + origin + " at " + locate(text, e.byte) + ": " +
                      e.what());
  }

  Validator v;
  ScenarioConfig cfg;

  if (!doc.contains("mesh") || !doc["mesh"].is_object()) {
    v.fail("mesh", "required table missing");
  } else {
    const json& m = doc["mesh"];
    cfg.mesh.nx = require_int(m, "mesh", "nx", v);
    cfg.mesh.ny = require_int(m, "mesh", "ny", v);
    cfg.mesh.lx = require_number(m, "mesh", "Lx", v);
    cfg.mesh.ly = require_number(m, "mesh", "Ly", v);
    if (cfg.mesh.nx < 1 || cfg.mesh.ny < 1) v.fail("mesh", "nx and ny must be >= 1");
    if (!(cfg.mesh.lx > 0.0) || !(cfg.mesh.ly > 0.0)) v.fail("mesh", "Lx and Ly must be > 0");
  }

  cfg.temperature = require_number(doc, "", "temperature", v);
  if (!(cfg.temperature > 0.0)) v.fail("temperature", "must be > 0");

  int m = 0;
  if (!doc.contains("components") || !doc["components"].is_array() || doc["components"].empty()) {
    v.fail("components", "at least one component required");
  } else {
    m = static_cast<int>(doc["components"].size());
    for (int i = 0; i < m; ++i) {
      const json& c = doc["components"][i];
      const std::string path = "components[" + std::to_string(i) + "]";
      ComponentSpec spec;
      spec.name = c.value("name", "component" + std::to_string(i));
      spec.critical_temperature = require_number(c, path, "Tc", v);
      spec.critical_pressure = require_number(c, path, "Pc_bar", v) * kBar;
      spec.acentric_factor = require_number(c, path, "acentric", v);
      spec.molar_weight = require_number(c, path, "molar_weight", v);
      spec.viscosity = require_number(c, path, "viscosity", v);
      if (!(spec.critical_temperature > 0.0)) v.fail(path + ".Tc", "must be > 0");
      if (!(spec.critical_pressure > 0.0)) v.fail(path + ".Pc_bar", "must be > 0");
      if (!(spec.viscosity > 0.0)) v.fail(path + ".viscosity", "must be > 0");
      cfg.components.push_back(spec);
    }
  }

  cfg.interaction = Eigen::MatrixXd::Zero(m, m);
  if (doc.contains("interaction")) cfg.interaction = parse_matrix(doc["interaction"], "interaction", m, v);
  for (int i = 0; i < m; ++i) {
    if (cfg.interaction(i, i) != 0.0) v.fail("interaction", "diagonal must be zero");
    for (int j = 0; j < m; ++j)
      if (cfg.interaction(i, j) != cfg.interaction(j, i))
        v.fail("interaction", "matrix must be symmetric");
  }

  cfg.diffusivity = Eigen::MatrixXd::Ones(m, m);
  if (m > 1) {
    if (!doc.contains("diffusivity")) {
      v.fail("diffusivity", "required for multicomponent mixtures");
    } else {
      cfg.diffusivity = parse_matrix(doc["diffusivity"], "diffusivity", m, v);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          if (i == j) continue;
          if (!(cfg.diffusivity(i, j) > 0.0)) v.fail("diffusivity", "off-diagonal must be > 0");
          if (cfg.diffusivity(i, j) != cfg.diffusivity(j, i))
            v.fail("diffusivity", "matrix must be symmetric");
        }
    }
  }

  if (!doc.contains("porosity") || !doc["porosity"].is_object()) {
    v.fail("porosity", "required table missing");
  } else {
    const json& p = doc["porosity"];
    cfg.reference_porosity = require_number(p, "porosity", "reference", v);
    cfg.background_porosity = require_number(p, "porosity", "initial", v);
    if (!(cfg.reference_porosity > 0.0 && cfg.reference_porosity < 1.0))
      v.fail("porosity.reference", "must lie in (0,1)");
    if (!(cfg.background_porosity > 0.0 && cfg.background_porosity < 1.0))
      v.fail("porosity.initial", "must lie in (0,1)");
    if (p.contains("regions")) {
      for (std::size_t i = 0; i < p["regions"].size(); ++i) {
        const json& r = p["regions"][i];
        const std::string path = "porosity.regions[" + std::to_string(i) + "]";
        BoxRegion box = parse_box(r["box"], path + ".box", v);
        const double value = require_number(r, path, "value", v);
        if (!(value > 0.0 && value < 1.0)) v.fail(path + ".value", "must lie in (0,1)");
        cfg.porosity_regions.emplace_back(box, value);
      }
    }
  }

  if (!doc.contains("initial") || !doc["initial"].is_object()) {
    v.fail("initial", "required table missing");
  } else {
    const json& ini = doc["initial"];
    if (!ini.contains("background")) {
      v.fail("initial.background", "required");
    } else {
      cfg.background_c = parse_density_vector(ini["background"], "initial.background", m, v);
    }
    if (ini.contains("regions")) {
      for (std::size_t i = 0; i < ini["regions"].size(); ++i) {
        const json& r = ini["regions"][i];
        const std::string path = "initial.regions[" + std::to_string(i) + "]";
        InitialRegion region;
        region.box = parse_box(r["box"], path + ".box", v);
        region.c = parse_density_vector(r["c"], path + ".c", m, v);
        cfg.initial_regions.push_back(region);
      }
    }
  }

  if (!doc.contains("permeability") || !doc["permeability"].is_object()) {
    v.fail("permeability", "required table missing");
  } else {
    const json& p = doc["permeability"];
    const std::string kind = p.value("type", "");
    PermeabilityConfig& pc = cfg.permeability;
    if (kind == "uniform") {
      pc.kind = PermeabilityConfig::Kind::Uniform;
      pc.uniform_md = require_number(p, "permeability", "K_md", v);
      if (!(pc.uniform_md > 0.0)) v.fail("permeability.K_md", "must be > 0");
    } else if (kind == "channels") {
      pc.kind = PermeabilityConfig::Kind::Channels;
      pc.matrix_md = p.value("K_matrix_md", 1.0);
      pc.channel_md = p.value("K_channel_md", 200.0);
      if (p.contains("channels")) {
        for (std::size_t i = 0; i < p["channels"].size(); ++i)
          pc.channels.push_back(parse_box(p["channels"][i],
                                          "permeability.channels[" + std::to_string(i) + "]", v));
      } else {
        pc.channels.push_back({0.0, 65.0, 80.0, 70.0});
        pc.channels.push_back({0.0, 35.0, 80.0, 40.0});
      }
      if (!(pc.matrix_md > 0.0) || !(pc.channel_md > 0.0))
        v.fail("permeability", "channel and matrix values must be > 0");
    } else if (kind == "noise") {
      pc.kind = PermeabilityConfig::Kind::Noise;
      pc.noise_min_md = require_number(p, "permeability", "K_min_md", v);
      pc.noise_max_md = require_number(p, "permeability", "K_max_md", v);
      pc.noise_scale = p.value("scale", 4.0);
      pc.noise_octaves = p.value("octaves", 3);
      if (!(pc.noise_min_md > 0.0) || !(pc.noise_max_md >= pc.noise_min_md))
        v.fail("permeability", "need 0 < K_min_md <= K_max_md");
      if (pc.noise_octaves < 1) v.fail("permeability.octaves", "must be >= 1");
    } else if (kind == "raster") {
      pc.kind = PermeabilityConfig::Kind::Raster;
      if (!p.contains("path") || !p["path"].is_string())
        v.fail("permeability.path", "required string");
      else
        pc.raster_path = p["path"].get<std::string>();
      pc.raster_in_md = p.value("units_md", true);
    } else {
      v.fail("permeability.type", "must be uniform | channels | noise | raster");
    }
  }

  if (!doc.contains("elasticity") || !doc["elasticity"].is_object()) {
    v.fail("elasticity", "required table missing");
  } else {
    const json& e = doc["elasticity"];
    ElasticParams& ep = cfg.elasticity;
    ep.lame_lambda = require_number(e, "elasticity", "lame_lambda", v);
    ep.lame_mu = require_number(e, "elasticity", "lame_mu", v);
    ep.biot_alpha = require_number(e, "elasticity", "biot_alpha", v);
    ep.biot_modulus = require_number(e, "elasticity", "biot_modulus", v);
    ep.dg_penalty = e.value("dg_penalty", 10.0 * (ep.lame_lambda + 2.0 * ep.lame_mu));
    if (!(ep.lame_lambda > 0.0)) v.fail("elasticity.lame_lambda", "must be > 0");
    if (!(ep.lame_mu > 0.0)) v.fail("elasticity.lame_mu", "must be > 0");
    if (!(ep.biot_alpha > 0.0 && ep.biot_alpha <= 1.0))
      v.fail("elasticity.biot_alpha", "must lie in (0,1]");
    if (!(ep.biot_modulus > 0.0)) v.fail("elasticity.biot_modulus", "must be > 0");
    if (!(ep.dg_penalty > 0.0)) v.fail("elasticity.dg_penalty", "must be > 0");
  }

  cfg.transport_penalty = require_number(doc, "", "transport_penalty", v);
  if (!(cfg.transport_penalty > 0.0)) v.fail("transport_penalty", "must be > 0");

  if (doc.contains("controls")) {
    const json& c = doc["controls"];
    TimeStepControls& tc = cfg.controls;
    tc.delta_comp_lower = c.value("delta_i1", tc.delta_comp_lower);
    tc.delta_comp_upper = c.value("delta_i2", tc.delta_comp_upper);
    tc.delta_total_lower = c.value("delta_1", tc.delta_total_lower);
    tc.delta_total_upper = c.value("delta_2", tc.delta_total_upper);
    tc.epsilon = c.value("epsilon", tc.epsilon);
    tc.tau_max = c.value("tau_max", tc.tau_max);
    tc.tol_x_rel = c.value("tol_x_rel", tc.tol_x_rel);
    tc.max_iterations = c.value("max_iterations", tc.max_iterations);
    tc.theta_safety = c.value("theta_safety", tc.theta_safety);
    tc.theta_floor = c.value("theta_floor", tc.theta_floor);
    tc.retry_with_halving = c.value("retry_with_halving", tc.retry_with_halving);
    tc.consistent_velocity_mass =
        c.value("consistent_velocity_mass", tc.consistent_velocity_mass);
    for (const auto& [key, val] :
         std::initializer_list<std::pair<const char*, double>>{
             {"delta_i1", tc.delta_comp_lower},
             {"delta_i2", tc.delta_comp_upper},
             {"delta_1", tc.delta_total_lower},
             {"delta_2", tc.delta_total_upper}}) {
      if (!(val > 0.0 && val < 1.0)) v.fail(std::string("controls.") + key, "must lie in (0,1)");
    }
    if (!(tc.epsilon > 0.0)) v.fail("controls.epsilon", "must be > 0");
    if (!(tc.tau_max > 0.0)) v.fail("controls.tau_max", "must be > 0");
    if (!(tc.tol_x_rel > 0.0)) v.fail("controls.tol_x_rel", "must be > 0");
    if (tc.max_iterations < 1) v.fail("controls.max_iterations", "must be >= 1");
    if (!(tc.theta_safety >= 1.0)) v.fail("controls.theta_safety", "must be >= 1");
  }

  if (doc.contains("boundary")) {
    const json& b = doc["boundary"];
    const std::string mode = b.value("mode", "closed");
    if (mode == "closed") {
      cfg.boundary.closed = true;
    } else if (mode == "dirichlet") {
      cfg.boundary.closed = false;
      if (!b.contains("edges") || !b["edges"].is_object() || b["edges"].empty()) {
        v.fail("boundary.edges", "dirichlet mode requires at least one edge datum");
      } else {
        static constexpr const char* names[4] = {"left", "right", "bottom", "top"};
        for (int e = 0; e < 4; ++e) {
          if (!b["edges"].contains(names[e])) continue;
          EdgeDirichlet d;
          d.c = parse_density_vector(b["edges"][names[e]]["c"],
                                     std::string("boundary.edges.") + names[e] + ".c", m, v);
          cfg.boundary.edges[e] = d;
        }
      }
    } else {
      v.fail("boundary.mode", "must be closed | dirichlet");
    }
  }

  if (doc.contains("time")) {
    const json& t = doc["time"];
    cfg.t_end = t.value("t_end", cfg.t_end);
    cfg.max_steps = t.value("max_steps", 0);
    if (cfg.max_steps < 0) v.fail("time.max_steps", "must be >= 0");
  }
  if (doc.contains("output")) {
    const json& o = doc["output"];
    cfg.output_cadence = o.value("cadence", 1);
    cfg.vtk_every = o.value("vtk_every", 0);
    if (cfg.output_cadence < 1) v.fail("output.cadence", "must be >= 1");
    if (cfg.vtk_every < 0) v.fail("output.vtk_every", "must be >= 0");
  }
  cfg.seed = doc.value("seed", 0ULL);

  // Cross-field checks that need a well-formed mixture.
  if (v.ok()) {
    try {
      MixtureSpec mix = cfg.make_mixture();
      const auto check_state = [&](const std::vector<double>& c, const std::string& path) {
        try {
          check_admissible(mix, c);
        } catch (const std::exception& e) {
          v.fail(path, e.what());
        }
      };
      check_state(cfg.background_c, "initial.background");
      for (std::size_t i = 0; i < cfg.initial_regions.size(); ++i)
        check_state(cfg.initial_regions[i].c, "initial.regions[" + std::to_string(i) + "].c");
      for (int e = 0; e < 4; ++e)
        if (cfg.boundary.edges[e])
          check_state(cfg.boundary.edges[e]->c, "boundary.edges");
    } catch (const std::exception& e) {
      v.fail("components", e.what());
    }
  }

  if (!v.ok()) throw ConfigError(v.summary(origin));
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

}  // namespace poromix
