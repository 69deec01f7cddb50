#include "poromix/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "poromix/errors.hpp"

namespace poromix {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_scalar_array(std::ostream& out, const std::string& name, const CellField& field) {
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : field) out << format_double(v) << "\n";
}

}  // namespace

void write_vtk(const SimplicialMesh& mesh, const MixtureSpec& mix, const SimulationState& state,
               const CellField& permeability, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open VTK output file: " + path);
  out << "# vtk DataFile Version 3.0\n";
  out << "poromix snapshot step " << state.step << " time " << format_double(state.time) << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Vec2& v : mesh.vertices)
    out << format_double(v.x) << " " << format_double(v.y) << " 0\n";
  out << "CELLS " << mesh.n_cells() << " " << 4 * mesh.n_cells() << "\n";
  for (const auto& c : mesh.cells) out << "3 " << c[0] << " " << c[1] << " " << c[2] << "\n";
  out << "CELL_TYPES " << mesh.n_cells() << "\n";
  for (int k = 0; k < mesh.n_cells(); ++k) out << "5\n";

  out << "CELL_DATA " << mesh.n_cells() << "\n";
  for (int i = 0; i < mix.size(); ++i)
    write_scalar_array(out, "c_" + mix.component(i).name, state.c[i]);
  write_scalar_array(out, "c_total", state.total_density());
  write_scalar_array(out, "pressure", state.pressure);
  write_scalar_array(out, "porosity", state.porosity);
  for (int i = 0; i < mix.size(); ++i)
    write_scalar_array(out, "mu_" + mix.component(i).name, state.mu[i]);
  write_scalar_array(out, "permeability", permeability);

  // Vertex-averaged displacement, for visualization only.
  std::vector<Vec2> w(mesh.n_vertices(), Vec2{0.0, 0.0});
  std::vector<int> count(mesh.n_vertices(), 0);
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.cells[c][k];
      w[v].x += state.displacement[6 * c + 2 * k];
      w[v].y += state.displacement[6 * c + 2 * k + 1];
      ++count[v];
    }
  out << "POINT_DATA " << mesh.n_vertices() << "\n";
  out << "VECTORS displacement double\n";
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const double inv = count[v] > 0 ? 1.0 / count[v] : 0.0;
    out << format_double(w[v].x * inv) << " " << format_double(w[v].y * inv) << " 0\n";
  }
  if (!out) throw ConfigError("failed while writing VTK file: " + path);
}

std::map<std::string, std::vector<double>> read_vtk_cell_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open VTK file: " + path);
  std::map<std::string, std::vector<double>> out;
  std::string line;
  long n_cells = -1;
  bool in_cell_data = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "CELL_DATA") {
      ls >> n_cells;
      in_cell_data = true;
    } else if (word == "POINT_DATA") {
      in_cell_data = false;
    } else if (word == "SCALARS" && in_cell_data) {
      std::string name;
      ls >> name;
      std::getline(in, line);  // LOOKUP_TABLE
      std::vector<double> values(n_cells);
      for (long k = 0; k < n_cells; ++k) in >> values[k];
      out[name] = std::move(values);
    }
  }
  return out;
}

void write_timeseries(const std::vector<DiagnosticsRecord>& records,
                      const std::vector<std::string>& component_names, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open CSV output file: " + path);
  out << "n,t,tau,energy";
  for (const std::string& n : component_names) out << ",mass_" << n;
  for (const std::string& n : component_names) out << ",min_c_" << n << ",max_c_" << n;
  out << ",min_betac,max_betac,min_phi,max_phi,iters,X1,X2,max_residual\n";
  for (const DiagnosticsRecord& r : records) {
    out << r.step << "," << format_double(r.time) << "," << format_double(r.tau) << ","
        << format_double(r.energy);
    for (double m : r.component_mass) out << "," << format_double(m);
    for (std::size_t i = 0; i < r.c_min.size(); ++i)
      out << "," << format_double(r.c_min[i]) << "," << format_double(r.c_max[i]);
    out << "," << format_double(r.beta_c_min) << "," << format_double(r.beta_c_max) << ","
        << format_double(r.phi_min) << "," << format_double(r.phi_max) << "," << r.iterations
        << "," << format_double(r.x1) << "," << format_double(r.x2) << ","
        << format_double(r.max_residual) << "\n";
  }
  if (!out) throw ConfigError("failed while writing CSV file: " + path);
}

DiffResult diff_timeseries(const std::string& path_a, const std::string& path_b, double rtol) {
  std::ifstream a(path_a), b(path_b);
  if (!a) return {false, "cannot open " + path_a};
  if (!b) return {false, "cannot open " + path_b};
  std::string la, lb;
  if (!std::getline(a, la) || !std::getline(b, lb)) return {false, "missing header"};
  if (la != lb) return {false, "headers differ"};
  long row = 0;
  while (true) {
    const bool ga = static_cast<bool>(std::getline(a, la));
    const bool gb = static_cast<bool>(std::getline(b, lb));
    if (ga != gb) return {false, "row counts differ at data row " + std::to_string(row)};
    if (!ga) break;
    std::istringstream sa(la), sb(lb);
    std::string fa, fb;
    long col = 0;
    while (true) {
      const bool ha = static_cast<bool>(std::getline(sa, fa, ','));
      const bool hb = static_cast<bool>(std::getline(sb, fb, ','));
      if (ha != hb)
        return {false, "column counts differ at row " + std::to_string(row)};
      if (!ha) break;
      const double va = std::stod(fa), vb = std::stod(fb);
      const double tol = rtol * std::max(std::abs(va), std::abs(vb));
      if (!(std::abs(va - vb) <= tol) && va != vb) {
        std::ostringstream msg;
        msg << "mismatch at row " << row << ", column " << col << ": " << fa << " vs " << fb;
        return {false, msg.str()};
      }
      ++col;
    }
    ++row;
  }
  return {true, ""};
}

}  // namespace poromix
