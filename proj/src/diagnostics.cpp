#include "savmhd/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "savmhd/errors.hpp"
#include "savmhd/quadrature.hpp"

namespace savmhd {

const std::array<const char*, ErrorRecord::kColumns>& ErrorRecord::names() {
  static const std::array<const char*, kColumns> n = {"u_l2", "u_h1", "p_l2", "J_div", "phi_l2", "q_abs"};
  return n;
}

double ErrorRecord::error(int column) const {
  switch (column) {
    case U_L2: return err_u_l2;
    case U_H1: return err_u_h1;
    case P_L2: return err_p_l2;
    case J_DIV: return err_J_div;
    case PHI_L2: return err_phi_l2;
    case Q_ABS: return err_q_abs;
  }
  throw std::out_of_range("ErrorRecord::error: bad column");
}

namespace {

double domain_mean(const Discretization& disc, const ScalarField& f, double t) {
  const QuadratureRule& rule = triangle_rule_degree6();
  double total = 0.0;
  double area = 0.0;
  for (int e = 0; e < disc.num_triangles(); ++e) {
    const double a = disc.geometry(e).area;
    area += a;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Point x = disc.map_to_physical(e, rule.points[q]);
      total += 2.0 * a * rule.weights[q] * f(x.x, x.y, t);
    }
  }
  return total / area;
}

}  // namespace

ErrorRecord compute_errors(const Discretization& disc, const SavState& state, const ProblemDefinition& problem,
                           double t_final, double tau) {
  if (!problem.exact) {
    throw UnsupportedProblemError("compute_errors: problem '" + problem.name + "' has no exact solution");
  }
  const ExactSolution& ex = *problem.exact;
  const double t = state.t;
  const double p_mean = domain_mean(disc, ex.p, t);
  const double phi_mean = domain_mean(disc, ex.phi, t);
  const QuadratureRule& rule = triangle_rule_degree6();

  double eu = 0.0, egu = 0.0, ep = 0.0, ej = 0.0, edivj = 0.0, ephi = 0.0;
  for (int e = 0; e < disc.num_triangles(); ++e) {
    const double a = disc.geometry(e).area;
    const double div_h = current_divergence(disc, state.j.coeffs, e);
    const double phi_h = state.phi.coeffs[e];
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.points[q];
      const Point x = disc.map_to_physical(e, l);
      const double w = 2.0 * a * rule.weights[q];
      const VelocityValue uh = evaluate_velocity(disc, state.u.coeffs, e, l);
      const Vec2 u = ex.u(x.x, x.y, t);
      const Mat2 gu = ex.grad_u(x.x, x.y, t);
      for (int c = 0; c < 2; ++c) eu += w * std::pow(uh.value[c] - u[c], 2);
      for (int k = 0; k < 4; ++k) egu += w * std::pow(uh.grad[k] - gu[k], 2);
      ep += w * std::pow(evaluate_pressure(disc, state.p.coeffs, e, l) - (ex.p(x.x, x.y, t) - p_mean), 2);
      const Vec2 jh = evaluate_current(disc, state.j.coeffs, e, l);
      const Vec2 j = ex.j(x.x, x.y, t);
      for (int c = 0; c < 2; ++c) ej += w * std::pow(jh[c] - j[c], 2);
      edivj += w * std::pow(div_h - ex.div_j(x.x, x.y, t), 2);
      ephi += w * std::pow(phi_h - (ex.phi(x.x, x.y, t) - phi_mean), 2);
    }
  }
  ErrorRecord r;
  r.tau = tau;
  r.err_u_l2 = std::sqrt(eu);
  r.err_u_h1 = std::sqrt(egu);
  r.err_p_l2 = std::sqrt(ep);
  r.err_J_div = std::sqrt(ej + edivj);
  r.err_phi_l2 = std::sqrt(ephi);
  r.err_q_abs = std::abs(state.q - std::exp(-t / t_final));
  return r;
}

std::vector<ErrorRecord> convergence_table(std::vector<ErrorRecord> rows) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (int c = 0; c < ErrorRecord::kColumns; ++c) {
      rows[k].rates[c].reset();
      if (k == 0) continue;
      const double e0 = rows[k - 1].error(c);
      const double e1 = rows[k].error(c);
      const double ratio = rows[k - 1].tau / rows[k].tau;
      if (e0 > 0.0 && e1 > 0.0 && ratio > 0.0 && ratio != 1.0) rows[k].rates[c] = std::log(e0 / e1) / std::log(ratio);
    }
  }
  return rows;
}

EnergyTrace energy_trace(const Trajectory& trajectory) {
  EnergyTrace trace;
  trace.reserve(trajectory.reports.size() + 1);
  trace.push_back({trajectory.initial.t, trajectory.initial_energy});
  for (const StepReport& r : trajectory.reports) trace.push_back({r.t, r.energy});
  return trace;
}

std::optional<std::size_t> first_energy_increase(const EnergyTrace& trace, double tol) {
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k].energy > trace[k - 1].energy + tol) return k;
  }
  return std::nullopt;
}

Vec2 sample_velocity(const Discretization& disc, const FieldVector& u, double x, double y) {
  const auto [t, bary] = disc.locate(x, y);
  return evaluate_velocity(disc, u.coeffs, t, bary).value;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

void write_error_table_csv(const std::string& path, const std::vector<ErrorRecord>& rows) {
  std::ofstream out = open_output(path);
  out << "tau";
  for (const char* n : ErrorRecord::names()) out << ",err_" << n << ",rate_" << n;
  out << '\n';
  for (const ErrorRecord& r : rows) {
    out << format_number(r.tau);
    for (int c = 0; c < ErrorRecord::kColumns; ++c) {
      out << ',' << format_number(r.error(c)) << ',';
      if (r.rates[c]) out << format_number(*r.rates[c]);
    }
    out << '\n';
  }
  finish(out, path);
}

void write_energy_csv(const std::string& path, const EnergyTrace& trace) {
  std::ofstream out = open_output(path);
  out << "t,E\n";
  for (const EnergyPoint& p : trace) out << format_number(p.t) << ',' << format_number(p.energy) << '\n';
  finish(out, path);
}

void write_energy_sweep_csv(const std::string& path, const std::vector<TaggedTrace>& traces) {
  std::ofstream out = open_output(path);
  out << "tau,t,E\n";
  for (const TaggedTrace& tt : traces) {
    for (const EnergyPoint& p : tt.trace) {
      out << format_number(tt.tau) << ',' << format_number(p.t) << ',' << format_number(p.energy) << '\n';
    }
  }
  finish(out, path);
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_output(path);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw std::invalid_argument("write_table_csv: row width differs from header");
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
    out << '\n';
  }
  finish(out, path);
}

void write_energy_plot_script(const std::string& path, const std::string& csv_name, const std::string& title,
                              const std::vector<double>& taus) {
  std::ofstream out = open_output(path);
  out << "set datafile separator ','\n"
      << "set title '" << title << "'\n"
      << "set xlabel 't'\n"
      << "set ylabel 'E'\n"
      << "set key top right\n"
      << "set terminal pngcairo size 800,600\n"
      << "set output '" << csv_name.substr(0, csv_name.rfind('.')) << ".png'\n"
      << "plot";
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const std::string tau = format_number(taus[k]);
    out << (k ? ", \\\n    " : " ") << "'" << csv_name << "' using ($1 == " << tau << " ? $2 : 1/0):3 skip 1"
        << " with lines title 'tau = " << taus[k] << "'";
  }
  out << '\n';
  finish(out, path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable table;
  std::string line;
  if (std::getline(in, line)) table.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty()) table.rows.push_back(split(line));
  }
  return table;
}

}  // namespace savmhd
