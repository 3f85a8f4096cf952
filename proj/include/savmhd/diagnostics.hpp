#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "savmhd/fem.hpp"
#include "savmhd/problems.hpp"
#include "savmhd/sav_stepper.hpp"

namespace savmhd {

struct ErrorRecord {
  enum Column { U_L2, U_H1, P_L2, J_DIV, PHI_L2, Q_ABS };
  static constexpr int kColumns = 6;
  /// CSV names of the error columns, in Column order.
  static const std::array<const char*, kColumns>& names();

  double tau = 0.0;
  double err_u_l2 = 0.0;
  double err_u_h1 = 0.0;
  double err_p_l2 = 0.0;
  double err_J_div = 0.0;
  double err_phi_l2 = 0.0;
  double err_q_abs = 0.0;
  /// Observed order against the previous row; empty on the first row.
  std::array<std::optional<double>, kColumns> rates;

  double error(int column) const;
};

/// Errors of a state against the exact solution at time state.t. Pressure and
/// potential are compared with the zero-mean part of the exact fields; the
/// current error is in the H(div) norm; q is compared with exp(-t / t_final).
/// Throws UnsupportedProblemError when the problem has no exact solution.
ErrorRecord compute_errors(const Discretization& disc, const SavState& state, const ProblemDefinition& problem,
                           double t_final, double tau = 0.0);

/// Fills the rate columns: log(e_prev / e) / log(tau_prev / tau).
std::vector<ErrorRecord> convergence_table(std::vector<ErrorRecord> rows);

struct EnergyPoint {
  double t;
  double energy;
};
using EnergyTrace = std::vector<EnergyPoint>;

/// One entry per level, the initial one included.
EnergyTrace energy_trace(const Trajectory& trajectory);

/// First index k with E[k] > E[k-1] + tol, if any.
std::optional<std::size_t> first_energy_increase(const EnergyTrace& trace, double tol = 1e-12);

/// Velocity of the discrete field at a physical point.
Vec2 sample_velocity(const Discretization& disc, const FieldVector& u, double x, double y);

/// "%.11e": 12 significant digits.
std::string format_number(double v);

/// Header tau, then err_X and rate_X per column; empty rate cells on the
/// first row. Throws std::runtime_error naming the path on I/O failure.
void write_error_table_csv(const std::string& path, const std::vector<ErrorRecord>& rows);
/// Header t,E.
void write_energy_csv(const std::string& path, const EnergyTrace& trace);

struct TaggedTrace {
  double tau;
  EnergyTrace trace;
};
/// Long format with header tau,t,E, one block per time step size.
void write_energy_sweep_csv(const std::string& path, const std::vector<TaggedTrace>& traces);

/// Plain numeric table with the given header.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

/// Gnuplot script plotting E(t) per tau from a long-format CSV referenced by
/// its file name relative to the script.
void write_energy_plot_script(const std::string& path, const std::string& csv_name, const std::string& title,
                              const std::vector<double>& taus);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::string& path);

}  // namespace savmhd
