#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace savmhd::app {

enum ExitCode : int { kSuccess = 0, kOperationalFailure = 1, kInvariantViolation = 2 };

/// Everything a command needs. Unset optionals take the experiment's
/// defaults; an empty `orders` means the command's default order set.
struct RunSpec {
  std::string subcommand;
  std::vector<int> orders;
  std::optional<int> mesh_n;
  std::vector<double> taus;
  std::optional<double> re;
  std::optional<double> kappa;
  std::optional<double> t_final;
  std::string out_dir = ".";
  std::string inject = "none";
};

/// Throws std::invalid_argument when orders, mesh size, Re, kappa or the
/// time step list are out of range, or a step does not divide the final time.
void validate(const RunSpec& spec, double t_final);

/// Manufactured problem on a fixed mesh (default h = 1/6) for each tau;
/// writes accuracy_order{1,2}.csv. A failing run keeps the rows before it.
int cmd_accuracy(const RunSpec& spec, std::ostream& log);
/// Vortex decay on mesh_n = 64 by default, Re = kappa in {20, 100}, both
/// orders; writes energy_{order}_{Re}.csv and a gnuplot script per pair.
/// Returns kInvariantViolation when any trace increases.
int cmd_stability(const RunSpec& spec, std::ostream& log);
/// Driven cavity to T; writes velocity snapshots at t in {0.1, 1, 2}, the
/// final centerline profiles and a per-step history.
int cmd_cavity2d(const RunSpec& spec, std::ostream& log);
/// Oracle and identity suites; kInvariantViolation if any suite fails.
int cmd_selftest(const RunSpec& spec, std::ostream& log);

int dispatch(const RunSpec& spec, std::ostream& log);

/// Parses flags and runs the subcommand. Usage errors and exceptions map to
/// kOperationalFailure; --help returns kSuccess.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace savmhd::app
