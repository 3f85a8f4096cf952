#include "savmhd/app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <stdexcept>

#include "savmhd/diagnostics.hpp"
#include "savmhd/errors.hpp"
#include "savmhd/mesh.hpp"
#include "savmhd/problems.hpp"
#include "savmhd/sav_stepper.hpp"
#include "savmhd/verification.hpp"

namespace savmhd::app {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

/// Exit code for a failed trajectory, with the reason logged.
int failure_code(const Trajectory& tr, std::ostream& log) {
  try {
    std::rethrow_exception(tr.failure);
  } catch (const SolvabilityError& e) {
    log << "invariant violation: " << e.what() << '\n';
    return kInvariantViolation;
  } catch (const std::exception& e) {
    log << "run failed: " << e.what() << '\n';
    return kOperationalFailure;
  }
}

std::vector<int> orders_or(const RunSpec& spec, std::vector<int> fallback) {
  return spec.orders.empty() ? fallback : spec.orders;
}

std::vector<double> taus_or(const RunSpec& spec, std::vector<double> fallback) {
  return spec.taus.empty() ? fallback : spec.taus;
}

}  // namespace

void validate(const RunSpec& spec, double t_final) {
  for (int o : spec.orders) {
    if (o != 1 && o != 2) throw std::invalid_argument("--order must be 1 or 2, got " + std::to_string(o));
  }
  if (spec.mesh_n && *spec.mesh_n < 1) throw std::invalid_argument("--mesh-n must be >= 1");
  if (spec.re && !(*spec.re > 0.0)) throw std::invalid_argument("--re must be positive");
  if (spec.kappa && !(*spec.kappa > 0.0)) throw std::invalid_argument("--kappa must be positive");
  if (!(t_final > 0.0)) throw std::invalid_argument("--t-final must be positive");
  for (double tau : spec.taus) {
    SchemeConfig c;
    c.tau = tau;
    c.t_final = t_final;
    c.validate();
  }
}

int cmd_accuracy(const RunSpec& spec, std::ostream& log) {
  ProblemDefinition problem = accuracy_problem_2d(spec.re.value_or(1.0), spec.kappa.value_or(1.0));
  if (spec.t_final) problem.t_final = *spec.t_final;
  validate(spec, problem.t_final);
  const int mesh_n = spec.mesh_n.value_or(6);
  const std::vector<double> taus = taus_or(spec, {0.2, 0.1, 0.05, 0.025, 0.0125});
  ensure_dir(spec.out_dir);
  const Discretization disc(build_unit_square_mesh(mesh_n));

  int code = kSuccess;
  for (int order : orders_or(spec, {1})) {
    const std::string path = join_path(spec.out_dir, "accuracy_order" + std::to_string(order) + ".csv");
    log << "accuracy: order " << order << ", mesh_n " << mesh_n << ", T " << problem.t_final << '\n';
    std::vector<ErrorRecord> rows;
    for (double tau : taus) {
      const SchemeConfig cfg = SchemeConfig::for_problem(problem, order, tau);
      const Trajectory tr = run(disc, problem, cfg);
      if (!tr.completed()) {
        code = std::max(code, failure_code(tr, log));
        break;
      }
      rows.push_back(compute_errors(disc, tr.final_state, problem, cfg.t_final, tau));
      rows = convergence_table(std::move(rows));
      write_error_table_csv(path, rows);
      const ErrorRecord& r = rows.back();
      log << "  tau " << fmt("%-8g", tau);
      for (int c = 0; c < ErrorRecord::kColumns; ++c) {
        log << "  " << ErrorRecord::names()[c] << ' ' << fmt("%.3e", r.error(c));
        if (r.rates[c]) log << " (" << fmt("%.2f", *r.rates[c]) << ')';
      }
      log << '\n';
    }
    if (rows.empty()) write_error_table_csv(path, rows);
    log << "  wrote " << path << '\n';
    if (code != kSuccess) break;
  }
  return code;
}

int cmd_stability(const RunSpec& spec, std::ostream& log) {
  const double t_final = spec.t_final.value_or(3.0);
  validate(spec, t_final);
  const int mesh_n = spec.mesh_n.value_or(64);
  const std::vector<double> res = spec.re ? std::vector<double>{*spec.re} : std::vector<double>{20.0, 100.0};
  const std::vector<double> taus = taus_or(spec, {0.5, 0.2, 0.1, 0.01});
  ensure_dir(spec.out_dir);
  const Discretization disc(build_unit_square_mesh(mesh_n));

  int code = kSuccess;
  for (int order : orders_or(spec, {1, 2})) {
    for (double re : res) {
      ProblemDefinition problem = stability_problem_2d(re, spec.kappa.value_or(re));
      problem.t_final = t_final;
      const std::string stem = "energy_" + std::to_string(order) + "_" + fmt("%g", re);
      std::vector<TaggedTrace> traces;
      for (double tau : taus) {
        const Trajectory tr = run(disc, problem, SchemeConfig::for_problem(problem, order, tau));
        const EnergyTrace trace = energy_trace(tr);
        traces.push_back({tau, trace});
        double max_rise = -std::numeric_limits<double>::infinity();
        double min_den = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < trace.size(); ++k) max_rise = std::max(max_rise, trace[k].energy - trace[k - 1].energy);
        for (const StepReport& r : tr.reports) min_den = std::min(min_den, r.denominator);
        log << "stability: order " << order << " Re " << re << " tau " << fmt("%-6g", tau) << " steps "
            << tr.reports.size() << "  E " << fmt("%.6e", trace.front().energy) << " -> "
            << fmt("%.6e", trace.back().energy) << "  max dE " << fmt("%.2e", max_rise) << "  min denominator "
            << fmt("%.3e", min_den) << '\n';
        if (!tr.completed()) code = std::max(code, failure_code(tr, log));
        if (const auto k = first_energy_increase(trace)) {
          log << "invariant violation: energy increases at t = " << trace[*k].t << '\n';
          code = kInvariantViolation;
        }
      }
      const std::string csv = stem + ".csv";
      write_energy_sweep_csv(join_path(spec.out_dir, csv), traces);
      write_energy_plot_script(join_path(spec.out_dir, stem + ".gp"), csv,
                               "order " + std::to_string(order) + ", Re = kappa = " + fmt("%g", re), taus);
      log << "  wrote " << join_path(spec.out_dir, csv) << '\n';
    }
  }
  return code;
}

int cmd_cavity2d(const RunSpec& spec, std::ostream& log) {
  const int mesh_n = spec.mesh_n.value_or(32);
  ProblemDefinition problem = cavity_problem_2d(mesh_n);
  if (spec.re) problem.re = *spec.re;
  if (spec.kappa) problem.kappa = *spec.kappa;
  if (spec.t_final) problem.t_final = *spec.t_final;
  validate(spec, problem.t_final);
  if (spec.taus.size() > 1) throw std::invalid_argument("cavity2d takes a single --tau");
  if (spec.orders.size() > 1) throw std::invalid_argument("cavity2d takes a single --order");
  const double tau = spec.taus.empty() ? 0.01 : spec.taus.front();
  const int order = spec.orders.empty() ? 1 : spec.orders.front();
  ensure_dir(spec.out_dir);
  const Discretization disc(build_unit_square_mesh(mesh_n));
  const SparseMatrix mass = assemble_velocity_mass(disc);
  const SchemeConfig cfg = SchemeConfig::for_problem(problem, order, tau);

  const Mesh& mesh = disc.mesh();
  auto write_snapshot = [&](const SavState& s, double t_sample) {
    std::vector<std::vector<double>> rows;
    const DofLayout& layout = disc.layout();
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      rows.push_back({mesh.vertices[v].x, mesh.vertices[v].y, s.u.coeffs[layout.velocity_vertex_dof(0, v)],
                      s.u.coeffs[layout.velocity_vertex_dof(1, v)]});
    }
    const std::string path = join_path(spec.out_dir, "cavity_velocity_t" + fmt("%g", t_sample) + ".csv");
    write_table_csv(path, {"x", "y", "u1", "u2"}, rows);
    log << "  wrote " << path << '\n';
  };

  const std::vector<double> sample_times{0.1, 1.0, 2.0};
  std::vector<std::vector<double>> history;
  RunOptions opts;
  opts.on_step = [&](const SavState& s, const StepReport& r) {
    std::vector<double> du(s.u.coeffs.size());
    for (std::size_t i = 0; i < du.size(); ++i) du[i] = s.u.coeffs[i] - s.prev_u.coeffs[i];
    const double steady = std::sqrt(std::max(0.0, quadratic_form(mass, du))) / tau;
    history.push_back({r.t, r.energy, steady, r.denominator});
    for (double ts : sample_times) {
      if (std::abs(r.t - ts) < 0.5 * tau) write_snapshot(s, ts);
    }
  };
  log << "cavity2d: order " << order << ", mesh_n " << mesh_n << ", tau " << tau << ", T " << problem.t_final
      << ", Re " << problem.re << ", kappa " << problem.kappa << '\n';
  const Trajectory tr = run(disc, problem, cfg, opts);

  write_table_csv(join_path(spec.out_dir, "cavity_history.csv"), {"t", "E", "steady_residual", "denominator"},
                  history);
  std::vector<std::vector<double>> centerline;
  for (int k = 0; k <= 100; ++k) {
    const double s = k / 100.0;
    const Vec2 vertical = sample_velocity(disc, tr.final_state.u, 0.5, s);
    const Vec2 horizontal = sample_velocity(disc, tr.final_state.u, s, 0.5);
    centerline.push_back({s, vertical[0], horizontal[1]});
  }
  write_table_csv(join_path(spec.out_dir, "cavity_centerline.csv"), {"s", "u1_at_x_half", "u2_at_y_half"},
                  centerline);
  if (!history.empty()) {
    double min_den = std::numeric_limits<double>::infinity();
    for (const auto& h : history) min_den = std::min(min_den, h[3]);
    log << "  steps " << history.size() << ", steady residual " << fmt("%.3e", history.front()[2]) << " -> "
        << fmt("%.3e", history.back()[2]) << ", min denominator " << fmt("%.3e", min_den) << '\n';
  }
  log << "  wrote " << join_path(spec.out_dir, "cavity_history.csv") << " and cavity_centerline.csv\n";
  return tr.completed() ? kSuccess : failure_code(tr, log);
}

int cmd_selftest(const RunSpec& spec, std::ostream& log) {
  const verify::Injection injection = verify::parse_injection(spec.inject);
  log << "selftest (injection: " << verify::to_string(injection) << ")\n";
  bool ok = true;
  for (const verify::SuiteResult& r : verify::run_selftest(injection)) {
    ok = ok && r.passed;
    std::string name = r.name;
    name.resize(std::max<std::size_t>(name.size(), 18), ' ');
    log << "  " << name << (r.passed ? "PASS" : "FAIL") << "  worst " << fmt("%.3e", r.worst) << "  tol " << fmt("%.0e", r.tolerance);
    if (!r.detail.empty()) log << "  (" << r.detail << ')';
    log << '\n';
  }
  return ok ? kSuccess : kInvariantViolation;
}

int dispatch(const RunSpec& spec, std::ostream& log) {
  if (spec.subcommand == "accuracy") return cmd_accuracy(spec, log);
  if (spec.subcommand == "stability") return cmd_stability(spec, log);
  if (spec.subcommand == "cavity2d") return cmd_cavity2d(spec, log);
  if (spec.subcommand == "selftest") return cmd_selftest(spec, log);
  throw std::invalid_argument("unknown subcommand '" + spec.subcommand + "'");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App cli{"SAV finite-element solver for 2D inductionless MHD"};
  cli.require_subcommand(1, 1);
  RunSpec spec;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--order", spec.orders, "scheme order, 1 or 2 (repeatable)");
    sub->add_option("--mesh-n", spec.mesh_n, "cells per side of the unit square");
    sub->add_option("--tau", spec.taus, "time step (repeatable)");
    sub->add_option("--re", spec.re, "Reynolds number");
    sub->add_option("--kappa", spec.kappa, "coupling number");
    sub->add_option("--t-final", spec.t_final, "final time");
    sub->add_option("--out", spec.out_dir, "output directory")->capture_default_str();
  };
  add_common(cli.add_subcommand("accuracy", "manufactured-solution convergence table"));
  add_common(cli.add_subcommand("stability", "energy decay of the vortex problem"));
  add_common(cli.add_subcommand("cavity2d", "driven cavity run with snapshots"));
  CLI::App* self = cli.add_subcommand("selftest", "oracle and identity suites on small meshes");
  self->add_option("--inject", spec.inject, "none, flip-lorentz-sign or naive-bdf2-coefficient")
      ->capture_default_str();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << cli.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << cli.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kOperationalFailure;
  }
  spec.subcommand = cli.get_subcommands().front()->get_name();
  try {
    return dispatch(spec, out);
  } catch (const SolvabilityError& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kInvariantViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kOperationalFailure;
  }
}

}  // namespace savmhd::app
