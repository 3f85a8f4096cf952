// Acceptance harness. Without --check it runs every experiment once and prints
// one PASS/FAIL line per criterion; with --results the verdicts are also
// written to a JSON file, and --check N replays a single verdict from it.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "savmhd/diagnostics.hpp"
#include "savmhd/problems.hpp"
#include "savmhd/sav_stepper.hpp"
#include "savmhd/verification.hpp"

using namespace savmhd;
using nlohmann::json;

namespace {

constexpr std::array<double, 5> kTaus{0.2, 0.1, 0.05, 0.025, 0.0125};

// Reference errors on h = 1/6, T = 1, columns in ErrorRecord order
// (u, grad u, p, J in H(div), phi, q), one row per tau above.
constexpr double kReferenceOrder1[5][6] = {
    {2.13e-04, 1.74e-03, 3.53e-02, 7.88e-06, 2.19e-02, 1.27e-02},
    {1.03e-04, 8.35e-04, 1.87e-02, 3.51e-06, 1.19e-02, 4.88e-03},
    {5.02e-05, 4.09e-04, 9.65e-03, 1.64e-06, 6.16e-03, 2.01e-03},
    {2.49e-05, 2.02e-04, 4.90e-03, 7.88e-07, 3.14e-03, 8.93e-04},
    {1.24e-05, 1.01e-04, 2.47e-03, 3.86e-07, 1.58e-03, 4.17e-04},
};
constexpr double kReferenceOrder2[5][6] = {
    {3.33e-05, 2.71e-04, 7.23e-03, 9.06e-07, 4.54e-03, 3.51e-03},
    {8.42e-06, 6.86e-05, 1.68e-03, 2.55e-07, 1.02e-03, 1.01e-03},
    {2.12e-06, 1.73e-05, 4.31e-04, 6.42e-08, 2.40e-04, 2.35e-04},
    {5.32e-07, 4.33e-06, 1.11e-04, 1.61e-08, 5.82e-05, 5.42e-05},
    {1.33e-07, 1.08e-06, 2.81e-05, 4.03e-09, 1.43e-05, 1.29e-05},
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Per-run maxima over all steps.
struct RunStats {
  std::string label;
  bool completed = true;
  std::string failure;
  int steps = 0;
  double seconds = 0.0;
  double min_denominator = std::numeric_limits<double>::infinity();
  double max_a2_defect = 0.0;
  double max_div_j = 0.0;
  double max_energy_increase = -std::numeric_limits<double>::infinity();
  double max_energy_bdf_increase = -std::numeric_limits<double>::infinity();
  double max_energy_identity = kNaN;  // first-order runs only
  double max_coupled = kNaN;          // manufactured runs only
  std::array<double, 6> max_coupled_parts{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
};

RunStats summarize(const std::string& label, const Trajectory& tr, int order, double seconds) {
  RunStats s;
  s.label = label;
  s.completed = tr.completed();
  s.failure = tr.failure_message;
  s.steps = static_cast<int>(tr.reports.size());
  s.seconds = seconds;
  double e = tr.initial_energy;
  double e_bdf = kNaN;
  if (order == 1) s.max_energy_identity = 0.0;
  for (const StepReport& r : tr.reports) {
    s.min_denominator = std::min(s.min_denominator, r.denominator);
    s.max_a2_defect = std::max(s.max_a2_defect, r.a2_identity_defect);
    s.max_div_j = std::max(s.max_div_j, r.max_div_j);
    s.max_energy_increase = std::max(s.max_energy_increase, r.energy - e);
    e = r.energy;
    if (r.second_order && !std::isnan(e_bdf))
      s.max_energy_bdf_increase = std::max(s.max_energy_bdf_increase, r.energy_bdf - e_bdf);
    e_bdf = r.energy_bdf;
    if (order == 1) s.max_energy_identity = std::max(s.max_energy_identity, std::abs(r.energy_identity_residual));
  }
  return s;
}

struct Verdict {
  int id = 0;
  bool passed = false;
  std::string title;
  std::string summary;
  std::vector<std::string> details;
};

json to_json(const Verdict& v) {
  return {{"id", v.id}, {"passed", v.passed}, {"title", v.title}, {"summary", v.summary}, {"details", v.details}};
}

Verdict from_json(const json& j) {
  Verdict v;
  v.id = j.at("id");
  v.passed = j.at("passed");
  v.title = j.at("title");
  v.summary = j.at("summary");
  v.details = j.at("details").get<std::vector<std::string>>();
  return v;
}

void print(const Verdict& v, std::ostream& out, bool with_details) {
  out << (v.passed ? "PASS" : "FAIL") << "  criterion " << v.id << "  " << v.title << ": " << v.summary << "\n";
  if (with_details)
    for (const auto& d : v.details) out << "      " << d << "\n";
}

// ---- manufactured problem -------------------------------------------------

struct AccuracySweep {
  int order = 1;
  std::vector<ErrorRecord> table;
  std::vector<RunStats> runs;
  double seconds = 0.0;  // time-stepping and error evaluation only
  bool completed = true;
};

AccuracySweep accuracy_sweep(int order) {
  AccuracySweep sw;
  sw.order = order;
  const Discretization disc(build_unit_square_mesh(6));
  const ProblemDefinition problem = accuracy_problem_2d();
  for (double tau : kTaus) {
    const SchemeConfig config = SchemeConfig::for_problem(problem, order, tau);
    const auto t0 = std::chrono::steady_clock::now();
    const Trajectory tr = run(disc, problem, config, {.keep_states = true});
    if (tr.completed()) sw.table.push_back(compute_errors(disc, tr.final_state, problem, problem.t_final, tau));
    const double elapsed = seconds_since(t0);
    sw.seconds += elapsed;
    RunStats st = summarize("accuracy order " + std::to_string(order) + " tau " + fmt("%g", tau), tr, order, elapsed);
    sw.completed = sw.completed && tr.completed();

    st.max_coupled = 0.0;
    st.max_coupled_parts.fill(0.0);
    for (std::size_t k = 0; k + 1 < tr.states.size(); ++k) {
      const verify::CoupledResidual r = verify::coupled_residual(disc, problem, config, tr.states[k], tr.states[k + 1]);
      const std::array<double, 6> parts{r.momentum, r.continuity, r.current, r.charge, r.scalar, r.boundary};
      for (int i = 0; i < 6; ++i) st.max_coupled_parts[i] = std::max(st.max_coupled_parts[i], parts[i]);
      st.max_coupled = std::max(st.max_coupled, r.max());
    }
    sw.runs.push_back(st);
  }
  sw.table = convergence_table(sw.table);
  return sw;
}

std::string table_line(const ErrorRecord& r) {
  std::string s = "tau " + fmt("%-7g", r.tau);
  for (int c = 0; c < ErrorRecord::kColumns; ++c) {
    s += "  " + std::string(ErrorRecord::names()[c]) + " " + fmt("%.3e", r.error(c));
    if (r.rates[c]) s += fmt(" (%.2f)", *r.rates[c]);
  }
  return s;
}

bool in_band(const std::optional<double>& v, double lo, double hi) { return v && *v >= lo && *v <= hi; }

Verdict criterion1(const AccuracySweep& sw) {
  Verdict v;
  v.id = 1;
  v.title = "first-order temporal convergence";
  std::vector<std::string> failures;
  if (!sw.completed || sw.table.size() != kTaus.size()) {
    failures.push_back("run incomplete");
  } else {
    for (const auto& r : sw.table) v.details.push_back(table_line(r));
    const ErrorRecord& fin = sw.table.back();
    using C = ErrorRecord;
    for (int c : {C::U_L2, C::U_H1, C::PHI_L2})
      if (!in_band(fin.rates[c], 0.85, 1.15))
        failures.push_back(std::string(C::names()[c]) + " rate " + fmt("%.3f", fin.rates[c].value_or(kNaN)) +
                           " outside [0.85, 1.15]");
    if (!(fin.rates[C::Q_ABS].value_or(kNaN) >= 0.9))
      failures.push_back("err_q_abs rate " + fmt("%.3f", fin.rates[C::Q_ABS].value_or(kNaN)) + " below 0.9");

    // Magnitudes: every column, every row, ratio within [1/3, 3].
    for (int c = 0; c < C::kColumns; ++c) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (std::size_t i = 0; i < kTaus.size(); ++i) {
        const double ratio = sw.table[i].error(c) / kReferenceOrder1[i][c];
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      const bool ok = lo >= 1.0 / 3.0 && hi <= 3.0;
      v.details.push_back(std::string("magnitude ") + C::names()[c] + " ratio to reference in [" + fmt("%.3g", lo) +
                          ", " + fmt("%.3g", hi) + "]" + (ok ? "" : "  OUT OF [1/3, 3]"));
      if (!ok) failures.push_back(std::string(C::names()[c]) + " magnitude ratio " + fmt("%.2g", lo) + ".." + fmt("%.2g", hi));
    }
  }
  if (sw.seconds >= 60.0) failures.push_back("runtime " + fmt("%.1f", sw.seconds) + " s >= 60 s");
  v.details.push_back("runtime " + fmt("%.2f", sw.seconds) + " s");
  v.passed = failures.empty();
  if (sw.table.size() == kTaus.size()) {
    const ErrorRecord& fin = sw.table.back();
    v.summary = "u rate " + fmt("%.3f", *fin.rates[0]) + ", grad u " + fmt("%.3f", *fin.rates[1]) + ", phi " +
                fmt("%.3f", *fin.rates[4]) + ", q " + fmt("%.3f", *fin.rates[5]) + ", " + fmt("%.1f", sw.seconds) +
                " s";
  }
  if (v.passed) v.summary += ", magnitudes within 3x";
  for (const auto& f : failures) v.summary += "; " + f;
  return v;
}

Verdict criterion2(const AccuracySweep& sw) {
  Verdict v;
  v.id = 2;
  v.title = "second-order temporal convergence";
  std::vector<std::string> failures;
  if (!sw.completed || sw.table.size() != kTaus.size()) {
    failures.push_back("run incomplete");
  } else {
    const ErrorRecord& fin = sw.table.back();
    using C = ErrorRecord;
    for (int c : {C::U_L2, C::U_H1, C::Q_ABS})
      if (!in_band(fin.rates[c], 1.8, 2.2))
        failures.push_back(std::string(C::names()[c]) + " rate " + fmt("%.3f", fin.rates[c].value_or(kNaN)) +
                           " outside [1.8, 2.2]");
    for (std::size_t i = 0; i < kTaus.size(); ++i) v.details.push_back(table_line(sw.table[i]));
    for (int c = 0; c < C::kColumns; ++c) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (std::size_t i = 0; i < kTaus.size(); ++i) {
        const double ratio = sw.table[i].error(c) / kReferenceOrder2[i][c];
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      v.details.push_back(std::string("magnitude ") + C::names()[c] + " ratio to reference in [" + fmt("%.3g", lo) +
                          ", " + fmt("%.3g", hi) + "] (informational)");
    }
  }
  if (sw.seconds >= 60.0) failures.push_back("runtime " + fmt("%.1f", sw.seconds) + " s >= 60 s");
  v.details.push_back("runtime " + fmt("%.2f", sw.seconds) + " s");
  v.passed = failures.empty();
  if (v.passed) {
    const ErrorRecord& fin = sw.table.back();
    v.summary = "u rate " + fmt("%.3f", *fin.rates[0]) + ", grad u " + fmt("%.3f", *fin.rates[1]) + ", q " +
                fmt("%.3f", *fin.rates[5]) + ", " + fmt("%.1f", sw.seconds) + " s";
  } else {
    for (std::size_t i = 0; i < failures.size(); ++i) v.summary += (i ? "; " : "") + failures[i];
  }
  return v;
}

// ---- vortex decay ---------------------------------------------------------

struct StabilitySweep {
  std::vector<RunStats> runs;
  double seconds = 0.0;
};

StabilitySweep stability_sweep(int mesh_n) {
  StabilitySweep sw;
  const auto t0 = std::chrono::steady_clock::now();
  const Discretization disc(build_unit_square_mesh(mesh_n));
  for (int order : {1, 2})
    for (double re : {20.0, 100.0}) {
      const ProblemDefinition problem = stability_problem_2d(re, re);
      for (double tau : {0.5, 0.2, 0.1, 0.01}) {
        const auto t1 = std::chrono::steady_clock::now();
        const Trajectory tr = run(disc, problem, SchemeConfig::for_problem(problem, order, tau));
        const std::string label =
            "stability order " + std::to_string(order) + " Re=kappa=" + fmt("%g", re) + " tau " + fmt("%g", tau);
        sw.runs.push_back(summarize(label, tr, order, seconds_since(t1)));
        std::cerr << "  " << label << "  " << fmt("%.1f", sw.runs.back().seconds) << " s\n";
      }
    }
  sw.seconds = seconds_since(t0);
  return sw;
}

Verdict criterion3(const StabilitySweep& sw, int mesh_n) {
  Verdict v;
  v.id = 3;
  v.title = "unconditional energy decay";
  std::vector<std::string> failures;
  double worst = -std::numeric_limits<double>::infinity();
  for (const RunStats& r : sw.runs) {
    std::string line = r.label + ": max E increment " + fmt("%.3e", r.max_energy_increase);
    if (r.max_energy_bdf_increase > -std::numeric_limits<double>::infinity())
      line += ", max BDF2-energy increment " + fmt("%.3e", r.max_energy_bdf_increase);
    line += ", " + fmt("%.1f", r.seconds) + " s";
    v.details.push_back(line);
    if (!r.completed) failures.push_back(r.label + " failed: " + r.failure);
    if (r.max_energy_increase > 1e-12) failures.push_back(r.label + " energy increased by " + fmt("%.3e", r.max_energy_increase));
    worst = std::max(worst, r.max_energy_increase);
  }
  if (sw.runs.size() != 16) failures.push_back("expected 16 runs");
  if (sw.seconds >= 300.0) failures.push_back("runtime " + fmt("%.1f", sw.seconds) + " s >= 300 s");
  v.details.push_back("mesh_n " + std::to_string(mesh_n) + ", total runtime " + fmt("%.1f", sw.seconds) + " s");
  v.passed = failures.empty();
  if (v.passed)
    v.summary = std::to_string(sw.runs.size()) + " runs, largest E^{n+1} - E^n = " + fmt("%.3e", worst) + ", " +
                fmt("%.1f", sw.seconds) + " s";
  else
    for (std::size_t i = 0; i < failures.size(); ++i) v.summary += (i ? "; " : "") + failures[i];
  return v;
}

Verdict criterion4(const StabilitySweep& sw) {
  Verdict v;
  v.id = 4;
  v.title = "discrete energy identity (first order, homogeneous data)";
  double worst = 0.0;
  int runs = 0;
  bool ok = true;
  for (const RunStats& r : sw.runs) {
    if (std::isnan(r.max_energy_identity)) continue;
    ++runs;
    worst = std::max(worst, r.max_energy_identity);
    ok = ok && r.completed;
    v.details.push_back(r.label + ": max |residual| " + fmt("%.3e", r.max_energy_identity));
  }
  v.passed = ok && runs == 8 && worst <= 1e-8;
  v.summary = std::to_string(runs) + " runs, max balance residual " + fmt("%.3e", worst) + " (tol 1e-8)";
  return v;
}

Verdict criterion5(const std::vector<const RunStats*>& all) {
  Verdict v;
  v.id = 5;
  v.title = "unique solvability and A2 identity";
  double min_den = std::numeric_limits<double>::infinity(), worst = 0.0;
  bool ok = true;
  int steps = 0;
  for (const RunStats* r : all) {
    ok = ok && r->completed;
    steps += r->steps;
    min_den = std::min(min_den, r->min_denominator);
    worst = std::max(worst, r->max_a2_defect);
    v.details.push_back(r->label + ": min denominator " + fmt("%.3e", r->min_denominator) + ", max A2 defect " +
                        fmt("%.3e", r->max_a2_defect));
  }
  v.passed = ok && min_den > 0.0 && worst <= 1e-10;
  v.summary = std::to_string(all.size()) + " runs, " + std::to_string(steps) + " steps, min denominator " +
              fmt("%.3e", min_den) + ", max relative A2 defect " + fmt("%.3e", worst) + " (tol 1e-10)";
  return v;
}

Verdict criterion6(const std::vector<const RunStats*>& all) {
  Verdict v;
  v.id = 6;
  v.title = "charge conservation";
  double worst = 0.0;
  bool ok = true;
  for (const RunStats* r : all) {
    ok = ok && r->completed;
    worst = std::max(worst, r->max_div_j);
    v.details.push_back(r->label + ": max |div J| " + fmt("%.3e", r->max_div_j));
  }
  v.passed = ok && worst <= 1e-9;
  v.summary = std::to_string(all.size()) + " runs, max elementwise |div J_h| " + fmt("%.3e", worst) + " (tol 1e-9)";
  return v;
}

Verdict criterion7() {
  Verdict v;
  v.id = 7;
  v.title = "oracle equivalence on n <= 3";
  struct Need {
    const char* suite;
    double tol;
  };
  const std::array<Need, 3> needs{{{"assembly", 1e-13}, {"solve", 1e-9}, {"duality", 1e-12}}};
  const auto results = verify::run_selftest();
  bool ok = true;
  for (const Need& n : needs) {
    const auto it = std::find_if(results.begin(), results.end(), [&](const auto& r) { return r.name == n.suite; });
    if (it == results.end()) {
      ok = false;
      v.details.push_back(std::string(n.suite) + ": missing");
      continue;
    }
    const bool pass = it->passed && it->worst <= n.tol;
    ok = ok && pass;
    v.details.push_back(std::string(n.suite) + ": worst " + fmt("%.3e", it->worst) + " (tol " + fmt("%.0e", n.tol) +
                        ") " + it->detail);
    v.summary += std::string(v.summary.empty() ? "" : ", ") + n.suite + " " + fmt("%.2e", it->worst);
  }
  v.passed = ok;
  return v;
}

Verdict criterion8(const AccuracySweep& first, const AccuracySweep& second) {
  Verdict v;
  v.id = 8;
  v.title = "reconstruction satisfies the coupled scheme";
  static const char* parts[6] = {"momentum", "continuity", "current", "charge", "scalar", "boundary"};
  double worst2 = 0.0, worst1 = 0.0;
  bool ok = first.completed && second.completed;
  for (const AccuracySweep* sw : {&first, &second})
    for (const RunStats& r : sw->runs) {
      std::string line = r.label + ":";
      for (int i = 0; i < 6; ++i) line += std::string(" ") + parts[i] + " " + fmt("%.2e", r.max_coupled_parts[i]);
      v.details.push_back(line);
      (sw->order == 2 ? worst2 : worst1) = std::max(sw->order == 2 ? worst2 : worst1, r.max_coupled);
    }
  v.passed = ok && worst2 <= 1e-8 && worst1 <= 1e-8;
  v.summary = "max per-equation residual " + fmt("%.3e", worst2) + " (second order), " + fmt("%.3e", worst1) +
              " (first order), tol 1e-8";
  return v;
}

std::vector<Verdict> run_all(int stability_mesh) {
  std::cerr << "manufactured problem, first order\n";
  const AccuracySweep acc1 = accuracy_sweep(1);
  std::cerr << "manufactured problem, second order\n";
  const AccuracySweep acc2 = accuracy_sweep(2);
  std::cerr << "vortex decay sweep\n";
  const StabilitySweep stab = stability_sweep(stability_mesh);

  std::vector<const RunStats*> all;
  for (const auto* runs : {&acc1.runs, &acc2.runs, &stab.runs})
    for (const RunStats& r : *runs) all.push_back(&r);

  std::cerr << "oracle suites\n";
  return {criterion1(acc1),        criterion2(acc2), criterion3(stab, stability_mesh), criterion4(stab),
          criterion5(all),         criterion6(all),  criterion7(),                      criterion8(acc1, acc2)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string results_path;
  int check = 0;
  int stability_mesh = 64;
  app.add_option("--results", results_path, "JSON file to write (run) or read (--check)");
  app.add_option("--check", check, "Replay the verdict of one criterion from --results")->check(CLI::Range(1, 8));
  app.add_option("--stability-mesh", stability_mesh, "mesh_n of the vortex sweep")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    if (check != 0) {
      if (results_path.empty()) throw std::runtime_error("--check needs --results");
      std::ifstream in(results_path);
      if (!in) throw std::runtime_error("cannot open " + results_path);
      const json j = json::parse(in);
      for (const json& item : j.at("criteria")) {
        const Verdict v = from_json(item);
        if (v.id != check) continue;
        print(v, std::cout, true);
        return v.passed ? 0 : 1;
      }
      throw std::runtime_error("criterion " + std::to_string(check) + " not in " + results_path);
    }

    const std::vector<Verdict> verdicts = run_all(stability_mesh);
    for (const Verdict& v : verdicts) print(v, std::cout, false);
    std::cout << "\n";
    for (const Verdict& v : verdicts) {
      std::cout << "criterion " << v.id << " details\n";
      for (const auto& d : v.details) std::cout << "      " << d << "\n";
    }
    const bool all_passed = std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
    if (!results_path.empty()) {
      json j;
      j["stability_mesh"] = stability_mesh;
      j["criteria"] = json::array();
      for (const Verdict& v : verdicts) j["criteria"].push_back(to_json(v));
      std::ofstream out(results_path);
      out << j.dump(2) << "\n";
      if (!out) throw std::runtime_error("cannot write " + results_path);
      // Verdicts are enforced by the --check entries.
      return 0;
    }
    return all_passed ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
