#include <pybind11/iostream.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "savmhd/app.hpp"
#include "savmhd/diagnostics.hpp"
#include "savmhd/errors.hpp"
#include "savmhd/mesh.hpp"
#include "savmhd/problems.hpp"
#include "savmhd/sav_stepper.hpp"
#include "savmhd/verification.hpp"

namespace py = pybind11;
using namespace savmhd;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

ProblemDefinition problem_by_name(const std::string& name, double re, double kappa, int mesh_n) {
  if (name == "accuracy") return accuracy_problem_2d(re, kappa);
  if (name == "stability") return stability_problem_2d(re, kappa);
  if (name == "cavity") return cavity_problem_2d(mesh_n);
  throw std::invalid_argument("unknown problem '" + name + "' (accuracy, stability, cavity)");
}

py::dict error_dict(const ErrorRecord& r) {
  py::dict d;
  d["tau"] = r.tau;
  for (int c = 0; c < ErrorRecord::kColumns; ++c) {
    const std::string name = ErrorRecord::names()[c];
    d[("err_" + name).c_str()] = r.error(c);
    d[("rate_" + name).c_str()] = r.rates[c] ? py::cast(*r.rates[c]) : py::none();
  }
  return d;
}

py::dict simulate(const std::string& name, int order, double tau, int mesh_n, double re, double kappa,
                  std::optional<double> t_final) {
  ProblemDefinition problem = problem_by_name(name, re, kappa, mesh_n);
  if (t_final) problem.t_final = *t_final;
  const Discretization disc(build_unit_square_mesh(mesh_n));
  const SchemeConfig config = SchemeConfig::for_problem(problem, order, tau);
  Trajectory tr;
  {
    py::gil_scoped_release release;
    tr = run(disc, problem, config);
  }
  if (!tr.completed()) std::rethrow_exception(tr.failure);

  std::vector<double> t{0.0}, energy{tr.initial_energy}, den, a2_defect, div_j, identity;
  for (const StepReport& r : tr.reports) {
    t.push_back(r.t);
    energy.push_back(r.energy);
    den.push_back(r.denominator);
    a2_defect.push_back(r.a2_identity_defect);
    div_j.push_back(r.max_div_j);
    identity.push_back(r.energy_identity_residual);
  }
  py::dict out;
  out["t"] = as_array(t);
  out["energy"] = as_array(energy);
  out["denominator"] = as_array(den);
  out["a2_identity_defect"] = as_array(a2_defect);
  out["max_div_j"] = as_array(div_j);
  out["energy_identity_residual"] = as_array(identity);
  out["q"] = tr.final_state.q;
  out["u"] = as_array(tr.final_state.u.coeffs);
  out["j"] = as_array(tr.final_state.j.coeffs);
  if (problem.exact) out["errors"] = error_dict(compute_errors(disc, tr.final_state, problem, problem.t_final, tau));
  return out;
}

py::list convergence(int order, const std::vector<double>& taus, int mesh_n, double re, double kappa) {
  const ProblemDefinition problem = accuracy_problem_2d(re, kappa);
  const Discretization disc(build_unit_square_mesh(mesh_n));
  std::vector<ErrorRecord> rows;
  {
    py::gil_scoped_release release;
    for (double tau : taus) {
      const Trajectory tr = run(disc, problem, SchemeConfig::for_problem(problem, order, tau));
      if (!tr.completed()) std::rethrow_exception(tr.failure);
      rows.push_back(compute_errors(disc, tr.final_state, problem, problem.t_final, tau));
    }
  }
  py::list out;
  for (const ErrorRecord& r : convergence_table(rows)) out.append(error_dict(r));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Energy-stable SAV finite element solver for 2D inductionless MHD";

  py::register_exception<SingularSystemError>(m, "SingularSystemError");
  py::register_exception<SolverError>(m, "SolverError");
  py::register_exception<SolvabilityError>(m, "SolvabilityError");
  py::register_exception<UnsupportedProblemError>(m, "UnsupportedProblemError");

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("n_subdiv", [](const Mesh& mesh) { return mesh.n_subdiv; })
      .def_property_readonly("num_vertices", &Mesh::num_vertices)
      .def_property_readonly("num_edges", &Mesh::num_edges)
      .def_property_readonly("num_triangles", &Mesh::num_triangles)
      .def_property_readonly("h", &Mesh::h)
      .def_property_readonly("vertices",
                             [](const Mesh& mesh) {
                               py::array_t<double> a({mesh.num_vertices(), 2});
                               auto w = a.mutable_unchecked<2>();
                               for (int i = 0; i < mesh.num_vertices(); ++i) {
                                 w(i, 0) = mesh.vertices[i].x;
                                 w(i, 1) = mesh.vertices[i].y;
                               }
                               return a;
                             })
      .def_property_readonly("triangles", [](const Mesh& mesh) {
        py::array_t<int> a({mesh.num_triangles(), 3});
        auto w = a.mutable_unchecked<2>();
        for (int i = 0; i < mesh.num_triangles(); ++i)
          for (int k = 0; k < 3; ++k) w(i, k) = mesh.triangles[i][k];
        return a;
      });

  m.def("build_unit_square_mesh", &build_unit_square_mesh, py::arg("n_subdiv"));
  m.def(
      "validate_mesh",
      [](const Mesh& mesh) {
        std::vector<std::string> out;
        for (const auto& v : validate_mesh(mesh)) out.push_back(std::string(to_string(v.kind)) + ": " + v.message);
        return out;
      },
      py::arg("mesh"), "Empty list iff the mesh is consistent.");

  m.def("simulate", &simulate, py::arg("problem"), py::arg("order"), py::arg("tau"), py::arg("mesh_n"),
        py::arg("re") = 1.0, py::arg("kappa") = 1.0, py::arg("t_final") = py::none(),
        "Runs one problem ('accuracy', 'stability' or 'cavity') to its final time and returns per-step "
        "diagnostics, the final state and, for the manufactured problem, the errors.");
  m.def("convergence", &convergence, py::arg("order"), py::arg("taus"), py::arg("mesh_n") = 6, py::arg("re") = 1.0,
        py::arg("kappa") = 1.0, "Error table with observed rates for the manufactured problem.");
  m.def(
      "selftest",
      [](const std::string& inject) {
        std::vector<verify::SuiteResult> results;
        {
          py::gil_scoped_release release;
          results = verify::run_selftest(verify::parse_injection(inject));
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["name"] = r.name;
          d["passed"] = r.passed;
          d["worst"] = r.worst;
          d["tolerance"] = r.tolerance;
          d["detail"] = r.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("inject") = "none");
  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"savmhd"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        py::scoped_ostream_redirect out_redirect;
        py::scoped_estream_redirect err_redirect;
        return app::run_cli(static_cast<int>(argv.size()), argv.data(), std::cout, std::cerr);
      },
      py::arg("args"), "Runs the command-line interface in process and returns its exit code.");
}
