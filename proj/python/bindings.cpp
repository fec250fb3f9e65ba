#include "rbsgm/experiment.hpp"
#include "rbsgm/gpc.hpp"
#include "rbsgm/oracle.hpp"
#include "rbsgm/randfield.hpp"
#include "rbsgm/rbsgm.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace rbsgm;

namespace {

RunConfig config_from_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::vector<double> eigenvalues(const randfield::KlField& field) { return field.eigenvalues; }

}  // namespace

PYBIND11_MODULE(_rbsgmkit, m) {
  m.doc() = "Reduced basis stochastic Galerkin core";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("enumerate_indices", [](int mm, int p) { return gpc::enumerate_indices(mm, p).indices; }, py::arg("m"),
        py::arg("p"), "Multi-indices of total degree <= p, graded order.");
  m.def("basis_dimension", &gpc::basis_dimension, py::arg("m"), py::arg("p"));
  m.def("legendre_beta", &gpc::legendre_beta, py::arg("k"));
  m.def(
      "assemble_g", [](int i, int j, int mm, int p) { return Matrix(gpc::assemble_g(i, j, gpc::enumerate_indices(mm, p))); },
      py::arg("i"), py::arg("j"), py::arg("m"), py::arg("p"), "Dense copy of G_ij.");
  m.def("assemble_h", [](int mm, int p) { return gpc::assemble_h(gpc::enumerate_indices(mm, p)); }, py::arg("m"),
        py::arg("p"));

  m.def(
      "kl_1d_eigenvalues",
      [](double corr_len, double lo, double hi, int count) {
        std::vector<double> out;
        for (const auto& pair : randfield::kl_1d(corr_len, lo, hi, count)) out.push_back(pair.eigenvalue);
        return out;
      },
      py::arg("corr_len"), py::arg("lo"), py::arg("hi"), py::arg("count"));
  m.def(
      "kl_2d_eigenvalues",
      [](double corr_len, std::array<double, 4> rect, int n, int mm) {
        const fem::GridMesh mesh = fem::build_mesh({rect[0], rect[1], rect[2], rect[3]}, n);
        return eigenvalues(randfield::kl_2d(corr_len, mesh, mm));
      },
      py::arg("corr_len"), py::arg("rect"), py::arg("n"), py::arg("m"));

  m.def("secant_predict", &secant_predict, py::arg("r1"), py::arg("h1"), py::arg("r2"), py::arg("h2"), py::arg("tol"),
        py::arg("ns"), py::arg("nmax"));

  m.def(
      "parse_config",
      [](const std::string& text) {
        ExperimentResult wrapper;
        wrapper.config = config_from_text(text);
        return to_json(wrapper)["config"].dump();
      },
      py::arg("text"), "Validated configuration as JSON text.");

  m.def(
      "run",
      [](const std::string& text, const std::string& out_dir) {
        const RunConfig config = config_from_text(text);
        ExperimentResult result;
        std::optional<Problem> problem;
        {
          py::gil_scoped_release release;
          problem.emplace(build_problem(config));
          result = run_experiment(config, *problem);
          if (!out_dir.empty()) write_artifacts(result, *problem, out_dir);
        }
        const Vector mean = result.stats.mean.size() ? problem->mesh.extend_to_nodes(result.stats.mean) : Vector();
        const Vector var = result.stats.variance.size() ? problem->mesh.extend_to_nodes(result.stats.variance) : Vector();
        return py::make_tuple(to_json(result).dump(), mean, var);
      },
      py::arg("config_text"), py::arg("out_dir") = "",
      "Runs one experiment; returns (report JSON, nodal mean, nodal variance).");

  m.def(
      "oracle_check",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& c : oracle::run_all_checks(seed)) {
          py::dict d;
          d["name"] = c.name;
          d["value"] = c.value;
          d["threshold"] = c.threshold;
          d["passed"] = c.passed;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 2022);
}
