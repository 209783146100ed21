#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "polychain/critical.hpp"
#include "polychain/error.hpp"
#include "polychain/io/runner.hpp"
#include "polychain/io/spec.hpp"
#include "polychain/observables.hpp"
#include "polychain/pruefer.hpp"
#include "polychain/transfer.hpp"
#include "polychain/transport.hpp"

namespace py = pybind11;
using namespace polychain;

namespace {

std::vector<std::vector<double>> as_rows(const Mat2& m) { return {{m.a, m.b}, {m.c, m.d}}; }

py::dict table_dict(const io::Table& t) {
  py::dict d;
  d["header"] = t.header;
  d["rows"] = t.rows;
  return d;
}

}  // namespace

PYBIND11_MODULE(_polychain, m) {
  m.doc() = "Random polymer chains: critical energies, Lyapunov exponent, IDS and transport moments";

  py::register_exception<Error>(m, "PolychainError", PyExc_ValueError);

  py::class_<Polymer>(m, "Polymer")
      .def(py::init(&make_polymer), py::arg("hopping"), py::arg("potential"))
      .def_readonly("hopping", &Polymer::hopping)
      .def_readonly("potential", &Polymer::potential)
      .def("__len__", &Polymer::length);

  py::class_<PolymerEnsemble>(m, "Ensemble")
      .def(py::init(&build_ensemble), py::arg("plus"), py::arg("minus"), py::arg("p_plus") = 0.5)
      .def_readonly("plus", &PolymerEnsemble::plus)
      .def_readonly("minus", &PolymerEnsemble::minus)
      .def_readonly("p_plus", &PolymerEnsemble::p_plus)
      .def_property_readonly("mean_length", &PolymerEnsemble::mean_length);

  m.def("dimer", &dimer_ensemble, py::arg("lam"), py::arg("p_plus") = 0.5);

  m.def("polymer_matrix", [](const Polymer& p, double E) { return as_rows(polymer_matrix(p, E)); },
        py::arg("polymer"), py::arg("E"));

  m.def("critical_energies", &find_critical_energies, py::arg("ensemble"), py::arg("lo") = -2.0,
        py::arg("hi") = 2.0, py::arg("grid") = 2001, py::arg("tol") = 1e-13);

  m.def(
      "analyze_critical",
      [](const PolymerEnsemble& ens, double E_c) {
        const auto s = analyze_critical(ens, E_c);
        py::dict d;
        d["E_c"] = s.frame.E_c;
        d["eta_plus"] = s.frame.eta_plus;
        d["eta_minus"] = s.frame.eta_minus;
        d["kind_plus"] = to_string(s.frame.kind_plus);
        d["kind_minus"] = to_string(s.frame.kind_minus);
        d["frame"] = as_rows(s.frame.M);
        d["c_plus"] = s.first_order.c_plus;
        d["c_minus"] = s.first_order.c_minus;
        d["d_plus"] = s.first_order.d_plus;
        d["d_minus"] = s.first_order.d_minus;
        d["order"] = s.order;
        d["anomalous"] = s.anomaly.any();
        return d;
      },
      py::arg("ensemble"), py::arg("E_c"));

  m.def(
      "lyapunov",
      [](const PolymerEnsemble& ens, double E, std::int64_t polymers, std::size_t samples, std::uint64_t seed,
         int threads) {
        LyapunovOptions o;
        o.threads = threads;
        const auto r = lyapunov_mc(ens, E, polymers, samples, seed, o);
        return py::make_tuple(r.value, r.std_error);
      },
      py::arg("ensemble"), py::arg("E"), py::arg("polymers") = 1000, py::arg("samples") = 100,
      py::arg("seed") = 1, py::arg("threads") = 0, "gamma(E) per site and its standard error");

  m.def(
      "lyapunov_formula",
      [](const PolymerEnsemble& ens, double E_c, double eps) {
        const auto f = lyapunov_formula(build_frame(ens, E_c), ens, eps);
        py::dict d;
        d["leading"] = f.leading;
        d["intermediate"] = f.intermediate;
        d["b_max"] = f.b_max;
        return d;
      },
      py::arg("ensemble"), py::arg("E_c"), py::arg("eps"));

  m.def(
      "ids",
      [](const PolymerEnsemble& ens, double E, std::int64_t sites, std::size_t samples, std::uint64_t seed,
         int threads) {
        const auto r = ids_mc(ens, E, sites, samples, seed, threads);
        return py::make_tuple(r.value, r.std_error);
      },
      py::arg("ensemble"), py::arg("E"), py::arg("sites") = 10000, py::arg("samples") = 100, py::arg("seed") = 1,
      py::arg("threads") = 0);

  m.def(
      "ids_formula",
      [](const PolymerEnsemble& ens, double E_c, double eps) {
        const auto frame = build_frame(ens, E_c);
        const auto f = ids_formula(frame, first_order_data(frame, ens), ens, eps);
        py::dict d;
        d["constant"] = f.constant;
        d["slope"] = f.slope;
        d["value"] = f.value;
        return d;
      },
      py::arg("ensemble"), py::arg("E_c"), py::arg("eps") = 0.0);

  m.def(
      "eigenvalues",
      [](std::vector<double> t, std::vector<double> v) {
        const auto N = static_cast<std::int64_t>(v.size());
        // Site n uses t(n) and t(n+1), so one extra hopping closes the window.
        if (t.size() == v.size()) t.push_back(1.0);
        v.push_back(0.0);
        const auto w = make_window(std::move(t), std::move(v), 0);
        std::vector<double> out;
        for (std::int64_t j = 1; j <= N; ++j) out.push_back(eigenvalue_by_index(w, N, j));
        return out;
      },
      py::arg("t"), py::arg("v"), "Dirichlet eigenvalues of the N-site Jacobi matrix (t[0] unused)");

  m.def(
      "moment_green",
      [](std::vector<double> t, std::vector<double> v, std::int64_t n_min, double q, double T, double rel_tol) {
        QuadratureSpec s;
        s.rel_tol = rel_tol;
        return moment_green(make_window(std::move(t), std::move(v), n_min), q, T, s);
      },
      py::arg("t"), py::arg("v"), py::arg("n_min"), py::arg("q"), py::arg("T"), py::arg("rel_tol") = 1e-4);

  m.def(
      "compute",
      [](const std::string& path, int threads) {
        return table_dict(io::compute(io::parse_spec(path), io::RunOptions{threads, ".", {}}).table);
      },
      py::arg("spec"), py::arg("threads") = 0, "run an experiment spec in memory");

  m.def(
      "run",
      [](const std::string& path, const std::string& out, int threads) {
        const auto r = io::run(io::parse_spec(path), io::RunOptions{threads, out, {}});
        py::dict d;
        d["summary"] = r.summary;
        d["csv"] = r.csv_path;
        d["svg"] = r.svg_path;
        return d;
      },
      py::arg("spec"), py::arg("out") = ".", py::arg("threads") = 0, "run a spec and write CSV/SVG");
}
