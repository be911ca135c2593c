#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gmclab/error.hpp"
#include "gmclab/experiments.hpp"
#include "gmclab/inequalities.hpp"
#include "gmclab/moments.hpp"
#include "gmclab/suite.hpp"

#ifndef GMCLAB_VERSION
#define GMCLAB_VERSION "unknown"
#endif

namespace py = pybind11;
using namespace gmclab;

namespace {

MonteCarloOptions mc(std::uint64_t seed, unsigned workers, const std::string& backend,
                     std::optional<double> lambda_shift) {
    MonteCarloOptions o;
    o.seed = seed;
    o.workers = workers;
    o.backend = parse_backend(backend);
    o.lambda_shift = lambda_shift;
    return o;
}

py::dict assertion_dict(const Assertion& a) {
    py::dict d;
    d["name"] = a.name;
    d["passed"] = a.passed;
    d["value"] = a.value;
    d["target"] = a.target;
    d["tolerance"] = a.tolerance;
    d["detail"] = a.detail;
    d["diagnostic"] = a.diagnostic;
    return d;
}

py::dict report_dict(const DecompositionReport& r) {
    py::dict d;
    d["experiment"] = r.experiment;
    py::dict params;
    for (const auto& [k, v] : r.parameters) params[py::str(k)] = v;
    d["parameters"] = params;
    py::list rows;
    for (const auto& row : r.rows) {
        py::dict x;
        x["label"] = row.label;
        x["scale"] = row.scale;
        x["estimate"] = row.estimate;
        x["stderr"] = row.std_err;
        x["log_estimate"] = row.log_estimate;
        x["n_samples"] = row.n_samples;
        rows.append(x);
    }
    d["rows"] = rows;
    py::list as;
    for (const auto& a : r.assertions) as.append(assertion_dict(a));
    d["assertions"] = as;
    d["passed"] = r.passed();
    d["csv"] = r.to_csv();
    return d;
}

}  // namespace

PYBIND11_MODULE(_gmclab, m) {
    m.doc() = "Monte Carlo lab for regularized boundary Gaussian multiplicative chaos";
    m.attr("__version__") = GMCLAB_VERSION;

    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<UHPRect>(m, "Rect")
        .def(py::init<double, double, double, double>(), py::arg("x0"), py::arg("x1"), py::arg("y0"), py::arg("y1"))
        .def_property_readonly("x0", &UHPRect::x0)
        .def_property_readonly("x1", &UHPRect::x1)
        .def_property_readonly("y0", &UHPRect::y0)
        .def_property_readonly("y1", &UHPRect::y1)
        .def_property_readonly("area", &UHPRect::area)
        .def("scaled", &UHPRect::scaled)
        .def("__repr__", [](const UHPRect& r) { return "Rect(" + r.csv_row() + ")"; });
    m.def("carleson", [](double a, double b) { return carleson(a, b).rect(); }, py::arg("a"), py::arg("b"),
          "The Carleson cube [a,b] x [0,b-a] as a Rect.");
    m.def("parse_region", &parse_region);

    m.def("zeta_bar", &zeta_bar, py::arg("p"), py::arg("gamma"));
    m.def("pc", [](double gamma) { return threshold_pc(gamma).pc; }, py::arg("gamma"));
    m.def("predicted_scan_slope", &predicted_scan_slope, py::arg("p"), py::arg("gamma"));
    m.def("deterministic_first_moment", &deterministic_first_moment, py::arg("region"), py::arg("gamma"),
          py::arg("epsilon"));
    m.def(
        "first_moment_divergence",
        [](const UHPRect& r, double gamma, const std::vector<double>& eps) {
            auto d = first_moment_divergence(r, gamma, eps);
            py::dict out;
            out["moments"] = d.moments;
            out["increment_slope"] = d.increment_slope;
            out["raw_slope"] = d.raw_slope;
            out["diverging"] = d.diverging;
            return out;
        },
        py::arg("region"), py::arg("gamma"), py::arg("epsilons"));

    m.def(
        "sample_log_masses",
        [](const UHPRect& region, double epsilon, double gamma, std::size_t n, std::uint64_t seed, unsigned workers,
           const std::string& backend, std::optional<double> lambda_shift) {
            GmcParams params{gamma};
            params.validate();
            auto opts = mc(seed, workers, backend, lambda_shift);
            auto grid = build_grid(region, epsilon, 0);
            const double lam = resolve_lambda({grid}, opts);
            auto model = build_field_model(grid, lam, opts);
            std::vector<double> v;
            {
                py::gil_scoped_release release;
                v = sample_log_masses(*model, {region}, params, seed, 0, n, workers)[0];
            }
            return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
        },
        py::arg("region"), py::arg("epsilon"), py::arg("gamma"), py::arg("n"), py::arg("seed") = 20240611,
        py::arg("workers") = 0, py::arg("backend") = "auto", py::arg("lambda_shift") = py::none(),
        "Log total masses of `region` for replicates 0..n-1.");

    m.def(
        "estimate_moment",
        [](const std::vector<double>& log_masses, double p, double gamma) {
            auto e = estimate_moment(log_masses, p, gamma);
            py::dict d;
            d["mean"] = e.mean;
            d["stderr"] = e.std_err;
            d["log_mean"] = e.log_mean;
            d["method"] = to_string(e.method);
            return d;
        },
        py::arg("log_masses"), py::arg("p"), py::arg("gamma"));
    m.def(
        "tail_index",
        [](const std::vector<double>& log_values, std::size_t k) {
            auto t = tail_index(log_values, k);
            py::dict d;
            d["alpha_hat"] = t.alpha_hat;
            d["k"] = t.k;
            d["ci_low"] = t.ci_low;
            d["ci_high"] = t.ci_high;
            return d;
        },
        py::arg("log_values"), py::arg("k"));

    m.def(
        "scaling_check",
        [](const UHPRect& a, double r, double p, double gamma, double epsilon, std::size_t n, std::uint64_t seed,
           unsigned workers, const std::string& backend) {
            DecompositionReport rep;
            {
                py::gil_scoped_release release;
                rep = scaling_check(a, r, p, gamma, epsilon, n, mc(seed, workers, backend, std::nullopt));
            }
            return report_dict(rep);
        },
        py::arg("region"), py::arg("r"), py::arg("p"), py::arg("gamma"), py::arg("epsilon"), py::arg("n"),
        py::arg("seed") = 20240611, py::arg("workers") = 0, py::arg("backend") = "auto");

    m.def("kahane_shift_constant", &kahane_shift_constant, py::arg("r"), py::arg("gamma"), py::arg("p"));
    m.def(
        "fuzz_elementary",
        [](std::size_t cases, std::uint64_t seed) {
            py::list out;
            for (const auto& s : fuzz_elementary(cases, seed)) {
                py::dict d;
                d["proposition"] = s.proposition;
                d["cases"] = s.cases;
                d["violations"] = s.violations;
                d["worst_relative_slack"] = s.worst_relative_slack;
                out.append(d);
            }
            return out;
        },
        py::arg("cases"), py::arg("seed") = 1);

    m.def("criterion_ids", &criterion_ids);
    m.def(
        "run_criterion",
        [](const std::string& id, bool reduced, std::uint64_t seed, unsigned workers) {
            SuiteOptions o;
            o.reduced = reduced;
            o.seed = seed;
            o.workers = workers;
            CriterionResult r;
            {
                py::gil_scoped_release release;
                r = run_criterion(id, o);
            }
            py::dict d;
            d["id"] = r.id;
            d["title"] = r.title;
            d["passed"] = r.passed;
            d["seconds"] = r.seconds;
            d["summary"] = r.summary;
            py::list as;
            for (const auto& a : r.assertions) as.append(assertion_dict(a));
            d["assertions"] = as;
            py::dict csv;
            for (const auto& [k, v] : r.csv) csv[py::str(k)] = v;
            d["csv"] = csv;
            return d;
        },
        py::arg("id"), py::arg("reduced") = false, py::arg("seed") = 20240611, py::arg("workers") = 0);
}
