#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "syncforge/dynamics.hpp"
#include "syncforge/msf.hpp"
#include "syncforge/synthesis.hpp"
#include "syncforge/tridiag.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace syncforge;

namespace {

std::vector<double> to_vector(std::span<const double> s) {
    return {s.begin(), s.end()};
}

py::dict report_dict(const SynthesisReport& r) {
    return py::dict("alphas"_a = r.alphas, "similarity"_a = r.similarity, "null_vector"_a = r.null_vec,
                    "row_sum_residual"_a = r.row_sum_residual, "spectral_residual"_a = r.spectral_residual,
                    "max_abs_entry"_a = r.max_abs_entry, "max_abs_offdiag"_a = r.max_abs_offdiag);
}

LyapunovSettings settings_for(const OscillatorModel& model, std::optional<double> warmup_time,
                              std::optional<double> total_time, double renorm_interval, double h,
                              std::uint64_t seed) {
    auto s = LyapunovSettings::defaults_for(model);
    if (warmup_time) {
        s.warmup_time = *warmup_time;
    }
    if (total_time) {
        s.total_time = *total_time;
    }
    s.renorm_interval = renorm_interval;
    s.h = h;
    s.seed = seed;
    return s;
}

} // namespace

PYBIND11_MODULE(_syncforge, m) {
    m.doc() = "Tridiagonal Laplacian synthesis, master stability functions and network simulation.";

    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<TridiagonalMatrix>(m, "Tridiagonal")
        .def(py::init<std::vector<double>, std::vector<double>, std::vector<double>>(), "diag"_a, "sub"_a, "super"_a)
        .def_property_readonly("order", &TridiagonalMatrix::order)
        .def_property_readonly("diag", [](const TridiagonalMatrix& t) { return to_vector(t.diag()); })
        .def_property_readonly("sub", [](const TridiagonalMatrix& t) { return to_vector(t.sub()); })
        .def_property_readonly("super", [](const TridiagonalMatrix& t) { return to_vector(t.super()); })
        .def("__getitem__", [](const TridiagonalMatrix& t, std::pair<std::size_t, std::size_t> ij) {
            if (ij.first >= t.order() || ij.second >= t.order()) {
                throw py::index_error("index out of range");
            }
            return t(ij.first, ij.second);
        })
        .def("to_list",
             [](const TridiagonalMatrix& t) {
                 std::vector<std::vector<double>> rows(t.order(), std::vector<double>(t.order(), 0.0));
                 for (std::size_t i = 0; i < t.order(); ++i) {
                     for (std::size_t j = 0; j < t.order(); ++j) {
                         rows[i][j] = t(i, j);
                     }
                 }
                 return rows;
             })
        .def("multiply", [](const TridiagonalMatrix& t, const std::vector<double>& x) { return t.multiply(x); })
        .def("__repr__", [](const TridiagonalMatrix& t) { return "<Tridiagonal order=" + std::to_string(t.order()) + ">"; });

    m.def("eigenvalues", [](const TridiagonalMatrix& t) { return eigenvalues(t); }, "matrix"_a,
          "Eigenvalues, ascending. Off-diagonal products must be positive.");

    m.def(
        "place_eigenvalues",
        [](const std::string& strategy, double lo, double hi, std::size_t count) {
            return to_vector(place_eigenvalues(parse_placement(strategy), lo, hi, count).values());
        },
        "strategy"_a, "lo"_a, "hi"_a, "count"_a, "{0} followed by `count` linear or chebyshev points in [lo, hi].");

    m.def(
        "synthesize",
        [](const std::vector<double>& spectrum) {
            const auto r = synthesize(SpectrumSpec(spectrum));
            return py::make_tuple(r.laplacian.matrix(), report_dict(r.report));
        },
        "spectrum"_a, "Laplacian with the given spectrum (first value 0). Returns (matrix, report).");

    m.def(
        "diffusive_laplacian",
        [](double sigma, std::size_t n) { return diffusive_laplacian(sigma, n).laplacian.matrix(); }, "sigma"_a,
        "n"_a);

    m.def(
        "largest_lyapunov",
        [](const std::string& model, double eta, std::optional<double> warmup_time, std::optional<double> total_time,
           double renorm_interval, double h, std::uint64_t seed) {
            const auto mdl = make_model(model);
            const auto s = settings_for(mdl, warmup_time, total_time, renorm_interval, h, seed);
            py::gil_scoped_release release;
            return largest_lyapunov(mdl, eta, s).exponent;
        },
        "model"_a, "eta"_a, "warmup_time"_a = py::none(), "total_time"_a = py::none(), "renorm_interval"_a = 1.0,
        "h"_a = 1e-3, "seed"_a = 1, "Master stability function value at eta.");

    m.def(
        "msf_scan",
        [](const std::string& model, const std::vector<double>& etas, std::optional<double> warmup_time,
           std::optional<double> total_time, double renorm_interval, double h, std::uint64_t seed, unsigned threads) {
            const auto mdl = make_model(model);
            const auto s = settings_for(mdl, warmup_time, total_time, renorm_interval, h, seed);
            MsfCurve c;
            {
                py::gil_scoped_release release;
                c = msf_scan(mdl, etas, s, threads);
            }
            py::list intervals;
            for (const auto& iv : c.negative_intervals) {
                intervals.append(py::make_tuple(iv.lo, iv.hi));
            }
            return py::dict("etas"_a = c.etas, "values"_a = c.values, "errors"_a = c.errors,
                            "negative_intervals"_a = intervals);
        },
        "model"_a, "etas"_a, "warmup_time"_a = py::none(), "total_time"_a = py::none(), "renorm_interval"_a = 1.0,
        "h"_a = 1e-3, "seed"_a = 1, "threads"_a = 0);

    m.def(
        "negative_intervals",
        [](const std::vector<double>& etas, const std::vector<double>& values) {
            std::vector<std::pair<double, double>> out;
            for (const auto& iv : negative_intervals(etas, values)) {
                out.emplace_back(iv.lo, iv.hi);
            }
            return out;
        },
        "etas"_a, "values"_a);

    m.def("required_sigma", &required_sigma, "threshold"_a, "n"_a);

    m.def(
        "diffusive_feasibility",
        [](double lo, double hi, std::size_t n) {
            const auto f = diffusive_feasibility(lo, hi, n);
            return py::dict("feasible"_a = f.feasible, "eigen_ratio"_a = f.eigen_ratio,
                            "interval_ratio"_a = f.interval_ratio, "sigma_lo"_a = f.sigma_lo,
                            "sigma_hi"_a = f.sigma_hi);
        },
        "eta_lo"_a, "eta_hi"_a, "n"_a);

    m.def(
        "simulate",
        [](const std::string& model, const TridiagonalMatrix& laplacian, double t_end, double h, double variance,
           std::uint64_t seed, std::optional<double> warmup_time, std::size_t sample_stride) {
            const auto mdl = make_model(model);
            const NetworkSystem sys(mdl, laplacian);
            SimulationOptions opts;
            opts.t_end = t_end;
            opts.h = h;
            opts.sample_stride = sample_stride;
            SyncSeries s;
            {
                py::gil_scoped_release release;
                const auto point =
                    attractor_warmup(mdl, mdl.default_state, warmup_time.value_or(mdl.default_warmup), h);
                s = simulate_network(sys, perturbed_sync_ic(point, laplacian.order(), variance, seed), opts);
            }
            return py::dict("times"_a = s.times, "sync_error"_a = s.sync_error, "blew_up"_a = s.blew_up,
                            "failure"_a = s.failure);
        },
        "model"_a, "laplacian"_a, "t_end"_a = 100.0, "h"_a = 1e-3, "variance"_a = 1.0, "seed"_a = 1,
        "warmup_time"_a = py::none(), "sample_stride"_a = 100,
        "Integrate the coupled network from a perturbed synchronous state.");
}
