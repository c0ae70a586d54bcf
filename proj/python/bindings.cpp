// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "brox/bessel.hpp"
#include "brox/diffusion.hpp"
#include "brox/error.hpp"
#include "brox/experiment.hpp"
#include "brox/stable.hpp"
#include "brox/variational.hpp"

namespace py = pybind11;

namespace {

std::vector<double> draw_many(std::size_t n, std::uint64_t seed, auto&& one) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        brox::Stream rng = brox::Stream(seed).split(i);
        out[i] = one(rng);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_brox, m) {
    m.doc() = "Native core of the brox package";

    py::register_exception<brox::InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<brox::RangeError>(m, "RangeError", PyExc_ValueError);
    py::register_exception<brox::ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<brox::IoError>(m, "IoError", PyExc_OSError);

    m.def("experiment_names", [] {
        std::vector<std::string> v;
        for (auto e : brox::experiment::all_experiments()) v.emplace_back(brox::experiment::name(e));
        return v;
    });

    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            brox::experiment::ExperimentConfig cfg;
            brox::experiment::apply_json(cfg, config_json);
            brox::experiment::ExperimentResult res;
            {
                py::gil_scoped_release release;
                res = brox::experiment::run_experiment(cfg);
            }
            return py::make_tuple(brox::experiment::format_csv(res.rows), res.summary.to_json());
        },
        py::arg("config_json"), "Runs one experiment; returns (csv_text, summary_json).");

    m.def(
        "besq_samples",
        [](double dimension, double start, double t, std::size_t n, std::uint64_t seed) {
            return draw_many(n, seed, [&](brox::Stream& r) { return brox::bessel::besq_step(dimension, start, t, r); });
        },
        py::arg("dimension"), py::arg("start"), py::arg("t"), py::arg("n"), py::arg("seed") = 1);

    m.def(
        "stable_samples",
        [](double kappa, std::size_t n, std::uint64_t seed) {
            return draw_many(n, seed, [&](brox::Stream& r) { return brox::stable::sample_stable_ca(kappa, r); });
        },
        py::arg("kappa"), py::arg("n"), py::arg("seed") = 1);

    m.def("stable_laplace", &brox::stable::stable_laplace, py::arg("kappa"), py::arg("t"));

    m.def(
        "hitting_samples",
        [](double kappa, double r, std::size_t n, std::uint64_t seed, double env_step, double space_step,
           bool use_F) {
            brox::diffusion::AnnealedOptions opt;
            opt.env_step = env_step;
            opt.space_step = space_step;
            opt.use_F = use_F;
            py::list out;
            for (std::size_t i = 0; i < n; ++i) {
                const auto s = brox::diffusion::annealed_hitting_sample(kappa, r, opt, brox::Stream(seed).split(i));
                py::dict d;
                d["level"] = s.f_of_r;
                d["h_total"] = s.h_total;
                d["h_minus"] = s.h_minus;
                d["h_plus"] = s.h_plus;
                d["l_star"] = s.l_star;
                d["truncated"] = s.truncated;
                out.append(d);
            }
            return out;
        },
        py::arg("kappa"), py::arg("r"), py::arg("n"), py::arg("seed") = 1, py::arg("env_step") = 1e-2,
        py::arg("space_step") = 1e-2, py::arg("use_F") = false);

    m.def(
        "c1",
        [](double kappa, std::size_t mesh) {
            const auto res = brox::variational::c1_eigen({kappa, mesh, 1});
            const auto b = brox::variational::c1_bounds(kappa);
            py::dict d;
            d["value"] = res.value;
            d["coarse"] = res.coarse;
            d["fine"] = res.fine;
            d["lower"] = b.lower;
            d["upper"] = b.upper;
            return d;
        },
        py::arg("kappa"), py::arg("mesh") = 512);
}
