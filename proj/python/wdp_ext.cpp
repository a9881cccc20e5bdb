// Copyright 2026 The WDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wdp/channel.hpp"
#include "wdp/commands.hpp"
#include "wdp/dp.hpp"
#include "wdp/experiment.hpp"
#include "wdp/nets.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_wdp, m) {
  m.doc() = "Wiretap semantic transmission with learned DP-style latent protection";

  py::register_exception<wdp::InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<wdp::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<wdp::MissingArtifact>(m, "MissingArtifact", PyExc_FileNotFoundError);
  py::register_exception<wdp::DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<wdp::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<wdp::GeneratorSpec>(m, "GeneratorSpec")
      .def(py::init<>())
      .def_readwrite("d", &wdp::GeneratorSpec::d)
      .def_readwrite("m", &wdp::GeneratorSpec::m)
      .def_readwrite("k", &wdp::GeneratorSpec::k)
      .def_readwrite("shared_count", &wdp::GeneratorSpec::shared_count)
      .def_readwrite("seed", &wdp::GeneratorSpec::seed)
      .def_readwrite("local_scale", &wdp::GeneratorSpec::local_scale)
      .def_readwrite("shared_scale", &wdp::GeneratorSpec::shared_scale);

  py::class_<wdp::GeneratorModel, std::shared_ptr<wdp::GeneratorModel>>(m, "GeneratorModel")
      .def(py::init<const wdp::GeneratorSpec&>(), py::arg("spec") = wdp::GeneratorSpec{})
      .def_property_readonly("d", &wdp::GeneratorModel::d)
      .def_property_readonly("m", &wdp::GeneratorModel::m)
      .def_property_readonly("k", &wdp::GeneratorModel::k)
      .def_property_readonly("lipschitz", &wdp::GeneratorModel::lipschitz)
      .def_property_readonly("synthesis", &wdp::GeneratorModel::synthesis)
      .def("generate",
           [](const wdp::GeneratorModel& g, const wdp::Matrix& codes) { return wdp::generate(g, codes).pixels; },
           py::arg("codes"))
      .def(
          "invert",
          [](const wdp::GeneratorModel& g, const wdp::Vector& pixels, int max_iters, double step_size, double tol) {
            wdp::InversionConfig cfg;
            cfg.max_iters = max_iters;
            cfg.step_size = step_size;
            cfg.tol = tol;
            return wdp::invert(g, wdp::Image{pixels}, cfg).codes;
          },
          py::arg("pixels"), py::arg("max_iters") = 2000, py::arg("step_size") = 400.0, py::arg("tol") = 1e-8);

  m.def(
      "compute_clip_bounds",
      [](const std::vector<wdp::Matrix>& data, double q_low, double q_high) {
        const auto b = wdp::compute_clip_bounds(data, q_low, q_high);
        return py::make_tuple(b.a, b.b);
      },
      py::arg("dataset"), py::arg("q_low") = 0.005, py::arg("q_high") = 0.995);
  m.def("sensitivity_closed_form",
        [](double a, double b, long long n) { return wdp::sensitivity_closed_form({a, b}, n); }, py::arg("a"),
        py::arg("b"), py::arg("n"));
  m.def(
      "sensitivity_bruteforce",
      [](const std::vector<wdp::Matrix>& data) { return wdp::sensitivity_bruteforce(data); },
      py::arg("clipped_dataset"));
  m.def("sample_laplace", &wdp::sample_laplace, py::arg("count"), py::arg("scale"), py::arg("seed"));
  m.def(
      "apply_dp",
      [](const wdp::Matrix& z, double epsilon, double delta_f, std::uint64_t seed) {
        return wdp::apply_dp(z, wdp::DpParams(epsilon, delta_f, z.size()), seed);
      },
      py::arg("z_private"), py::arg("epsilon"), py::arg("delta_f"), py::arg("seed"));
  m.def(
      "fit_laplace_scale",
      [](const wdp::Vector& samples) {
        return wdp::fit_laplace_scale({samples.data(), static_cast<std::size_t>(samples.size())}).scale_hat;
      },
      py::arg("samples"));
  m.def(
      "approximate_epsilon",
      [](double scale_hat, double delta_f) { return wdp::approximate_epsilon({0.0, scale_hat, 1}, delta_f); },
      py::arg("scale_hat"), py::arg("delta_f"));

  m.def(
      "transmit",
      [](const wdp::Vector& z2, double snr_db, double power, std::uint64_t seed) {
        return wdp::send_normalized(z2, wdp::ChannelConfig{snr_db, power, 0}, seed);
      },
      py::arg("z2"), py::arg("snr_db") = 20.0, py::arg("power") = 1.0, py::arg("seed") = 0);

  m.def(
      "lr_at",
      [](double epoch, double lr0, double lr_min, double t0, double t_mult) {
        return wdp::lr_at({lr0, lr_min, t0, t_mult}, epoch);
      },
      py::arg("epoch"), py::arg("lr0") = 3e-4, py::arg("lr_min") = 0.0, py::arg("t0") = 10.0,
      py::arg("t_mult") = 2.0);

  m.def(
      "resolve_config",
      [](const std::optional<std::string>& text, const std::map<std::string, std::string>& flags) {
        std::vector<std::pair<std::string, std::string>> f(flags.begin(), flags.end());
        return wdp::resolve_config(text, f).resolved_text();
      },
      py::arg("text") = std::nullopt, py::arg("flags") = std::map<std::string, std::string>{},
      "Resolved configuration as key = value text.");

  m.def(
      "run_sweep",
      [](const std::string& text, const std::map<std::string, std::string>& flags) {
        std::vector<std::pair<std::string, std::string>> f(flags.begin(), flags.end());
        const wdp::RunConfig cfg = wdp::resolve_config(text, f);
        py::gil_scoped_release release;
        return wdp::run_sweep(cfg).to_csv();
      },
      py::arg("text") = "", py::arg("flags") = std::map<std::string, std::string>{},
      "Runs a sweep and returns the report CSV.");

  m.def(
      "main",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = wdp::cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("argv"), "Runs the command line with argv (argv[0] is the program name).");
}
