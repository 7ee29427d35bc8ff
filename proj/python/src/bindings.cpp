#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <tuple>

#include "rglue/core.hpp"
#include "rglue/dp_init.hpp"
#include "rglue/metrics.hpp"
#include "rglue/phantom.hpp"
#include "rglue/pipeline.hpp"
#include "rglue/solver.hpp"
#include "rglue/strain.hpp"

namespace py = pybind11;
using namespace rglue;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Grid to_grid(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
  const auto rows = static_cast<int>(a.shape(0));
  const auto cols = static_cast<int>(a.shape(1));
  return Grid(rows, cols, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Grid& g) {
  Array out({g.rows(), g.cols()});
  std::copy(g.data().begin(), g.data().end(), out.mutable_data());
  return out;
}

py::tuple field_to_tuple(const DisplacementField& d) {
  return py::make_tuple(to_array(d.axial), to_array(d.lateral));
}

DisplacementField field_from(const Array& axial, const Array& lateral) {
  DisplacementField d;
  d.axial = to_grid(axial);
  d.lateral = to_grid(lateral);
  require_same_shape(d.axial, d.lateral, "displacement");
  return d;
}

metrics::Window window_from(const std::tuple<int, int, int, int>& w) {
  return {std::get<0>(w), std::get<1>(w), std::get<2>(w), std::get<3>(w)};
}

dp::DPParams dp_params(const Grid& I1, std::optional<int> axial_range,
                       std::optional<int> lateral_range, std::optional<double> weight) {
  dp::DPParams p = dp::DPParams::defaults_for(I1);
  if (axial_range) p.axial_range = *axial_range;
  if (lateral_range) p.lateral_range = *lateral_range;
  if (weight) p.smoothness_weight = *weight;
  return p;
}

}  // namespace

PYBIND11_MODULE(_rglue, m) {
  m.doc() = "Robust displacement estimation between RF frames";

  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<metrics::UndefinedMetric>(m, "UndefinedMetric", PyExc_ArithmeticError);
  py::register_exception<solver::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<solver::SolverParams>(m, "SolverParams")
      .def(py::init<>())
      .def_readwrite("alpha1", &solver::SolverParams::alpha1)
      .def_readwrite("alpha2", &solver::SolverParams::alpha2)
      .def_readwrite("beta1", &solver::SolverParams::beta1)
      .def_readwrite("beta2", &solver::SolverParams::beta2)
      .def_readwrite("gamma", &solver::SolverParams::gamma)
      .def_readwrite("lambda_", &solver::SolverParams::lambda)
      .def_readwrite("outer_iterations", &solver::SolverParams::outer_iterations)
      .def_readwrite("cg_tolerance", &solver::SolverParams::cg_tolerance)
      .def_readwrite("cg_max_iterations", &solver::SolverParams::cg_max_iterations)
      .def_readwrite("glue_mode", &solver::SolverParams::glue_mode)
      .def_readwrite("threads", &solver::SolverParams::threads);

  m.def("gradients", [](const Array& frame) {
    const GradientPair g = gradients(to_grid(frame));
    return py::make_tuple(to_array(g.axial), to_array(g.lateral));
  }, py::arg("frame"), "Central-difference (axial, lateral) gradients.");

  m.def("sample_bilinear", [](const Array& field, double y, double x) {
    const BilinearSample s = sample_bilinear(to_grid(field), y, x);
    return py::make_tuple(s.value, s.clamped);
  }, py::arg("field"), py::arg("y"), py::arg("x"));

  m.def("synthesize_pair",
        [](int rows, int cols, double compression,
           const std::vector<std::pair<double, double>>& layers, std::uint64_t seed,
           double peak_amplitude) {
          phantom::PhantomSpec spec;
          spec.rows = rows;
          spec.cols = cols;
          spec.compression = compression;
          spec.seed = seed;
          spec.peak_amplitude = peak_amplitude;
          if (!layers.empty()) {
            spec.layers.clear();
            for (const auto& [frac, kpa] : layers) spec.layers.push_back({frac, kpa});
          }
          const phantom::FramePair p = phantom::synthesize_pair(spec);
          py::dict out;
          out["pre"] = to_array(p.pre);
          out["post"] = to_array(p.post);
          out["axial_displacement"] = to_array(p.truth.displacement.axial);
          out["lateral_displacement"] = to_array(p.truth.displacement.lateral);
          out["strain"] = to_array(p.truth.axial_strain);
          return out;
        },
        py::arg("rows") = 256, py::arg("cols") = 64, py::arg("compression") = 0.02,
        py::arg("layers") = std::vector<std::pair<double, double>>{}, py::arg("seed") = 1,
        py::arg("peak_amplitude") = 4.0,
        "Simulated pre/post frames with ground truth. layers: [(fraction, kPa), ...].");

  m.def("add_gaussian_noise", [](const Array& frame, double psnr_db, std::uint64_t seed) {
    return to_array(phantom::add_gaussian_noise(RFFrame(to_grid(frame)), psnr_db, seed));
  }, py::arg("frame"), py::arg("psnr_db"), py::arg("seed"));

  m.def("inject_multiplicative_outlier",
        [](const Array& frame, const std::tuple<int, int, int, int>& region, double factor) {
          const auto w = window_from(region);
          return to_array(phantom::inject_multiplicative_outlier(
              RFFrame(to_grid(frame)), {w.row_start, w.row_end, w.col_start, w.col_end}, factor));
        },
        py::arg("frame"), py::arg("region"), py::arg("factor") = 3.0,
        "region = (row_start, row_end, col_start, col_end), inclusive.");

  m.def("inject_additive_line_outliers",
        [](const Array& frame, const std::vector<int>& lines, double fraction) {
          return to_array(
              phantom::inject_additive_line_outliers(RFFrame(to_grid(frame)), lines, fraction));
        },
        py::arg("frame"), py::arg("lines"), py::arg("fraction"));

  m.def("dp_displacement",
        [](const Array& I1, const Array& I2, std::optional<int> axial_range,
           std::optional<int> lateral_range, std::optional<double> weight) {
          const Grid a = to_grid(I1);
          return field_to_tuple(
              dp::dp_displacement(a, to_grid(I2), dp_params(a, axial_range, lateral_range, weight)));
        },
        py::arg("I1"), py::arg("I2"), py::arg("axial_range") = py::none(),
        py::arg("lateral_range") = py::none(), py::arg("smoothness_weight") = py::none(),
        "Integer (axial, lateral) displacement. Unset parameters use frame-based defaults.");

  m.def("rglue_refine",
        [](const Array& I1, const Array& I2, const Array& axial, const Array& lateral,
           const solver::SolverParams& params) {
          const solver::RefineResult r = solver::rglue_refine(
              RFFrame(to_grid(I1)), RFFrame(to_grid(I2)), field_from(axial, lateral), params);
          return py::make_tuple(to_array(r.displacement.axial), to_array(r.displacement.lateral),
                                to_array(r.weights.theta()));
        },
        py::arg("I1"), py::arg("I2"), py::arg("axial"), py::arg("lateral"),
        py::arg("params") = solver::SolverParams{},
        "Refined (axial, lateral, theta) from an initial displacement.");

  m.def("estimate",
        [](const Array& I1, const Array& I2, const solver::SolverParams& params, int window) {
          const RFFrame a(to_grid(I1));
          const pipeline::EstimateResult r = pipeline::estimate(
              a, RFFrame(to_grid(I2)), dp::DPParams::defaults_for(a), params, window);
          py::dict out;
          out["axial"] = to_array(r.refined.displacement.axial);
          out["lateral"] = to_array(r.refined.displacement.lateral);
          out["theta"] = to_array(r.refined.weights.theta());
          out["strain"] = to_array(r.strain);
          return out;
        },
        py::arg("I1"), py::arg("I2"), py::arg("params") = solver::SolverParams{},
        py::arg("window") = 3);

  m.def("least_squares_strain", [](const Array& u, int window, bool axial) {
    return to_array(strain::least_squares_strain(
        to_grid(u), window, axial ? strain::Axis::axial : strain::Axis::lateral));
  }, py::arg("component"), py::arg("window"), py::arg("axial") = true);

  m.def("median_filter", [](const Array& img, int k) {
    return to_array(strain::median_filter(to_grid(img), k));
  }, py::arg("image"), py::arg("k"));

  m.def("rmse", [](const Array& e, const Array& t) { return metrics::rmse(to_grid(e), to_grid(t)); },
        py::arg("estimate"), py::arg("truth"));
  m.def("snr", [](const Array& img, const std::tuple<int, int, int, int>& w) {
    return metrics::snr(to_grid(img), window_from(w));
  }, py::arg("image"), py::arg("window"));
  m.def("cnr",
        [](const Array& img, const std::tuple<int, int, int, int>& t,
           const std::tuple<int, int, int, int>& b) {
          return metrics::cnr(to_grid(img), window_from(t), window_from(b));
        },
        py::arg("image"), py::arg("target"), py::arg("background"));
}
