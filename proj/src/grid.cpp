#include "rglue/grid.hpp"

#include <algorithm>
#include <cmath>

namespace rglue {

Grid::Grid(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw ShapeError("grid dimensions must be non-negative");
  data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill);
}

Grid::Grid(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (rows < 0 || cols < 0) throw ShapeError("grid dimensions must be non-negative");
  if (data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw ShapeError("grid value count " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

double Grid::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Grid::mean_abs() const {
  if (data_.empty()) return 0.0;
  double s = 0.0;
  for (double v : data_) s += std::abs(v);
  return s / static_cast<double>(data_.size());
}

bool Grid::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Grid& a, const Grid& b, const std::string& what) {
  if (!a.same_shape(b)) {
    throw ShapeError(what + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                     "x" + std::to_string(b.cols()));
  }
}

RFFrame::RFFrame(Grid samples) : Grid(std::move(samples)) {
  if (rows() < 2 || cols() < 2) {
    throw ShapeError("RF frame needs at least 2x2 samples");
  }
  if (!all_finite()) throw std::invalid_argument("RF frame contains non-finite samples");
}

RFFrame::RFFrame(int rows, int cols, std::vector<double> values)
    : RFFrame(Grid(rows, cols, std::move(values))) {}

DisplacementField::DisplacementField(Grid a, Grid l)
    : axial(std::move(a)), lateral(std::move(l)) {
  require_same_shape(axial, lateral, "displacement field");
}

Eigen::VectorXd DisplacementField::interleaved() const {
  const auto av = axial.values();
  const auto lv = lateral.values();
  Eigen::VectorXd d(2 * static_cast<Eigen::Index>(av.size()));
  for (std::size_t k = 0; k < av.size(); ++k) {
    d[2 * k] = av[k];
    d[2 * k + 1] = lv[k];
  }
  return d;
}

DisplacementField DisplacementField::from_interleaved(int rows, int cols,
                                                      const Eigen::VectorXd& d) {
  DisplacementField f(rows, cols);
  if (d.size() != 2 * static_cast<Eigen::Index>(f.axial.size())) {
    throw ShapeError("interleaved displacement vector has wrong length");
  }
  auto av = f.axial.values();
  auto lv = f.lateral.values();
  for (std::size_t k = 0; k < av.size(); ++k) {
    av[k] = d[2 * k];
    lv[k] = d[2 * k + 1];
  }
  return f;
}

void DisplacementField::add_interleaved(const Eigen::VectorXd& delta) {
  auto av = axial.values();
  auto lv = lateral.values();
  if (delta.size() != 2 * static_cast<Eigen::Index>(av.size())) {
    throw ShapeError("interleaved displacement update has wrong length");
  }
  for (std::size_t k = 0; k < av.size(); ++k) {
    av[k] += delta[2 * k];
    lv[k] += delta[2 * k + 1];
  }
}

}  // namespace rglue
