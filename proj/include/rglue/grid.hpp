#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rglue {

/// Shape or index violation in caller-supplied data.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense m×n grid of doubles, row-major. Row index i is axial (depth),
/// column index j is lateral (RF line).
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, double fill = 0.0);
  Grid(int rows, int cols, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int i, int j) { return data_[index(i, j)]; }
  double operator()(int i, int j) const { return data_[index(i, j)]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Grid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double max_abs() const;
  double mean_abs() const;
  bool all_finite() const;

  bool operator==(const Grid& other) const = default;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(j);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Throws ShapeError naming `what` when the two grids differ in shape.
void require_same_shape(const Grid& a, const Grid& b, const std::string& what);

/// One RF frame. Needs at least 2×2 samples and finite values.
class RFFrame : public Grid {
 public:
  RFFrame() = default;
  explicit RFFrame(Grid samples);
  RFFrame(int rows, int cols, std::vector<double> values);
};

/// Strain values with the same shape as the displacement field they came from.
class StrainImage : public Grid {
 public:
  StrainImage() = default;
  explicit StrainImage(Grid values) : Grid(std::move(values)) {}
  StrainImage(int rows, int cols, double fill = 0.0) : Grid(rows, cols, fill) {}
};

struct GradientPair {
  Grid axial;    // d/di
  Grid lateral;  // d/dj
};

/// Per-sample axial and lateral displacement in samples. The interleaved
/// vector form is [a(0,0), l(0,0), a(0,1), l(0,1), ...] in row-major order.
struct DisplacementField {
  Grid axial;
  Grid lateral;

  DisplacementField() = default;
  DisplacementField(int rows, int cols)
      : axial(rows, cols), lateral(rows, cols) {}
  DisplacementField(Grid a, Grid l);

  int rows() const { return axial.rows(); }
  int cols() const { return axial.cols(); }

  Eigen::VectorXd interleaved() const;
  static DisplacementField from_interleaved(int rows, int cols,
                                            const Eigen::VectorXd& d);
  void add_interleaved(const Eigen::VectorXd& delta);
};

}  // namespace rglue
