#include "rglue/strain.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace rglue::strain {

StrainImage least_squares_strain(const Grid& u, int window_len, Axis axis) {
  const int extent = axis == Axis::axial ? u.rows() : u.cols();
  if (window_len < 3 || window_len % 2 == 0) {
    throw std::invalid_argument("least-squares window must be odd and >= 3");
  }
  if (window_len > extent) {
    throw std::invalid_argument("least-squares window " + std::to_string(window_len) +
                                " exceeds extent " + std::to_string(extent));
  }
  const int half = window_len / 2;
  // Weights of the OLS slope over x = 0..L-1: (x - mean) / sum (x - mean)^2.
  std::vector<double> wts(static_cast<std::size_t>(window_len));
  double sxx = 0.0;
  for (int k = 0; k < window_len; ++k) sxx += static_cast<double>((k - half) * (k - half));
  for (int k = 0; k < window_len; ++k) wts[static_cast<std::size_t>(k)] = (k - half) / sxx;

  StrainImage s(u.rows(), u.cols());
  for (int i = 0; i < u.rows(); ++i) {
    for (int j = 0; j < u.cols(); ++j) {
      const int pos = axis == Axis::axial ? i : j;
      const int start = std::clamp(pos - half, 0, extent - window_len);
      const auto at = [&](int k) {
        return axis == Axis::axial ? u(start + k, j) : u(i, start + k);
      };
      // Pairing mirrored samples keeps constant inputs at exactly zero.
      double slope = 0.0;
      for (int k = half + 1; k < window_len; ++k) {
        slope += wts[static_cast<std::size_t>(k)] * (at(k) - at(window_len - 1 - k));
      }
      s(i, j) = slope;
    }
  }
  return s;
}

StrainImage axial_strain(const DisplacementField& field, int window_len) {
  StrainImage s = least_squares_strain(field.axial, window_len, Axis::axial);
  for (double& v : s.values()) v = -v;
  return s;
}

StrainImage median_filter(const Grid& img, int k) {
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("median kernel size must be odd");
  const int half = k / 2;
  const int m = img.rows();
  const int n = img.cols();
  StrainImage out(m, n);
  std::vector<double> buf(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      std::size_t c = 0;
      for (int di = -half; di <= half; ++di) {
        for (int dj = -half; dj <= half; ++dj) {
          buf[c++] = img(std::clamp(i + di, 0, m - 1), std::clamp(j + dj, 0, n - 1));
        }
      }
      auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
      std::nth_element(buf.begin(), mid, buf.end());
      out(i, j) = *mid;
    }
  }
  return out;
}

}  // namespace rglue::strain
