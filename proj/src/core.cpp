#include "rglue/core.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace rglue {

GradientPair gradients(const Grid& f) {
  const int m = f.rows();
  const int n = f.cols();
  if (m < 2 || n < 2) throw ShapeError("gradients need at least 2x2 samples");
  GradientPair g{Grid(m, n), Grid(m, n)};
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == 0) {
        g.axial(i, j) = f(1, j) - f(0, j);
      } else if (i == m - 1) {
        g.axial(i, j) = f(m - 1, j) - f(m - 2, j);
      } else {
        g.axial(i, j) = 0.5 * (f(i + 1, j) - f(i - 1, j));
      }
      if (j == 0) {
        g.lateral(i, j) = f(i, 1) - f(i, 0);
      } else if (j == n - 1) {
        g.lateral(i, j) = f(i, n - 1) - f(i, n - 2);
      } else {
        g.lateral(i, j) = 0.5 * (f(i, j + 1) - f(i, j - 1));
      }
    }
  }
  return g;
}

BilinearSample sample_bilinear(const Grid& field, double y, double x) {
  const double ymax = field.rows() - 1;
  const double xmax = field.cols() - 1;
  BilinearSample s;
  // NaN compares false everywhere and would slip through the clamp.
  if (!(y >= 0.0 && y <= ymax)) {
    s.clamped = true;
    y = std::isnan(y) ? 0.0 : std::clamp(y, 0.0, ymax);
  }
  if (!(x >= 0.0 && x <= xmax)) {
    s.clamped = true;
    x = std::isnan(x) ? 0.0 : std::clamp(x, 0.0, xmax);
  }
  int i0 = static_cast<int>(std::floor(y));
  int j0 = static_cast<int>(std::floor(x));
  i0 = std::min(i0, field.rows() - 2);
  j0 = std::min(j0, field.cols() - 2);
  const double fy = y - i0;
  const double fx = x - j0;
  const double top = (1.0 - fx) * field(i0, j0) + fx * field(i0, j0 + 1);
  const double bot = (1.0 - fx) * field(i0 + 1, j0) + fx * field(i0 + 1, j0 + 1);
  s.value = (1.0 - fy) * top + fy * bot;
  return s;
}

FrameDerivatives FrameDerivatives::of(const Grid& frame) {
  FrameDerivatives d;
  d.grad = gradients(frame);
  d.grad_of_y = gradients(d.grad.axial);
  d.grad_of_x = gradients(d.grad.lateral);
  return d;
}

WarpedQuantities warped_quantities(const Grid& I2, const FrameDerivatives& derivs,
                                   const DisplacementField& disp, int threads) {
  require_same_shape(I2, disp.axial, "warped_quantities");
  const int m = I2.rows();
  const int n = I2.cols();
  WarpedQuantities w;
  w.rows = m;
  w.cols = n;
  w.samples.resize(I2.size());
  detail::parallel_for(m, threads, [&](int row_begin, int row_end) {
    for (int i = row_begin; i < row_end; ++i) {
      for (int j = 0; j < n; ++j) {
        const double y = i + disp.axial(i, j);
        const double x = j + disp.lateral(i, j);
        WarpedSample& s = w.samples[static_cast<std::size_t>(i) * n + j];
        const BilinearSample v = sample_bilinear(I2, y, x);
        s.value = v.value;
        s.clamped = v.clamped;
        s.deriv_a = sample_bilinear(derivs.grad.axial, y, x).value;
        s.deriv_l = sample_bilinear(derivs.grad.lateral, y, x).value;
        s.grad_y = s.deriv_a;
        s.grad_x = s.deriv_l;
        s.grad_y_a = sample_bilinear(derivs.grad_of_y.axial, y, x).value;
        s.grad_y_l = sample_bilinear(derivs.grad_of_y.lateral, y, x).value;
        s.grad_x_a = sample_bilinear(derivs.grad_of_x.axial, y, x).value;
        s.grad_x_l = sample_bilinear(derivs.grad_of_x.lateral, y, x).value;
      }
    }
  });
  return w;
}

}  // namespace rglue
