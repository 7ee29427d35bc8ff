#pragma once

#include <vector>

#include "rglue/grid.hpp"

namespace rglue {

/// Central differences in the interior, forward/backward differences on the
/// first/last row and column.
GradientPair gradients(const Grid& frame);

struct BilinearSample {
  double value = 0.0;
  bool clamped = false;
};

/// Bilinear interpolation at (y, x) after clamping to [0, m-1]×[0, n-1].
BilinearSample sample_bilinear(const Grid& field, double y, double x);

/// First and second level derivative grids of the post-deformation frame,
/// computed once on the integer grid.
struct FrameDerivatives {
  GradientPair grad;       // I2,a (axial) and I2,l (lateral)
  GradientPair grad_of_y;  // axial/lateral derivatives of the axial gradient
  GradientPair grad_of_x;  // axial/lateral derivatives of the lateral gradient

  static FrameDerivatives of(const Grid& frame);
};

/// Everything the linearized data terms need at (i + a, j + l).
/// `grad_y` and `grad_x` are the warped components of the gradient of I2;
/// `grad_y` coincides with `deriv_a` but is kept separate for readability of
/// the assembly code.
struct WarpedSample {
  double value = 0.0;     // I2'
  double deriv_a = 0.0;   // I2,a'
  double deriv_l = 0.0;   // I2,l'
  double grad_y = 0.0;    // grad I2,y'
  double grad_x = 0.0;    // grad I2,x'
  double grad_y_a = 0.0;
  double grad_y_l = 0.0;
  double grad_x_a = 0.0;
  double grad_x_l = 0.0;
  bool clamped = false;
};

struct WarpedQuantities {
  int rows = 0;
  int cols = 0;
  std::vector<WarpedSample> samples;  // row-major

  const WarpedSample& at(int i, int j) const {
    return samples[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) +
                   static_cast<std::size_t>(j)];
  }
};

WarpedQuantities warped_quantities(const Grid& I2, const FrameDerivatives& derivs,
                                   const DisplacementField& disp, int threads = 1);

}  // namespace rglue
