#pragma once

#include <cstdint>
#include <vector>

#include "rglue/grid.hpp"

namespace rglue::phantom {

struct Layer {
  double thickness_fraction = 1.0;  // of the total frame height, in (0, 1]
  double youngs_modulus_kpa = 20.0;
};

/// Separable point spread function. Axial taps live on a grid that is
/// `axial_upsample` times finer than the RF sampling; lateral taps are per
/// RF line. Both tap lists are centered and of odd length.
struct Psf {
  int axial_upsample = 8;
  std::vector<double> axial_taps;
  std::vector<double> lateral_taps;
};

/// Gaussian-windowed cosine pulse axially, Gaussian laterally, truncated at
/// three standard deviations. Periods and sigmas are in RF samples / lines.
/// The default period is a 7.27 MHz pulse sampled at 40 MHz.
Psf make_psf(double period_samples = 5.5, double axial_sigma_samples = 5.5 / 3.0,
             double lateral_sigma_lines = 2.0, int axial_upsample = 8);

struct PhantomSpec {
  int rows = 256;
  int cols = 64;
  double compression = 0.02;
  std::vector<Layer> layers{Layer{}};
  double scatterer_density = 2.0;  // scatterers per RF sample
  Psf psf = make_psf();
  std::uint64_t seed = 1;
  double peak_amplitude = 4.0;  // max |I1| after normalization

  /// Throws std::invalid_argument on the first violated invariant.
  void validate() const;
};

struct GroundTruth {
  DisplacementField displacement;
  StrainImage axial_strain;  // positive for compression
};

struct OutlierRegion {
  int row_start = 0;
  int row_end = 0;  // inclusive
  int col_start = 0;
  int col_end = 0;  // inclusive
};

/// Per-layer strains under uniform stress (springs in series):
/// stress = c * H / sum(h_k / E_k), strain_k = stress / E_k.
std::vector<double> layer_strains(const PhantomSpec& spec);

/// Axial displacement u(y) at continuous depth y (rows). Negative for
/// compression; row 0 is the fixed transducer face. Outside [0, rows) the
/// end layers are extended.
double axial_displacement_at(const PhantomSpec& spec, const std::vector<double>& strains,
                             double y);

GroundTruth ground_truth_displacement(const PhantomSpec& spec);

struct FramePair {
  RFFrame pre;   // I1
  RFFrame post;  // I2
  GroundTruth truth;
};

/// Seeded scatterer field convolved with the PSF, before and after moving every
/// scatterer by the ground-truth displacement. Both frames share one scale
/// factor chosen so that max|I1| = spec.peak_amplitude.
FramePair synthesize_pair(const PhantomSpec& spec);

/// Zero-mean Gaussian noise with sigma = max|frame| / 10^(psnr_db / 20).
RFFrame add_gaussian_noise(const RFFrame& frame, double psnr_db, std::uint64_t seed);

RFFrame inject_multiplicative_outlier(const RFFrame& frame, const OutlierRegion& region,
                                      double factor = 3.0);

/// Adds fraction * max|frame| (taken before modification) to every sample of
/// each listed column.
RFFrame inject_additive_line_outliers(const RFFrame& frame, const std::vector<int>& lines,
                                      double fraction);

}  // namespace rglue::phantom
