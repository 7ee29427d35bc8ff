#include "rglue/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace rglue::phantom {
namespace {

std::vector<double> gaussian_taps(double sigma, double step, double carrier_period) {
  const int half = static_cast<int>(std::ceil(3.0 * sigma / step));
  std::vector<double> taps;
  taps.reserve(static_cast<std::size_t>(2 * half + 1));
  for (int k = -half; k <= half; ++k) {
    const double t = k * step;
    double v = std::exp(-0.5 * t * t / (sigma * sigma));
    if (carrier_period > 0.0) v *= std::cos(2.0 * std::numbers::pi * t / carrier_period);
    taps.push_back(v);
  }
  return taps;
}

void check_odd(const std::vector<double>& taps, const char* what) {
  if (taps.empty() || taps.size() % 2 == 0) {
    throw std::invalid_argument(std::string(what) + " PSF taps must have odd length");
  }
}

// Bilinear splat of one scatterer onto the fine grid.
void splat(Grid& fine, double fy, double fx, double amplitude) {
  const int r0 = static_cast<int>(std::floor(fy));
  const int c0 = static_cast<int>(std::floor(fx));
  const double wy = fy - r0;
  const double wx = fx - c0;
  const auto add = [&](int r, int c, double w) {
    if (r >= 0 && r < fine.rows() && c >= 0 && c < fine.cols()) fine(r, c) += w * amplitude;
  };
  add(r0, c0, (1.0 - wy) * (1.0 - wx));
  add(r0, c0 + 1, (1.0 - wy) * wx);
  add(r0 + 1, c0, wy * (1.0 - wx));
  add(r0 + 1, c0 + 1, wy * wx);
}

struct Scatterer {
  double y;
  double x;
  double amplitude;
};

struct FineLayout {
  int pad_rows;  // coarse rows above and below the frame
  int pad_cols;
  int upsample;
};

Grid render(const PhantomSpec& spec, const FineLayout& lay, const std::vector<Scatterer>& pts,
            const std::vector<double>& strains, bool displaced) {
  const int m = spec.rows;
  const int n = spec.cols;
  const int U = lay.upsample;
  Grid fine((m + 2 * lay.pad_rows) * U, n + 2 * lay.pad_cols);
  for (const Scatterer& s : pts) {
    const double y = displaced ? s.y + axial_displacement_at(spec, strains, s.y) : s.y;
    splat(fine, (y + lay.pad_rows) * U, s.x + lay.pad_cols, s.amplitude);
  }

  const auto& ha = spec.psf.axial_taps;
  const auto& hl = spec.psf.lateral_taps;
  const int half_a = static_cast<int>(ha.size() / 2);
  const int half_l = static_cast<int>(hl.size() / 2);

  // Axial convolution evaluated only at the coarse output rows.
  Grid axial(m, fine.cols());
  for (int i = 0; i < m; ++i) {
    const int r = (i + lay.pad_rows) * U;
    for (int t = 0; t < static_cast<int>(ha.size()); ++t) {
      const int src = r - (t - half_a);
      if (src < 0 || src >= fine.rows()) continue;
      for (int c = 0; c < fine.cols(); ++c) axial(i, c) += ha[t] * fine(src, c);
    }
  }
  Grid out(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int t = 0; t < static_cast<int>(hl.size()); ++t) {
        const int c = j + lay.pad_cols - (t - half_l);
        if (c >= 0 && c < axial.cols()) acc += hl[t] * axial(i, c);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

Psf make_psf(double period_samples, double axial_sigma_samples, double lateral_sigma_lines,
             int axial_upsample) {
  if (axial_upsample < 1) throw std::invalid_argument("axial upsample must be >= 1");
  if (!(axial_sigma_samples > 0.0) || !(lateral_sigma_lines > 0.0)) {
    throw std::invalid_argument("PSF sigmas must be positive");
  }
  Psf psf;
  psf.axial_upsample = axial_upsample;
  psf.axial_taps = gaussian_taps(axial_sigma_samples, 1.0 / axial_upsample, period_samples);
  psf.lateral_taps = gaussian_taps(lateral_sigma_lines, 1.0, 0.0);
  return psf;
}

void PhantomSpec::validate() const {
  if (rows < 2 || cols < 2) throw std::invalid_argument("phantom needs at least 2x2 samples");
  if (!(compression >= 0.0 && compression <= 0.1)) {
    throw std::invalid_argument("compression must lie in [0, 0.1]");
  }
  if (layers.empty()) throw std::invalid_argument("phantom needs at least one layer");
  double total = 0.0;
  for (const Layer& l : layers) {
    if (!(l.thickness_fraction > 0.0 && l.thickness_fraction <= 1.0)) {
      throw std::invalid_argument("layer thickness fraction must lie in (0, 1]");
    }
    if (!(l.youngs_modulus_kpa > 0.0) || !std::isfinite(l.youngs_modulus_kpa)) {
      throw std::invalid_argument("layer modulus must be positive");
    }
    total += l.thickness_fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("layer thickness fractions must sum to 1");
  }
  if (!(scatterer_density > 0.0) || !std::isfinite(scatterer_density)) {
    throw std::invalid_argument("scatterer density must be positive");
  }
  if (psf.axial_upsample < 1) throw std::invalid_argument("axial upsample must be >= 1");
  if (!(peak_amplitude > 0.0) || !std::isfinite(peak_amplitude)) {
    throw std::invalid_argument("peak amplitude must be positive");
  }
  check_odd(psf.axial_taps, "axial");
  check_odd(psf.lateral_taps, "lateral");
}

std::vector<double> layer_strains(const PhantomSpec& spec) {
  spec.validate();
  // Heights as fractions of H; stress = c / sum(f_k / E_k).
  double compliance = 0.0;
  for (const Layer& l : spec.layers) compliance += l.thickness_fraction / l.youngs_modulus_kpa;
  const double stress = spec.compression / compliance;
  std::vector<double> strains;
  strains.reserve(spec.layers.size());
  for (const Layer& l : spec.layers) strains.push_back(stress / l.youngs_modulus_kpa);
  return strains;
}

double axial_displacement_at(const PhantomSpec& spec, const std::vector<double>& strains,
                             double y) {
  const double H = spec.rows;
  if (y <= 0.0) return -strains.front() * y;
  double top = 0.0;
  double u = 0.0;
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    const bool last = k + 1 == spec.layers.size();
    const double bottom = last ? H : top + spec.layers[k].thickness_fraction * H;
    if (y <= bottom || last) return u - strains[k] * (y - top);
    u -= strains[k] * (bottom - top);
    top = bottom;
  }
  return u;
}

GroundTruth ground_truth_displacement(const PhantomSpec& spec) {
  const auto strains = layer_strains(spec);
  const int m = spec.rows;
  const int n = spec.cols;
  GroundTruth gt{DisplacementField(m, n), StrainImage(m, n)};
  const double H = m;
  for (int i = 0; i < m; ++i) {
    const double a = axial_displacement_at(spec, strains, i);
    // Layer containing depth y = i.
    double top = 0.0;
    std::size_t layer = 0;
    for (; layer + 1 < spec.layers.size(); ++layer) {
      const double bottom = top + spec.layers[layer].thickness_fraction * H;
      if (i < bottom) break;
      top = bottom;
    }
    for (int j = 0; j < n; ++j) {
      gt.displacement.axial(i, j) = a;
      gt.axial_strain(i, j) = strains[layer];
    }
  }
  return gt;
}

FramePair synthesize_pair(const PhantomSpec& spec) {
  spec.validate();
  const auto strains = layer_strains(spec);
  const int m = spec.rows;
  const int n = spec.cols;
  const int U = spec.psf.axial_upsample;
  const int half_a = static_cast<int>(spec.psf.axial_taps.size() / 2);
  const int half_l = static_cast<int>(spec.psf.lateral_taps.size() / 2);
  const double max_strain = *std::max_element(strains.begin(), strains.end());

  FineLayout lay;
  lay.upsample = U;
  lay.pad_rows = (half_a + U - 1) / U + static_cast<int>(std::ceil(max_strain * m)) + 2;
  lay.pad_cols = half_l + 1;

  const double y_lo = -lay.pad_rows;
  const double y_hi = m + lay.pad_rows;
  const double x_lo = -lay.pad_cols;
  const double x_hi = n - 1 + lay.pad_cols;
  const auto count = static_cast<std::size_t>(
      std::llround(spec.scatterer_density * (y_hi - y_lo) * (x_hi - x_lo + 1)));

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uy(y_lo, y_hi);
  std::uniform_real_distribution<double> ux(x_lo, x_hi);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::vector<Scatterer> pts;
  pts.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double y = uy(rng);
    const double x = ux(rng);
    pts.push_back({y, x, amp(rng)});
  }

  Grid pre = render(spec, lay, pts, strains, false);
  Grid post = spec.compression == 0.0 ? pre : render(spec, lay, pts, strains, true);
  const double peak = pre.max_abs();
  if (peak > 0.0) {
    const double k = spec.peak_amplitude / peak;
    for (double& v : pre.values()) v *= k;
    for (double& v : post.values()) v *= k;
  }
  return FramePair{RFFrame(std::move(pre)), RFFrame(std::move(post)),
                   ground_truth_displacement(spec)};
}

RFFrame add_gaussian_noise(const RFFrame& frame, double psnr_db, std::uint64_t seed) {
  if (!std::isfinite(psnr_db)) throw std::invalid_argument("PSNR must be finite");
  const double sigma = frame.max_abs() / std::pow(10.0, psnr_db / 20.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Grid out = frame;
  for (double& v : out.values()) v += sigma * noise(rng);
  return RFFrame(std::move(out));
}

RFFrame inject_multiplicative_outlier(const RFFrame& frame, const OutlierRegion& r,
                                      double factor) {
  if (r.row_start < 0 || r.col_start < 0 || r.row_end < r.row_start ||
      r.col_end < r.col_start || r.row_end >= frame.rows() || r.col_end >= frame.cols()) {
    throw ShapeError("outlier region is empty or outside the frame");
  }
  Grid out = frame;
  for (int i = r.row_start; i <= r.row_end; ++i) {
    for (int j = r.col_start; j <= r.col_end; ++j) out(i, j) *= factor;
  }
  return RFFrame(std::move(out));
}

RFFrame inject_additive_line_outliers(const RFFrame& frame, const std::vector<int>& lines,
                                      double fraction) {
  for (int c : lines) {
    if (c < 0 || c >= frame.cols()) {
      throw ShapeError("outlier line index " + std::to_string(c) + " outside the frame");
    }
  }
  const double offset = fraction * frame.max_abs();
  std::vector<char> hit(static_cast<std::size_t>(frame.cols()), 0);
  for (int c : lines) hit[static_cast<std::size_t>(c)] = 1;
  Grid out = frame;
  for (int j = 0; j < frame.cols(); ++j) {
    if (!hit[static_cast<std::size_t>(j)]) continue;
    for (int i = 0; i < frame.rows(); ++i) out(i, j) += offset;
  }
  return RFFrame(std::move(out));
}

}  // namespace rglue::phantom
