#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "rglue/core.hpp"
#include "rglue/phantom.hpp"
#include "test_support.hpp"

using namespace rglue;
using namespace rglue::phantom;
using rglue::testing::random_grid;

namespace {

PhantomSpec small_spec(double c = 0.02) {
  PhantomSpec s;
  s.rows = 96;
  s.cols = 16;
  s.compression = c;
  return s;
}

}  // namespace

TEST(LayerStrains, SingleLayerEqualsCompression) {
  PhantomSpec s = small_spec(0.02);
  const auto e = layer_strains(s);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_DOUBLE_EQ(e[0], 0.02);
}

TEST(LayerStrains, TwoLayersInSeries) {
  PhantomSpec s = small_spec(0.04);
  s.layers = {{0.5, 20.0}, {0.5, 40.0}};
  const auto e = layer_strains(s);
  EXPECT_NEAR(e[0], 0.16 / 3.0, 1e-12);
  EXPECT_NEAR(e[1], 0.08 / 3.0, 1e-12);
  EXPECT_NEAR(e[0] * 20.0, e[1] * 40.0, 1e-12);  // equal stress
}

TEST(LayerStrains, WeightedMeanIsCompression) {
  PhantomSpec s = small_spec(0.04);
  s.layers = {{0.25, 20.0}, {0.25, 40.0}, {0.25, 20.0}, {0.25, 80.0}};
  const auto e = layer_strains(s);
  double mean = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) mean += s.layers[k].thickness_fraction * e[k];
  EXPECT_NEAR(mean, 0.04, 1e-12);
}

TEST(GroundTruth, HomogeneousDisplacementIsLinear) {
  const GroundTruth gt = ground_truth_displacement(small_spec(0.02));
  for (int i = 0; i < 96; ++i)
    for (int j = 0; j < 16; ++j) {
      EXPECT_NEAR(gt.displacement.axial(i, j), -0.02 * i, 1e-12);
      EXPECT_EQ(gt.displacement.lateral(i, j), 0.0);
      EXPECT_DOUBLE_EQ(gt.axial_strain(i, j), 0.02);
    }
}

TEST(GroundTruth, MatchesCumulativeLayerSum) {
  PhantomSpec s = small_spec(0.04);
  s.rows = 100;
  s.layers = {{0.5, 20.0}, {0.5, 40.0}};
  const GroundTruth gt = ground_truth_displacement(s);
  const double e0 = 0.16 / 3.0;
  const double e1 = 0.08 / 3.0;
  double u = 0.0;
  for (int i = 0; i < 100; ++i) {
    EXPECT_NEAR(gt.displacement.axial(i, 3), u, 1e-12) << i;
    EXPECT_NEAR(gt.axial_strain(i, 3), i < 50 ? e0 : e1, 1e-12) << i;
    u -= i < 50 ? e0 : e1;
  }
}

TEST(Synthesize, ZeroCompressionLeavesFrameUnchanged) {
  const FramePair p = synthesize_pair(small_spec(0.0));
  EXPECT_EQ(p.pre, p.post);
}

TEST(Synthesize, DeterministicPerSeedAndPeakNormalized) {
  PhantomSpec s = small_spec(0.02);
  s.peak_amplitude = 2.5;
  const FramePair a = synthesize_pair(s);
  const FramePair b = synthesize_pair(s);
  EXPECT_EQ(a.pre, b.pre);
  EXPECT_EQ(a.post, b.post);
  EXPECT_NEAR(a.pre.max_abs(), 2.5, 1e-12);
  s.seed = 2;
  EXPECT_NE(synthesize_pair(s).pre, a.pre);
}

TEST(Synthesize, PostFrameFollowsTrueDisplacement) {
  // Warping I2 back with the true field should reproduce I1 far better than
  // leaving it in place.
  PhantomSpec s = small_spec(0.03);
  s.rows = 160;
  const FramePair p = synthesize_pair(s);
  double err_true = 0.0;
  double err_zero = 0.0;
  for (int i = 20; i < 140; ++i)
    for (int j = 0; j < s.cols; ++j) {
      const double y = i + p.truth.displacement.axial(i, j);
      const double w = sample_bilinear(p.post, y, j).value;
      err_true += (p.pre(i, j) - w) * (p.pre(i, j) - w);
      err_zero += (p.pre(i, j) - p.post(i, j)) * (p.pre(i, j) - p.post(i, j));
    }
  EXPECT_LT(err_true, 0.1 * err_zero);
}

TEST(Synthesize, RejectsInvalidSpecs) {
  PhantomSpec s = small_spec();
  s.compression = 0.2;
  EXPECT_THROW(synthesize_pair(s), std::invalid_argument);
  s = small_spec();
  s.layers = {{0.5, 20.0}, {0.4, 20.0}};
  EXPECT_THROW(synthesize_pair(s), std::invalid_argument);
  s = small_spec();
  s.layers = {{1.0, 0.0}};
  EXPECT_THROW(synthesize_pair(s), std::invalid_argument);
  s = small_spec();
  s.peak_amplitude = 0.0;
  EXPECT_THROW(synthesize_pair(s), std::invalid_argument);
  s = small_spec();
  s.psf.axial_taps.push_back(0.0);
  EXPECT_THROW(synthesize_pair(s), std::invalid_argument);
  EXPECT_THROW(make_psf(5.5, 0.0), std::invalid_argument);
}

TEST(Noise, SigmaFollowsPsnr) {
  RFFrame f(Grid(1000, 1000, 0.0));
  f(0, 0) = 1.0;
  const RFFrame g = add_gaussian_noise(f, 20.0, 7);
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t k = 1; k < g.size(); ++k) {
    sum += g.values()[k];
    sq += g.values()[k] * g.values()[k];
  }
  const double n = static_cast<double>(g.size() - 1);
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  EXPECT_NEAR(sd, 0.1, 0.002);
  EXPECT_EQ(add_gaussian_noise(f, 20.0, 7), g);
}

TEST(Noise, VeryHighPsnrIsNegligible) {
  const RFFrame f(random_grid(20, 10, 3));
  const RFFrame g = add_gaussian_noise(f, 300.0, 1);
  for (std::size_t k = 0; k < f.size(); ++k) EXPECT_NEAR(g.values()[k], f.values()[k], 1e-12);
}

TEST(MultiplicativeOutlier, ScalesOnlyTheRegion) {
  const RFFrame f(random_grid(12, 9, 5));
  const OutlierRegion r{3, 6, 2, 4};
  const RFFrame g = inject_multiplicative_outlier(f, r, 3.0);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 9; ++j) {
      const bool in = i >= 3 && i <= 6 && j >= 2 && j <= 4;
      if (in) {
        EXPECT_DOUBLE_EQ(g(i, j), 3.0 * f(i, j));
      } else {
        EXPECT_EQ(g(i, j), f(i, j));
      }
    }
  EXPECT_EQ(inject_multiplicative_outlier(f, r, 1.0), f);
}

TEST(MultiplicativeOutlier, SingleSampleAndFullFrame) {
  Grid base(4, 4, 1.0);
  base(2, 1) = 2.0;
  const RFFrame f(base);
  EXPECT_EQ(inject_multiplicative_outlier(f, {2, 2, 1, 1}, 3.0)(2, 1), 6.0);
  const RFFrame all = inject_multiplicative_outlier(f, {0, 3, 0, 3}, 3.0);
  for (std::size_t k = 0; k < f.size(); ++k) EXPECT_EQ(all.values()[k], 3.0 * f.values()[k]);
  EXPECT_THROW(inject_multiplicative_outlier(f, {0, 4, 0, 0}, 3.0), ShapeError);
  EXPECT_THROW(inject_multiplicative_outlier(f, {2, 1, 0, 0}, 3.0), ShapeError);
}

TEST(LineOutliers, AddFractionOfPeakToListedColumns) {
  Grid base = random_grid(8, 12, 2, -1.0, 1.0);
  base(0, 0) = 10.0;
  const RFFrame f(base);
  const RFFrame g = inject_additive_line_outliers(f, {3}, 0.3);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 12; ++j) {
      if (j == 3) {
        EXPECT_NEAR(g(i, j), f(i, j) + 3.0, 1e-12);
      } else {
        EXPECT_EQ(g(i, j), f(i, j));
      }
    }
  EXPECT_EQ(inject_additive_line_outliers(f, {3, 5}, 0.0), f);
  EXPECT_THROW(inject_additive_line_outliers(f, {12}, 0.3), ShapeError);
}

TEST(LineOutliers, TenLinesTouchTenColumns) {
  const RFFrame f(random_grid(8, 40, 4));
  std::vector<int> lines;
  for (int k = 0; k < 10; ++k) lines.push_back(20 + 2 * k);
  const RFFrame g = inject_additive_line_outliers(f, lines, 0.3);
  int changed = 0;
  for (int j = 0; j < 40; ++j) {
    bool any = false;
    for (int i = 0; i < 8; ++i) any = any || g(i, j) != f(i, j);
    changed += any;
  }
  EXPECT_EQ(changed, 10);
}
