#include "rglue/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rglue::metrics {

std::string Window::str() const {
  return std::to_string(row_start) + ":" + std::to_string(row_end) + "," +
         std::to_string(col_start) + ":" + std::to_string(col_end);
}

void validate_window(const Grid& img, const Window& w) {
  if (w.row_start < 0 || w.col_start < 0 || w.row_end < w.row_start ||
      w.col_end < w.col_start || w.row_end >= img.rows() || w.col_end >= img.cols()) {
    throw ShapeError("window " + w.str() + " outside image");
  }
  if (w.area() < 2) throw ShapeError("window " + w.str() + " needs at least 2 samples");
}

WindowStats window_stats(const Grid& img, const Window& w) {
  validate_window(img, w);
  double sum = 0.0;
  for (int i = w.row_start; i <= w.row_end; ++i)
    for (int j = w.col_start; j <= w.col_end; ++j) sum += img(i, j);
  const double N = w.area();
  WindowStats s;
  s.mean = sum / N;
  double ss = 0.0;
  for (int i = w.row_start; i <= w.row_end; ++i)
    for (int j = w.col_start; j <= w.col_end; ++j) ss += (img(i, j) - s.mean) * (img(i, j) - s.mean);
  s.stddev = std::sqrt(ss / N);
  return s;
}

double rmse(const Grid& estimate, const Grid& truth) {
  require_same_shape(estimate, truth, "rmse");
  if (estimate.empty()) throw ShapeError("rmse of empty images");
  double ss = 0.0;
  const auto e = estimate.values();
  const auto t = truth.values();
  for (std::size_t k = 0; k < e.size(); ++k) ss += (e[k] - t[k]) * (e[k] - t[k]);
  return std::sqrt(ss / static_cast<double>(e.size()));
}

double snr(const Grid& img, const Window& w) {
  const WindowStats s = window_stats(img, w);
  if (s.stddev == 0.0) throw UndefinedMetric("SNR undefined: zero variance in " + w.str());
  return s.mean / s.stddev;
}

double cnr(const Grid& img, const Window& target, const Window& background) {
  const WindowStats t = window_stats(img, target);
  const WindowStats b = window_stats(img, background);
  const double noise = b.stddev * b.stddev + t.stddev * t.stddev;
  if (noise == 0.0) {
    throw UndefinedMetric("CNR undefined: zero variance in " + target.str() + " and " +
                          background.str());
  }
  const double contrast = b.mean - t.mean;
  return std::sqrt(2.0 * contrast * contrast / noise);
}

CnrHistogram cnr_histogram(const Grid& img, const std::vector<Window>& targets,
                           const std::vector<Window>& backgrounds, int bins, double lo,
                           double hi) {
  if (targets.empty() || backgrounds.empty()) {
    throw std::invalid_argument("CNR histogram needs target and background windows");
  }
  if (bins < 1) throw std::invalid_argument("CNR histogram needs at least one bin");
  CnrHistogram h;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    for (std::size_t b = 0; b < backgrounds.size(); ++b) {
      try {
        h.values.push_back(cnr(img, targets[t], backgrounds[b]));
        h.target_of.push_back(static_cast<int>(t));
        h.background_of.push_back(static_cast<int>(b));
      } catch (const UndefinedMetric&) {
        ++h.excluded;
      }
    }
  }
  if (!(hi > lo) && !h.values.empty()) {
    lo = *std::min_element(h.values.begin(), h.values.end());
    hi = *std::max_element(h.values.begin(), h.values.end());
    if (!(hi > lo)) hi = lo + 1.0;
  } else if (!(hi > lo)) {
    hi = lo + 1.0;
  }
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k <= bins; ++k) h.edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  double sum = 0.0;
  for (double v : h.values) {
    int k = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
    k = std::clamp(k, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(k)];
    sum += v;
  }
  h.mean = h.values.empty() ? std::numeric_limits<double>::quiet_NaN()
                            : sum / static_cast<double>(h.values.size());
  return h;
}

}  // namespace rglue::metrics
