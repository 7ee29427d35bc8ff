#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "rglue/grid.hpp"

namespace rglue::metrics {

/// SNR/CNR whose denominator is zero.
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Window {
  int row_start = 0;
  int row_end = 0;  // inclusive
  int col_start = 0;
  int col_end = 0;  // inclusive

  int area() const { return (row_end - row_start + 1) * (col_end - col_start + 1); }
  std::string str() const;
};

/// Throws ShapeError unless the window lies inside `img` and covers >= 2 samples.
void validate_window(const Grid& img, const Window& w);

struct WindowStats {
  double mean = 0.0;
  double stddev = 0.0;  // population (divisor N)
};

WindowStats window_stats(const Grid& img, const Window& w);

double rmse(const Grid& estimate, const Grid& truth);

/// mean / std over the window.
double snr(const Grid& img, const Window& w);

/// sqrt(2 (mean_b - mean_t)^2 / (std_b^2 + std_t^2)).
double cnr(const Grid& img, const Window& target, const Window& background);

struct CnrHistogram {
  std::vector<double> values;    // one per defined target×background pair
  std::vector<int> target_of;    // target index per value
  std::vector<int> background_of;
  std::vector<double> edges;     // bins + 1 edges
  std::vector<int> counts;       // bins
  int excluded = 0;              // pairs with undefined CNR
  double mean = 0.0;             // NaN when every pair was excluded

  bool mean_defined() const { return !values.empty(); }
};

/// CNR of every target×background pair, binned over [lo, hi] (values outside
/// go to the end bins). When lo >= hi the range spans the observed values.
CnrHistogram cnr_histogram(const Grid& img, const std::vector<Window>& targets,
                           const std::vector<Window>& backgrounds, int bins, double lo = 0.0,
                           double hi = 0.0);

}  // namespace rglue::metrics
