#include "rglue/dp_init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rglue::dp {
namespace {

struct StateSpace {
  int A;
  int L;
  int width;  // 2L + 1
  int count;
  std::vector<int> tie_order;  // state indices sorted by (|a|+|l|, a, l)

  StateSpace(int axial, int lateral)
      : A(axial), L(lateral), width(2 * lateral + 1), count((2 * axial + 1) * (2 * lateral + 1)) {
    tie_order.resize(static_cast<std::size_t>(count));
    std::iota(tie_order.begin(), tie_order.end(), 0);
    std::sort(tie_order.begin(), tie_order.end(), [this](int s, int t) {
      const int ks = std::abs(a(s)) + std::abs(l(s));
      const int kt = std::abs(a(t)) + std::abs(l(t));
      if (ks != kt) return ks < kt;
      if (a(s) != a(t)) return a(s) < a(t);
      return l(s) < l(t);
    });
  }

  int a(int s) const { return s / width - A; }
  int l(int s) const { return s % width - L; }
  int dist(int s, int t) const { return std::abs(a(s) - a(t)) + std::abs(l(s) - l(t)); }
};

double data_cost(const Grid& I1, const Grid& I2, int i, int j, int a, int l) {
  const int r = std::clamp(i + a, 0, I2.rows() - 1);
  const int c = std::clamp(j + l, 0, I2.cols() - 1);
  return std::abs(I1(i, j) - I2(r, c));
}

// out[s] = min_t in[t] + w * dist(s, t), via separable 1D L1 distance transforms.
void l1_distance_transform(const StateSpace& S, double w, const std::vector<double>& in,
                           std::vector<double>& out) {
  out = in;
  const int na = 2 * S.A + 1;
  const int nl = S.width;
  for (int ia = 0; ia < na; ++ia) {
    double* row = out.data() + static_cast<std::ptrdiff_t>(ia) * nl;
    for (int k = 1; k < nl; ++k) row[k] = std::min(row[k], row[k - 1] + w);
    for (int k = nl - 2; k >= 0; --k) row[k] = std::min(row[k], row[k + 1] + w);
  }
  for (int il = 0; il < nl; ++il) {
    for (int k = 1; k < na; ++k) {
      double& cur = out[static_cast<std::size_t>(k * nl + il)];
      cur = std::min(cur, out[static_cast<std::size_t>((k - 1) * nl + il)] + w);
    }
    for (int k = na - 2; k >= 0; --k) {
      double& cur = out[static_cast<std::size_t>(k * nl + il)];
      cur = std::min(cur, out[static_cast<std::size_t>((k + 1) * nl + il)] + w);
    }
  }
}

}  // namespace

DPParams DPParams::defaults_for(const Grid& I1) {
  DPParams p;
  p.axial_range = static_cast<int>(std::ceil(0.05 * I1.rows()));
  p.lateral_range = 2;
  p.smoothness_weight = 0.5 * I1.mean_abs();
  return p;
}

void DPParams::validate() const {
  if (axial_range < 0 || lateral_range < 0) {
    throw std::invalid_argument("DP search ranges must be non-negative");
  }
  if (!std::isfinite(smoothness_weight) || smoothness_weight < 0.0) {
    throw std::invalid_argument("DP smoothness weight must be finite and non-negative");
  }
}

DisplacementField dp_sweep(const Grid& I1, const Grid& I2, const DPParams& params, Sweep sweep) {
  require_same_shape(I1, I2, "dp_sweep");
  params.validate();
  const int m = I1.rows();
  const int n = I1.cols();
  const StateSpace S(params.axial_range, params.lateral_range);
  const double w = params.smoothness_weight;
  const auto nS = static_cast<std::size_t>(S.count);

  DisplacementField out(m, n);
  std::vector<double> cost(static_cast<std::size_t>(m) * nS);
  std::vector<double> relaxed;
  std::vector<double> prev_row(nS);

  const bool forward = sweep == Sweep::left_to_right;
  for (int step = 0; step < n; ++step) {
    const int j = forward ? step : n - 1 - step;
    const int prev = forward ? j - 1 : j + 1;  // neighbor swept just before j
    for (int i = 0; i < m; ++i) {
      double* row = cost.data() + static_cast<std::size_t>(i) * nS;
      if (i > 0) {
        prev_row.assign(row - nS, row);
        l1_distance_transform(S, w, prev_row, relaxed);
      }
      const bool coupled = step > 0;
      const int pa = coupled ? static_cast<int>(out.axial(i, prev)) : 0;
      const int pl = coupled ? static_cast<int>(out.lateral(i, prev)) : 0;
      for (int s = 0; s < S.count; ++s) {
        double c = data_cost(I1, I2, i, j, S.a(s), S.l(s));
        if (coupled) c += w * (std::abs(S.a(s) - pa) + std::abs(S.l(s) - pl));
        if (i > 0) c += relaxed[static_cast<std::size_t>(s)];
        row[s] = c;
      }
    }

    const auto argmin = [&](auto&& value_of) {
      int best = S.tie_order.front();
      double best_v = value_of(best);
      for (int s : S.tie_order) {
        const double v = value_of(s);
        if (v < best_v) {
          best_v = v;
          best = s;
        }
      }
      return best;
    };

    int s = argmin([&](int t) { return cost[static_cast<std::size_t>(m - 1) * nS + t]; });
    for (int i = m - 1; i >= 0; --i) {
      out.axial(i, j) = S.a(s);
      out.lateral(i, j) = S.l(s);
      if (i == 0) break;
      const double* up = cost.data() + static_cast<std::size_t>(i - 1) * nS;
      const int cur = s;
      s = argmin([&](int t) { return up[t] + w * S.dist(cur, t); });
    }
  }
  return out;
}

DisplacementField dp_displacement(const Grid& I1, const Grid& I2, const DPParams& params) {
  DisplacementField ltr = dp_sweep(I1, I2, params, Sweep::left_to_right);
  DisplacementField rtl = dp_sweep(I1, I2, params, Sweep::right_to_left);
  return dp_energy(I1, I2, rtl, params) < dp_energy(I1, I2, ltr, params) ? std::move(rtl)
                                                                        : std::move(ltr);
}

double dp_column_cost(const Grid& I1, const Grid& I2, const DisplacementField& field, int j,
                      const DPParams& params, Sweep sweep) {
  const double w = params.smoothness_weight;
  const int prev = sweep == Sweep::left_to_right ? j - 1 : j + 1;
  const bool coupled = prev >= 0 && prev < I1.cols();
  double total = 0.0;
  for (int i = 0; i < I1.rows(); ++i) {
    const long a = std::lround(field.axial(i, j));
    const long l = std::lround(field.lateral(i, j));
    total += data_cost(I1, I2, i, j, static_cast<int>(a), static_cast<int>(l));
    if (i > 0) {
      total += w * static_cast<double>(std::abs(a - std::lround(field.axial(i - 1, j))) +
                                       std::abs(l - std::lround(field.lateral(i - 1, j))));
    }
    if (coupled) {
      total += w * static_cast<double>(std::abs(a - std::lround(field.axial(i, prev))) +
                                       std::abs(l - std::lround(field.lateral(i, prev))));
    }
  }
  return total;
}

double dp_energy(const Grid& I1, const Grid& I2, const DisplacementField& field,
                 const DPParams& params) {
  require_same_shape(I1, I2, "dp_energy");
  require_same_shape(I1, field.axial, "dp_energy");
  // Column costs of a left-to-right sweep count every row and column pair once.
  double total = 0.0;
  for (int j = 0; j < I1.cols(); ++j) {
    total += dp_column_cost(I1, I2, field, j, params, Sweep::left_to_right);
  }
  return total;
}

}  // namespace rglue::dp
