#pragma once

#include "rglue/grid.hpp"

namespace rglue::dp {

struct DPParams {
  int axial_range = 0;    // search a in [-axial_range, axial_range]
  int lateral_range = 0;  // search l in [-lateral_range, lateral_range]
  double smoothness_weight = 0.0;

  /// Axial ±ceil(0.05 m), lateral ±2, weight 0.5 * mean|I1|.
  static DPParams defaults_for(const Grid& I1);
  void validate() const;
};

enum class Sweep { left_to_right, right_to_left };

/// One coupled sweep: a dynamic program over rows with joint (a, l) states for
/// each column, in column order. Every column after the first adds
/// w * (|da| + |dl|) against the column swept just before it, at the same row.
/// Ties prefer smaller |a|+|l|, then smaller a, then smaller l.
DisplacementField dp_sweep(const Grid& I1, const Grid& I2, const DPParams& params, Sweep sweep);

/// Integer displacement field: both sweeps, keeping the one with lower
/// dp_energy (left to right on ties). A single direction lets an edge column
/// with no valid match drag its neighbors along.
DisplacementField dp_displacement(const Grid& I1, const Grid& I2, const DPParams& params);

/// Objective a sweep minimizes for column j of `field`: L1 data cost, plus
/// w * (|da| + |dl|) between consecutive rows, plus w * (|da| + |dl|) against
/// the previously swept column when there is one.
double dp_column_cost(const Grid& I1, const Grid& I2, const DisplacementField& field, int j,
                      const DPParams& params, Sweep sweep = Sweep::left_to_right);

/// L1 data cost plus w * (|da| + |dl|) over every vertical and horizontal
/// neighbor pair.
double dp_energy(const Grid& I1, const Grid& I2, const DisplacementField& field,
                 const DPParams& params);

}  // namespace rglue::dp
