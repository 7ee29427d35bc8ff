#pragma once

#include "rglue/grid.hpp"

namespace rglue::strain {

enum class Axis { axial, lateral };

/// Slope of the ordinary least-squares line through `window_len` consecutive
/// samples along `axis`, centered where possible and shifted inward at the
/// borders. Abscissa is the sample index.
StrainImage least_squares_strain(const Grid& component, int window_len, Axis axis);

/// Compression-positive axial strain of an axial displacement field
/// (negated least-squares slope).
StrainImage axial_strain(const DisplacementField& field, int window_len = 3);

/// k×k median with edge-replicated padding.
StrainImage median_filter(const Grid& image, int k);

}  // namespace rglue::strain
