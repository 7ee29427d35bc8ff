#pragma once

#include <filesystem>
#include <stdexcept>

#include "rglue/grid.hpp"

namespace rglue::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "RFF1 <rows> <cols>\n" followed by rows*cols little-endian float32, row-major.
void write_rff1(const std::filesystem::path& path, const Grid& grid);
Grid read_rff1(const std::filesystem::path& path);

// One grid row per line, comma separated. Written with 17 significant digits
// so doubles round-trip.
void write_csv(const std::filesystem::path& path, const Grid& grid);
Grid read_csv(const std::filesystem::path& path);

/// Reads RFF1 when the file starts with the magic, CSV otherwise.
Grid read_frame(const std::filesystem::path& path);

/// 8-bit binary PGM; [lo, hi] maps linearly onto 0..255, values outside clamp.
void write_pgm(const std::filesystem::path& path, const Grid& grid, double lo,
               double hi);

}  // namespace rglue::io
