#include "rglue/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace rglue::io {
namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

}  // namespace

void write_rff1(const std::filesystem::path& path, const Grid& grid) {
  auto out = open_out(path, std::ios::binary | std::ios::trunc);
  out << "RFF1 " << grid.rows() << ' ' << grid.cols() << '\n';
  std::vector<std::uint32_t> words;
  words.reserve(grid.size());
  for (double v : grid.values()) {
    words.push_back(to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(v))));
  }
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  if (!out) throw IoError("write failed: " + path.string());
}

Grid read_rff1(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty RFF1 file: " + path.string());
  std::istringstream hs(header);
  std::string magic;
  long rows = -1;
  long cols = -1;
  hs >> magic >> rows >> cols;
  if (magic != "RFF1" || !hs || rows <= 0 || cols <= 0) {
    throw IoError("malformed RFF1 header in " + path.string());
  }
  const auto count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  std::vector<std::uint32_t> words(count);
  in.read(reinterpret_cast<char*>(words.data()),
          static_cast<std::streamsize>(count * sizeof(std::uint32_t)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(std::uint32_t)) {
    throw IoError("truncated RFF1 payload in " + path.string());
  }
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    values[k] = std::bit_cast<float>(to_little_endian(words[k]));
  }
  return Grid(static_cast<int>(rows), static_cast<int>(cols), std::move(values));
}

void write_csv(const std::filesystem::path& path, const Grid& grid) {
  auto out = open_out(path, std::ios::trunc);
  out << std::setprecision(17);
  for (int i = 0; i < grid.rows(); ++i) {
    for (int j = 0; j < grid.cols(); ++j) {
      if (j) out << ',';
      out << grid(i, j);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Grid read_csv(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in);
  std::vector<double> values;
  int rows = 0;
  int cols = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int count = 0;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IoError("bad CSV value '" + cell + "' in " + path.string());
      }
      ++count;
    }
    if (cols >= 0 && count != cols) {
      throw IoError("ragged CSV row " + std::to_string(rows + 1) + " in " + path.string());
    }
    cols = count;
    ++rows;
  }
  if (rows == 0) throw IoError("empty CSV file: " + path.string());
  return Grid(rows, cols, std::move(values));
}

Grid read_frame(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::memcmp(magic, "RFF1", 4) == 0) return read_rff1(path);
  return read_csv(path);
}

void write_pgm(const std::filesystem::path& path, const Grid& grid, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("PGM range needs hi > lo");
  auto out = open_out(path, std::ios::binary | std::ios::trunc);
  out << "P5\n" << grid.cols() << ' ' << grid.rows() << "\n255\n";
  std::vector<unsigned char> bytes;
  bytes.reserve(grid.size());
  for (double v : grid.values()) {
    double t = std::isfinite(v) ? (v - lo) / (hi - lo) : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    bytes.push_back(static_cast<unsigned char>(std::lround(t * 255.0)));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace rglue::io
