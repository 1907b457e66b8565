#pragma once

// Binary greyscale PGM (P5) writer for masks and heatmaps.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adamlab {

/// Row-major scalar field; row 0 is the top of the image.
struct ScalarGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  double operator()(std::size_t row, std::size_t col) const { return values[row * width + col]; }
};

/// Missing ends are taken from the data.
struct Normalization {
  std::optional<double> min;
  std::optional<double> max;
};

/// "P5\n[# comment\n]<w> <h>\n255\n" followed by width*height bytes, each
/// round(255 (x - min) / (max - min)) clamped to [0, 255]. A constant field
/// (max == min) maps to all zeros. Throws std::invalid_argument on an empty or
/// non-finite grid.
std::string emit_pgm(const ScalarGrid& grid, const Normalization& norm = {},
                     std::string_view comment = {});

}  // namespace adamlab
