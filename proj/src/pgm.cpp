#include "adamlab/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adamlab {

std::string emit_pgm(const ScalarGrid& grid, const Normalization& norm, std::string_view comment) {
  if (grid.width == 0 || grid.height == 0) throw std::invalid_argument("emit_pgm: empty grid");
  if (grid.values.size() != grid.width * grid.height) {
    throw std::invalid_argument("emit_pgm: value count does not match width x height");
  }
  for (double x : grid.values) {
    if (!std::isfinite(x)) throw std::invalid_argument("emit_pgm: non-finite value");
  }
  if (comment.find('\n') != std::string_view::npos) {
    throw std::invalid_argument("emit_pgm: comment must be a single line");
  }
  const auto [lo_it, hi_it] = std::minmax_element(grid.values.begin(), grid.values.end());
  const double lo = norm.min.value_or(*lo_it);
  const double hi = norm.max.value_or(*hi_it);

  std::string out = "P5\n";
  if (!comment.empty()) {
    out += "# ";
    out += comment;
    out += '\n';
  }
  out += std::to_string(grid.width) + " " + std::to_string(grid.height) + "\n255\n";
  out.reserve(out.size() + grid.values.size());
  for (double x : grid.values) {
    double level = 0.0;
    if (hi > lo) level = std::round(255.0 * (x - lo) / (hi - lo));
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::clamp(level, 0.0, 255.0))));
  }
  return out;
}

}  // namespace adamlab
