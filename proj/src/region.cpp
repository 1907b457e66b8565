#include "adamlab/region.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "adamlab/io.hpp"
#include "adamlab/pgm.hpp"

namespace adamlab {

namespace {

void check_beta1(double beta1) {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::domain_error("beta1 must lie in [0, 1)");
}

void check_n(std::size_t n) {
  if (n < 3) throw std::domain_error("region conditions need n >= 3");
}

// 0^t = 0 for t > 0, so beta1 = 0 gives (1 - beta1^t) = 1.
double power(double base, double exponent) {
  if (base == 0.0) return exponent > 0.0 ? 0.0 : 1.0;
  return std::pow(base, exponent);
}

void check_grid(const std::vector<double>& g, bool open_at_zero, const char* name) {
  if (g.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = g[i];
    const bool ok = open_at_zero ? (v > 0.0 && v < 1.0) : (v >= 0.0 && v < 1.0);
    if (!ok) throw std::invalid_argument(std::string(name) + " grid value out of range");
    if (i > 0 && !(g[i] > g[i - 1])) {
      throw std::invalid_argument(std::string(name) + " grid must be strictly ascending");
    }
  }
}

}  // namespace

bool cond_c1(double beta1, double beta2, std::size_t n) {
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw std::domain_error("C1 needs 0 < beta2 < 1");
  check_beta1(beta1);
  check_n(n);
  const double nd = static_cast<double>(n);
  const double t = std::min(nd - 1.0, std::log(1.0 / (10.0 * nd * nd)) / std::log(beta2));
  const double spread = std::max(0.1, std::pow(beta2, nd - 1.0) * nd * nd);
  const double lhs = (nd - 1.0 - t) * (1.0 - power(beta1, t)) / std::sqrt(1.0 + spread);
  const double root = std::sqrt(1.0 - beta2);
  const double rhs = (1.0 - beta1) / root + beta1 * nd / root;
  return lhs >= rhs;
}

bool cond_c2(double beta1, std::size_t n) {
  check_beta1(beta1);
  check_n(n);
  const double nd = static_cast<double>(n);
  const double b = power(beta1, nd - 1.0);
  return (1.0 - b) > (1.0 - beta1) * b * nd;
}

double max_eta_c3(double beta2, std::size_t n) {
  if (!(beta2 >= 0.0 && beta2 <= 1.0)) throw std::domain_error("C3 needs 0 <= beta2 <= 1");
  return 2.0 * std::sqrt((1.0 - beta2) * power(beta2, static_cast<double>(n)));
}

std::vector<double> cell_centred_grid(std::size_t resolution) {
  std::vector<double> g(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    g[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(resolution);
  }
  return g;
}

RegionMask region_mask(std::size_t n, const GridSpec& spec, std::size_t workers) {
  check_n(n);
  RegionMask mask;
  mask.n = n;
  if (!spec.beta1 || !spec.beta2) {
    if (spec.resolution < 2) throw std::invalid_argument("region resolution must be >= 2");
    mask.resolution = spec.resolution;
  }
  mask.beta1 = spec.beta1 ? *spec.beta1 : cell_centred_grid(spec.resolution);
  mask.beta2 = spec.beta2 ? *spec.beta2 : cell_centred_grid(spec.resolution);
  check_grid(mask.beta1, false, "beta1");
  check_grid(mask.beta2, true, "beta2");

  const std::size_t rows = mask.beta1.size();
  const std::size_t cols = mask.beta2.size();
  mask.cells.assign(rows * cols, 0);
  auto fill_rows = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < rows; i += stride) {
      const bool c2 = cond_c2(mask.beta1[i], n);
      for (std::size_t j = 0; j < cols; ++j) {
        mask.cells[i * cols + j] = c2 && cond_c1(mask.beta1[i], mask.beta2[j], n);
      }
    }
  };
  const std::size_t w = std::clamp<std::size_t>(workers, 1, rows);
  if (w == 1) {
    fill_rows(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t) pool.emplace_back(fill_rows, t, w);
    for (auto& th : pool) th.join();
  }
  return mask;
}

double region_area(const RegionMask& mask) {
  if (mask.cells.empty()) return 0.0;
  const auto count = std::count(mask.cells.begin(), mask.cells.end(), std::uint8_t{1});
  return static_cast<double>(count) / static_cast<double>(mask.cells.size());
}

bool c2_true_set_is_prefix(std::size_t n, const std::vector<double>& beta1) {
  bool seen_false = false;
  for (double b : beta1) {
    const bool c2 = cond_c2(b, n);
    if (c2 && seen_false) return false;
    if (!c2) seen_false = true;
  }
  return true;
}

std::string region_csv(const RegionMask& mask) {
  std::string out = "beta1,beta2,in_region\n";
  for (std::size_t i = 0; i < mask.beta1.size(); ++i) {
    for (std::size_t j = 0; j < mask.beta2.size(); ++j) {
      out += format_double(mask.beta1[i]);
      out += ',';
      out += format_double(mask.beta2[j]);
      out += mask.at(i, j) ? ",1\n" : ",0\n";
    }
  }
  return out;
}

std::string region_pgm(const RegionMask& mask) {
  ScalarGrid grid;
  grid.width = mask.beta1.size();
  grid.height = mask.beta2.size();
  grid.values.resize(grid.width * grid.height);
  for (std::size_t j = 0; j < grid.height; ++j) {
    for (std::size_t i = 0; i < grid.width; ++i) {
      grid.values[j * grid.width + i] = mask.at(i, j) ? 1.0 : 0.0;
    }
  }
  return emit_pgm(grid, Normalization{0.0, 1.0},
                  "columns: beta1 ascending left to right; rows: beta2 ascending top to bottom; "
                  "255 = C1 and C2 hold, n = " + std::to_string(mask.n));
}

}  // namespace adamlab
