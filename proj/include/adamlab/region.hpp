#pragma once

// Analytic divergence conditions over the (beta1, beta2) plane.
//
//   C1: (n-1-t)(1 - beta1^t) / sqrt(1 + max{0.1, beta2^(n-1) n^2})
//         >= (1 - beta1)/sqrt(1 - beta2) + beta1 n / sqrt(1 - beta2),
//       t = min{n-1, ln(1/(10 n^2)) / ln beta2}
//   C2: 1 - beta1^(n-1) > (1 - beta1) beta1^(n-1) n
//   C3: eta0 <= 2 sqrt((1 - beta2) beta2^n)
//
// The mask is C1 && C2; C3 is a stepsize ceiling reported alongside it.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace adamlab {

/// Throws std::domain_error unless 0 < beta2 < 1, 0 <= beta1 < 1, n >= 3.
bool cond_c1(double beta1, double beta2, std::size_t n);
/// Throws std::domain_error unless 0 <= beta1 < 1, n >= 3.
bool cond_c2(double beta1, std::size_t n);
/// Throws std::domain_error unless 0 <= beta2 <= 1.
double max_eta_c3(double beta2, std::size_t n);

/// Cell-centred grid (i + 0.5) / resolution unless explicit grids are given.
struct GridSpec {
  std::size_t resolution = 200;
  std::optional<std::vector<double>> beta1;
  std::optional<std::vector<double>> beta2;
};

std::vector<double> cell_centred_grid(std::size_t resolution);

struct RegionMask {
  std::size_t n = 0;
  std::vector<double> beta1;  // ascending
  std::vector<double> beta2;  // ascending
  std::vector<std::uint8_t> cells;  // beta1-major: cells[i * beta2.size() + j]
  std::size_t resolution = 0;       // 0 when explicit grids were given

  bool at(std::size_t i, std::size_t j) const { return cells[i * beta2.size() + j] != 0; }
};

/// Throws std::invalid_argument for resolution < 2 or invalid explicit grids.
/// Rows are filled by up to `workers` threads; the result does not depend on it.
RegionMask region_mask(std::size_t n, const GridSpec& spec = {}, std::size_t workers = 1);

double region_area(const RegionMask& mask);

/// Whether the C2 true-set on `beta1` (ascending) is {beta1 < c} for some c.
/// The mask always follows the raw inequality; this only reports.
bool c2_true_set_is_prefix(std::size_t n, const std::vector<double>& beta1);

/// beta1,beta2,in_region with beta1 outer, beta2 inner.
std::string region_csv(const RegionMask& mask);

/// Width = beta1 axis (ascending to the right), height = beta2 axis
/// (ascending downward); 255 in region, 0 outside. The orientation is
/// written as a header comment.
std::string region_pgm(const RegionMask& mask);

}  // namespace adamlab
