#pragma once

// Closed-form finite-sum problem families f(x) = (1/n) * sum_i f_i(x).
//
//   ReddiLinear             f_0 = n x, f_i = -x (i > 0), constrained to [-1, 1].
//   DivergencePiecewise     linear for x >= -1, quadratic for x < -1; drives
//                           small-beta2 Adam to infinity under cyclic order.
//   NonRealizableQuadratic  f_0 = (x-a)^2, f_j = -0.1 (x - 10a/9)^2, n = 10.
//   LeastSquares            f_i = 0.5 (a_i^T x - b_i)^2.
//
// Problem objects are immutable after construction.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adamlab {

using Vec = std::vector<double>;

/// Raised when family parameters violate a construction constraint.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Family { ReddiLinear, DivergencePiecewise, NonRealizableQuadratic, LeastSquares };

/// CLI names: reddi, divpw, nonreal, lsq.
std::string_view family_name(Family family);
Family parse_family(std::string_view name);

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Constants of the smoothness and affine-variance conditions:
///   ||grad f_i(x) - grad f_i(y)|| <= L ||x - y||,
///   sum_i ||grad f_i(x)||^2 <= D1 ||grad f(x)||^2 + D0.
/// D0/D1 are absent when the family has no analytic value.
struct KnownConstants {
  double L = 0.0;
  std::optional<double> D0;
  std::optional<double> D1;
  double f_star = -std::numeric_limits<double>::infinity();
  std::optional<Vec> x_star;
};

/// Row-major dense matrix, used only for LeastSquares data.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
};

struct ProblemParams {
  double a = 1.0;
  Matrix A;
  Vec b;
};

class Problem {
 public:
  Family family() const { return family_; }
  std::size_t n() const { return n_; }
  std::size_t dim() const { return d_; }
  double a() const { return a_; }
  const Matrix& matrix() const { return A_; }
  const Vec& rhs() const { return b_; }
  const std::optional<std::vector<Interval>>& box() const { return box_; }
  const KnownConstants& known() const { return known_; }

  double component_value(std::size_t i, std::span<const double> x) const;

  /// Writes grad f_i(x) into out (size d). Piecewise families put the kink at
  /// x = -1 on the x >= -1 branch.
  void component_grad(std::size_t i, std::span<const double> x, std::span<double> out) const;
  Vec component_grad(std::size_t i, std::span<const double> x) const;

  double objective(std::span<const double> x) const;
  /// Mean of component gradients, summed in index order 0..n-1.
  Vec full_grad(std::span<const double> x) const;

  /// Per-coordinate clamp to the box; identity for unconstrained problems.
  Vec project(std::span<const double> x) const;
  void project_in_place(std::span<double> x) const;

 private:
  friend Problem make_problem(Family, std::size_t, const ProblemParams&);

  void check_index(std::size_t i) const;
  void check_point(std::span<const double> x) const;

  Family family_ = Family::ReddiLinear;
  std::size_t n_ = 0;
  std::size_t d_ = 1;
  double a_ = 0.0;
  Matrix A_;
  Vec b_;
  std::optional<std::vector<Interval>> box_;
  KnownConstants known_;
};

Problem make_problem(Family family, std::size_t n, const ProblemParams& params = {});

Problem make_reddi(std::size_t n);
Problem make_divergence(std::size_t n, double a);
Problem make_nonrealizable(double a);
Problem make_least_squares(Matrix A, Vec b);

/// Reads A|b from CSV: one row per equation, last column is b.
Problem load_least_squares_csv(const std::string& path);

double l2_norm(std::span<const double> v);

/// Raised by estimate_variance_constants when a sample makes the ratio
/// undefined; carries the offending point.
class VarianceSampleError : public std::domain_error {
 public:
  VarianceSampleError(const std::string& what, Vec point)
      : std::domain_error(what), point_(std::move(point)) {}
  const Vec& point() const { return point_; }

 private:
  Vec point_;
};

struct VarianceEstimate {
  double D1 = 0.0;
  Vec worst_point;
  std::size_t samples = 0;
};

/// Default deterministic sample set: 512 equispaced points on [-10, 10] for
/// scalar families; 512 SplitMix64 points in [-10, 10]^d for LeastSquares.
std::vector<Vec> default_variance_samples(const Problem& p);

/// sup over samples of (sum_i ||grad f_i||^2 - D0) / ||grad f||^2, clamped at 0.
/// This is a sampled estimate, not a certificate over all of R^d.
VarianceEstimate estimate_variance_constants(const Problem& p, const std::vector<Vec>& samples,
                                             double D0);

/// max_l |central difference - component_grad| at x with step h.
double fd_check(const Problem& p, std::size_t i, std::span<const double> x, double h);

}  // namespace adamlab
