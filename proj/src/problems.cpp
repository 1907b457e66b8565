#include "adamlab/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "adamlab/sampling.hpp"

namespace adamlab {

std::string_view family_name(Family family) {
  switch (family) {
    case Family::ReddiLinear: return "reddi";
    case Family::DivergencePiecewise: return "divpw";
    case Family::NonRealizableQuadratic: return "nonreal";
    case Family::LeastSquares: return "lsq";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "reddi") return Family::ReddiLinear;
  if (name == "divpw") return Family::DivergencePiecewise;
  if (name == "nonreal") return Family::NonRealizableQuadratic;
  if (name == "lsq") return Family::LeastSquares;
  throw ParameterError("unknown problem family '" + std::string(name) +
                       "' (expected reddi, divpw, nonreal, lsq)");
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

namespace {

constexpr std::size_t kNonRealizableN = 10;

}  // namespace

Problem make_problem(Family family, std::size_t n, const ProblemParams& params) {
  Problem p;
  p.family_ = family;
  p.n_ = n;
  switch (family) {
    case Family::ReddiLinear: {
      if (n < 3) throw ParameterError("reddi: n >= 3 required");
      const double nd = static_cast<double>(n);
      p.d_ = 1;
      p.box_ = std::vector<Interval>{{-1.0, 1.0}};
      p.known_.L = 0.0;
      p.known_.D0 = 0.0;
      // sum_i f_i'^2 = n^2 + (n-1); f' = 1/n.
      p.known_.D1 = nd * nd * (nd * nd + nd - 1.0);
      p.known_.f_star = -1.0 / nd;
      p.known_.x_star = Vec{-1.0};
      break;
    }
    case Family::DivergencePiecewise: {
      if (n < 3) throw ParameterError("divpw: n >= 3 required");
      if (!(params.a > 0.0) || !std::isfinite(params.a)) {
        throw ParameterError("divpw: a > 0 (finite) required");
      }
      const double nd = static_cast<double>(n);
      const double c = 1.0 + (nd - 1.0) * params.a;
      p.d_ = 1;
      p.a_ = params.a;
      p.known_.L = c;
      p.known_.D0 = 0.0;
      // Both branches give the same ratio: n^2 (c^2 + (n-1) a^2).
      p.known_.D1 = nd * nd * (c * c + (nd - 1.0) * params.a * params.a);
      p.known_.f_star = -1.5 / nd;
      p.known_.x_star = Vec{-2.0};
      break;
    }
    case Family::NonRealizableQuadratic: {
      if (n != kNonRealizableN) throw ParameterError("nonreal: n must be 10");
      if (!std::isfinite(params.a)) throw ParameterError("nonreal: a must be finite");
      const double a = params.a;
      p.d_ = 1;
      p.a_ = a;
      p.known_.L = 2.0;
      // From (u+v)^2 <= 2u^2 + 2v^2 with f'(x) = x/50.
      p.known_.D1 = 2.0 * 2500.0 * (4.0 + 0.36);
      p.known_.D0 = a * a * (8.0 + 72.0 / 81.0);
      p.known_.f_star = -a * a / 90.0;
      p.known_.x_star = Vec{0.0};
      break;
    }
    case Family::LeastSquares: {
      const Matrix& A = params.A;
      if (A.rows == 0 || A.cols == 0) throw ParameterError("lsq: A must be non-empty");
      if (A.data.size() != A.rows * A.cols) throw ParameterError("lsq: A data/shape mismatch");
      if (params.b.size() != A.rows) throw ParameterError("lsq: b must have one entry per row of A");
      if (n != A.rows) throw ParameterError("lsq: n must equal the number of rows of A");
      p.d_ = A.cols;
      p.A_ = A;
      p.b_ = params.b;
      double L = 0.0;
      for (std::size_t i = 0; i < A.rows; ++i) {
        const double r = l2_norm(A.row(i));
        L = std::max(L, r * r);
      }
      p.known_.L = L;
      break;
    }
  }
  return p;
}

Problem make_reddi(std::size_t n) { return make_problem(Family::ReddiLinear, n); }

Problem make_divergence(std::size_t n, double a) {
  ProblemParams params;
  params.a = a;
  return make_problem(Family::DivergencePiecewise, n, params);
}

Problem make_nonrealizable(double a) {
  ProblemParams params;
  params.a = a;
  return make_problem(Family::NonRealizableQuadratic, kNonRealizableN, params);
}

Problem make_least_squares(Matrix A, Vec b) {
  ProblemParams params;
  const std::size_t rows = A.rows;
  params.A = std::move(A);
  params.b = std::move(b);
  return make_problem(Family::LeastSquares, rows, params);
}

Problem load_least_squares_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open least-squares CSV: " + path);
  Matrix A;
  Vec b;
  std::string line;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParameterError("lsq: non-numeric cell '" + cell + "' in " + path);
      }
    }
    if (row.size() < 2) throw ParameterError("lsq: each row needs at least one coefficient and b");
    if (width == 0) width = row.size();
    if (row.size() != width) throw ParameterError("lsq: ragged rows in " + path);
    A.data.insert(A.data.end(), row.begin(), row.end() - 1);
    b.push_back(row.back());
    ++A.rows;
  }
  A.cols = width - 1;
  return make_least_squares(std::move(A), std::move(b));
}

void Problem::check_index(std::size_t i) const {
  if (i >= n_) {
    throw std::out_of_range("component index " + std::to_string(i) + " out of range [0, " +
                            std::to_string(n_) + ")");
  }
}

void Problem::check_point(std::span<const double> x) const {
  if (x.size() != d_) {
    throw std::invalid_argument("point has dimension " + std::to_string(x.size()) +
                                ", problem has " + std::to_string(d_));
  }
}

double Problem::component_value(std::size_t i, std::span<const double> x) const {
  check_index(i);
  check_point(x);
  switch (family_) {
    case Family::ReddiLinear:
      return i == 0 ? static_cast<double>(n_) * x[0] : -x[0];
    case Family::DivergencePiecewise: {
      const double c = 1.0 + (static_cast<double>(n_) - 1.0) * a_;
      const double t = x[0];
      if (i == 0) return t >= -1.0 ? c * t : 0.5 * c * (t + 2.0) * (t + 2.0) - 1.5 * c;
      return t >= -1.0 ? -a_ * t : -0.5 * a_ * (t + 2.0) * (t + 2.0) + 1.5 * a_;
    }
    case Family::NonRealizableQuadratic: {
      const double t = x[0];
      if (i == 0) return (t - a_) * (t - a_);
      const double u = t - 10.0 * a_ / 9.0;
      return -0.1 * u * u;
    }
    case Family::LeastSquares: {
      const auto row = A_.row(i);
      double r = -b_[i];
      for (std::size_t l = 0; l < d_; ++l) r += row[l] * x[l];
      return 0.5 * r * r;
    }
  }
  return 0.0;
}

void Problem::component_grad(std::size_t i, std::span<const double> x, std::span<double> out) const {
  check_index(i);
  switch (family_) {
    case Family::ReddiLinear:
      out[0] = i == 0 ? static_cast<double>(n_) : -1.0;
      return;
    case Family::DivergencePiecewise: {
      const double c = 1.0 + (static_cast<double>(n_) - 1.0) * a_;
      const double t = x[0];
      if (i == 0) {
        out[0] = t >= -1.0 ? c : c * (t + 2.0);
      } else {
        out[0] = t >= -1.0 ? -a_ : -a_ * (t + 2.0);
      }
      return;
    }
    case Family::NonRealizableQuadratic: {
      const double t = x[0];
      out[0] = i == 0 ? 2.0 * (t - a_) : -0.2 * (t - 10.0 * a_ / 9.0);
      return;
    }
    case Family::LeastSquares: {
      const auto row = A_.row(i);
      double r = -b_[i];
      for (std::size_t l = 0; l < d_; ++l) r += row[l] * x[l];
      for (std::size_t l = 0; l < d_; ++l) out[l] = r * row[l];
      return;
    }
  }
}

Vec Problem::component_grad(std::size_t i, std::span<const double> x) const {
  check_point(x);
  Vec g(d_);
  component_grad(i, x, g);
  return g;
}

double Problem::objective(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += component_value(i, x);
  return s / static_cast<double>(n_);
}

Vec Problem::full_grad(std::span<const double> x) const {
  check_point(x);
  Vec sum(d_, 0.0);
  Vec g(d_);
  for (std::size_t i = 0; i < n_; ++i) {
    component_grad(i, x, g);
    for (std::size_t l = 0; l < d_; ++l) sum[l] += g[l];
  }
  for (double& s : sum) s /= static_cast<double>(n_);
  return sum;
}

void Problem::project_in_place(std::span<double> x) const {
  if (!box_) return;
  for (std::size_t l = 0; l < x.size(); ++l) {
    x[l] = std::clamp(x[l], (*box_)[l].lo, (*box_)[l].hi);
  }
}

Vec Problem::project(std::span<const double> x) const {
  check_point(x);
  Vec out(x.begin(), x.end());
  project_in_place(out);
  return out;
}

std::vector<Vec> default_variance_samples(const Problem& p) {
  constexpr std::size_t kCount = 512;
  std::vector<Vec> samples;
  samples.reserve(kCount);
  if (p.dim() == 1) {
    for (std::size_t j = 0; j < kCount; ++j) {
      samples.push_back(Vec{-10.0 + 20.0 * static_cast<double>(j) / static_cast<double>(kCount - 1)});
    }
    return samples;
  }
  SplitMix64 rng(0x5EED5A3DULL);
  for (std::size_t j = 0; j < kCount; ++j) {
    Vec x(p.dim());
    for (double& v : x) v = -10.0 + 20.0 * rng.uniform();
    samples.push_back(std::move(x));
  }
  return samples;
}

VarianceEstimate estimate_variance_constants(const Problem& p, const std::vector<Vec>& samples,
                                             double D0) {
  if (samples.empty()) throw std::invalid_argument("estimate_variance_constants: no samples");
  VarianceEstimate est;
  est.samples = samples.size();
  Vec g(p.dim());
  for (const Vec& x : samples) {
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < p.n(); ++i) {
      p.component_grad(i, x, g);
      for (double v : g) sum_sq += v * v;
    }
    const Vec full = p.full_grad(x);
    const double full_sq = [&] {
      double s = 0.0;
      for (double v : full) s += v * v;
      return s;
    }();
    const double numerator = sum_sq - D0;
    if (full_sq == 0.0) {
      if (D0 == 0.0 || numerator > 0.0) {
        std::ostringstream msg;
        msg << "zero full gradient at sample x = [";
        for (std::size_t l = 0; l < x.size(); ++l) msg << (l ? ", " : "") << x[l];
        msg << "] makes the D1 ratio undefined";
        throw VarianceSampleError(msg.str(), x);
      }
      continue;
    }
    const double ratio = std::max(0.0, numerator / full_sq);
    if (est.worst_point.empty() || ratio > est.D1) {
      est.D1 = ratio;
      est.worst_point = x;
    }
  }
  return est;
}

double fd_check(const Problem& p, std::size_t i, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_check: h must be positive");
  const Vec g = p.component_grad(i, x);
  Vec xp(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t l = 0; l < xp.size(); ++l) {
    const double orig = xp[l];
    xp[l] = orig + h;
    const double fp = p.component_value(i, xp);
    xp[l] = orig - h;
    const double fm = p.component_value(i, xp);
    xp[l] = orig;
    worst = std::max(worst, std::abs((fp - fm) / (2.0 * h) - g[l]));
  }
  return worst;
}

}  // namespace adamlab
