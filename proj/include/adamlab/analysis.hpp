#pragma once

// Diagnostic quantities along Adam trajectories: the per-step movement bound
// Delta_k, the thresholds R_k / Q_k, the conditional mean of v under uniform
// sampling, the concentration sandwich for 1/sqrt(v), the momentum-cancelling
// potential z_k, and the convergence metric
//   min{ ||g||^2 / sqrt(D0), ||g|| / (2 sqrt(d D1)) }.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adamlab/optimizer.hpp"
#include "adamlab/problems.hpp"

namespace adamlab {

/// Raised when a bound is undefined for the given hyperparameters.
class ContractError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct DiagnosticsConstants {
  double Delta1 = 0.0;
  double delta = 0.0;
  double L = 0.0;
  std::size_t d = 1;
  std::size_t n = 1;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double eta0 = 0.0;
};

/// Delta1 = eta0 L sqrt(d) / sqrt(1 - beta2) * (1 - beta1) / (1 - beta1 / sqrt(beta2)).
/// Requires beta1 < sqrt(beta2) < 1 and 0 < delta <= 1/(4n).
DiagnosticsConstants make_diagnostics(double L, std::size_t d, std::size_t n, double beta1,
                                      double beta2, double eta0, double delta);
DiagnosticsConstants make_diagnostics(const Problem& p, const AdamConfig& config, double delta);

/// Delta_1 / sqrt(k).
double delta_k(const DiagnosticsConstants& c, std::uint64_t k);

struct Thresholds {
  double R = 0.0;
  double Q = 0.0;
};

/// R_k = 16 sqrt(2) Delta_k (ceil(ln(n delta) / ln beta2) + n),
/// Q_k = 32 (n + 1) Delta_k (ceil(ln(1/2) / ln beta2) + n).
Thresholds thresholds(const DiagnosticsConstants& c, std::uint64_t k);

/// ceil(ln(n delta) / ln beta2).
std::uint64_t burn_in_lag(const DiagnosticsConstants& c);

/// beta2 v_prev + (1 - beta2) (1/n) sum_i (d_l f_i(x))^2, per coordinate:
/// the exact expectation of the next v over a uniformly drawn batch.
Vec cond_mean_v(const Problem& p, std::span<const double> x, std::span<const double> v_prev,
                double beta2);

struct ConcentrationConstants {
  double c_lower = 0.0;
  double c_upper = 0.0;
  double p_bound = 0.0;
  bool precondition_ok = false;
};

/// C_lower, C_upper, failure probability n exp(-delta^2 / ((1-beta2)(28/(3n) + 8 delta/3)))
/// and the precondition (1-beta2)/beta2^n < 1/(8n) - delta/4.
ConcentrationConstants concentration_constants(std::size_t n, double beta2, double delta);

struct ConcentrationReport {
  std::uint64_t qualifying_steps = 0;
  std::uint64_t lower_violations = 0;
  std::uint64_t upper_violations = 0;
  double empirical_rate = 0.0;
  double p_bound = 0.0;
  double c_lower = 0.0;
  double c_upper = 0.0;
  bool precondition_ok = false;
  std::uint64_t first_qualifying_k = 0;
  /// Empty when precondition_ok is false (no verdict).
  std::optional<bool> within_bound;
};

/// Tests C_lower / sqrt(E) <= 1/sqrt(v) <= C_upper / sqrt(E) at every recorded
/// with-replacement step k >= burn_in_lag + n + 1 and coordinate l with
/// max_i |d_l f_i(x_k)| >= R_k. Requires step snapshots.
ConcentrationReport concentration_report(const Problem& p, const TrajectoryLog& log,
                                         const DiagnosticsConstants& consts);

/// (x_k - beta1^n x_{k-n}) / (1 - beta1^n). history holds iterates oldest
/// first; the last entry is x_k and history[size - 1 - n] is x_{k-n}.
Vec potential_z(const std::vector<Vec>& history, double beta1, std::size_t n);

/// Epoch form for the shuffled driver: (x_{k,0} - beta1^n x_{k-1,0}) / (1 - beta1^n).
Vec potential_z_epoch(std::span<const double> x_epoch, std::span<const double> x_prev_epoch,
                      double beta1, std::size_t n);

double theorem_metric(std::span<const double> grad, double D0, double D1, std::size_t d);
double theorem_metric_from_norm(double grad_norm, double D0, double D1, std::size_t d);

/// Diverged if the run stopped on the cutoff or a non-finite value (or its
/// final point exceeds cutoff_diverge); Converged if the mean over the last
/// 10% of evaluation points of the optimality gap (gradient norm when x* is
/// unknown) is <= tol_converge; otherwise Plateau.
Outcome classify_outcome(const TrajectoryLog& log, double tol_converge, double cutoff_diverge);

struct Violation {
  std::uint64_t t = 0;
  std::size_t coordinate = 0;
  std::string quantity;
  double value = 0.0;
  double bound = 0.0;
};

/// Per-step checks on snapshot records: coordinate step bound, v envelope,
/// v >= 0, geometric memory, bias-correction envelope. Requires
/// beta1 < sqrt(beta2) and m_init = 0. Comparisons allow a relative slack of
/// 1e-12 for rounding.
std::vector<Violation> verify_invariants(const TrajectoryLog& log, const AdamConfig& config);

}  // namespace adamlab
