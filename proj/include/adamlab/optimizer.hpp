#pragma once

// Vanilla Adam on a finite-sum Problem.
//
//   m <- beta1 m + (1 - beta1) g
//   v <- beta2 v + (1 - beta2) g o g
//   x <- project(x - eta_k * m / (sqrt(v) + eps))
//
// step_wr performs one iteration of the with-replacement variant (stepsize
// indexed by iteration); run_epoch_rr performs one epoch of the shuffled
// variant (stepsize indexed by epoch, fixed over the n inner steps, m and v
// carried across the epoch boundary).

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "adamlab/problems.hpp"
#include "adamlab/sampling.hpp"

namespace adamlab {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Schedule { InverseSqrt, Constant };

std::string_view schedule_name(Schedule s);
Schedule parse_schedule(std::string_view name);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eta0 = 0.1;
  double eps = 0.0;
  bool bias_correction = false;
  Vec v_init{1e-12};  // size 1 broadcasts, else size d
  Vec m_init{0.0};
  Schedule schedule = Schedule::InverseSqrt;

  /// Checks ranges and the well-definedness guard (eps > 0 or v_init > 0).
  void validate() const;
  void validate_for(std::size_t d) const;
};

/// eta_k, or the bias-corrected sqrt(1 - beta2^k) / (1 - beta1^k) * eta_k.
double stepsize(const AdamConfig& config, std::uint64_t k);

/// Which recursion drives run(): Algorithm-1 iterations or Algorithm-2 epochs.
enum class Driver { WithReplacement, Shuffled };

struct OptimizerState {
  Vec x;
  Vec m;
  Vec v;
  std::uint64_t k = 1;           // iteration (Driver::WithReplacement) or epoch, 1-based
  std::optional<std::size_t> i;  // inner index within the epoch, shuffled driver only
  std::uint64_t steps = 0;       // total parameter updates performed

  static OptimizerState initial(const Problem& p, const AdamConfig& config, Vec x0);
};

/// Full per-step state, kept only when instrumentation asks for it.
struct StepSnapshot {
  Vec x_before;
  Vec m_before;
  Vec v_before;
  Vec grad;
  Vec x_after;
  Vec m_after;
  Vec v_after;
};

struct StepRecord {
  std::uint64_t t = 0;  // global step counter, 1-based
  std::uint64_t k = 0;
  std::optional<std::size_t> i;
  std::size_t batch = 0;
  double eta = 0.0;
  double grad_component_norm = 0.0;
  double step_norm = 0.0;
  double x_norm = 0.0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double full_grad_norm = std::numeric_limits<double>::quiet_NaN();
  bool non_finite = false;
  std::optional<StepSnapshot> snapshot;
};

struct StepOptions {
  bool diagnostics = false;  // fill objective / full_grad_norm at x_after
  bool snapshot = false;
};

/// One Algorithm-1 step. The batch index comes from sampler.
StepRecord step_wr(OptimizerState& state, const Problem& p, const AdamConfig& config,
                   IndexSampler& sampler, const StepOptions& opts = {});

/// One Algorithm-2 epoch (n inner steps, stepsize fixed at eta_k for epoch k).
std::vector<StepRecord> run_epoch_rr(OptimizerState& state, const Problem& p,
                                     const AdamConfig& config, IndexSampler& sampler,
                                     const StepOptions& opts = {});

enum class RunStatus { Completed, CutoffExceeded, NonFinite };
enum class Outcome { Converged, Plateau, Diverged };

std::string_view outcome_name(Outcome o);
std::string_view status_name(RunStatus s);

/// Diagnostics at an evaluation point: each iteration for the
/// with-replacement driver, each epoch start (and the final point) for the
/// shuffled driver.
struct EvalPoint {
  std::uint64_t k = 0;
  double grad_norm = 0.0;
  double gap = std::numeric_limits<double>::quiet_NaN();  // ||x - x*|| when x* known
  double metric = std::numeric_limits<double>::quiet_NaN();
};

struct RunOptions {
  Driver driver = Driver::WithReplacement;
  std::uint64_t budget = 1;  // iterations or epochs, by driver
  std::uint64_t log_every = 0;  // 0 = keep no step records
  bool snapshots = false;
  std::uint64_t snapshot_stride = 1;
  double cutoff = 1e6;
  double tol_converge = 1e-3;
};

struct RunSummary {
  RunStatus status = RunStatus::Completed;
  Outcome outcome = Outcome::Plateau;
  Vec final_x;
  double initial_gap = std::numeric_limits<double>::quiet_NaN();
  double initial_grad_norm = 0.0;
  double final_gap = std::numeric_limits<double>::quiet_NaN();
  double final_grad_norm = std::numeric_limits<double>::quiet_NaN();
  double min_grad_norm = std::numeric_limits<double>::quiet_NaN();
  double min_metric = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t steps = 0;
};

struct TrajectoryLog {
  Driver driver = Driver::WithReplacement;
  std::size_t n = 0;
  std::vector<StepRecord> records;
  std::vector<EvalPoint> evals;
  RunSummary summary;
};

/// Drives the chosen recursion for opts.budget iterations/epochs from x0.
/// Terminates early (status CutoffExceeded / NonFinite) when any |x_l| >
/// cutoff or any state value is non-finite; the partial log is returned.
TrajectoryLog run(const Problem& p, const AdamConfig& config, const SamplingScheme& scheme,
                  const Vec& x0, const RunOptions& opts);

}  // namespace adamlab
