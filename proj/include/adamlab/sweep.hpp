#pragma once

// (beta1, beta2) grid experiments. Cells are planned beta1-outer, beta2-inner,
// seed-innermost; results are sorted by cell index before they are written,
// so the CSV bytes do not depend on the worker count.

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "adamlab/optimizer.hpp"
#include "adamlab/problems.hpp"
#include "adamlab/sampling.hpp"

namespace adamlab {

struct SweepSpec {
  Family family = Family::DivergencePiecewise;
  std::size_t n = 20;
  ProblemParams params;  // a for the scalar families, A and b for LeastSquares
  std::vector<double> beta1;
  std::vector<double> beta2;
  SamplingKind scheme = SamplingKind::Cyclic;
  Driver driver = Driver::Shuffled;
  std::uint64_t budget = 2500;  // epochs (Shuffled) or iterations (WithReplacement)
  double eta0 = 0.1;
  Schedule schedule = Schedule::InverseSqrt;
  double eps = 0.0;
  Vec v_init{1e-12};
  bool bias_correction = false;
  Vec x0{1.0};
  std::uint64_t base_seed = 0;
  std::size_t seeds_per_cell = 1;
  double tol_converge = 0.5;
  double cutoff_diverge = 1e6;
  bool record_wall_time = false;  // off keeps the CSV a pure function of the spec
};

/// k / m for k = 0..m-1.
std::vector<double> uniform_grid(std::size_t m);

struct SweepCell {
  std::size_t index = 0;
  std::size_t i1 = 0;
  std::size_t i2 = 0;
  std::size_t replicate = 0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument on an empty grid or seeds_per_cell == 0.
std::vector<SweepCell> plan_grid(const SweepSpec& spec);

struct SweepResult {
  SweepCell cell;
  std::string outcome;  // converged / plateau / diverged, or skipped / error
  double final_gap = 0.0;  // |x - x*| when x* is known, else the final gradient norm
  double final_grad_norm = 0.0;
  double min_metric = 0.0;
  std::uint64_t steps = 0;
  double wall_ms = 0.0;
  std::string note;
};

/// Never throws for a bad cell: invalid configurations come back "skipped",
/// other failures "error", both with a note.
SweepResult run_cell(const SweepSpec& spec, const Problem& problem, const SweepCell& cell);

/// Runs every planned cell whose key is not in `skip`, on `workers` threads.
/// Results are in cell-index order.
std::vector<SweepResult> run_sweep(const SweepSpec& spec, std::size_t workers,
                                   const std::set<std::string>& skip = {});

std::string sweep_csv_header();
std::string sweep_csv_row(const SweepSpec& spec, const SweepResult& result);
std::string sweep_csv(const SweepSpec& spec, const std::vector<SweepResult>& results);

/// Resume key: formatted beta1, beta2 and seed.
std::string sweep_key(double beta1, double beta2, std::uint64_t seed);

struct ResumeOutcome {
  std::string csv;
  std::size_t reused = 0;
  std::size_t computed = 0;
  std::vector<SweepResult> fresh;
};

/// Keeps rows of `existing_csv` whose key belongs to the plan, runs the
/// remaining cells, and returns the merged CSV in cell-index order. Throws
/// std::runtime_error on a header mismatch.
ResumeOutcome resume_sweep(const SweepSpec& spec, std::size_t workers,
                           const std::string& existing_csv);

}  // namespace adamlab
