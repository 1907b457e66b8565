#include "adamlab/verify.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "adamlab/io.hpp"

namespace adamlab {

namespace {

constexpr std::size_t kMaxReported = 20;

double uniform(SplitMix64& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

std::size_t pick(SplitMix64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.bounded(hi - lo + 1));
}

Problem random_problem(SplitMix64& rng) {
  switch (rng.bounded(4)) {
    case 0:
      return make_reddi(pick(rng, 3, 8));
    case 1:
      return make_divergence(pick(rng, 3, 10), uniform(rng, 0.05, 2.0));
    case 2:
      return make_nonrealizable(uniform(rng, 0.5, 10.0));
    default: {
      Matrix A;
      A.rows = pick(rng, 2, 8);
      A.cols = pick(rng, 1, 4);
      A.data.resize(A.rows * A.cols);
      for (double& v : A.data) v = uniform(rng, -2.0, 2.0);
      Vec b(A.rows);
      for (double& v : b) v = uniform(rng, -2.0, 2.0);
      return make_least_squares(std::move(A), std::move(b));
    }
  }
}

AdamConfig random_config(SplitMix64& rng) {
  AdamConfig c;
  const double u = rng.uniform();
  c.beta2 = u < 0.25 ? 1.0 - std::pow(10.0, -uniform(rng, 1.0, 4.0)) : uniform(rng, 0.01, 0.99);
  c.beta1 = rng.uniform() < 0.15 ? 0.0 : rng.uniform() * std::sqrt(c.beta2) * 0.999;
  c.eta0 = std::pow(10.0, uniform(rng, -3.0, 0.0));
  c.eps = rng.uniform() < 0.5 ? 0.0 : 1e-8;
  c.v_init = {c.eps > 0.0 && rng.uniform() < 0.5 ? 0.0 : std::pow(10.0, uniform(rng, -12.0, -2.0))};
  c.m_init = {0.0};
  c.bias_correction = rng.uniform() < 0.5;
  c.schedule = rng.uniform() < 0.5 ? Schedule::InverseSqrt : Schedule::Constant;
  return c;
}

bool same_bits(const Vec& a, const Vec& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool same_log(const TrajectoryLog& a, const TrajectoryLog& b) {
  if (!same_bits(a.summary.final_x, b.summary.final_x)) return false;
  if (a.records.size() != b.records.size() || a.evals.size() != b.evals.size()) return false;
  for (std::size_t r = 0; r < a.records.size(); ++r) {
    const StepRecord& x = a.records[r];
    const StepRecord& y = b.records[r];
    if (x.t != y.t || x.batch != y.batch || x.snapshot.has_value() != y.snapshot.has_value()) {
      return false;
    }
    if (x.snapshot && (!same_bits(x.snapshot->x_after, y.snapshot->x_after) ||
                       !same_bits(x.snapshot->m_after, y.snapshot->m_after) ||
                       !same_bits(x.snapshot->v_after, y.snapshot->v_after))) {
      return false;
    }
  }
  return true;
}

std::string describe(const Violation& v) {
  std::ostringstream s;
  s << v.quantity << " at t=" << v.t << " coordinate " << v.coordinate
    << ": value " << format_double(v.value) << " vs bound " << format_double(v.bound);
  return s.str();
}

}  // namespace

SuiteResult run_invariant_suite(std::size_t trials, std::uint64_t steps, std::uint64_t seed) {
  SuiteResult result;
  result.trials = trials;
  SplitMix64 rng(seed);
  auto report = [&](std::size_t trial, std::string check, std::string detail) {
    if (result.failures.size() < kMaxReported) {
      result.failures.push_back({trial, std::move(check), std::move(detail)});
    }
  };

  for (std::size_t trial = 0; trial < trials; ++trial) {
    const Problem p = random_problem(rng);
    const AdamConfig config = random_config(rng);
    const SamplingScheme scheme{static_cast<SamplingKind>(rng.bounded(3)), rng.next()};
    Vec x0(p.dim());
    for (double& v : x0) v = uniform(rng, -3.0, 3.0);
    if (p.box()) p.project_in_place(x0);

    RunOptions opts;
    opts.driver = rng.uniform() < 0.5 ? Driver::WithReplacement : Driver::Shuffled;
    opts.budget = opts.driver == Driver::WithReplacement ? steps : (steps + p.n() - 1) / p.n();
    opts.snapshots = true;

    const TrajectoryLog log = run(p, config, scheme, x0, opts);
    result.steps_checked += log.records.size();
    for (const Violation& v : verify_invariants(log, config)) {
      ++result.invariant_violations;
      report(trial, v.quantity, describe(v));
    }

    if (!same_log(log, run(p, config, scheme, x0, opts))) {
      ++result.replay_mismatches;
      report(trial, "replay", "second run with identical inputs differs");
    }

    AdamConfig sign = config;
    sign.beta1 = 0.0;
    sign.beta2 = 0.0;
    sign.eps = 0.0;
    sign.v_init = {1e-12};
    const TrajectoryLog slog = run(p, sign, scheme, x0, opts);
    for (const StepRecord& rec : slog.records) {
      if (!rec.snapshot || rec.non_finite) continue;
      const StepSnapshot& s = *rec.snapshot;
      Vec expected(s.x_before.size());
      for (std::size_t l = 0; l < expected.size(); ++l) {
        const double g = s.grad[l];
        const double sgn = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
        expected[l] = s.x_before[l] - rec.eta * sgn;
      }
      if (p.box()) p.project_in_place(expected);
      if (!same_bits(expected, s.x_after)) {
        ++result.signsgd_mismatches;
        report(trial, "signsgd", "step " + std::to_string(rec.t) + " differs from -eta sign(g)");
      }
    }
  }
  return result;
}

}  // namespace adamlab
