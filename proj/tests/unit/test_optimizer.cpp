#include <gtest/gtest.h>

#include <cmath>

#include "adamlab/optimizer.hpp"

using namespace adamlab;

namespace {

Problem lsq(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix A{rows, cols, {}};
  for (std::size_t k = 0; k < rows * cols; ++k) A.data.push_back(rng.uniform() * 2.0 - 1.0);
  Vec b(rows);
  for (double& v : b) v = rng.uniform() * 2.0 - 1.0;
  return make_least_squares(A, b);
}

}  // namespace

TEST(Optimizer, StepsizeExamples) {
  AdamConfig c;
  c.eta0 = 0.1;
  EXPECT_DOUBLE_EQ(stepsize(c, 4), 0.05);
  c.schedule = Schedule::Constant;
  EXPECT_EQ(stepsize(c, 4), 0.1);
  c.schedule = Schedule::InverseSqrt;
  c.bias_correction = true;
  c.beta1 = 0.9;
  c.beta2 = 0.999;
  EXPECT_NEAR(stepsize(c, 1), std::sqrt(0.001) / 0.1 * 0.1, 1e-15);
  EXPECT_NEAR(stepsize(c, 1), 0.0316228, 1e-7);
  EXPECT_THROW(stepsize(c, 0), std::invalid_argument);
}

TEST(Optimizer, BiasCorrectionEnvelope) {
  SplitMix64 rng(8);
  for (int t = 0; t < 500; ++t) {
    AdamConfig c;
    c.beta1 = rng.uniform() * 0.999;
    c.beta2 = rng.uniform();
    c.eta0 = 0.01 + rng.uniform();
    const std::uint64_t k = 1 + rng.bounded(100000);
    const double base = c.eta0 / std::sqrt(static_cast<double>(k));
    c.bias_correction = true;
    const double eta = stepsize(c, k);
    EXPECT_GE(eta, std::sqrt(1.0 - c.beta2) * base * (1.0 - 1e-12));
    EXPECT_LE(eta, base / (1.0 - c.beta1) * (1.0 + 1e-12));
  }
}

TEST(Optimizer, ConfigValidation) {
  AdamConfig c;
  EXPECT_NO_THROW(c.validate());
  c.beta1 = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = AdamConfig{};
  c.beta2 = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = AdamConfig{};
  c.eta0 = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = AdamConfig{};
  c.eps = 0.0;
  c.v_init = {0.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c.eps = 1e-8;
  EXPECT_NO_THROW(c.validate());
  c.v_init = {1.0, 2.0};
  EXPECT_THROW(c.validate_for(3), ConfigError);
  EXPECT_EQ(parse_schedule(schedule_name(Schedule::Constant)), Schedule::Constant);
  EXPECT_THROW(parse_schedule("cosine"), ConfigError);
}

TEST(Optimizer, SingleStepByHand) {
  // divpw n=3, a=0.5: f_0'(0) = 1 + 2 * 0.5 = 2.
  const Problem p = make_divergence(3, 0.5);
  AdamConfig c;
  c.beta1 = 0.9;
  c.beta2 = 0.999;
  c.eta0 = 0.1;
  c.eps = 0.0;
  c.schedule = Schedule::Constant;
  c.v_init = {1.0};
  OptimizerState s = OptimizerState::initial(p, c, Vec{0.0});
  IndexSampler sampler({SamplingKind::Cyclic, 0}, 3);
  const StepRecord rec = step_wr(s, p, c, sampler);
  EXPECT_NEAR(s.m[0], 0.2, 1e-15);
  EXPECT_NEAR(s.v[0], 1.003, 1e-15);
  EXPECT_NEAR(s.x[0], -0.1 * 0.2 / std::sqrt(1.003), 1e-15);
  EXPECT_NEAR(s.x[0], -0.0199700, 1e-7);
  EXPECT_EQ(rec.batch, 0u);
  EXPECT_EQ(rec.k, 1u);
  EXPECT_EQ(s.k, 2u);
  EXPECT_DOUBLE_EQ(rec.step_norm, std::abs(s.x[0]));
}

TEST(Optimizer, SignSgdReduction) {
  const Problem p = lsq(4, 3, 21);
  AdamConfig c;
  c.beta1 = 0.0;
  c.beta2 = 0.0;
  c.eps = 0.0;
  c.eta0 = 0.3;
  OptimizerState s = OptimizerState::initial(p, c, Vec{0.4, -1.2, 2.0});
  IndexSampler sampler({SamplingKind::WithReplacement, 5}, p.n());
  for (int t = 0; t < 50; ++t) {
    const Vec x = s.x;
    const StepRecord rec = step_wr(s, p, c, sampler, {false, true});
    const Vec& g = rec.snapshot->grad;
    for (std::size_t l = 0; l < x.size(); ++l) {
      const double sgn = (g[l] > 0) - (g[l] < 0);
      EXPECT_EQ(s.x[l], x[l] - rec.eta * sgn);
    }
  }
}

TEST(Optimizer, ReddiProjectionClamps) {
  const Problem p = make_reddi(3);
  AdamConfig c;
  c.beta1 = 0.0;
  c.beta2 = 0.1;
  c.eps = 1e-8;
  c.v_init = {0.0};
  OptimizerState s = OptimizerState::initial(p, c, Vec{1.0});
  IndexSampler sampler({SamplingKind::Cyclic, 0}, 3);
  sampler.next();  // component 1 next: gradient -1 pushes right
  step_wr(s, p, c, sampler);
  EXPECT_EQ(s.x[0], 1.0);
}

TEST(Optimizer, SingleComponentEpochEqualsOneStep) {
  const Problem p = lsq(1, 2, 4);
  AdamConfig c;
  c.beta1 = 0.8;
  c.beta2 = 0.95;
  OptimizerState a = OptimizerState::initial(p, c, Vec{0.3, -0.7});
  OptimizerState b = a;
  IndexSampler sa({SamplingKind::RandomShuffle, 1}, 1), sb({SamplingKind::WithReplacement, 1}, 1);
  for (int e = 0; e < 5; ++e) {
    run_epoch_rr(a, p, c, sa);
    step_wr(b, p, c, sb);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.m, b.m);
    EXPECT_EQ(a.v, b.v);
    EXPECT_EQ(a.k, b.k);
  }
}

TEST(Optimizer, ShuffledEpochSignSteps) {
  const Problem p = lsq(2, 1, 6);
  AdamConfig c;
  c.beta1 = 0.0;
  c.beta2 = 0.0;
  c.eta0 = 0.5;
  OptimizerState s = OptimizerState::initial(p, c, Vec{1.5});
  IndexSampler sampler({SamplingKind::RandomShuffle, 3}, 2);
  for (int e = 1; e <= 4; ++e) {
    const auto recs = run_epoch_rr(s, p, c, sampler, {false, true});
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_NE(recs[0].batch, recs[1].batch);
    for (const StepRecord& r : recs) {
      const double g = r.snapshot->grad[0];
      const double sgn = (g > 0) - (g < 0);
      EXPECT_EQ(r.snapshot->x_after[0], r.snapshot->x_before[0] - r.eta * sgn);
      EXPECT_DOUBLE_EQ(r.eta, 0.5 / std::sqrt(static_cast<double>(e)));
      EXPECT_EQ(r.k, static_cast<std::uint64_t>(e));
    }
  }
}

TEST(Optimizer, EpochCarriesMomentsAndHoldsStepsize) {
  const Problem p = make_divergence(5, 1.0);
  AdamConfig c;
  c.beta1 = 0.7;
  c.beta2 = 0.9;
  OptimizerState s = OptimizerState::initial(p, c, Vec{0.5});
  IndexSampler sampler({SamplingKind::RandomShuffle, 11}, 5);
  const auto e1 = run_epoch_rr(s, p, c, sampler, {false, true});
  const auto e2 = run_epoch_rr(s, p, c, sampler, {false, true});
  EXPECT_EQ(e2.front().snapshot->m_before, e1.back().snapshot->m_after);
  EXPECT_EQ(e2.front().snapshot->v_before, e1.back().snapshot->v_after);
  EXPECT_EQ(e2.front().snapshot->x_before, e1.back().snapshot->x_after);
  for (const auto& r : e1) EXPECT_EQ(r.eta, 0.1);
  for (const auto& r : e2) EXPECT_EQ(r.eta, 0.1 / std::sqrt(2.0));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(*e2[i].i, i);
  EXPECT_EQ(s.k, 3u);
  EXPECT_FALSE(s.i.has_value());
}

TEST(Optimizer, StepNormIsDistance) {
  const Problem p = lsq(3, 3, 9);
  AdamConfig c;
  OptimizerState s = OptimizerState::initial(p, c, Vec{1.0, 2.0, -1.0});
  IndexSampler sampler({SamplingKind::WithReplacement, 2}, 3);
  for (int t = 0; t < 20; ++t) {
    const StepRecord r = step_wr(s, p, c, sampler, {false, true});
    double d = 0.0;
    for (std::size_t l = 0; l < 3; ++l) {
      const double u = r.snapshot->x_after[l] - r.snapshot->x_before[l];
      d += u * u;
    }
    EXPECT_EQ(r.step_norm, std::sqrt(d));
  }
}

TEST(Optimizer, RunIsDeterministic) {
  const Problem p = make_divergence(5, 1.0);
  AdamConfig c;
  RunOptions o;
  o.driver = Driver::Shuffled;
  o.budget = 3;
  o.log_every = 1;
  o.snapshots = true;
  const TrajectoryLog a = run(p, c, {SamplingKind::RandomShuffle, 99}, Vec{1.0}, o);
  const TrajectoryLog b = run(p, c, {SamplingKind::RandomShuffle, 99}, Vec{1.0}, o);
  ASSERT_EQ(a.records.size(), 15u);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t r = 0; r < a.records.size(); ++r) {
    EXPECT_EQ(a.records[r].batch, b.records[r].batch);
    EXPECT_EQ(a.records[r].snapshot->x_after, b.records[r].snapshot->x_after);
    EXPECT_EQ(a.records[r].snapshot->v_after, b.records[r].snapshot->v_after);
  }
  EXPECT_EQ(a.summary.final_x, b.summary.final_x);
}

TEST(Optimizer, RunRejectsZeroBudget) {
  RunOptions o;
  o.budget = 0;
  EXPECT_THROW(run(make_reddi(3), AdamConfig{}, {}, Vec{0.0}, o), std::invalid_argument);
}

TEST(Optimizer, RunLogSubsampling) {
  RunOptions o;
  o.budget = 100;
  o.log_every = 10;
  const TrajectoryLog log = run(make_reddi(3), AdamConfig{}, {SamplingKind::Cyclic, 0}, Vec{0.0}, o);
  ASSERT_EQ(log.records.size(), 10u);
  EXPECT_EQ(log.records.front().t, 10u);
  EXPECT_TRUE(std::isfinite(log.records.front().objective));
  EXPECT_FALSE(log.records.front().snapshot.has_value());
  EXPECT_EQ(log.evals.size(), 101u);
  EXPECT_EQ(log.summary.steps, 100u);
}

TEST(Optimizer, DivergenceRegionCornersFromPaperFigure) {
  const Problem p = make_divergence(20, 1.0);
  AdamConfig c;
  c.eta0 = 0.1;
  c.eps = 1e-8;
  c.v_init = {0.0};
  RunOptions o;
  o.driver = Driver::Shuffled;
  o.budget = 2500;
  c.beta1 = 0.9;
  c.beta2 = 0.999;
  const TrajectoryLog good = run(p, c, {SamplingKind::Cyclic, 0}, Vec{1.0}, o);
  EXPECT_LE(good.summary.final_gap, 0.5);
  c.beta1 = 0.0;
  c.beta2 = 0.1;
  const TrajectoryLog bad = run(p, c, {SamplingKind::Cyclic, 0}, Vec{1.0}, o);
  EXPECT_GE(bad.summary.final_gap, 30.0);
}

TEST(Optimizer, NonFiniteStopsRun) {
  AdamConfig c;
  c.eta0 = 1e308;
  c.schedule = Schedule::Constant;
  RunOptions o;
  o.budget = 50;
  o.cutoff = std::numeric_limits<double>::infinity();
  const TrajectoryLog log =
      run(make_nonrealizable(1.0), c, {SamplingKind::WithReplacement, 1}, Vec{0.5}, o);
  EXPECT_EQ(log.summary.status, RunStatus::NonFinite);
  EXPECT_EQ(log.summary.outcome, Outcome::Diverged);
  EXPECT_LT(log.summary.steps, 50u);
  ASSERT_FALSE(log.records.empty());
  EXPECT_TRUE(log.records.back().non_finite);
}

TEST(Optimizer, CutoffStopsRun) {
  AdamConfig c;
  c.beta1 = 0.0;
  c.beta2 = 0.1;
  c.eta0 = 10.0;
  c.schedule = Schedule::Constant;
  RunOptions o;
  o.driver = Driver::Shuffled;
  o.budget = 100000;
  o.cutoff = 1e3;
  const TrajectoryLog log =
      run(make_divergence(20, 1.0), c, {SamplingKind::Cyclic, 0}, Vec{1.0}, o);
  EXPECT_EQ(log.summary.status, RunStatus::CutoffExceeded);
  EXPECT_EQ(log.summary.outcome, Outcome::Diverged);
}
