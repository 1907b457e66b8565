#include "adamlab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adamlab/analysis.hpp"

namespace adamlab {

std::string_view schedule_name(Schedule s) {
  return s == Schedule::InverseSqrt ? "invsqrt" : "constant";
}

Schedule parse_schedule(std::string_view name) {
  if (name == "invsqrt" || name == "inverse-sqrt") return Schedule::InverseSqrt;
  if (name == "constant") return Schedule::Constant;
  throw ConfigError("unknown schedule '" + std::string(name) + "'");
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Converged: return "converged";
    case Outcome::Plateau: return "plateau";
    case Outcome::Diverged: return "diverged";
  }
  return "?";
}

std::string_view status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::CutoffExceeded: return "cutoff";
    case RunStatus::NonFinite: return "nonfinite";
  }
  return "?";
}

void AdamConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 <= 1.0)) throw ConfigError("beta2 must lie in [0, 1]");
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw ConfigError("eta0 must be positive");
  if (!(eps >= 0.0)) throw ConfigError("eps must be nonnegative");
  if (v_init.empty() || m_init.empty()) throw ConfigError("v_init and m_init must be non-empty");
  for (double v : v_init) {
    if (!(v >= 0.0)) throw ConfigError("v_init must be nonnegative");
  }
  const double v_min = *std::min_element(v_init.begin(), v_init.end());
  if (!(eps > 0.0 || v_min > 0.0)) {
    throw ConfigError("Adam is not well-defined: need eps > 0 or v_init > 0");
  }
}

void AdamConfig::validate_for(std::size_t d) const {
  validate();
  if (v_init.size() != 1 && v_init.size() != d) throw ConfigError("v_init size must be 1 or d");
  if (m_init.size() != 1 && m_init.size() != d) throw ConfigError("m_init size must be 1 or d");
}

double stepsize(const AdamConfig& config, std::uint64_t k) {
  if (k < 1) throw std::invalid_argument("stepsize: k must be >= 1");
  const double kd = static_cast<double>(k);
  double eta = config.schedule == Schedule::InverseSqrt ? config.eta0 / std::sqrt(kd) : config.eta0;
  if (config.bias_correction) {
    eta *= std::sqrt(1.0 - std::pow(config.beta2, kd)) / (1.0 - std::pow(config.beta1, kd));
  }
  return eta;
}

namespace {

Vec broadcast(const Vec& v, std::size_t d) { return v.size() == 1 ? Vec(d, v[0]) : v; }

bool all_finite(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const double d = a[l] - b[l];
    s += d * d;
  }
  return std::sqrt(s);
}

// Shared update for both drivers. g is the component gradient at state.x.
StepRecord apply_update(OptimizerState& s, const Problem& p, const AdamConfig& c,
                        std::size_t batch, double eta, const StepOptions& opts, Vec& g) {
  StepRecord rec;
  rec.batch = batch;
  rec.eta = eta;
  p.component_grad(batch, s.x, g);
  rec.grad_component_norm = l2_norm(g);

  if (opts.snapshot) {
    rec.snapshot.emplace();
    rec.snapshot->x_before = s.x;
    rec.snapshot->m_before = s.m;
    rec.snapshot->v_before = s.v;
    rec.snapshot->grad = g;
  }

  const std::size_t d = s.x.size();
  for (std::size_t l = 0; l < d; ++l) {
    s.m[l] = c.beta1 * s.m[l] + (1.0 - c.beta1) * g[l];
    s.v[l] = c.beta2 * s.v[l] + (1.0 - c.beta2) * g[l] * g[l];
    // A zero numerator moves nothing, even when sqrt(v) + eps is zero.
    const double direction = s.m[l] == 0.0 ? 0.0 : s.m[l] / (std::sqrt(s.v[l]) + c.eps);
    s.x[l] = s.x[l] - eta * direction;
  }
  if (p.box()) {
    p.project_in_place(s.x);
  }
  if (opts.snapshot) {
    rec.snapshot->x_after = s.x;
    rec.snapshot->m_after = s.m;
    rec.snapshot->v_after = s.v;
    rec.step_norm = distance(rec.snapshot->x_after, rec.snapshot->x_before);
  }
  rec.x_norm = l2_norm(s.x);
  rec.non_finite = !(all_finite(s.x) && all_finite(s.m) && all_finite(s.v));
  if (opts.diagnostics && !rec.non_finite) {
    rec.objective = p.objective(s.x);
    rec.full_grad_norm = l2_norm(p.full_grad(s.x));
  }
  ++s.steps;
  rec.t = s.steps;
  return rec;
}

}  // namespace

OptimizerState OptimizerState::initial(const Problem& p, const AdamConfig& config, Vec x0) {
  config.validate_for(p.dim());
  if (x0.size() == 1 && p.dim() > 1) x0 = Vec(p.dim(), x0[0]);
  if (x0.size() != p.dim()) throw ConfigError("x0 dimension does not match the problem");
  OptimizerState s;
  s.x = std::move(x0);
  s.m = broadcast(config.m_init, p.dim());
  s.v = broadcast(config.v_init, p.dim());
  return s;
}

StepRecord step_wr(OptimizerState& state, const Problem& p, const AdamConfig& config,
                   IndexSampler& sampler, const StepOptions& opts) {
  Vec g(p.dim());
  const Vec x_before = opts.snapshot ? Vec{} : state.x;
  const std::size_t batch = sampler.next();
  StepRecord rec = apply_update(state, p, config, batch, stepsize(config, state.k), opts, g);
  if (!opts.snapshot) rec.step_norm = distance(state.x, x_before);
  rec.k = state.k;
  ++state.k;
  return rec;
}

namespace {

// One shuffled-driver epoch. opts_for(t) picks instrumentation per global
// step; on_step(record) returns true to stop the epoch early.
template <class OptsFor, class OnStep>
void epoch_loop(OptimizerState& state, const Problem& p, const AdamConfig& config,
                IndexSampler& sampler, OptsFor opts_for, OnStep on_step) {
  Vec g(p.dim());
  Vec x_before;
  const double eta = stepsize(config, state.k);
  sampler.begin_epoch();
  for (std::size_t i = 0; i < p.n(); ++i) {
    const StepOptions so = opts_for(state.steps + 1);
    state.i = i;
    if (!so.snapshot) x_before = state.x;
    const std::size_t batch = sampler.next();
    StepRecord rec = apply_update(state, p, config, batch, eta, so, g);
    if (!so.snapshot) rec.step_norm = distance(state.x, x_before);
    rec.k = state.k;
    rec.i = i;
    if (on_step(std::move(rec))) break;
  }
  state.i.reset();
  ++state.k;
}

}  // namespace

std::vector<StepRecord> run_epoch_rr(OptimizerState& state, const Problem& p,
                                     const AdamConfig& config, IndexSampler& sampler,
                                     const StepOptions& opts) {
  std::vector<StepRecord> records;
  records.reserve(p.n());
  epoch_loop(
      state, p, config, sampler, [&](std::uint64_t) { return opts; },
      [&](StepRecord rec) {
        const bool stop = rec.non_finite;
        records.push_back(std::move(rec));
        return stop;
      });
  return records;
}

namespace {

bool exceeds_cutoff(const Vec& x, double cutoff) {
  return std::any_of(x.begin(), x.end(), [cutoff](double v) { return std::abs(v) > cutoff; });
}

EvalPoint evaluate(const Problem& p, const Vec& x, std::uint64_t k) {
  EvalPoint e;
  e.k = k;
  if (!all_finite(x)) {
    e.grad_norm = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  const Vec grad = p.full_grad(x);
  e.grad_norm = l2_norm(grad);
  const auto& known = p.known();
  if (known.x_star) e.gap = distance(x, *known.x_star);
  if (known.D0 && known.D1 && (*known.D0 > 0.0 || *known.D1 > 0.0)) {
    e.metric = theorem_metric(grad, *known.D0, *known.D1, p.dim());
  }
  return e;
}

}  // namespace

TrajectoryLog run(const Problem& p, const AdamConfig& config, const SamplingScheme& scheme,
                  const Vec& x0, const RunOptions& opts) {
  if (opts.budget < 1) throw std::invalid_argument("run: budget must be >= 1");
  if (opts.snapshot_stride < 1) throw std::invalid_argument("run: snapshot stride must be >= 1");

  OptimizerState state = OptimizerState::initial(p, config, x0);
  IndexSampler sampler(scheme, p.n());
  TrajectoryLog log;
  log.driver = opts.driver;
  log.n = p.n();
  log.evals.reserve(static_cast<std::size_t>(opts.budget) + 1);
  log.evals.push_back(evaluate(p, state.x, 1));

  auto keep = [&](std::uint64_t t) {
    return (opts.log_every > 0 && t % opts.log_every == 0) ||
           (opts.snapshots && t % opts.snapshot_stride == 0);
  };
  auto step_opts = [&](std::uint64_t t) {
    StepOptions so;
    so.diagnostics = opts.log_every > 0 && t % opts.log_every == 0;
    so.snapshot = opts.snapshots && t % opts.snapshot_stride == 0;
    return so;
  };

  RunStatus status = RunStatus::Completed;
  auto check = [&](const StepRecord& rec) {
    if (rec.non_finite) {
      status = RunStatus::NonFinite;
    } else if (exceeds_cutoff(state.x, opts.cutoff)) {
      status = RunStatus::CutoffExceeded;
    }
    return status != RunStatus::Completed;
  };

  if (opts.driver == Driver::WithReplacement) {
    for (std::uint64_t it = 0; it < opts.budget; ++it) {
      const std::uint64_t t = state.steps + 1;
      StepRecord rec = step_wr(state, p, config, sampler, step_opts(t));
      const bool stop = check(rec);
      if (keep(t) || stop) log.records.push_back(std::move(rec));
      log.evals.push_back(evaluate(p, state.x, state.k));
      if (stop) break;
    }
  } else {
    for (std::uint64_t ep = 0; ep < opts.budget && status == RunStatus::Completed; ++ep) {
      epoch_loop(state, p, config, sampler, step_opts, [&](StepRecord rec) {
        const bool stop = check(rec);
        if (keep(rec.t) || stop) log.records.push_back(std::move(rec));
        return stop;
      });
      log.evals.push_back(evaluate(p, state.x, state.k));
    }
  }

  RunSummary& s = log.summary;
  s.status = status;
  s.final_x = state.x;
  s.steps = state.steps;
  s.initial_gap = log.evals.front().gap;
  s.initial_grad_norm = log.evals.front().grad_norm;
  s.final_gap = log.evals.back().gap;
  s.final_grad_norm = log.evals.back().grad_norm;
  double min_grad = std::numeric_limits<double>::infinity();
  double min_metric = std::numeric_limits<double>::infinity();
  for (const EvalPoint& e : log.evals) {
    if (std::isfinite(e.grad_norm)) min_grad = std::min(min_grad, e.grad_norm);
    if (std::isfinite(e.metric)) min_metric = std::min(min_metric, e.metric);
  }
  s.min_grad_norm = std::isfinite(min_grad) ? min_grad : std::numeric_limits<double>::quiet_NaN();
  s.min_metric = std::isfinite(min_metric) ? min_metric : std::numeric_limits<double>::quiet_NaN();
  s.outcome = classify_outcome(log, opts.tol_converge, opts.cutoff);
  return log;
}

}  // namespace adamlab
