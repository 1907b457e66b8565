#include "adamlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adamlab {

namespace {

constexpr double kRelSlack = 1e-12;

}  // namespace

DiagnosticsConstants make_diagnostics(double L, std::size_t d, std::size_t n, double beta1,
                                      double beta2, double eta0, double delta) {
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ContractError("diagnostics need 0 < beta2 < 1");
  if (!(beta1 >= 0.0 && beta1 < std::sqrt(beta2))) {
    throw ContractError("diagnostics need 0 <= beta1 < sqrt(beta2); the step bound has a pole at beta1 = sqrt(beta2)");
  }
  const double nd = static_cast<double>(n);
  if (!(delta > 0.0 && delta <= 1.0 / (4.0 * nd))) {
    throw ContractError("delta must lie in (0, 1/(4n)]");
  }
  DiagnosticsConstants c;
  c.L = L;
  c.d = d;
  c.n = n;
  c.beta1 = beta1;
  c.beta2 = beta2;
  c.eta0 = eta0;
  c.delta = delta;
  c.Delta1 = eta0 * L * std::sqrt(static_cast<double>(d)) / std::sqrt(1.0 - beta2) * (1.0 - beta1) /
             (1.0 - beta1 / std::sqrt(beta2));
  return c;
}

DiagnosticsConstants make_diagnostics(const Problem& p, const AdamConfig& config, double delta) {
  return make_diagnostics(p.known().L, p.dim(), p.n(), config.beta1, config.beta2, config.eta0, delta);
}

double delta_k(const DiagnosticsConstants& c, std::uint64_t k) {
  if (k < 1) throw ContractError("delta_k: k must be >= 1");
  if (!(c.beta1 < std::sqrt(c.beta2))) throw ContractError("delta_k: beta1 must be < sqrt(beta2)");
  return c.Delta1 / std::sqrt(static_cast<double>(k));
}

std::uint64_t burn_in_lag(const DiagnosticsConstants& c) {
  if (!(c.beta2 > 0.0 && c.beta2 < 1.0)) throw ContractError("burn-in lag needs 0 < beta2 < 1");
  const double nd = static_cast<double>(c.n);
  if (!(c.delta > 0.0 && c.delta <= 1.0 / (4.0 * nd))) throw ContractError("delta must lie in (0, 1/(4n)]");
  return static_cast<std::uint64_t>(std::ceil(std::log(nd * c.delta) / std::log(c.beta2)));
}

Thresholds thresholds(const DiagnosticsConstants& c, std::uint64_t k) {
  const double nd = static_cast<double>(c.n);
  const double dk = delta_k(c, k);
  const double lag_r = static_cast<double>(burn_in_lag(c));
  const double lag_q = std::ceil(std::log(0.5) / std::log(c.beta2));
  Thresholds t;
  t.R = 16.0 * std::sqrt(2.0) * dk * (lag_r + nd);
  t.Q = 32.0 * (nd + 1.0) * dk * (lag_q + nd);
  return t;
}

Vec cond_mean_v(const Problem& p, std::span<const double> x, std::span<const double> v_prev,
                double beta2) {
  const std::size_t d = p.dim();
  Vec mean_sq(d, 0.0);
  Vec g(d);
  for (std::size_t i = 0; i < p.n(); ++i) {
    p.component_grad(i, x, g);
    for (std::size_t l = 0; l < d; ++l) mean_sq[l] += g[l] * g[l];
  }
  Vec out(d);
  for (std::size_t l = 0; l < d; ++l) {
    out[l] = beta2 * v_prev[l] + (1.0 - beta2) * (mean_sq[l] / static_cast<double>(p.n()));
  }
  return out;
}

ConcentrationConstants concentration_constants(std::size_t n, double beta2, double delta) {
  const double nd = static_cast<double>(n);
  if (!(delta > 0.0 && delta <= 1.0 / (4.0 * nd))) throw ContractError("delta must lie in (0, 1/(4n)]");
  if (!(beta2 > 0.0 && beta2 <= 1.0)) throw ContractError("beta2 must lie in (0, 1]");
  ConcentrationConstants c;
  const double beta2_n = std::pow(beta2, nd);
  const double scale = (1.0 - beta2) / ((1.0 - 2.0 * nd * delta) * beta2_n);
  c.c_lower = 1.0 - scale * 4.0 * nd;
  const double inner = 1.0 - scale * 8.0 * nd;
  c.c_upper = inner > 0.0 ? 1.0 / std::sqrt(inner) : std::numeric_limits<double>::infinity();
  if (beta2 == 1.0) {
    c.p_bound = 0.0;
  } else {
    c.p_bound = nd * std::exp(-delta * delta /
                              ((1.0 - beta2) * (28.0 / (3.0 * nd) + 8.0 * delta / 3.0)));
  }
  c.precondition_ok = (1.0 - beta2) / beta2_n < 1.0 / (8.0 * nd) - delta / 4.0;
  return c;
}

ConcentrationReport concentration_report(const Problem& p, const TrajectoryLog& log,
                                         const DiagnosticsConstants& consts) {
  if (log.driver != Driver::WithReplacement) {
    throw ContractError("concentration report needs a with-replacement trajectory");
  }
  const ConcentrationConstants cc = concentration_constants(consts.n, consts.beta2, consts.delta);
  ConcentrationReport report;
  report.c_lower = cc.c_lower;
  report.c_upper = cc.c_upper;
  report.p_bound = cc.p_bound;
  report.precondition_ok = cc.precondition_ok;
  report.first_qualifying_k = burn_in_lag(consts) + consts.n + 1;
  if (!cc.precondition_ok) return report;

  const std::size_t d = p.dim();
  Vec g(d);
  Vec max_abs(d);
  for (const StepRecord& rec : log.records) {
    if (!rec.snapshot || rec.non_finite || rec.k < report.first_qualifying_k) continue;
    const StepSnapshot& s = *rec.snapshot;
    std::fill(max_abs.begin(), max_abs.end(), 0.0);
    for (std::size_t i = 0; i < p.n(); ++i) {
      p.component_grad(i, s.x_before, g);
      for (std::size_t l = 0; l < d; ++l) max_abs[l] = std::max(max_abs[l], std::abs(g[l]));
    }
    const double R = thresholds(consts, rec.k).R;
    const Vec expected = cond_mean_v(p, s.x_before, s.v_before, consts.beta2);
    for (std::size_t l = 0; l < d; ++l) {
      if (max_abs[l] < R) continue;
      ++report.qualifying_steps;
      const double inv_sqrt_v = 1.0 / std::sqrt(s.v_after[l]);
      const double inv_sqrt_e = 1.0 / std::sqrt(expected[l]);
      if (inv_sqrt_v < cc.c_lower * inv_sqrt_e) ++report.lower_violations;
      if (inv_sqrt_v > cc.c_upper * inv_sqrt_e) ++report.upper_violations;
    }
  }
  const double q = static_cast<double>(std::max<std::uint64_t>(1, report.qualifying_steps));
  report.empirical_rate =
      static_cast<double>(report.lower_violations + report.upper_violations) / q;
  report.within_bound = report.empirical_rate <= report.p_bound + 3.0 * std::sqrt(report.p_bound / q);
  return report;
}

Vec potential_z(const std::vector<Vec>& history, double beta1, std::size_t n) {
  if (history.size() < n + 1) throw ContractError("potential_z: need at least n+1 iterates");
  const Vec& x_k = history.back();
  const Vec& x_k_minus_n = history[history.size() - 1 - n];
  return potential_z_epoch(x_k, x_k_minus_n, beta1, n);
}

Vec potential_z_epoch(std::span<const double> x_epoch, std::span<const double> x_prev_epoch,
                      double beta1, std::size_t n) {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ContractError("potential_z: beta1 must lie in [0, 1)");
  if (x_epoch.size() != x_prev_epoch.size()) throw ContractError("potential_z: dimension mismatch");
  const double w = std::pow(beta1, static_cast<double>(n));
  Vec z(x_epoch.size());
  for (std::size_t l = 0; l < z.size(); ++l) z[l] = (x_epoch[l] - w * x_prev_epoch[l]) / (1.0 - w);
  return z;
}

double theorem_metric_from_norm(double grad_norm, double D0, double D1, std::size_t d) {
  if (D0 == 0.0 && D1 == 0.0) throw ContractError("theorem_metric: D0 and D1 are both zero");
  if (grad_norm == 0.0) return 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  const double arm0 = D0 > 0.0 ? grad_norm * grad_norm / std::sqrt(D0) : inf;
  const double arm1 =
      D1 > 0.0 ? grad_norm / (2.0 * std::sqrt(static_cast<double>(d) * D1)) : inf;
  return std::min(arm0, arm1);
}

double theorem_metric(std::span<const double> grad, double D0, double D1, std::size_t d) {
  return theorem_metric_from_norm(l2_norm(grad), D0, D1, d);
}

Outcome classify_outcome(const TrajectoryLog& log, double tol_converge, double cutoff_diverge) {
  if (log.evals.empty()) throw std::invalid_argument("classify_outcome: empty log");
  if (log.summary.status != RunStatus::Completed) return Outcome::Diverged;
  for (double x : log.summary.final_x) {
    if (!std::isfinite(x) || std::abs(x) > cutoff_diverge) return Outcome::Diverged;
  }
  const EvalPoint& last = log.evals.back();
  if (!std::isfinite(last.grad_norm)) return Outcome::Diverged;

  const bool use_gap = std::isfinite(log.evals.front().gap);
  const std::size_t count = log.evals.size();
  const std::size_t tail = std::max<std::size_t>(1, count / 10);
  double sum = 0.0;
  for (std::size_t j = count - tail; j < count; ++j) {
    const EvalPoint& e = log.evals[j];
    sum += use_gap ? e.gap : e.grad_norm;
  }
  const double tail_mean = sum / static_cast<double>(tail);
  if (!std::isfinite(tail_mean)) return Outcome::Diverged;
  return tail_mean <= tol_converge ? Outcome::Converged : Outcome::Plateau;
}

std::vector<Violation> verify_invariants(const TrajectoryLog& log, const AdamConfig& config) {
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  if (!(b1 < std::sqrt(b2))) throw ContractError("verify_invariants: need beta1 < sqrt(beta2)");
  if (std::any_of(config.m_init.begin(), config.m_init.end(), [](double m) { return m != 0.0; })) {
    throw ContractError("verify_invariants: step bound assumes m_init = 0");
  }

  std::vector<Violation> out;
  auto flag = [&](std::uint64_t t, std::size_t l, const char* what, double value, double bound) {
    out.push_back(Violation{t, l, what, value, bound});
  };

  const double step_factor =
      b2 < 1.0 ? (1.0 - b1) / (std::sqrt(1.0 - b2) * (1.0 - b1 / std::sqrt(b2)))
               : std::numeric_limits<double>::infinity();

  // Snapshot records in step order, for the geometric-memory look-back.
  std::vector<const StepRecord*> snaps;
  for (const StepRecord& rec : log.records) {
    if (rec.snapshot && !rec.non_finite) snaps.push_back(&rec);
  }
  constexpr std::size_t kMaxLookBack = 4096;

  for (std::size_t s_idx = 0; s_idx < snaps.size(); ++s_idx) {
    const StepRecord& rec = *snaps[s_idx];
    const StepSnapshot& s = *rec.snapshot;
    const std::size_t d = s.x_after.size();

    if (config.bias_correction) {
      AdamConfig plain = config;
      plain.bias_correction = false;
      const double base = stepsize(plain, rec.k);
      const double lo = std::sqrt(1.0 - b2) * base;
      const double hi = base / (1.0 - b1);
      if (rec.eta < lo * (1.0 - kRelSlack)) flag(rec.t, 0, "bias_envelope_lower", rec.eta, lo);
      if (rec.eta > hi * (1.0 + kRelSlack)) flag(rec.t, 0, "bias_envelope_upper", rec.eta, hi);
    }

    for (std::size_t l = 0; l < d; ++l) {
      const double step = std::abs(s.x_after[l] - s.x_before[l]);
      const double step_bound = rec.eta * step_factor;
      if (step > step_bound * (1.0 + kRelSlack)) flag(rec.t, l, "step_bound", step, step_bound);

      const double v_new = s.v_after[l];
      if (!(v_new >= 0.0)) {
        flag(rec.t, l, "v", v_new, 0.0);
        continue;
      }
      const double g_sq = s.grad[l] * s.grad[l];
      const double hi = std::max(s.v_before[l], g_sq);
      const double lo = std::min(s.v_before[l], g_sq);
      if (v_new > hi * (1.0 + kRelSlack)) flag(rec.t, l, "v_envelope_upper", v_new, hi);
      if (v_new < lo * (1.0 - kRelSlack)) flag(rec.t, l, "v_envelope_lower", v_new, lo);

      const std::size_t first = s_idx > kMaxLookBack ? s_idx - kMaxLookBack : 0;
      for (std::size_t j_idx = first; j_idx <= s_idx; ++j_idx) {
        const StepRecord& past = *snaps[j_idx];
        const double lag = static_cast<double>(rec.t - past.t);
        const double gp = past.snapshot->grad[l];
        const double floor = (1.0 - b2) * std::pow(b2, lag) * gp * gp;
        if (v_new < floor * (1.0 - kRelSlack)) {
          flag(rec.t, l, "v_geometric_memory", v_new, floor);
        }
      }
    }
  }
  return out;
}

}  // namespace adamlab
