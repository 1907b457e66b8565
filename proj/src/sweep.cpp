#include "adamlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "adamlab/io.hpp"

namespace adamlab {

std::vector<double> uniform_grid(std::size_t m) {
  std::vector<double> g(m);
  for (std::size_t k = 0; k < m; ++k) g[k] = static_cast<double>(k) / static_cast<double>(m);
  return g;
}

std::vector<SweepCell> plan_grid(const SweepSpec& spec) {
  if (spec.beta1.empty() || spec.beta2.empty()) throw std::invalid_argument("sweep grid is empty");
  if (spec.seeds_per_cell == 0) throw std::invalid_argument("seeds_per_cell must be >= 1");
  std::vector<SweepCell> cells;
  cells.reserve(spec.beta1.size() * spec.beta2.size() * spec.seeds_per_cell);
  for (std::size_t i1 = 0; i1 < spec.beta1.size(); ++i1) {
    for (std::size_t i2 = 0; i2 < spec.beta2.size(); ++i2) {
      for (std::size_t r = 0; r < spec.seeds_per_cell; ++r) {
        SweepCell c;
        c.index = cells.size();
        c.i1 = i1;
        c.i2 = i2;
        c.replicate = r;
        c.beta1 = spec.beta1[i1];
        c.beta2 = spec.beta2[i2];
        c.seed = spec.base_seed + static_cast<std::uint64_t>(c.index);
        cells.push_back(c);
      }
    }
  }
  return cells;
}

SweepResult run_cell(const SweepSpec& spec, const Problem& problem, const SweepCell& cell) {
  SweepResult r;
  r.cell = cell;
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  r.final_gap = r.final_grad_norm = r.min_metric = nan;

  AdamConfig config;
  config.beta1 = cell.beta1;
  config.beta2 = cell.beta2;
  config.eta0 = spec.eta0;
  config.schedule = spec.schedule;
  config.eps = spec.eps;
  config.v_init = spec.v_init;
  config.bias_correction = spec.bias_correction;

  RunOptions opts;
  opts.driver = spec.driver;
  opts.budget = spec.budget;
  opts.cutoff = spec.cutoff_diverge;
  opts.tol_converge = spec.tol_converge;

  const auto start = std::chrono::steady_clock::now();
  try {
    const TrajectoryLog log = run(problem, config, {spec.scheme, cell.seed}, spec.x0, opts);
    const RunSummary& s = log.summary;
    r.outcome = std::string(outcome_name(s.outcome));
    r.final_grad_norm = s.final_grad_norm;
    r.final_gap = problem.known().x_star ? s.final_gap : s.final_grad_norm;
    r.min_metric = s.min_metric;
    r.steps = s.steps;
  } catch (const ConfigError& e) {
    r.outcome = "skipped";
    r.note = e.what();
  } catch (const std::exception& e) {
    r.outcome = "error";
    r.note = e.what();
  }
  if (spec.record_wall_time) {
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
  }
  return r;
}

std::string sweep_key(double beta1, double beta2, std::uint64_t seed) {
  return format_double(beta1) + "," + format_double(beta2) + "," + std::to_string(seed);
}

std::vector<SweepResult> run_sweep(const SweepSpec& spec, std::size_t workers,
                                   const std::set<std::string>& skip) {
  if (workers < 1) throw std::invalid_argument("run_sweep: workers must be >= 1");
  const Problem problem = make_problem(spec.family, spec.n, spec.params);
  std::vector<SweepCell> todo;
  for (const SweepCell& c : plan_grid(spec)) {
    if (!skip.count(sweep_key(c.beta1, c.beta2, c.seed))) todo.push_back(c);
  }

  std::vector<SweepResult> results(todo.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < todo.size(); j = next++) {
      results[j] = run_cell(spec, problem, todo[j]);
    }
  };
  const std::size_t w = std::min(workers, std::max<std::size_t>(1, todo.size()));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return results;
}

std::string sweep_csv_header() {
  return "beta1,beta2,n,a,seed,scheme,budget,outcome,final_gap,final_grad_norm,min_metric,steps,"
         "wall_ms\n";
}

std::string sweep_csv_row(const SweepSpec& spec, const SweepResult& r) {
  std::string row;
  row += format_double(r.cell.beta1) + ',';
  row += format_double(r.cell.beta2) + ',';
  row += std::to_string(spec.n) + ',';
  row += format_double(spec.params.a) + ',';
  row += std::to_string(r.cell.seed) + ',';
  row += std::string(sampling_name(spec.scheme)) + ',';
  row += std::to_string(spec.budget) + ',';
  row += r.outcome + ',';
  row += format_double(r.final_gap) + ',';
  row += format_double(r.final_grad_norm) + ',';
  row += format_double(r.min_metric) + ',';
  row += std::to_string(r.steps) + ',';
  row += format_double(r.wall_ms) + '\n';
  return row;
}

std::string sweep_csv(const SweepSpec& spec, const std::vector<SweepResult>& results) {
  std::string out = sweep_csv_header();
  for (const SweepResult& r : results) out += sweep_csv_row(spec, r);
  return out;
}

ResumeOutcome resume_sweep(const SweepSpec& spec, std::size_t workers,
                           const std::string& existing_csv) {
  const std::vector<SweepCell> plan = plan_grid(spec);
  std::map<std::string, std::size_t> index_of;
  for (const SweepCell& c : plan) index_of[sweep_key(c.beta1, c.beta2, c.seed)] = c.index;

  std::map<std::size_t, std::string> rows;
  std::istringstream in(existing_csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      if (line + "\n" != sweep_csv_header()) {
        throw std::runtime_error("existing sweep CSV has an unexpected header");
      }
      header = false;
      continue;
    }
    if (line.empty()) continue;
    // Key fields: beta1 (col 0), beta2 (col 1), seed (col 4).
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 13) continue;
    const double b1 = std::strtod(f[0].c_str(), nullptr);
    const double b2 = std::strtod(f[1].c_str(), nullptr);
    const auto it = index_of.find(sweep_key(b1, b2, std::stoull(f[4])));
    if (it != index_of.end()) rows[it->second] = line + "\n";
  }

  std::set<std::string> done;
  for (const SweepCell& c : plan) {
    if (rows.count(c.index)) done.insert(sweep_key(c.beta1, c.beta2, c.seed));
  }
  ResumeOutcome out;
  out.reused = rows.size();
  out.fresh = run_sweep(spec, workers, done);
  out.computed = out.fresh.size();
  for (const SweepResult& r : out.fresh) rows[r.cell.index] = sweep_csv_row(spec, r);
  out.csv = sweep_csv_header();
  for (const auto& [idx, row] : rows) out.csv += row;
  return out;
}

}  // namespace adamlab
