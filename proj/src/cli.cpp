#include "adamlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "adamlab/analysis.hpp"
#include "adamlab/io.hpp"
#include "adamlab/region.hpp"
#include "adamlab/sweep.hpp"
#include "adamlab/verify.hpp"

namespace adamlab {

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ProblemFlags {
  std::string problem;
  std::optional<std::size_t> n;
  std::optional<double> a;
  std::string lsq_csv;
};

struct OptimFlags {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eta0 = 0.1;
  double eps = 0.0;
  std::optional<double> v_init;
  bool bias_correction = false;
  std::string schedule = "invsqrt";
  std::string scheme;
  std::optional<std::uint64_t> seed;
  std::string x0 = "1";
  std::optional<std::uint64_t> epochs;
  std::optional<std::uint64_t> iters;
  double cutoff = 1e6;
  std::optional<double> tol;
};

void add_problem_flags(CLI::App* app, ProblemFlags& f) {
  app->add_option("--problem", f.problem, "reddi | divpw | nonreal | lsq")->required();
  app->add_option("--n", f.n, "number of components (default: 3 reddi, 20 divpw, 10 nonreal)");
  app->add_option("--a", f.a, "family parameter a (default: 1 divpw, 10 nonreal)");
  app->add_option("--lsq-csv", f.lsq_csv, "A|b rows for lsq, last column b");
}

void add_optim_flags(CLI::App* app, OptimFlags& f, bool with_budget) {
  app->add_option("--beta1", f.beta1)->capture_default_str();
  app->add_option("--beta2", f.beta2)->capture_default_str();
  app->add_option("--eta0", f.eta0)->capture_default_str();
  app->add_option("--eps", f.eps)->capture_default_str();
  app->add_option("--v-init", f.v_init, "scalar v_0 (default 1e-12 if eps = 0, else 0)");
  app->add_flag("--bias-correction", f.bias_correction);
  app->add_option("--schedule", f.schedule, "invsqrt | constant")->capture_default_str();
  app->add_option("--seed", f.seed, "sampling seed (fallback: ADAM_LAB_SEED, then 0)");
  app->add_option("--x0", f.x0, "initial point, scalar or comma list")->capture_default_str();
  if (with_budget) {
    auto* e = app->add_option("--epochs", f.epochs, "epoch budget, epoch-indexed stepsize");
    auto* i = app->add_option("--iters", f.iters, "iteration budget, iteration-indexed stepsize");
    e->excludes(i);
  }
  app->add_option("--cutoff", f.cutoff, "divergence cutoff on |x_l|")->capture_default_str();
  app->add_option("--tol", f.tol, "convergence tolerance on the tail gap / gradient norm");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  if (const char* env = std::getenv("ADAM_LAB_SEED")) {
    char* end = nullptr;
    const std::string s(env);
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0') throw UsageError("ADAM_LAB_SEED is not an unsigned integer");
    return v;
  }
  return 0;
}

Vec parse_list(const std::string& text, const char* what) {
  Vec out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw UsageError(std::string("bad number in ") + what);
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(what) + " is empty");
  return out;
}

struct BuiltProblem {
  Family family;
  std::size_t n;
  ProblemParams params;
};

BuiltProblem problem_spec(const ProblemFlags& f) {
  BuiltProblem b;
  b.family = parse_family(f.problem);
  switch (b.family) {
    case Family::ReddiLinear:
      b.n = f.n.value_or(3);
      break;
    case Family::DivergencePiecewise:
      b.n = f.n.value_or(20);
      b.params.a = f.a.value_or(1.0);
      break;
    case Family::NonRealizableQuadratic:
      b.n = f.n.value_or(10);
      b.params.a = f.a.value_or(10.0);
      break;
    case Family::LeastSquares: {
      if (f.lsq_csv.empty()) throw UsageError("--problem lsq needs --lsq-csv");
      const Problem p = load_least_squares_csv(f.lsq_csv);
      b.n = p.n();
      b.params.A = p.matrix();
      b.params.b = p.rhs();
      if (f.n && *f.n != b.n) throw UsageError("--n does not match the rows of --lsq-csv");
      break;
    }
  }
  return b;
}

AdamConfig make_config(const OptimFlags& f) {
  AdamConfig c;
  c.beta1 = f.beta1;
  c.beta2 = f.beta2;
  c.eta0 = f.eta0;
  c.eps = f.eps;
  c.v_init = {f.v_init.value_or(f.eps > 0.0 ? 0.0 : 1e-12)};
  c.bias_correction = f.bias_correction;
  c.schedule = parse_schedule(f.schedule);
  return c;
}

// --iters selects the with-replacement recursion; otherwise epochs (default 2500).
std::pair<Driver, std::uint64_t> budget_of(const OptimFlags& f) {
  if (f.iters) return {Driver::WithReplacement, *f.iters};
  return {Driver::Shuffled, f.epochs.value_or(2500)};
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void emit(std::ostream& out, const std::string& path, const std::string& bytes) {
  write_file(path, bytes);
  out << "artifact " << path << '\n';
}

// --- run -------------------------------------------------------------------

struct RunFlags {
  ProblemFlags problem;
  OptimFlags optim;
  std::string out_dir = ".";
  std::string prefix = "run";
  std::uint64_t log_every = 1;
  bool log_x = false;
};

int cmd_run(const RunFlags& f, std::ostream& out) {
  const BuiltProblem spec = problem_spec(f.problem);
  const Problem p = make_problem(spec.family, spec.n, spec.params);
  const AdamConfig config = make_config(f.optim);
  const auto [driver, budget] = budget_of(f.optim);
  const SamplingKind kind = parse_sampling(f.optim.scheme.empty() ? "wr" : f.optim.scheme);
  const std::uint64_t seed = resolve_seed(f.optim.seed);

  RunOptions opts;
  opts.driver = driver;
  opts.budget = budget;
  opts.log_every = f.log_every;
  opts.snapshots = f.log_x && f.log_every > 0;
  opts.snapshot_stride = std::max<std::uint64_t>(1, f.log_every);
  opts.cutoff = f.optim.cutoff;
  opts.tol_converge = f.optim.tol.value_or(1e-3);
  const TrajectoryLog log = run(p, config, {kind, seed}, parse_list(f.optim.x0, "--x0"), opts);
  const RunSummary& s = log.summary;

  std::ostringstream jsonl;
  write_trajectory_jsonl(jsonl, log, f.log_x);

  std::string csv =
      "problem,n,a,beta1,beta2,eta0,eps,bias_correction,scheme,driver,budget,seed,status,outcome,"
      "initial_gap,final_gap,initial_grad_norm,final_grad_norm,min_grad_norm,min_metric,steps\n";
  csv += std::string(family_name(spec.family)) + ',' + std::to_string(spec.n) + ',' +
         format_double(spec.params.a) + ',' + format_double(config.beta1) + ',' +
         format_double(config.beta2) + ',' + format_double(config.eta0) + ',' +
         format_double(config.eps) + ',' + (config.bias_correction ? "1" : "0") + ',' +
         std::string(sampling_name(kind)) + ',' +
         (driver == Driver::WithReplacement ? "iterations" : "epochs") + ',' +
         std::to_string(budget) + ',' + std::to_string(seed) + ',' +
         std::string(status_name(s.status)) + ',' + std::string(outcome_name(s.outcome)) + ',' +
         format_double(s.initial_gap) + ',' + format_double(s.final_gap) + ',' +
         format_double(s.initial_grad_norm) + ',' + format_double(s.final_grad_norm) + ',' +
         format_double(s.min_grad_norm) + ',' + format_double(s.min_metric) + ',' +
         std::to_string(s.steps) + '\n';

  out << "outcome " << outcome_name(s.outcome) << " status " << status_name(s.status) << '\n'
      << "final_gap " << format_double(s.final_gap) << " initial_gap "
      << format_double(s.initial_gap) << '\n'
      << "final_grad_norm " << format_double(s.final_grad_norm) << " initial_grad_norm "
      << format_double(s.initial_grad_norm) << '\n';
  emit(out, join(f.out_dir, f.prefix + "_trajectory.jsonl"), jsonl.str());
  emit(out, join(f.out_dir, f.prefix + "_summary.csv"), csv);
  return kExitOk;
}

// --- sweep -----------------------------------------------------------------

struct SweepFlags {
  ProblemFlags problem;
  OptimFlags optim;
  std::string grid = "50x50";
  std::string beta1_grid;
  std::string beta2_grid;
  std::size_t seeds_per_cell = 1;
  std::size_t workers = 0;
  bool resume = false;
  bool timing = false;
  std::string heatmap;
  std::string out_dir = ".";
  std::string prefix = "sweep";
};

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw UsageError("--grid must look like 50x50");
  try {
    std::size_t used = 0;
    const std::string l = text.substr(0, x), r = text.substr(x + 1);
    const auto w = std::stoul(l, &used);
    if (used != l.size()) throw UsageError("--grid must look like 50x50");
    const auto h = std::stoul(r, &used);
    if (used != r.size()) throw UsageError("--grid must look like 50x50");
    if (w == 0 || h == 0) throw UsageError("--grid sizes must be positive");
    return {w, h};
  } catch (const std::logic_error&) {
    throw UsageError("--grid must look like 50x50");
  }
}

std::size_t default_workers(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
  const BuiltProblem bp = problem_spec(f.problem);
  const AdamConfig config = make_config(f.optim);
  SweepSpec spec;
  spec.family = bp.family;
  spec.n = bp.n;
  spec.params = bp.params;
  const auto [g1, g2] = parse_grid(f.grid);
  spec.beta1 = f.beta1_grid.empty() ? uniform_grid(g1) : parse_list(f.beta1_grid, "--beta1-grid");
  spec.beta2 = f.beta2_grid.empty() ? uniform_grid(g2) : parse_list(f.beta2_grid, "--beta2-grid");
  spec.scheme = parse_sampling(f.optim.scheme.empty() ? "cyclic" : f.optim.scheme);
  std::tie(spec.driver, spec.budget) = budget_of(f.optim);
  spec.eta0 = config.eta0;
  spec.schedule = config.schedule;
  spec.eps = config.eps;
  spec.v_init = config.v_init;
  spec.bias_correction = config.bias_correction;
  spec.x0 = parse_list(f.optim.x0, "--x0");
  spec.base_seed = resolve_seed(f.optim.seed);
  spec.seeds_per_cell = f.seeds_per_cell;
  spec.tol_converge = f.optim.tol.value_or(0.5);
  spec.cutoff_diverge = f.optim.cutoff;
  spec.record_wall_time = f.timing;
  if (spec.seeds_per_cell == 0) throw UsageError("--seeds-per-cell must be >= 1");

  const std::string csv_path = join(f.out_dir, f.prefix + ".csv");
  const std::size_t workers = default_workers(f.workers);
  std::string csv;
  std::vector<SweepResult> fresh;
  if (f.resume && std::filesystem::exists(csv_path)) {
    ResumeOutcome r = resume_sweep(spec, workers, read_file(csv_path));
    out << "resumed " << r.reused << " cells, computed " << r.computed << '\n';
    csv = std::move(r.csv);
    fresh = std::move(r.fresh);
  } else {
    fresh = run_sweep(spec, workers);
    csv = sweep_csv(spec, fresh);
  }
  std::map<std::string, std::size_t> counts;
  for (const SweepResult& r : fresh) {
    ++counts[r.outcome];
    if (!r.note.empty()) {
      err << "cell " << r.cell.index << " (" << format_double(r.cell.beta1) << ", "
          << format_double(r.cell.beta2) << "): " << r.outcome << ": " << r.note << '\n';
    }
  }
  for (const auto& [name, c] : counts) out << name << ' ' << c << '\n';
  emit(out, csv_path, csv);
  if (!f.heatmap.empty()) {
    const ScalarGrid grid = heatmap_from_csv(csv, f.heatmap, false);
    emit(out, join(f.out_dir, f.prefix + "_" + f.heatmap + ".pgm"),
         emit_pgm(grid, {}, "columns: beta1 ascending; rows: beta2 ascending downward; value: " +
                                f.heatmap));
  }
  return kExitOk;
}

// --- heatmap ---------------------------------------------------------------

struct HeatmapFlags {
  std::string csv;
  std::string value = "final_gap";
  std::string out;
  std::optional<double> min;
  std::optional<double> max;
  bool log10_scale = false;
};

int cmd_heatmap(const HeatmapFlags& f, std::ostream& out) {
  const ScalarGrid grid = heatmap_from_csv(read_file(f.csv), f.value, f.log10_scale);
  std::string path = f.out;
  if (path.empty()) path = std::filesystem::path(f.csv).replace_extension(".pgm").string();
  emit(out, path,
       emit_pgm(grid, {f.min, f.max},
                "columns: beta1 ascending; rows: beta2 ascending downward; value: " + f.value +
                    (f.log10_scale ? " (log10)" : "")));
  return kExitOk;
}

// --- region ----------------------------------------------------------------

struct RegionFlags {
  std::size_t n = 20;
  std::size_t res = 200;
  std::size_t workers = 1;
  std::string out_dir = ".";
  std::string prefix = "region";
};

int cmd_region(const RegionFlags& f, std::ostream& out, std::ostream& err) {
  if (f.res < 2) throw UsageError("--res must be >= 2");
  if (f.n < 3) throw UsageError("--n must be >= 3");
  GridSpec spec;
  spec.resolution = f.res;
  const RegionMask mask = region_mask(f.n, spec, f.workers);
  if (!c2_true_set_is_prefix(f.n, mask.beta1)) {
    err << "warning: the C2 true-set on this beta1 grid is not a prefix interval; "
           "the mask follows the raw inequality\n";
  }
  double ceiling = 0.0;
  for (double b2 : mask.beta2) ceiling = std::max(ceiling, max_eta_c3(b2, f.n));
  out << "area " << format_double(region_area(mask)) << '\n'
      << "max_eta_c3 " << format_double(ceiling) << '\n';
  const std::string stem = f.prefix + "_n" + std::to_string(f.n);
  emit(out, join(f.out_dir, stem + ".csv"), region_csv(mask));
  emit(out, join(f.out_dir, stem + ".pgm"), region_pgm(mask));
  return kExitOk;
}

// --- concentration ---------------------------------------------------------

struct ConcentrationFlags {
  ProblemFlags problem;
  OptimFlags optim;
  std::optional<double> delta;
  std::uint64_t stride = 1;
  std::string out_dir = ".";
  std::string prefix = "concentration";
};

int cmd_concentration(const ConcentrationFlags& f, std::ostream& out) {
  if (f.optim.epochs) throw UsageError("concentration runs the with-replacement recursion; use --iters");
  if (!f.optim.scheme.empty() && parse_sampling(f.optim.scheme) != SamplingKind::WithReplacement) {
    throw UsageError("concentration needs --scheme wr");
  }
  if (f.stride < 1) throw UsageError("--stride must be >= 1");
  const BuiltProblem bp = problem_spec(f.problem);
  const Problem p = make_problem(bp.family, bp.n, bp.params);
  const AdamConfig config = make_config(f.optim);
  const double delta = f.delta.value_or(1.0 / (4.0 * static_cast<double>(p.n())));

  RunOptions opts;
  opts.driver = Driver::WithReplacement;
  opts.budget = f.optim.iters.value_or(20000);
  opts.snapshots = true;
  opts.snapshot_stride = f.stride;
  opts.cutoff = f.optim.cutoff;
  const TrajectoryLog log = run(p, config, {SamplingKind::WithReplacement,
                                            resolve_seed(f.optim.seed)},
                                parse_list(f.optim.x0, "--x0"), opts);
  const ConcentrationReport rep = concentration_report(p, log, make_diagnostics(p, config, delta));
  out << "precondition_ok " << (rep.precondition_ok ? "true" : "false") << '\n'
      << "qualifying_steps " << rep.qualifying_steps << '\n'
      << "empirical_rate " << format_double(rep.empirical_rate) << '\n'
      << "p_bound " << format_double(rep.p_bound) << '\n';
  if (!rep.within_bound) out << "verdict none (precondition fails)\n";
  emit(out, join(f.out_dir, f.prefix + ".json"), concentration_json(rep));
  if (rep.within_bound && !*rep.within_bound) {
    out << "verdict exceeds p_bound + 3 sqrt(p_bound / steps)\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

// --- verify ----------------------------------------------------------------

struct VerifyFlags {
  std::size_t trials = 100;
  std::uint64_t steps = 1000;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

int cmd_verify(const VerifyFlags& f, std::ostream& out, std::ostream& err) {
  const SuiteResult r = run_invariant_suite(f.trials, f.steps, resolve_seed(f.seed));
  out << "trials " << r.trials << " steps_checked " << r.steps_checked << '\n'
      << "invariant_violations " << r.invariant_violations << '\n'
      << "signsgd_mismatches " << r.signsgd_mismatches << '\n'
      << "replay_mismatches " << r.replay_mismatches << '\n';
  if (!f.out_dir.empty()) {
    nlohmann::json list = nlohmann::json::array();
    for (const SuiteFailure& s : r.failures) {
      list.push_back({{"trial", s.trial}, {"check", s.check}, {"detail", s.detail}});
    }
    const std::string text = list.dump(2) + "\n";
    emit(out, join(f.out_dir, "verify_failures.json"), text);
  }
  if (!r.ok()) {
    const SuiteFailure& first = r.failures.front();
    err << "trial " << first.trial << ": " << first.check << ": " << first.detail << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

bool is_help(const CLI::ParseError& e) {
  return e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success);
}

}  // namespace

std::vector<std::string> apply_config_file(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return rest;

  std::ifstream in(config_path);
  if (!in) throw UsageError("cannot read config file '" + config_path + "'");
  std::vector<std::string> injected;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    const std::string flag = "--" + key;
    const bool on_command_line = std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!on_command_line) injected.push_back(flag + "=" + value);
  }
  // Insert after the subcommand (the first non-option token).
  auto sub = std::find_if(rest.begin(), rest.end(),
                          [](const std::string& a) { return a.empty() || a[0] != '-'; });
  if (sub == rest.end()) throw UsageError("--config needs a subcommand");
  rest.insert(sub + 1, injected.begin(), injected.end());
  return rest;
}

ScalarGrid heatmap_from_csv(const std::string& csv, const std::string& column, bool log10_scale) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("heatmap: empty CSV");
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    for (std::string h; std::getline(hs, h, ',');) header.push_back(h);
  }
  auto col_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument("heatmap: CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c1 = col_of("beta1"), c2 = col_of("beta2"), cv = col_of(column);
  const bool is_outcome = column == "outcome";

  std::map<std::pair<double, double>, std::pair<double, std::size_t>> acc;
  std::vector<double> b1s, b2s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) f.push_back(c);
    if (f.size() != header.size()) throw std::invalid_argument("heatmap: ragged CSV row");
    const double b1 = std::strtod(f[c1].c_str(), nullptr);
    const double b2 = std::strtod(f[c2].c_str(), nullptr);
    double v;
    if (is_outcome) {
      v = f[cv] == "converged" ? 0.0
          : f[cv] == "plateau" ? 0.5
          : f[cv] == "diverged" ? 1.0
                                : std::numeric_limits<double>::quiet_NaN();
    } else {
      v = std::strtod(f[cv].c_str(), nullptr);
    }
    if (log10_scale) v = std::log10(std::max(v, 1e-300));
    auto& slot = acc[{b1, b2}];
    slot.first += v;
    ++slot.second;
    b1s.push_back(b1);
    b2s.push_back(b2);
  }
  if (acc.empty()) throw std::invalid_argument("heatmap: CSV has no rows");
  auto unique_sorted = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  unique_sorted(b1s);
  unique_sorted(b2s);

  ScalarGrid grid;
  grid.width = b1s.size();
  grid.height = b2s.size();
  grid.values.assign(grid.width * grid.height, std::numeric_limits<double>::quiet_NaN());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.height; ++j) {
    for (std::size_t i = 0; i < grid.width; ++i) {
      const auto it = acc.find({b1s[i], b2s[j]});
      if (it == acc.end()) continue;
      const double v = it->second.first / static_cast<double>(it->second.second);
      grid.values[j * grid.width + i] = v;
      if (std::isfinite(v)) top = std::max(top, v);
    }
  }
  if (!std::isfinite(top)) top = 0.0;
  for (double& v : grid.values) {
    if (!std::isfinite(v)) v = top;
  }
  return grid;
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"adamlab: Adam (beta1, beta2) phase-transition experiments"};
  app.require_subcommand(1);

  RunFlags run_f;
  auto* run_cmd = app.add_subcommand("run", "single trajectory -> JSONL + summary CSV");
  add_problem_flags(run_cmd, run_f.problem);
  add_optim_flags(run_cmd, run_f.optim, true);
  run_cmd->add_option("--scheme", run_f.optim.scheme, "wr | rr | cyclic (default wr)");
  run_cmd->add_option("--out-dir", run_f.out_dir)->capture_default_str();
  run_cmd->add_option("--prefix", run_f.prefix)->capture_default_str();
  run_cmd->add_option("--log-every", run_f.log_every, "keep every k-th step record (0 = none)")
      ->capture_default_str();
  run_cmd->add_flag("--log-x", run_f.log_x, "include x in each JSONL record");

  SweepFlags sweep_f;
  auto* sweep_cmd = app.add_subcommand("sweep", "(beta1, beta2) grid -> CSV [+ heatmap]");
  add_problem_flags(sweep_cmd, sweep_f.problem);
  add_optim_flags(sweep_cmd, sweep_f.optim, true);
  sweep_cmd->add_option("--scheme", sweep_f.optim.scheme, "wr | rr | cyclic (default cyclic)");
  sweep_cmd->add_option("--grid", sweep_f.grid, "k/m grid sizes, beta1 x beta2")
      ->capture_default_str();
  sweep_cmd->add_option("--beta1-grid", sweep_f.beta1_grid, "explicit comma list");
  sweep_cmd->add_option("--beta2-grid", sweep_f.beta2_grid, "explicit comma list");
  sweep_cmd->add_option("--seeds-per-cell", sweep_f.seeds_per_cell)->capture_default_str();
  sweep_cmd->add_option("--workers", sweep_f.workers, "0 = hardware concurrency");
  sweep_cmd->add_flag("--resume", sweep_f.resume, "skip cells already in the output CSV");
  sweep_cmd->add_flag("--timing", sweep_f.timing, "fill wall_ms (output no longer reproducible)");
  sweep_cmd->add_option("--heatmap", sweep_f.heatmap, "also render this CSV column as PGM");
  sweep_cmd->add_option("--out-dir", sweep_f.out_dir)->capture_default_str();
  sweep_cmd->add_option("--prefix", sweep_f.prefix)->capture_default_str();

  RegionFlags region_f;
  auto* region_cmd = app.add_subcommand("region", "C1 and C2 mask -> CSV + PGM");
  region_cmd->add_option("--n", region_f.n)->capture_default_str();
  region_cmd->add_option("--res", region_f.res)->capture_default_str();
  region_cmd->add_option("--workers", region_f.workers)->capture_default_str();
  region_cmd->add_option("--out-dir", region_f.out_dir)->capture_default_str();
  region_cmd->add_option("--prefix", region_f.prefix)->capture_default_str();

  ConcentrationFlags conc_f;
  auto* conc_cmd = app.add_subcommand("concentration", "1/sqrt(v) sandwich check -> JSON");
  add_problem_flags(conc_cmd, conc_f.problem);
  add_optim_flags(conc_cmd, conc_f.optim, true);
  conc_cmd->add_option("--scheme", conc_f.optim.scheme, "must be wr");
  conc_cmd->add_option("--delta", conc_f.delta, "default 1/(4n)");
  conc_cmd->add_option("--stride", conc_f.stride, "snapshot every k-th step")
      ->capture_default_str();
  conc_cmd->add_option("--out-dir", conc_f.out_dir)->capture_default_str();
  conc_cmd->add_option("--prefix", conc_f.prefix)->capture_default_str();

  VerifyFlags verify_f;
  auto* verify_cmd = app.add_subcommand("verify", "randomized invariant suite");
  verify_cmd->add_option("--trials", verify_f.trials)->capture_default_str();
  verify_cmd->add_option("--steps", verify_f.steps)->capture_default_str();
  verify_cmd->add_option("--seed", verify_f.seed, "fallback: ADAM_LAB_SEED, then 0");
  verify_cmd->add_option("--out-dir", verify_f.out_dir, "write verify_failures.json here");

  HeatmapFlags heat_f;
  auto* heat_cmd = app.add_subcommand("heatmap", "sweep CSV column -> PGM");
  heat_cmd->add_option("--csv", heat_f.csv)->required();
  heat_cmd->add_option("--value", heat_f.value)->capture_default_str();
  heat_cmd->add_option("--out", heat_f.out, "default: CSV path with .pgm");
  heat_cmd->add_option("--min", heat_f.min);
  heat_cmd->add_option("--max", heat_f.max);
  heat_cmd->add_flag("--log10", heat_f.log10_scale);

  try {
    std::vector<std::string> args = apply_config_file(raw_args);
    std::vector<char*> argv;
    std::string prog = "adamlab";
    argv.push_back(prog.data());
    for (std::string& a : args) argv.push_back(a.data());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (is_help(e)) {
      out << app.help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run_f, out);
    if (*sweep_cmd) return cmd_sweep(sweep_f, out, err);
    if (*region_cmd) return cmd_region(region_f, out, err);
    if (*conc_cmd) return cmd_concentration(conc_f, out);
    if (*verify_cmd) return cmd_verify(verify_f, out, err);
    if (*heat_cmd) return cmd_heatmap(heat_f, out);
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::logic_error& e) {
    // ConfigError, ParameterError, ContractError, std::invalid_argument,
    // std::domain_error: the flags describe something undefined.
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace adamlab
