#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "osmm/instance_io.hpp"

namespace osmm::cli {
namespace {

/// Round-trip formatting for every floating-point field of the outputs.
std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

bool converged(SolveStatus status) {
  return status == SolveStatus::GapConverged || status == SolveStatus::ResidualConverged;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  os << text;
  if (!os) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

struct RunOutcome {
  int code = kExitOk;
  std::optional<SolveReport> report;
  std::string message;
  std::string warning;
};

/// The density box only exists to make the parameter set compact; a
/// solution on it means the box, not the data, shaped the answer.
std::string box_warning(const ProblemInstance& instance, const Vector& x) {
  if (instance.kind != "density" || !instance.g.box) return {};
  constexpr double kTouch = 1e-6;
  const Box& box = *instance.g.box;
  long touching = 0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double margin = std::min(x(j) - box.lower(j), box.upper(j) - x(j));
    if (margin <= kTouch * (1.0 + std::abs(x(j)))) ++touching;
  }
  if (touching == 0) return {};
  return "warning: " + std::to_string(touching) + " density coefficient(s) at the parameter box";
}

/// Solves one configuration and writes its CSV and JSON summary.
RunOutcome solve_and_write(const ProblemInstance& instance, const SolverConfig& config,
                           const std::filesystem::path& csv_path,
                           const std::filesystem::path& json_path) {
  RunOutcome outcome;
  Oracle oracle = instance.make_oracle();
  try {
    outcome.report = solve(oracle, instance.g, instance.x0, config);
  } catch (const Error& e) {
    outcome.code = kExitSolverFailure;
    outcome.message = e.what();
    return outcome;
  }
  std::ostringstream csv;
  write_iterations_csv(*outcome.report, csv);
  write_file(csv_path, csv.str());
  write_file(json_path, summary_json(*outcome.report) + "\n");
  outcome.warning = box_warning(instance, outcome.report->x);
  return outcome;
}

std::vector<long> parse_list(const std::string& text) {
  std::vector<long> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 0) {
      throw Error(ErrorCode::InvalidArgument, "bad list entry '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "list must be nonempty");
  return values;
}

}  // namespace

ProblemInstance build_instance(const RunSpec& spec) {
  ProblemInstance instance;
  if (!spec.instance_path.empty()) {
    instance = load_instance(spec.instance_path);
  } else {
    const bool val = spec.use_validation;
    auto size_or = [](const std::optional<long>& v, long fallback) { return v.value_or(fallback); };
    if (spec.problem == "kelly") {
      instance = gen_kelly(size_or(spec.n, 50), size_or(spec.num_samples, 20000), spec.seed, val);
    } else if (spec.problem == "cvar") {
      instance = gen_cvar_portfolio(size_or(spec.n, 20), size_or(spec.num_samples, 20000),
                                    spec.seed, spec.eta.value_or(0.8), -0.1, 1.6, val);
    } else if (spec.problem == "density") {
      instance = gen_density(size_or(spec.num_samples, 10000), spec.data_size, spec.seed,
                             spec.lambda, parse_density_regularizer(spec.regularizer));
    } else if (spec.problem == "newsvendor") {
      instance = gen_newsvendor(size_or(spec.n, 40), size_or(spec.num_samples, 20000), spec.seed,
                                spec.eta.value_or(0.9), 1.0, val);
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown problem '" + spec.problem +
                                                  "' (expected kelly, cvar, density, newsvendor)");
    }
  }
  if (!spec.save_instance_path.empty()) save_instance(instance, spec.save_instance_path);
  return instance;
}

SolverConfig build_config(const RunSpec& spec) {
  SolverConfig config;
  config.rank = spec.rank;
  config.memory = spec.memory;
  config.max_iters = spec.max_iter;
  config.eps_gap_abs = spec.eps_gap_abs;
  config.eps_gap_rel = spec.eps_gap_rel;
  config.eps_res_abs = spec.eps_res_abs;
  config.eps_res_rel = spec.eps_res_rel;
  config.lower_bound_every = spec.lower_bound_every;
  config.use_validation = spec.use_validation;
  config.validate();
  return config;
}

void write_iterations_csv(const SolveReport& report, std::ostream& os) {
  os << "iter,time_s,f,g,h,lower_bound,gap,rms_residual,t,lambda,mu,r1,f_evals\n";
  for (const IterRecord& r : report.records) {
    os << r.k << ',' << fmt_double(r.time_s) << ',' << fmt_double(r.f) << ',' << fmt_double(r.g)
       << ',' << fmt_double(r.h) << ',' << fmt_double(r.lower_bound) << ','
       << fmt_double(r.gap) << ',' << (r.rms_residual ? fmt_double(*r.rms_residual) : "") << ','
       << fmt_double(r.t) << ',' << fmt_double(r.lambda) << ',' << fmt_double(r.mu) << ','
       << r.r1 << ',' << r.f_evals << '\n';
  }
}

std::string summary_json(const SolveReport& report) {
  nlohmann::ordered_json j;
  j["status"] = std::string(to_string(report.status));
  j["h_final"] = json_number(report.h);
  j["lower_bound"] = json_number(report.lower_bound);
  j["gap"] = json_number(std::isfinite(report.lower_bound) ? report.gap() : kInf);
  j["iters"] = report.iterations();
  j["f_value_calls"] = report.f_value_calls;
  j["f_grad_calls"] = report.f_grad_calls;
  j["wall_time_s"] = report.wall_time_s;
  return j.dump(2);
}

int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  ProblemInstance instance;
  SolverConfig config;
  try {
    instance = build_instance(spec);
    config = build_config(spec);
    std::filesystem::create_directories(spec.out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadSpec;
  }
  const RunOutcome outcome = solve_and_write(instance, config, spec.out_dir / "iterations.csv",
                                             spec.out_dir / "summary.json");
  if (outcome.code != kExitOk) {
    err << "solver failure: " << outcome.message << '\n';
    return outcome.code;
  }
  if (!outcome.warning.empty()) err << outcome.warning << '\n';
  out << summary_json(*outcome.report) << '\n';
  return kExitOk;
}

int cmd_sweep(const RunSpec& spec, const std::vector<long>& ranks,
              const std::vector<long>& memories, int jobs, std::ostream& out, std::ostream& err) {
  ProblemInstance instance;
  try {
    if (ranks.empty() || memories.empty()) {
      throw Error(ErrorCode::InvalidArgument, "sweep: rank and memory lists must be nonempty");
    }
    if (jobs < 1) throw Error(ErrorCode::InvalidArgument, "sweep: --jobs must be >= 1");
    instance = build_instance(spec);
    std::filesystem::create_directories(spec.out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadSpec;
  }

  struct Cell {
    long rank;
    long memory;
    SolverConfig config;
    RunOutcome outcome;
  };
  std::vector<Cell> cells;
  for (long r : ranks) {
    for (long m : memories) {
      RunSpec s = spec;
      s.rank = r;
      s.memory = m;
      try {
        cells.push_back({r, m, build_config(s), {}});
      } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadSpec;
      }
    }
  }

  // Workers pull cells in order; once any cell fails no new cell starts, and
  // the earliest failing cell decides the exit code.
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      Cell& c = cells[i];
      const std::string tag = "_r" + std::to_string(c.rank) + "_m" + std::to_string(c.memory);
      try {
        c.outcome = solve_and_write(instance, c.config, spec.out_dir / ("iterations" + tag + ".csv"),
                                    spec.out_dir / ("summary" + tag + ".json"));
      } catch (const std::exception& e) {
        c.outcome.code = kExitBadSpec;
        c.outcome.message = e.what();
      }
      if (c.outcome.code != kExitOk) failed.store(true);
    }
  };
  const int workers = std::min<int>(jobs, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  for (const Cell& c : cells) {
    if (c.outcome.code != kExitOk) {
      err << "sweep: rank " << c.rank << " memory " << c.memory << " failed: " << c.outcome.message
          << '\n';
      return c.outcome.code;
    }
    if (!c.outcome.warning.empty()) {
      err << "sweep: rank " << c.rank << " memory " << c.memory << ": " << c.outcome.warning << '\n';
    }
  }

  std::ostringstream table;
  table << "rank,memory,status,iterations,converged,time_s,f_evals_per_iter\n";
  char line[160];
  out << "  rank  memory  iters  converged     time_s  f_evals/iter\n";
  for (const Cell& c : cells) {
    const SolveReport& r = *c.outcome.report;
    const int iters = r.iterations();
    const double evals_per_iter =
        static_cast<double>(r.f_value_calls + r.f_grad_calls) / std::max(1, iters);
    const bool ok = converged(r.status);
    table << c.rank << ',' << c.memory << ',' << to_string(r.status) << ',' << iters << ','
          << (ok ? "true" : "false") << ',' << fmt_double(r.wall_time_s) << ','
          << fmt_double(evals_per_iter) << '\n';
    std::snprintf(line, sizeof line, "%6ld  %6ld  %5d%s  %9s  %9.3f  %12.2f\n", c.rank, c.memory,
                  iters, ok ? " " : "*", ok ? "yes" : "no", r.wall_time_s, evals_per_iter);
    out << line;
  }
  out << "(* = stopped without reaching tolerance)\n";
  try {
    write_file(spec.out_dir / "sweep.csv", table.str());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadSpec;
  }
  return kExitOk;
}

int cmd_gradcheck(const RunSpec& spec, int points, std::ostream& out, std::ostream& err) {
  constexpr double kThreshold = 1e-4;
  ProblemInstance instance;
  try {
    if (points < 1) throw Error(ErrorCode::InvalidArgument, "gradcheck: --points must be >= 1");
    instance = build_instance(spec);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadSpec;
  }
  Oracle oracle = instance.make_oracle();
  Rng rng(spec.seed, 0x67726164);
  double worst = 0.0;
  try {
    for (int p = 0; p < points; ++p) {
      const Vector x = random_interior_point(instance, rng);
      worst = std::max(worst, gradient_check(oracle, x).max_rel_error);
    }
  } catch (const Error& e) {
    err << "gradcheck: " << e.what() << '\n';
    return kExitGradcheckFailed;
  }
  char line[160];
  std::snprintf(line, sizeof line, "max relative gradient error over %d points: %.3e\n", points,
                worst);
  out << line;
  if (instance.kind == "cvar") {
    out << "nonsmooth: the CVaR hinge has kinks, so the error is reported but not thresholded\n";
    return kExitOk;
  }
  if (worst <= kThreshold) {
    out << "pass\n";
    return kExitOk;
  }
  out << "FAIL (threshold " << kThreshold << ")\n";
  return kExitGradcheckFailed;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunSpec spec;
  std::string ranks_text = "0,20,50";
  std::string memories_text = "1,20,50";
  int jobs = 1;
  int points = 20;
  std::uint64_t seed = 0;

  CLI::App app{"Oracle-structured minimization: solve f + g with an oracle f and structured g"};
  app.name("osmm");
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file overriding flag defaults");

  app.add_option("--problem", spec.problem, "kelly | cvar | density | newsvendor")
      ->capture_default_str();
  app.add_option("--n", spec.n, "assets (kelly), stocks (cvar) or products (newsvendor)");
  app.add_option("--num-samples", spec.num_samples, "samples, or grid points for density");
  app.add_option("--data-size", spec.data_size, "density: observed points")->capture_default_str();
  app.add_option("--seed", seed, "instance seed")->capture_default_str();
  app.add_option("--eta", spec.eta, "risk level (cvar 0.8, newsvendor 0.9)");
  app.add_option("--lambda", spec.lambda, "density regularization weight")->capture_default_str();
  app.add_option("--regularizer", spec.regularizer, "density regularizer: l2 | grad")
      ->capture_default_str();
  app.add_option("--instance", spec.instance_path, "load the instance from this file");
  app.add_option("--save-instance", spec.save_instance_path, "save the instance to this file");
  app.add_option("--rank", spec.rank, "curvature rank r")->capture_default_str();
  app.add_option("--memory", spec.memory, "bundle memory M")->capture_default_str();
  app.add_option("--max-iter", spec.max_iter, "iteration cap")->capture_default_str();
  app.add_option("--eps-gap-abs", spec.eps_gap_abs, "absolute gap tolerance")->capture_default_str();
  app.add_option("--eps-gap-rel", spec.eps_gap_rel, "relative gap tolerance")->capture_default_str();
  app.add_option("--eps-res-abs", spec.eps_res_abs, "absolute residual tolerance")->capture_default_str();
  app.add_option("--eps-res-rel", spec.eps_res_rel, "relative residual tolerance")->capture_default_str();
  app.add_option("--lower-bound-every", spec.lower_bound_every, "lower-bound cadence")
      ->capture_default_str();
  app.add_flag("--use-validation", spec.use_validation,
               "generate an independent sample set and widen the gap tolerance by it");
  std::string out_dir = ".";
  app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();

  CLI::App* run = app.add_subcommand("run", "solve one instance");
  CLI::App* sweep = app.add_subcommand("sweep", "solve over a rank x memory grid");
  sweep->add_option("--ranks", ranks_text, "comma-separated ranks")->capture_default_str();
  sweep->add_option("--memories", memories_text, "comma-separated memories")
      ->capture_default_str();
  sweep->add_option("--jobs", jobs, "worker threads")->capture_default_str();
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gradcheck->add_option("--points", points, "random interior points")->capture_default_str();
  for (CLI::App* sub : {run, sweep, gradcheck}) sub->fallthrough();

  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadSpec;
  }
  spec.seed = seed;
  spec.out_dir = out_dir;

  if (run->parsed()) return cmd_run(spec, out, err);
  if (gradcheck->parsed()) return cmd_gradcheck(spec, points, out, err);
  std::vector<long> ranks;
  std::vector<long> memories;
  try {
    ranks = parse_list(ranks_text);
    memories = parse_list(memories_text);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadSpec;
  }
  return cmd_sweep(spec, ranks, memories, jobs, out, err);
}

}  // namespace osmm::cli
