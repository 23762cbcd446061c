#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "osmm/driver.hpp"
#include "osmm/problems.hpp"

namespace osmm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadSpec = 1;
inline constexpr int kExitSolverFailure = 2;
inline constexpr int kExitGradcheckFailed = 3;

/// Everything needed to build one instance and solve it.
struct RunSpec {
  std::string problem = "kelly";
  std::optional<long> n;            // assets / stocks / products; problem default when unset
  std::optional<long> num_samples;  // samples, or grid points for density
  long data_size = 2000;            // density: number of observed points
  std::uint64_t seed = 0;
  std::optional<double> eta;        // risk level for cvar / newsvendor
  double lambda = 0.01;             // density regularization weight
  std::string regularizer = "l2";   // density: l2 | grad
  std::string instance_path;        // load instead of generating
  std::string save_instance_path;   // write the instance before solving

  long rank = 20;
  long memory = 20;
  int max_iter = 200;
  double eps_gap_abs = 1e-4;
  double eps_gap_rel = 1e-3;
  double eps_res_abs = 1e-4;
  double eps_res_rel = 1e-3;
  int lower_bound_every = 10;
  bool use_validation = false;

  std::filesystem::path out_dir = ".";
};

/// Generates (or loads) the instance described by the spec. Throws
/// Error(InvalidArgument / Io) for unresolvable specs.
ProblemInstance build_instance(const RunSpec& spec);

SolverConfig build_config(const RunSpec& spec);

/// Per-iteration log; absent residuals are written as empty fields and
/// missing bounds as -inf / inf.
void write_iterations_csv(const SolveReport& report, std::ostream& os);

/// JSON summary with keys status, h_final, lower_bound, gap, iters,
/// f_value_calls, f_grad_calls, wall_time_s.
std::string summary_json(const SolveReport& report);

int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err);

int cmd_sweep(const RunSpec& spec, const std::vector<long>& ranks,
              const std::vector<long>& memories, int jobs, std::ostream& out, std::ostream& err);

int cmd_gradcheck(const RunSpec& spec, int points, std::ostream& out, std::ostream& err);

/// Full command-line entry point (argv[0] is the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace osmm::cli
