#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kfsslab/riccati.hpp"
#include "kfsslab/solvers.hpp"

namespace kfsslab::cli {

/// Process exit codes shared by every command.
enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kSolverError = 2,
  kTooLarge = 3,
};

struct SolveConfig {
  std::filesystem::path input;
  Mode mode = Mode::Select;
  Algorithm algorithm = Algorithm::Greedy;
  Metric metric = Metric::Priori;
  std::optional<double> budget;  ///< defaults to the instance budget
  SolverOptions opts;
  std::optional<std::filesystem::path> output;
};

struct GadgetConfig {
  std::string kind;  ///< example1, example2, kfss or kfsa
  double lambda1 = 0.9;
  double h = 1.0;
  std::optional<std::filesystem::path> x3c;
  double K = 1.0;
  std::filesystem::path output;
};

struct X3CConfig {
  std::string via = "bruteforce";  ///< bruteforce, kfss or kfsa
  Algorithm solver = Algorithm::Exhaustive;
  double K = 1.0;
  std::filesystem::path input;
  SolverOptions opts = SolverOptions::gadget();
  std::optional<std::filesystem::path> output;
};

/// Solver settings used by sweeps unless overridden: a finer rank cutoff
/// and tie window than the library defaults.
inline SolverOptions sweep_options() {
  SolverOptions o;
  o.pinv_rtol = 1e-14;
  o.tie_rtol = 1e-13;
  return o;
}

struct SweepConfig {
  std::string family = "example1";  ///< example1 or example2
  double lambda1 = 0.9;
  std::vector<double> h_grid;
  Metric metric = Metric::Priori;
  std::optional<double> v_scale;  ///< replaces V by v_scale * I
  SolverOptions opts = sweep_options();
  std::optional<std::filesystem::path> output;
};

/// Log-spaced grid of `points` values from `lo` to `hi` inclusive.
std::vector<double> log_grid(double lo, double hi, int points);

int cmd_solve(const SolveConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_gadget(const GadgetConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_x3c(const X3CConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace kfsslab::cli
