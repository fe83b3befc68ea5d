#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "cli/commands.hpp"

using namespace kfsslab;

namespace {

void add_solver_flags(CLI::App* cmd, SolverOptions& o) {
  cmd->add_option("--tol", o.tol, "Convergence threshold on successive iterates")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", o.max_iter, "Riccati iteration cap")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--pinv-rtol", o.pinv_rtol, "Relative rank cutoff")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--pbh-tol", o.pbh_tol, "Detectability rank tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tie-rtol", o.tie_rtol, "Relative tie window for scores")
      ->check(CLI::PositiveNumber);
}

const std::map<std::string, Mode> kModes{{"select", Mode::Select},
                                         {"attack", Mode::Attack}};
const std::map<std::string, Algorithm> kAlgorithms{
    {"greedy", Algorithm::Greedy}, {"exhaustive", Algorithm::Exhaustive}};
const std::map<std::string, Metric> kMetrics{{"priori", Metric::Priori},
                                             {"posteriori", Metric::Posteriori}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kalman filter sensor selection and attack analysis"};
  app.require_subcommand(1);

  cli::SolveConfig solve;
  std::string solve_output;
  auto* s = app.add_subcommand("solve", "Run a selection or attack solver");
  s->add_option("input", solve.input, "Instance JSON")->required();
  s->add_option_no_stream("--mode", solve.mode)
      ->transform(CLI::CheckedTransformer(kModes));
  s->add_option_no_stream("--algorithm", solve.algorithm)
      ->transform(CLI::CheckedTransformer(kAlgorithms));
  s->add_option_no_stream("--metric", solve.metric)
      ->transform(CLI::CheckedTransformer(kMetrics));
  s->add_option("--budget", solve.budget, "Override the instance budget");
  s->add_option("-o,--output", solve_output, "Report JSON path");
  add_solver_flags(s, solve.opts);

  cli::GadgetConfig gadget;
  std::string gadget_x3c;
  auto* g = app.add_subcommand("gadget", "Write a generated instance");
  g->set_help_flag("--help", "Print this help message and exit");
  g->add_option("kind", gadget.kind)
      ->required()
      ->check(CLI::IsMember({"example1", "example2", "kfss", "kfsa"}));
  g->add_option("--lambda1", gadget.lambda1);
  g->add_option("--h", gadget.h);
  g->add_option("--x3c", gadget_x3c, "X3C instance JSON");
  g->add_option("--k", gadget.K, "Gap constant K >= 1");
  g->add_option("-o,--output", gadget.output)->required();

  cli::X3CConfig x3c;
  std::string x3c_output;
  auto* x = app.add_subcommand("x3c", "Exact cover by 3-sets");
  x->require_subcommand(1);
  auto* decide = x->add_subcommand("decide", "Answer an X3C instance");
  decide->add_option("input", x3c.input)->required();
  decide->add_option("--via", x3c.via)
      ->check(CLI::IsMember({"bruteforce", "kfss", "kfsa"}));
  decide->add_option_no_stream("--solver", x3c.solver)
      ->transform(CLI::CheckedTransformer(kAlgorithms));
  decide->add_option("--k", x3c.K);
  decide->add_option("-o,--output", x3c_output);
  add_solver_flags(decide, x3c.opts);

  cli::SweepConfig sweep;
  std::string sweep_output;
  std::vector<double> h_range;
  int points = 7;
  auto* w = app.add_subcommand("sweep", "Greedy ratio along an h grid");
  w->set_help_flag("--help", "Print this help message and exit");
  w->add_option("family", sweep.family)
      ->required()
      ->check(CLI::IsMember({"example1", "example2"}));
  w->add_option("--lambda1", sweep.lambda1);
  auto* grid = w->add_option("--h", sweep.h_grid, "Explicit h values");
  auto* range = w->add_option("--h-range", h_range, "lo hi (log-spaced)")
                    ->expected(2);
  grid->excludes(range);
  w->add_option("--points", points, "Points for --h-range")
      ->check(CLI::PositiveNumber);
  w->add_option_no_stream("--metric", sweep.metric)
      ->transform(CLI::CheckedTransformer(kMetrics));
  w->add_option("--v-scale", sweep.v_scale, "Replace V with v_scale * I");
  w->add_option("-o,--output", sweep_output, "CSV path (default stdout)");
  add_solver_flags(w, sweep.opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kInputError;
  }

  if (s->parsed()) {
    if (!solve_output.empty()) solve.output = solve_output;
    return cli::cmd_solve(solve, std::cout, std::cerr);
  }
  if (g->parsed()) {
    if (!gadget_x3c.empty()) gadget.x3c = gadget_x3c;
    return cli::cmd_gadget(gadget, std::cout, std::cerr);
  }
  if (decide->parsed()) {
    if (!x3c_output.empty()) x3c.output = x3c_output;
    return cli::cmd_x3c(x3c, std::cout, std::cerr);
  }
  if (w->parsed()) {
    if (!sweep_output.empty()) sweep.output = sweep_output;
    if (!h_range.empty()) {
      try {
        sweep.h_grid = cli::log_grid(h_range[0], h_range[1], points);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kInputError;
      }
    }
    return cli::cmd_sweep(sweep, std::cout, std::cerr);
  }
  return cli::kInputError;
}
