#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kfsslab/model.hpp"
#include "kfsslab/riccati.hpp"

namespace kfsslab {

enum class Metric { Priori, Posteriori };
enum class Mode { Select, Attack };
enum class Algorithm { Greedy, Exhaustive };

std::string_view to_string(Metric m);
std::string_view to_string(Mode m);
std::string_view to_string(Algorithm a);

class SolverError : public std::runtime_error {
 public:
  enum class Kind { BudgetExceedsSensors, NonUnitCosts, TooManySensors };

  SolverError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Exhaustive enumeration is refused above this many sensors.
inline constexpr std::size_t kMaxExhaustiveSensors = 24;

struct ScoredCandidate {
  std::size_t sensor;  ///< 0-based
  double trace;        ///< +inf for an undetectable pair
};

/// One pass of a greedy loop: every candidate score plus the pick.
struct GreedyStep {
  std::vector<ScoredCandidate> candidates;
  std::size_t chosen;
  double chosen_trace;
};

struct SolveReport {
  Mode mode = Mode::Select;
  Algorithm algorithm = Algorithm::Greedy;
  Metric metric = Metric::Priori;
  std::size_t sensor_count = 0;
  /// Selected sensors (Select) or attacked sensors (Attack), 0-based and
  /// ascending. Greedy pick order is in `steps`.
  std::vector<std::size_t> chosen;
  double trace = 0.0;
  bool finite = true;
  Vector diag;
  std::vector<GreedyStep> steps;
  std::size_t evaluations = 0;

  SelectionVector selection() const;
  AttackVector attack() const;
  /// Greedy pick order (0-based); equals `chosen` for exhaustive reports.
  std::vector<std::size_t> pick_order() const;
};

SteadyStateResult evaluate_selection(const SystemModel& model,
                                     const SelectionVector& selection,
                                     Metric metric,
                                     const SolverOptions& opts = {});

SteadyStateResult evaluate_attack(const SystemModel& model,
                                  const AttackVector& attack, Metric metric,
                                  const SolverOptions& opts = {});

/// Adds one sensor per pass, minimizing the resulting trace. Requires unit
/// selection costs. Ties (within opts.tie_rtol) go to the lowest index.
SolveReport greedy_select(const SystemModel& model, std::size_t budget,
                          Metric metric, const SolverOptions& opts = {});

/// Removes one sensor per pass, maximizing the resulting trace. Requires
/// unit attack costs. Infinite beats every finite score.
SolveReport greedy_attack(const SystemModel& model, std::size_t budget,
                          Metric metric, const SolverOptions& opts = {});

/// Enumerates every selection with costs' mu <= budget and returns the
/// trace minimizer. Ties prefer the smaller support, then the
/// lexicographically smaller index list.
SolveReport exhaustive_select(const SystemModel& model, const Vector& costs,
                              double budget, Metric metric,
                              const SolverOptions& opts = {});

/// Maximizing mirror of exhaustive_select over attacks.
SolveReport exhaustive_attack(const SystemModel& model, const Vector& costs,
                              double budget, Metric metric,
                              const SolverOptions& opts = {});

/// Select: greedy trace / optimal trace. Attack: optimal / greedy.
/// Both sides infinite gives 1; exactly one infinite gives +inf.
/// Uses unit costs and a cardinality budget.
double greedy_ratio(const SystemModel& model, std::size_t budget, Mode mode,
                    Metric metric, const SolverOptions& opts = {});

nlohmann::json report_to_json(const SolveReport& report);

}  // namespace kfsslab
