#include "kfsslab/solvers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "kfsslab/parallel.hpp"

namespace kfsslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool within_tie(double a, double b, double rtol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= rtol * std::max({1.0, std::abs(a), std::abs(b)});
}

void require_unit(const Vector& costs, const char* what) {
  for (Eigen::Index i = 0; i < costs.size(); ++i)
    if (costs[i] != 1.0)
      throw SolverError(SolverError::Kind::NonUnitCosts,
                        std::string("greedy ") + what +
                            " requires all costs equal to 1");
}

// Index of the extreme score; ties within rtol resolve to the first entry.
std::size_t pick_extreme(const std::vector<double>& scores, bool maximize,
                         double rtol) {
  double best = scores.front();
  for (double s : scores)
    if (maximize ? s > best : s < best) best = s;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (within_tie(scores[i], best, rtol)) return i;
  return 0;
}

SolveReport run_greedy(const SystemModel& model, std::size_t budget,
                       Metric metric, Mode mode, const SolverOptions& opts) {
  const auto q = static_cast<std::size_t>(model.sensors());
  if (budget > q)
    throw SolverError(SolverError::Kind::BudgetExceedsSensors,
                      "budget " + std::to_string(budget) + " exceeds " +
                          std::to_string(q) + " sensors");
  const bool attack = mode == Mode::Attack;
  require_unit(attack ? model.attack_costs : model.selection_costs,
               attack ? "attack" : "selection");
  opts.validate();

  // Bit set = sensor in the greedy set S.
  std::vector<bool> in_set(q, false);
  auto score_with = [&](std::size_t extra) {
    SelectionVector sel(q);
    for (std::size_t i = 0; i < q; ++i) {
      const bool member = in_set[i] || i == extra;
      sel.set(i, attack ? !member : member);
    }
    return evaluate_selection(model, sel, metric, opts).trace();
  };

  SolveReport report;
  report.mode = mode;
  report.algorithm = Algorithm::Greedy;
  report.metric = metric;
  report.sensor_count = q;

  for (std::size_t step = 0; step < budget; ++step) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < q; ++i)
      if (!in_set[i]) pool.push_back(i);
    const auto scores = parallel_map<double>(
        pool.size(), [&](std::size_t k) { return score_with(pool[k]); });
    report.evaluations += pool.size();

    const auto best = pick_extreme(scores, attack, opts.tie_rtol);
    GreedyStep log;
    for (std::size_t k = 0; k < pool.size(); ++k)
      log.candidates.push_back({pool[k], scores[k]});
    log.chosen = pool[best];
    log.chosen_trace = scores[best];
    in_set[pool[best]] = true;
    report.steps.push_back(std::move(log));
  }

  SelectionVector final_sel(q);
  for (std::size_t i = 0; i < q; ++i) {
    if (in_set[i]) report.chosen.push_back(i);
    final_sel.set(i, attack ? !in_set[i] : in_set[i]);
  }
  const auto result = evaluate_selection(model, final_sel, metric, opts);
  ++report.evaluations;
  report.trace = result.trace();
  report.finite = result.is_finite();
  report.diag = result.diagonal();
  return report;
}

bool lexicographically_before(std::uint64_t a, std::uint64_t b) {
  // Compare ascending index lists of the set bits.
  while (a != 0 && b != 0) {
    const auto la = std::countr_zero(a);
    const auto lb = std::countr_zero(b);
    if (la != lb) return la < lb;
    a &= a - 1;
    b &= b - 1;
  }
  return a == 0 && b != 0;
}

SolveReport run_exhaustive(const SystemModel& model, const Vector& costs,
                           double budget, Metric metric, Mode mode,
                           const SolverOptions& opts) {
  const auto q = static_cast<std::size_t>(model.sensors());
  if (q > kMaxExhaustiveSensors)
    throw SolverError(SolverError::Kind::TooManySensors,
                      "exhaustive search is limited to " +
                          std::to_string(kMaxExhaustiveSensors) + " sensors");
  if (static_cast<std::size_t>(costs.size()) != q)
    throw ModelError(ModelError::Kind::DimensionMismatch,
                     {"cost vector length does not match sensor count"});
  opts.validate();
  const bool attack = mode == Mode::Attack;

  const double slack = 1e-9 * std::max(1.0, std::abs(budget));
  std::vector<std::uint64_t> feasible;
  const std::uint64_t total = std::uint64_t{1} << q;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double spent = 0.0;
    for (std::size_t i = 0; i < q; ++i)
      if ((mask >> i) & 1U) spent += costs[static_cast<Eigen::Index>(i)];
    if (spent <= budget + slack) feasible.push_back(mask);
  }

  auto selection_of = [&](std::uint64_t mask) {
    const auto bits = SelectionVector::from_mask(q, mask);
    if (!attack) return bits;
    return complement(AttackVector::from_mask(q, mask));
  };

  const auto scores = parallel_map<double>(feasible.size(), [&](std::size_t k) {
    return evaluate_selection(model, selection_of(feasible[k]), metric, opts)
        .trace();
  });

  double extreme = scores.front();
  for (double s : scores)
    if (attack ? s > extreme : s < extreme) extreme = s;
  std::uint64_t best = 0;
  bool have = false;
  for (std::size_t k = 0; k < feasible.size(); ++k) {
    if (!within_tie(scores[k], extreme, opts.tie_rtol)) continue;
    const auto mask = feasible[k];
    if (!have) {
      best = mask;
      have = true;
      continue;
    }
    const auto pc = std::popcount(mask);
    const auto pb = std::popcount(best);
    if (pc < pb || (pc == pb && lexicographically_before(mask, best)))
      best = mask;
  }

  SolveReport report;
  report.mode = mode;
  report.algorithm = Algorithm::Exhaustive;
  report.metric = metric;
  report.sensor_count = q;
  for (std::size_t i = 0; i < q; ++i)
    if ((best >> i) & 1U) report.chosen.push_back(i);
  const auto result = evaluate_selection(model, selection_of(best), metric, opts);
  report.evaluations = feasible.size() + 1;
  report.trace = result.trace();
  report.finite = result.is_finite();
  report.diag = result.diagonal();
  return report;
}

nlohmann::json trace_json(double t) {
  return std::isfinite(t) ? nlohmann::json(t) : nlohmann::json(nullptr);
}

}  // namespace

std::string_view to_string(Metric m) {
  return m == Metric::Priori ? "priori" : "posteriori";
}

std::string_view to_string(Mode m) {
  return m == Mode::Select ? "select" : "attack";
}

std::string_view to_string(Algorithm a) {
  return a == Algorithm::Greedy ? "greedy" : "exhaustive";
}

SelectionVector SolveReport::selection() const {
  return SelectionVector::from_support(sensor_count, chosen);
}

AttackVector SolveReport::attack() const {
  return AttackVector::from_support(sensor_count, chosen);
}

std::vector<std::size_t> SolveReport::pick_order() const {
  if (steps.empty()) return chosen;
  std::vector<std::size_t> order;
  for (const auto& s : steps) order.push_back(s.chosen);
  return order;
}

SteadyStateResult evaluate_selection(const SystemModel& model,
                                     const SelectionVector& selection,
                                     Metric metric, const SolverOptions& opts) {
  const auto sub = restrict_to(model, selection);
  auto priori = dare_steady_state(model.A, sub.C, model.W, sub.V, opts);
  if (metric == Metric::Priori || !priori.is_finite()) return priori;
  return SteadyStateResult::finite(
      posteriori_from_priori(priori.cov(), sub.C, sub.V, opts),
      priori.iterations());
}

SteadyStateResult evaluate_attack(const SystemModel& model,
                                  const AttackVector& attack, Metric metric,
                                  const SolverOptions& opts) {
  return evaluate_selection(model, complement(attack), metric, opts);
}

SolveReport greedy_select(const SystemModel& model, std::size_t budget,
                          Metric metric, const SolverOptions& opts) {
  return run_greedy(model, budget, metric, Mode::Select, opts);
}

SolveReport greedy_attack(const SystemModel& model, std::size_t budget,
                          Metric metric, const SolverOptions& opts) {
  return run_greedy(model, budget, metric, Mode::Attack, opts);
}

SolveReport exhaustive_select(const SystemModel& model, const Vector& costs,
                              double budget, Metric metric,
                              const SolverOptions& opts) {
  return run_exhaustive(model, costs, budget, metric, Mode::Select, opts);
}

SolveReport exhaustive_attack(const SystemModel& model, const Vector& costs,
                              double budget, Metric metric,
                              const SolverOptions& opts) {
  return run_exhaustive(model, costs, budget, metric, Mode::Attack, opts);
}

double greedy_ratio(const SystemModel& model, std::size_t budget, Mode mode,
                    Metric metric, const SolverOptions& opts) {
  const Vector unit = Vector::Ones(model.sensors());
  const double b = static_cast<double>(budget);
  double greedy = 0.0;
  double optimal = 0.0;
  if (mode == Mode::Select) {
    greedy = greedy_select(model, budget, metric, opts).trace;
    optimal = exhaustive_select(model, unit, b, metric, opts).trace;
  } else {
    greedy = greedy_attack(model, budget, metric, opts).trace;
    optimal = exhaustive_attack(model, unit, b, metric, opts).trace;
  }
  const double num = mode == Mode::Select ? greedy : optimal;
  const double den = mode == Mode::Select ? optimal : greedy;
  if (std::isinf(num) && std::isinf(den)) return 1.0;
  if (std::isinf(num) || std::isinf(den)) return kInf;
  return num / den;
}

nlohmann::json report_to_json(const SolveReport& report) {
  nlohmann::json j;
  j["mode"] = to_string(report.mode);
  j["algorithm"] = to_string(report.algorithm);
  j["metric"] = to_string(report.metric);
  j["q"] = report.sensor_count;
  auto one_based = nlohmann::json::array();
  for (auto i : report.chosen) one_based.push_back(i + 1);
  j["chosen"] = one_based;
  std::vector<int> bits(report.sensor_count, 0);
  for (auto i : report.chosen) bits[i] = 1;
  j["bits"] = bits;
  j["trace"] = trace_json(report.trace);
  j["finite"] = report.finite;
  j["diag"] = std::vector<double>(report.diag.begin(), report.diag.end());
  auto steps = nlohmann::json::array();
  for (const auto& s : report.steps) {
    nlohmann::json step;
    auto cands = nlohmann::json::array();
    for (const auto& c : s.candidates)
      cands.push_back({{"sensor", c.sensor + 1}, {"trace", trace_json(c.trace)}});
    step["candidates"] = cands;
    step["chosen"] = s.chosen + 1;
    step["chosen_trace"] = trace_json(s.chosen_trace);
    steps.push_back(std::move(step));
  }
  j["steps"] = steps;
  j["evaluations"] = report.evaluations;
  return j;
}

}  // namespace kfsslab
