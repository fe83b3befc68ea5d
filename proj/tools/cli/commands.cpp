#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kfsslab/gadgets.hpp"
#include "kfsslab/oracles.hpp"
#include "kfsslab/parallel.hpp"

namespace kfsslab::cli {

namespace {

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    if (e.violations().size() > 1)
      for (const auto& v : e.violations()) err << "  " << v << '\n';
    return kInputError;
  } catch (const X3CError& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == X3CError::Kind::TooLarge ? kTooLarge : kInputError;
  } catch (const oracles::DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const RiccatiError& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverError;
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::ios_base::failure("cannot write " + path.string());
  f << text;
  if (!f) throw std::ios_base::failure("write failed for " + path.string());
}

std::string one_based(const std::vector<std::size_t>& idx) {
  std::ostringstream os;
  os << '[';
  for (std::size_t k = 0; k < idx.size(); ++k)
    os << (k ? ", " : "") << idx[k] + 1;
  os << ']';
  return os.str();
}

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::size_t whole_budget(double b) {
  const double r = std::round(b);
  if (b < 0.0 || std::abs(b - r) > 1e-9)
    throw SolverError(SolverError::Kind::NonUnitCosts,
                      "greedy needs a whole-number cardinality budget");
  return static_cast<std::size_t>(r);
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > 0.0) || points < 1)
    throw oracles::DomainError("log grid needs positive bounds and >= 1 point");
  std::vector<double> grid;
  if (points == 1) return {lo};
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < points; ++i)
    grid.push_back(std::pow(10.0, a + (b - a) * i / (points - 1)));
  return grid;
}

int cmd_solve(const SolveConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto model = validate_model(load_model(cfg.input));
    const bool attack = cfg.mode == Mode::Attack;
    const double budget = cfg.budget.value_or(attack ? model.budget_attack
                                                     : model.budget_select);
    SolveReport report;
    if (cfg.algorithm == Algorithm::Greedy) {
      const auto b = whole_budget(budget);
      report = attack ? greedy_attack(model, b, cfg.metric, cfg.opts)
                      : greedy_select(model, b, cfg.metric, cfg.opts);
    } else {
      report = attack ? exhaustive_attack(model, model.attack_costs, budget,
                                          cfg.metric, cfg.opts)
                      : exhaustive_select(model, model.selection_costs, budget,
                                          cfg.metric, cfg.opts);
    }
    out << "trace: " << fmt(report.trace) << '\n';
    out << "chosen: " << one_based(report.chosen) << '\n';
    if (cfg.algorithm == Algorithm::Greedy)
      out << "order: " << one_based(report.pick_order()) << '\n';
    if (cfg.output) write_text(*cfg.output, report_to_json(report).dump(2) + "\n");
    return int{kOk};
  });
}

int cmd_gadget(const GadgetConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    nlohmann::json doc;
    if (cfg.kind == "example1" || cfg.kind == "example2") {
      const auto model = cfg.kind == "example1"
                             ? build_example1(cfg.lambda1, cfg.h)
                             : build_example2(cfg.lambda1, cfg.h);
      doc = model_to_json(model);
      write_text(cfg.output, doc.dump(2) + "\n");
      out << cfg.kind << ": " << model.sensors() << " sensors, "
          << model.states() << " states -> " << cfg.output.string() << '\n';
      return int{kOk};
    }
    if (cfg.kind != "kfss" && cfg.kind != "kfsa")
      throw oracles::DomainError("unknown gadget kind " + cfg.kind);
    if (!cfg.x3c)
      throw X3CError(X3CError::Kind::Invalid, "--x3c is required for " + cfg.kind);
    const auto x3c = load_x3c(*cfg.x3c);
    const auto gadget = cfg.kind == "kfss" ? build_kfss_gadget(x3c, cfg.K)
                                           : build_kfsa_gadget(x3c, cfg.K);
    doc = gadget_to_json(gadget);
    write_text(cfg.output, doc.dump(2) + "\n");
    nlohmann::json side;
    side["threshold"] = doc["threshold"];
    side["constants"] = doc["constants"];
    side["kind"] = doc["kind"];
    auto side_path = cfg.output;
    side_path += ".threshold.json";
    write_text(side_path, side.dump(2) + "\n");
    out << cfg.kind << ": " << gadget.model.sensors() << " sensors, "
        << gadget.model.states() << " states, threshold "
        << fmt(gadget.threshold) << " -> " << cfg.output.string() << '\n';
    return int{kOk};
  });
}

int cmd_x3c(const X3CConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto x3c = load_x3c(cfg.input);
    nlohmann::json doc;
    doc["via"] = cfg.via;
    if (cfg.via == "bruteforce") {
      const auto ans = x3c_bruteforce(x3c);
      out << (ans.answer ? "yes" : "no") << '\n';
      doc["answer"] = ans.answer;
      if (ans.cover) {
        out << "cover: " << one_based(*ans.cover) << '\n';
        auto cover = nlohmann::json::array();
        for (auto i : *ans.cover) cover.push_back(i + 1);
        doc["cover"] = cover;
      }
    } else if (cfg.via == "kfss" || cfg.via == "kfsa") {
      const auto d = cfg.via == "kfss"
                         ? x3c_decide_via_kfss(x3c, cfg.K, cfg.solver, cfg.opts)
                         : x3c_decide_via_kfsa(x3c, cfg.K, cfg.solver, cfg.opts);
      out << (d.answer ? "yes" : "no") << '\n';
      out << "trace: " << fmt(d.trace) << (cfg.via == "kfss" ? " <= " : " > ")
          << fmt(d.threshold) << (d.answer ? " holds" : " fails") << '\n';
      out << (cfg.via == "kfss" ? "selected: " : "attacked: ")
          << one_based(d.sensors) << '\n';
      if (cfg.solver == Algorithm::Greedy)
        out << "note: greedy is a heuristic; the answer may be wrong\n";
      doc["answer"] = d.answer;
      doc["trace"] = d.trace;
      doc["threshold"] = d.threshold;
      doc["solver"] = to_string(cfg.solver);
      auto sensors = nlohmann::json::array();
      for (auto i : d.sensors) sensors.push_back(i + 1);
      doc["sensors"] = sensors;
      doc["heuristic"] = cfg.solver == Algorithm::Greedy;
    } else {
      throw X3CError(X3CError::Kind::Invalid, "unknown decision route " + cfg.via);
    }
    if (cfg.output) write_text(*cfg.output, doc.dump(2) + "\n");
    return int{kOk};
  });
}

int cmd_sweep(const SweepConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.h_grid.empty()) throw oracles::DomainError("h grid is empty");
    const bool attack = cfg.family == "example2";
    if (!attack && cfg.family != "example1")
      throw oracles::DomainError("unknown sweep family " + cfg.family);
    const auto limits = oracles::limit_ratio_kfss(cfg.lambda1);
    const double predicted =
        cfg.metric == Metric::Priori ? limits.priori : limits.post;

    struct Row {
      double greedy;
      double optimal;
    };
    const auto rows = parallel_map<Row>(cfg.h_grid.size(), [&](std::size_t i) {
      auto model = attack ? build_example2(cfg.lambda1, cfg.h_grid[i])
                          : build_example1(cfg.lambda1, cfg.h_grid[i]);
      if (cfg.v_scale) {
        if (!(*cfg.v_scale >= 0.0))
          throw oracles::DomainError("--v-scale must be >= 0");
        model.V = *cfg.v_scale * Matrix::Identity(model.sensors(), model.sensors());
      }
      if (attack) {
        const auto g = greedy_attack(model, 2, cfg.metric, cfg.opts);
        const auto o = exhaustive_attack(model, model.attack_costs, 2.0,
                                         cfg.metric, cfg.opts);
        return Row{g.trace, o.trace};
      }
      const auto g = greedy_select(model, 2, cfg.metric, cfg.opts);
      const auto o = exhaustive_select(model, model.selection_costs, 2.0,
                                       cfg.metric, cfg.opts);
      return Row{g.trace, o.trace};
    });

    std::ostringstream csv;
    csv << "h,trace_greedy,trace_optimal,ratio,predicted_limit\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      const double ratio = attack ? r.optimal / r.greedy : r.greedy / r.optimal;
      csv << fmt(cfg.h_grid[i]) << ',' << fmt(r.greedy) << ','
          << fmt(r.optimal) << ',' << fmt(ratio) << ',' << fmt(predicted)
          << '\n';
    }
    if (cfg.output)
      write_text(*cfg.output, csv.str());
    else
      out << csv.str();
    return int{kOk};
  });
}

}  // namespace kfsslab::cli
