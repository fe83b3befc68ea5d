#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kfsslab/model.hpp"
#include "kfsslab/riccati.hpp"
#include "kfsslab/solvers.hpp"

namespace kfsslab {

class X3CError : public std::runtime_error {
 public:
  enum class Kind { Invalid, TooLarge, NoZeroColumn };

  X3CError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Exact-cover-by-3-sets instance over the universe {1, ..., 3m}.
struct X3CInstance {
  int m = 0;
  std::vector<std::array<int, 3>> subsets;  ///< 1-based elements

  std::size_t universe() const noexcept { return static_cast<std::size_t>(3 * m); }
};

/// Throws X3CError::Invalid unless every subset holds three distinct
/// in-range elements and no subset repeats.
void validate_x3c(const X3CInstance& x3c);

X3CInstance x3c_from_json(const nlohmann::json& j);
nlohmann::json x3c_to_json(const X3CInstance& x3c);
X3CInstance load_x3c(const std::filesystem::path& path);

enum class GadgetKind { Kfss, Kfsa };
std::string_view to_string(GadgetKind kind);

struct GadgetConstants {
  double K = 1.0;
  double Z = 0.0;
  double lambda1 = 0.0;
  double epsilon_or_rho = 0.0;
  double sigma_or_delta_v = 1.0;
};

struct GadgetOutput {
  SystemModel model;
  double threshold = 0.0;
  GadgetConstants constants;
  GadgetKind kind = GadgetKind::Kfss;
};

/// Instance JSON (model schema) extended with threshold, constants and kind.
nlohmann::json gadget_to_json(const GadgetOutput& gadget);

/// Three-state selection counterexample: A = diag(lambda1, 0, 0),
/// C rows [1 h h], [1 0 h], [0 1 1], W = I, V = 0, B = 2.
SystemModel build_example1(double lambda1, double h);

/// Three-state attack counterexample: rows [1 h h], [1 0 h], [0 1 0],
/// [0 0 1], W = I, V = 0, Omega = 2.
SystemModel build_example2(double lambda1, double h);

/// tau x 3m incidence matrix; row i marks the elements of subset i.
Matrix encode_x3c(const X3CInstance& x3c);

/// Selection gadget: a "yes" instance has an (m+1)-sensor selection with
/// trace <= threshold; for a "no" instance every such selection exceeds it.
GadgetOutput build_kfss_gadget(const X3CInstance& x3c, double K = 1.0);

/// Attack gadget: a "yes" instance admits an m-sensor attack whose trace
/// strictly exceeds threshold; for a "no" instance none does.
GadgetOutput build_kfsa_gadget(const X3CInstance& x3c, double K = 1.0);

/// Largest number of m-subsets x3c_bruteforce will enumerate.
inline constexpr double kMaxX3CCombinations = 1e6;

struct X3CAnswer {
  bool answer = false;
  std::optional<std::vector<std::size_t>> cover;  ///< 0-based subset indices
};

X3CAnswer x3c_bruteforce(const X3CInstance& x3c);

struct ReductionDecision {
  bool answer = false;
  double trace = 0.0;
  double threshold = 0.0;
  /// Selected (KFSS) or attacked (KFSA) sensors, 0-based.
  std::vector<std::size_t> sensors;
  GadgetKind kind = GadgetKind::Kfss;
  Algorithm solver = Algorithm::Exhaustive;
};

/// Decides X3C by solving the selection gadget with budget m+1
/// (yes iff trace <= threshold). Exact for Algorithm::Exhaustive,
/// heuristic for Algorithm::Greedy.
ReductionDecision x3c_decide_via_kfss(const X3CInstance& x3c, double K,
                                      Algorithm solver,
                                      const SolverOptions& opts =
                                          SolverOptions::gadget());

/// Decides X3C by solving the attack gadget with budget m
/// (yes iff trace > threshold).
ReductionDecision x3c_decide_via_kfsa(const X3CInstance& x3c, double K,
                                      Algorithm solver,
                                      const SolverOptions& opts =
                                          SolverOptions::gadget());

/// Orthogonal change of basis for a partial collection that leaves some
/// element uncovered. Columns of `N` are [N1 N2]: N1 spans the nullspace of
/// G_L and starts with e_j for every zero column j (ascending), N2 spans the
/// rowspace of G_L.
struct NoInstanceCertificate {
  Matrix N;
  Eigen::Index null_dim = 0;  ///< columns in N1
  Eigen::Index rank = 0;      ///< columns in N2
  std::vector<std::size_t> zero_columns;  ///< 0-based

  Matrix N1() const { return N.leftCols(null_dim); }
  Matrix N2() const { return N.rightCols(rank); }
};

NoInstanceCertificate no_instance_transform(const Matrix& G_L);

}  // namespace kfsslab
