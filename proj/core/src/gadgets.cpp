#include "kfsslab/gadgets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "kfsslab/oracles.hpp"

namespace kfsslab {

namespace {

void check_example_params(double lambda1, double h) {
  if (!(std::abs(lambda1) > 0.0 && std::abs(lambda1) < 1.0))
    throw oracles::DomainError("example families need 0 < |lambda1| < 1");
  if (!(h > 0.0) || !std::isfinite(h))
    throw oracles::DomainError("example families need finite h > 0");
}

void check_K(double K) {
  if (!(K >= 1.0) || !std::isfinite(K))
    throw oracles::DomainError("gadget constant K must be finite and >= 1");
}

SystemModel base_model(Eigen::Index n, Eigen::Index q, double lambda1) {
  SystemModel model;
  model.A = Matrix::Zero(n, n);
  model.A(0, 0) = lambda1;
  model.W = Matrix::Identity(n, n);
  model.C = Matrix::Zero(q, n);
  model.V = Matrix::Zero(q, q);
  model.selection_costs = Vector::Ones(q);
  model.attack_costs = Vector::Ones(q);
  return model;
}

// Choose(n, k) as a double; saturates instead of overflowing.
double choose(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

// Flip each column so its largest-magnitude entry is positive.
void fix_signs(Matrix& M) {
  for (Eigen::Index c = 0; c < M.cols(); ++c) {
    Eigen::Index r = 0;
    M.col(c).cwiseAbs().maxCoeff(&r);
    if (M(r, c) < 0.0) M.col(c) *= -1.0;
  }
}

}  // namespace

void validate_x3c(const X3CInstance& x3c) {
  if (x3c.m < 1)
    throw X3CError(X3CError::Kind::Invalid, "m must be a positive integer");
  if (x3c.subsets.size() < static_cast<std::size_t>(x3c.m))
    throw X3CError(X3CError::Kind::Invalid,
                   "the collection needs at least m subsets");
  const int top = 3 * x3c.m;
  std::set<std::array<int, 3>> seen;
  for (std::size_t i = 0; i < x3c.subsets.size(); ++i) {
    auto s = x3c.subsets[i];
    for (int e : s)
      if (e < 1 || e > top)
        throw X3CError(X3CError::Kind::Invalid,
                       "subset " + std::to_string(i) + " has element " +
                           std::to_string(e) + " outside 1.." +
                           std::to_string(top));
    std::sort(s.begin(), s.end());
    if (s[0] == s[1] || s[1] == s[2])
      throw X3CError(X3CError::Kind::Invalid,
                     "subset " + std::to_string(i) + " repeats an element");
    if (!seen.insert(s).second)
      throw X3CError(X3CError::Kind::Invalid,
                     "subset " + std::to_string(i) + " is a duplicate");
  }
}

X3CInstance x3c_from_json(const nlohmann::json& j) {
  X3CInstance x3c;
  try {
    x3c.m = j.at("m").get<int>();
    for (const auto& s : j.at("subsets")) {
      if (!s.is_array() || s.size() != 3)
        throw X3CError(X3CError::Kind::Invalid,
                       "every subset must list exactly 3 elements");
      x3c.subsets.push_back({s[0].get<int>(), s[1].get<int>(), s[2].get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw X3CError(X3CError::Kind::Invalid, std::string("bad X3C JSON: ") + e.what());
  }
  validate_x3c(x3c);
  return x3c;
}

nlohmann::json x3c_to_json(const X3CInstance& x3c) {
  nlohmann::json j;
  j["m"] = x3c.m;
  j["subsets"] = x3c.subsets;
  return j;
}

X3CInstance load_x3c(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw X3CError(X3CError::Kind::Invalid, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw X3CError(X3CError::Kind::Invalid,
                   path.string() + ": " + e.what());
  }
  return x3c_from_json(j);
}

std::string_view to_string(GadgetKind kind) {
  return kind == GadgetKind::Kfss ? "kfss" : "kfsa";
}

nlohmann::json gadget_to_json(const GadgetOutput& gadget) {
  auto j = model_to_json(gadget.model);
  j["threshold"] = gadget.threshold;
  j["kind"] = to_string(gadget.kind);
  const auto& c = gadget.constants;
  j["constants"] = {{"K", c.K},
                    {"Z", c.Z},
                    {"lambda1", c.lambda1},
                    {"epsilon_or_rho", c.epsilon_or_rho},
                    {"sigma_or_delta_v", c.sigma_or_delta_v}};
  return j;
}

SystemModel build_example1(double lambda1, double h) {
  check_example_params(lambda1, h);
  auto model = base_model(3, 3, lambda1);
  model.C << 1.0, h, h,
             1.0, 0.0, h,
             0.0, 1.0, 1.0;
  model.budget_select = 2.0;
  return model;
}

SystemModel build_example2(double lambda1, double h) {
  check_example_params(lambda1, h);
  auto model = base_model(3, 4, lambda1);
  model.C << 1.0, h, h,
             1.0, 0.0, h,
             0.0, 1.0, 0.0,
             0.0, 0.0, 1.0;
  model.budget_attack = 2.0;
  return model;
}

Matrix encode_x3c(const X3CInstance& x3c) {
  validate_x3c(x3c);
  const auto tau = static_cast<Eigen::Index>(x3c.subsets.size());
  Matrix G = Matrix::Zero(tau, 3 * x3c.m);
  for (Eigen::Index i = 0; i < tau; ++i)
    for (int e : x3c.subsets[static_cast<std::size_t>(i)]) G(i, e - 1) = 1.0;
  return G;
}

GadgetOutput build_kfss_gadget(const X3CInstance& x3c, double K) {
  check_K(K);
  const Matrix G = encode_x3c(x3c);
  const double m = x3c.m;
  const double sv2 = 1.0;
  const double Z = std::ceil(K) * (m + 1.0) * (sv2 + 3.0);
  const double lambda1 = (Z - 0.5) / Z;
  const double eps = 2.0 * Z * std::ceil(std::sqrt(Z - 1.0)) + 1.0;

  const auto tau = G.rows();
  const auto cols = G.cols();
  auto model = base_model(cols + 1, tau + 1, lambda1);
  model.C(0, 0) = 1.0;
  model.C.block(0, 1, 1, cols).setConstant(eps);
  model.C.block(1, 1, tau, cols) = G;
  model.V(0, 0) = sv2;
  for (Eigen::Index i = 1; i <= tau; ++i) model.V(i, i) = sv2 / (eps * eps);
  model.budget_select = m + 1.0;

  GadgetOutput out;
  out.model = std::move(model);
  out.threshold = K * (m + 1.0) * (sv2 + 3.0);
  out.constants = {K, Z, lambda1, eps, std::sqrt(sv2)};
  out.kind = GadgetKind::Kfss;
  return out;
}

GadgetOutput build_kfsa_gadget(const X3CInstance& x3c, double K) {
  check_K(K);
  const Matrix G = encode_x3c(x3c);
  const double m = x3c.m;
  const double dv2 = 1.0;
  const auto tau = G.rows();
  const auto elems = G.cols();
  const double Z =
      std::ceil(K) * (static_cast<double>(tau) + 2.0) * (dv2 + 1.0);
  const double lambda1 = (Z - 0.5) / Z;
  const double rho = 2.0 * Z * std::ceil(std::sqrt(m * (Z - 1.0))) + 1.0;

  auto model = base_model(tau + 1, elems + tau, lambda1);
  model.C.block(0, 0, elems, 1).setOnes();
  model.C.block(0, 1, elems, tau) = rho * G.transpose();
  model.C.block(elems, 1, tau, tau).setIdentity();
  for (Eigen::Index i = 0; i < elems; ++i) model.V(i, i) = dv2;
  for (Eigen::Index i = 0; i < tau; ++i)
    model.V(elems + i, elems + i) = dv2 / (rho * rho);
  model.budget_attack = m;

  GadgetOutput out;
  out.model = std::move(model);
  out.threshold = K * (static_cast<double>(tau) + 2.0) * (dv2 + 1.0);
  out.constants = {K, Z, lambda1, rho, std::sqrt(dv2)};
  out.kind = GadgetKind::Kfsa;
  return out;
}

X3CAnswer x3c_bruteforce(const X3CInstance& x3c) {
  validate_x3c(x3c);
  const std::size_t tau = x3c.subsets.size();
  const auto m = static_cast<std::size_t>(x3c.m);
  if (choose(tau, m) > kMaxX3CCombinations)
    throw X3CError(X3CError::Kind::TooLarge,
                   "C(" + std::to_string(tau) + ", " + std::to_string(m) +
                       ") exceeds the enumeration limit");

  const std::size_t universe = x3c.universe();
  std::vector<std::size_t> pick(m);
  for (std::size_t i = 0; i < m; ++i) pick[i] = i;
  std::vector<int> hits(universe);
  while (true) {
    std::fill(hits.begin(), hits.end(), 0);
    bool exact = true;
    for (auto s : pick)
      for (int e : x3c.subsets[s])
        if (++hits[static_cast<std::size_t>(e - 1)] > 1) exact = false;
    if (exact && std::all_of(hits.begin(), hits.end(),
                             [](int h) { return h == 1; }))
      return {true, pick};

    // Next m-combination in lexicographic order.
    std::size_t i = m;
    while (i > 0 && pick[i - 1] == tau - m + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < m; ++k) pick[k] = pick[k - 1] + 1;
  }
  return {false, std::nullopt};
}

ReductionDecision x3c_decide_via_kfss(const X3CInstance& x3c, double K,
                                      Algorithm solver,
                                      const SolverOptions& opts) {
  const auto gadget = build_kfss_gadget(x3c, K);
  const auto budget = static_cast<std::size_t>(x3c.m) + 1;
  const auto report =
      solver == Algorithm::Exhaustive
          ? exhaustive_select(gadget.model, gadget.model.selection_costs,
                              static_cast<double>(budget), Metric::Priori, opts)
          : greedy_select(gadget.model, budget, Metric::Priori, opts);
  return {report.trace <= gadget.threshold, report.trace, gadget.threshold,
          report.chosen, GadgetKind::Kfss, solver};
}

ReductionDecision x3c_decide_via_kfsa(const X3CInstance& x3c, double K,
                                      Algorithm solver,
                                      const SolverOptions& opts) {
  const auto gadget = build_kfsa_gadget(x3c, K);
  const auto budget = static_cast<std::size_t>(x3c.m);
  const auto report =
      solver == Algorithm::Exhaustive
          ? exhaustive_attack(gadget.model, gadget.model.attack_costs,
                              static_cast<double>(budget), Metric::Priori, opts)
          : greedy_attack(gadget.model, budget, Metric::Priori, opts);
  return {report.trace > gadget.threshold, report.trace, gadget.threshold,
          report.chosen, GadgetKind::Kfsa, solver};
}

NoInstanceCertificate no_instance_transform(const Matrix& G_L) {
  const auto cols = G_L.cols();
  NoInstanceCertificate cert;
  std::vector<Eigen::Index> used;
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (G_L.rows() == 0 || G_L.col(j).cwiseAbs().maxCoeff() == 0.0)
      cert.zero_columns.push_back(static_cast<std::size_t>(j));
    else
      used.push_back(j);
  }
  if (cert.zero_columns.empty())
    throw X3CError(X3CError::Kind::NoZeroColumn,
                   "G_L must leave at least one element uncovered");

  const auto p = static_cast<Eigen::Index>(used.size());
  Matrix null_basis(p, 0);
  Matrix row_basis(p, 0);
  if (p > 0) {
    Matrix sub(G_L.rows(), p);
    for (Eigen::Index k = 0; k < p; ++k) sub.col(k) = G_L.col(used[k]);
    Eigen::JacobiSVD<Matrix> svd(sub, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cutoff =
        1e-12 * std::max(1.0, s.size() > 0 ? s[0] : 0.0) *
        static_cast<double>(std::max(sub.rows(), sub.cols()));
    Eigen::Index r = 0;
    while (r < s.size() && s[r] > cutoff) ++r;
    row_basis = svd.matrixV().leftCols(r);
    null_basis = svd.matrixV().rightCols(p - r);
    fix_signs(row_basis);
    fix_signs(null_basis);
  }

  const auto kappa = static_cast<Eigen::Index>(cert.zero_columns.size());
  cert.rank = row_basis.cols();
  cert.null_dim = kappa + null_basis.cols();
  cert.N = Matrix::Zero(cols, cols);
  for (Eigen::Index k = 0; k < kappa; ++k)
    cert.N(static_cast<Eigen::Index>(cert.zero_columns[k]), k) = 1.0;
  for (Eigen::Index k = 0; k < p; ++k) {
    for (Eigen::Index c = 0; c < null_basis.cols(); ++c)
      cert.N(used[k], kappa + c) = null_basis(k, c);
    for (Eigen::Index c = 0; c < row_basis.cols(); ++c)
      cert.N(used[k], cert.null_dim + c) = row_basis(k, c);
  }
  return cert;
}

}  // namespace kfsslab
