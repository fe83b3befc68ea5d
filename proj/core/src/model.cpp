#include "kfsslab/model.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace kfsslab {

namespace {

constexpr double kPsdTol = 1e-10;

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "; ";
    out += parts[i];
  }
  return out;
}

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

// Symmetrizes and clamps small negative eigenvalues. Returns false if the
// matrix is not PSD within tolerance.
bool make_psd(Matrix& m, double& min_eig) {
  m = 0.5 * (m + m.transpose()).eval();
  if (m.size() == 0) {
    min_eig = 0.0;
    return true;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -kPsdTol) return false;
  if (min_eig < 0.0) {
    Vector d = es.eigenvalues().cwiseMax(0.0);
    m = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    m = 0.5 * (m + m.transpose()).eval();
  }
  return true;
}

}  // namespace

ModelError::ModelError(Kind kind, std::vector<std::string> violations)
    : std::runtime_error(join(violations)),
      kind_(kind),
      violations_(std::move(violations)) {}

SelectionVector complement(const AttackVector& attack) {
  SelectionVector out(attack.size());
  for (std::size_t i = 0; i < attack.size(); ++i) out.set(i, !attack[i]);
  return out;
}

SystemModel validate_model(const SystemModel& raw) {
  SystemModel m = raw;
  std::vector<std::string> dims;
  std::vector<std::string> psd;
  std::vector<std::string> costs;

  const auto n = m.A.rows();
  const auto q = m.C.rows();
  if (n <= 0) dims.push_back("state dimension must be positive");
  if (q <= 0) dims.push_back("sensor count must be positive");
  if (m.A.cols() != n) dims.push_back("A must be square, got " + shape(m.A));
  if (m.C.cols() != n)
    dims.push_back("C must have " + std::to_string(n) + " columns, got " +
                   shape(m.C));
  if (m.W.rows() != n || m.W.cols() != n)
    dims.push_back("W must be " + std::to_string(n) + "x" + std::to_string(n) +
                   ", got " + shape(m.W));
  if (m.V.rows() != q || m.V.cols() != q)
    dims.push_back("V must be " + std::to_string(q) + "x" + std::to_string(q) +
                   ", got " + shape(m.V));
  if (m.selection_costs.size() != q)
    dims.push_back("selection cost vector must have length " +
                   std::to_string(q));
  if (m.attack_costs.size() != q)
    dims.push_back("attack cost vector must have length " + std::to_string(q));
  if (!dims.empty()) throw ModelError(ModelError::Kind::DimensionMismatch, dims);

  auto finite = [](const Matrix& x) { return x.allFinite(); };
  if (!finite(m.A) || !finite(m.C) || !finite(m.W) || !finite(m.V))
    throw ModelError(ModelError::Kind::Parse,
                     {"matrix entries must be finite numbers"});

  double min_eig = 0.0;
  if (!make_psd(m.W, min_eig))
    psd.push_back("W has eigenvalue " + std::to_string(min_eig));
  if (!make_psd(m.V, min_eig))
    psd.push_back("V has eigenvalue " + std::to_string(min_eig));
  if (!psd.empty()) throw ModelError(ModelError::Kind::NotPSD, psd);

  for (Eigen::Index i = 0; i < q; ++i) {
    if (!(m.selection_costs[i] >= 0.0))
      costs.push_back("selection cost of sensor " + std::to_string(i + 1) +
                      " is negative");
    if (!(m.attack_costs[i] >= 0.0))
      costs.push_back("attack cost of sensor " + std::to_string(i + 1) +
                      " is negative");
  }
  if (!(m.budget_select >= 0.0)) costs.push_back("selection budget is negative");
  if (!(m.budget_attack >= 0.0)) costs.push_back("attack budget is negative");
  if (!costs.empty()) throw ModelError(ModelError::Kind::NegativeCost, costs);

  return m;
}

RestrictedSensors restrict_to(const SystemModel& model,
                              const SelectionVector& selection) {
  const auto q = static_cast<std::size_t>(model.sensors());
  if (selection.size() != q)
    throw ModelError(ModelError::Kind::DimensionMismatch,
                     {"selection length " + std::to_string(selection.size()) +
                      " does not match sensor count " + std::to_string(q)});
  const auto rows = selection.support();
  const auto p = static_cast<Eigen::Index>(rows.size());
  RestrictedSensors out{Matrix(p, model.states()), Matrix(p, p)};
  for (Eigen::Index r = 0; r < p; ++r) {
    const auto i = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]);
    out.C.row(r) = model.C.row(i);
    for (Eigen::Index c = 0; c < p; ++c)
      out.V(r, c) = model.V(i, static_cast<Eigen::Index>(
                                   rows[static_cast<std::size_t>(c)]));
  }
  return out;
}

namespace detail {

Matrix matrix_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array())
    throw ModelError(ModelError::Kind::Parse,
                     {std::string(name) + " must be an array of rows"});
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix out;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array())
      throw ModelError(ModelError::Kind::Parse,
                       {std::string(name) + " row " + std::to_string(r + 1) +
                        " is not an array"});
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      out.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ModelError(ModelError::Kind::DimensionMismatch,
                       {std::string(name) + " has ragged rows"});
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (v.is_array())
        throw ModelError(ModelError::Kind::DimensionMismatch,
                         {std::string(name) + " row " + std::to_string(r + 1) +
                          " is a block; only scalar rows are supported"});
      if (!v.is_number())
        throw ModelError(ModelError::Kind::Parse,
                         {std::string(name) + " entries must be numbers"});
      out(r, c) = v.get<double>();
    }
  }
  if (rows == 0) out.resize(0, 0);
  return out;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

namespace {

Vector vector_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array())
    throw ModelError(ModelError::Kind::Parse,
                     {std::string(name) + " must be an array"});
  Vector out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw ModelError(ModelError::Kind::Parse,
                       {std::string(name) + " entries must be numbers"});
    out[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return out;
}

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw ModelError(ModelError::Kind::Parse,
                     {std::string("missing field '") + key + "'"});
  return *it;
}

}  // namespace

SystemModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw ModelError(ModelError::Kind::Parse, {"instance must be a JSON object"});
  const auto& jn = require(j, "n");
  const auto& jq = require(j, "q");
  if (!jn.is_number_integer() || !jq.is_number_integer())
    throw ModelError(ModelError::Kind::Parse, {"n and q must be integers"});
  const auto n = jn.get<long long>();
  const auto q = jq.get<long long>();

  SystemModel m;
  m.A = detail::matrix_from_json(require(j, "A"), "A");
  m.C = detail::matrix_from_json(require(j, "C"), "C");
  m.W = detail::matrix_from_json(require(j, "W"), "W");
  m.V = detail::matrix_from_json(require(j, "V"), "V");
  if (m.C.rows() == 0) m.C.resize(0, m.A.cols());

  m.selection_costs = j.contains("b") ? vector_from_json(j["b"], "b")
                                      : Vector::Ones(m.C.rows());
  m.attack_costs = j.contains("omega") ? vector_from_json(j["omega"], "omega")
                                       : Vector::Ones(m.C.rows());
  auto number = [&](const char* key) {
    if (!j.contains(key)) return 0.0;
    if (!j[key].is_number())
      throw ModelError(ModelError::Kind::Parse,
                       {std::string(key) + " must be a number"});
    return j[key].get<double>();
  };
  m.budget_select = number("budget_select");
  m.budget_attack = number("budget_attack");

  std::vector<std::string> dims;
  if (m.A.rows() != n)
    dims.push_back("n = " + std::to_string(n) + " but A has " +
                   std::to_string(m.A.rows()) + " rows");
  if (m.C.rows() != q)
    dims.push_back("q = " + std::to_string(q) + " but C has " +
                   std::to_string(m.C.rows()) + " rows");
  if (!dims.empty()) throw ModelError(ModelError::Kind::DimensionMismatch, dims);

  return validate_model(m);
}

nlohmann::json model_to_json(const SystemModel& model) {
  nlohmann::json j;
  j["n"] = model.states();
  j["q"] = model.sensors();
  j["A"] = detail::matrix_to_json(model.A);
  j["C"] = detail::matrix_to_json(model.C);
  j["W"] = detail::matrix_to_json(model.W);
  j["V"] = detail::matrix_to_json(model.V);
  j["b"] = std::vector<double>(model.selection_costs.begin(),
                               model.selection_costs.end());
  j["omega"] = std::vector<double>(model.attack_costs.begin(),
                                   model.attack_costs.end());
  j["budget_select"] = model.budget_select;
  j["budget_attack"] = model.budget_attack;
  return j;
}

SystemModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ModelError(ModelError::Kind::Parse,
                     {"cannot open " + path.string()});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError(ModelError::Kind::Parse,
                     {path.string() + ": " + e.what()});
  }
  return model_from_json(j);
}

void save_model(const SystemModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << model_to_json(model).dump(2) << '\n';
}

}  // namespace kfsslab
