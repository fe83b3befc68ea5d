#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace kfsslab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when an instance fails validation or cannot be parsed.
class ModelError : public std::runtime_error {
 public:
  enum class Kind { DimensionMismatch, NotPSD, NegativeCost, Parse };

  ModelError(Kind kind, std::vector<std::string> violations);

  Kind kind() const noexcept { return kind_; }
  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  Kind kind_;
  std::vector<std::string> violations_;
};

/// Linear time-invariant system with q scalar sensors.
///
/// Row i of `C` is the measurement row of sensor i. `V` is the joint
/// measurement noise covariance over all q rows and may carry cross-sensor
/// correlation.
struct SystemModel {
  Matrix A;
  Matrix C;
  Matrix W;
  Matrix V;
  Vector selection_costs;
  Vector attack_costs;
  double budget_select = 0.0;
  double budget_attack = 0.0;

  Eigen::Index states() const noexcept { return A.rows(); }
  Eigen::Index sensors() const noexcept { return C.rows(); }
};

/// Fixed-length 0-1 indicator over the sensors of a model.
///
/// The tag keeps selections (bit set = sensor installed) and attacks
/// (bit set = sensor removed) from being mixed up.
template <class Tag>
class Indicator {
 public:
  Indicator() = default;
  explicit Indicator(std::size_t size, bool value = false)
      : bits_(size, value) {}

  static Indicator from_support(std::size_t size,
                                std::span<const std::size_t> indices) {
    Indicator out(size);
    for (auto i : indices) {
      if (i >= size) throw std::out_of_range("indicator index out of range");
      out.bits_[i] = true;
    }
    return out;
  }

  static Indicator from_support(std::size_t size,
                                std::initializer_list<std::size_t> indices) {
    return from_support(size, std::span<const std::size_t>(indices.begin(),
                                                           indices.size()));
  }

  static Indicator from_mask(std::size_t size, std::uint64_t mask) {
    Indicator out(size);
    for (std::size_t i = 0; i < size && i < 64; ++i)
      out.bits_[i] = ((mask >> i) & 1U) != 0;
    return out;
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool value = true) { bits_.at(i) = value; }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (bool b : bits_) c += b ? 1 : 0;
    return c;
  }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) out.push_back(i);
    return out;
  }

  const std::vector<bool>& bits() const noexcept { return bits_; }

  friend bool operator==(const Indicator&, const Indicator&) = default;

 private:
  std::vector<bool> bits_;
};

struct SelectionTag {};
struct AttackTag {};
using SelectionVector = Indicator<SelectionTag>;
using AttackVector = Indicator<AttackTag>;

/// Surviving-sensor selection for an attack.
SelectionVector complement(const AttackVector& attack);

/// Measurement rows and noise covariance of a sensor subset.
struct RestrictedSensors {
  Matrix C;  ///< p x n, rows in ascending sensor order
  Matrix V;  ///< p x p principal submatrix of the full V
};

/// Throws ModelError listing every violation found. On success returns a copy
/// with W and V symmetrized and tiny negative eigenvalues clamped to zero.
SystemModel validate_model(const SystemModel& raw);

RestrictedSensors restrict_to(const SystemModel& model,
                              const SelectionVector& selection);

/// JSON wire format shared by every CLI command.
SystemModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const SystemModel& model);

SystemModel load_model(const std::filesystem::path& path);
void save_model(const SystemModel& model, const std::filesystem::path& path);

namespace detail {
Matrix matrix_from_json(const nlohmann::json& j, const char* name);
nlohmann::json matrix_to_json(const Matrix& m);
}  // namespace detail

}  // namespace kfsslab
