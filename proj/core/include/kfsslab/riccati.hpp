#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "kfsslab/model.hpp"

namespace kfsslab {

struct SolverOptions {
  double tol = 1e-11;        ///< Frobenius threshold on successive iterates
  long max_iter = 500'000;
  double pinv_rtol = 1e-12;  ///< relative cutoff for rank decisions
  double pbh_tol = 1e-9;
  double tie_rtol = 1e-10;   ///< scores closer than this (relative) are tied

  /// Tighter settings for the reduction gadgets, whose dynamics sit close
  /// to the unit circle.
  static SolverOptions gadget() {
    SolverOptions o;
    o.tol = 1e-12;
    o.max_iter = 2'000'000;
    return o;
  }

  void validate() const;
};

class RiccatiError : public std::runtime_error {
 public:
  enum class Kind { NoConvergence, ShapeError, StabilizabilityViolation,
                    InvalidOptions };

  RiccatiError(Kind kind, const std::string& what, double residual = 0.0)
      : std::runtime_error(what), kind_(kind), residual_(residual) {}

  Kind kind() const noexcept { return kind_; }
  /// Last successive-iterate difference for NoConvergence.
  double residual() const noexcept { return residual_; }

 private:
  Kind kind_;
  double residual_;
};

/// Steady-state covariance, or the symbolic +infinity assigned to an
/// undetectable pair. Infinite compares greater than every finite trace.
class SteadyStateResult {
 public:
  static SteadyStateResult infinite() { return SteadyStateResult(); }
  static SteadyStateResult finite(Matrix cov, long iterations);

  bool is_finite() const noexcept { return cov_.has_value(); }
  /// Throws std::logic_error when infinite.
  const Matrix& cov() const;
  double trace() const noexcept { return trace_; }
  Vector diagonal() const;
  long iterations() const noexcept { return iterations_; }

 private:
  SteadyStateResult() = default;

  std::optional<Matrix> cov_;
  double trace_ = std::numeric_limits<double>::infinity();
  long iterations_ = 0;
};

/// One prediction-form Riccati update
///   A S A' + W - A S C' (C S C' + V)^+ C S A'.
/// An empty C (0 rows) drops the gain term.
Matrix riccati_step(const Matrix& S, const Matrix& A, const Matrix& C,
                    const Matrix& W, const Matrix& V,
                    const SolverOptions& opts = {});

/// Measurement update S - S C' (C S C' + V)^+ C S.
///
/// Evaluated through an SVD of the square-root array [C L, V^{1/2}] with
/// L L' = S, so rank decisions are made on singular values rather than on
/// the squared spectrum of C S C' + V.
Matrix posteriori_from_priori(const Matrix& sigma, const Matrix& C,
                              const Matrix& V, const SolverOptions& opts = {});

/// Iterates riccati_step from the identity. Returns Infinite when (A, C) is
/// not detectable.
SteadyStateResult dare_steady_state(const Matrix& A, const Matrix& C,
                                    const Matrix& W, const Matrix& V,
                                    const SolverOptions& opts = {});

SteadyStateResult dare_steady_state(const SystemModel& model,
                                    const SelectionVector& selection,
                                    const SolverOptions& opts = {});

/// || priori - (A post A' + W) ||_F
double coupling_check(const Matrix& priori, const Matrix& post,
                      const Matrix& A, const Matrix& W);

/// PBH test over eigenvalues with |lambda| >= 1 - pbh_tol.
bool is_detectable(const Matrix& A, const Matrix& C, double pbh_tol);

/// Dual PBH test for (A, W^{1/2}).
bool is_stabilizable(const Matrix& A, const Matrix& W, double pbh_tol);

/// Eigendecomposition-based Moore-Penrose inverse of a symmetric PSD matrix.
/// Eigenvalues below rtol * max(largest eigenvalue, 1) are treated as zero.
Matrix pseudo_inverse_psd(const Matrix& M, double rtol = 1e-12);

/// Returns L with L L' = M for symmetric PSD M (negative eigenvalues clamped).
Matrix psd_factor(const Matrix& M);

}  // namespace kfsslab
