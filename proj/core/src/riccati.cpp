#include "kfsslab/riccati.hpp"

#include <cmath>
#include <complex>
#include <sstream>

namespace kfsslab {

namespace {

// Iterates may drift slightly negative through round-off; anything beyond
// this (relative to the largest eigenvalue) is treated as divergence.
constexpr double kNegativeEigTol = 1e-10;

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void require_shape(bool ok, const char* what) {
  if (!ok) throw RiccatiError(RiccatiError::Kind::ShapeError, what);
}

// L with L L' = M. Sets `min_eig` to the smallest eigenvalue of sym(M).
Matrix factor_with_check(const Matrix& M, double& min_eig, double& max_eig) {
  if (M.size() == 0) {
    min_eig = max_eig = 0.0;
    return Matrix(M.rows(), M.cols());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(M));
  const Vector& d = es.eigenvalues();
  min_eig = d.minCoeff();
  max_eig = d.maxCoeff();
  return es.eigenvectors() * d.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Matrix noise_factor(const Matrix& V) {
  double lo = 0.0;
  double hi = 0.0;
  return factor_with_check(V, lo, hi);
}

// Measurement update given Vh with Vh Vh' = V.
Matrix measurement_update(const Matrix& S, const Matrix& C, const Matrix& Vh,
                          const SolverOptions& opts) {
  const auto n = S.rows();
  const auto p = C.rows();
  if (p == 0) return symmetrized(S);

  double min_eig = 0.0;
  double max_eig = 0.0;
  const Matrix L = factor_with_check(S, min_eig, max_eig);
  if (min_eig < -kNegativeEigTol * std::max(1.0, max_eig)) {
    std::ostringstream os;
    os << "covariance iterate is indefinite (eigenvalue " << min_eig << ")";
    throw RiccatiError(RiccatiError::Kind::NoConvergence, os.str());
  }

  // Innovation covariance C S C' + V = M M'.
  Matrix M(p, n + p);
  M.leftCols(n) = C * L;
  M.rightCols(p) = Vh;

  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = opts.pinv_rtol * std::max(1.0, s.size() ? s[0] : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > cutoff) ++rank;
  if (rank == 0) return symmetrized(S);

  // With M = U diag(s) Y', S C' (M M')^+ C S = L Y1 Y1' L' where Y1 holds
  // the first n rows of the retained right singular vectors.
  const Matrix Y1 = svd.matrixV().topLeftCorner(n, rank);
  Matrix keep = -Y1 * Y1.transpose();
  keep.diagonal().array() += 1.0;
  return symmetrized(L * keep * L.transpose());
}

bool pbh_passes(const Matrix& A, const Matrix& B, double pbh_tol,
                bool stack_rows) {
  const auto n = A.rows();
  if (n == 0) return true;
  Eigen::EigenSolver<Matrix> es(A, false);
  const auto& eig = es.eigenvalues();
  using Complex = std::complex<double>;
  using CMatrix = Eigen::MatrixXcd;
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    const Complex lambda = eig[k];
    if (std::abs(lambda) < 1.0 - pbh_tol) continue;
    CMatrix shifted = A.cast<Complex>();
    shifted.diagonal().array() -= lambda;
    CMatrix stacked;
    if (stack_rows) {
      stacked.resize(n + B.rows(), n);
      stacked.topRows(n) = shifted;
      stacked.bottomRows(B.rows()) = B.cast<Complex>();
    } else {
      stacked.resize(n, n + B.cols());
      stacked.leftCols(n) = shifted;
      stacked.rightCols(B.cols()) = B.cast<Complex>();
    }
    Eigen::JacobiSVD<CMatrix> svd(stacked);
    const auto& s = svd.singularValues();
    const double smax = s[0];
    const double smin = s[s.size() - 1];
    if (!(smin > pbh_tol * smax)) return false;
  }
  return true;
}

}  // namespace

void SolverOptions::validate() const {
  if (!(tol > 0.0) || max_iter <= 0 || !(pinv_rtol > 0.0) ||
      !(pbh_tol > 0.0) || !(tie_rtol > 0.0))
    throw RiccatiError(RiccatiError::Kind::InvalidOptions,
                       "solver options must be strictly positive");
}

SteadyStateResult SteadyStateResult::finite(Matrix cov, long iterations) {
  SteadyStateResult r;
  r.trace_ = cov.trace();
  r.cov_ = std::move(cov);
  r.iterations_ = iterations;
  return r;
}

const Matrix& SteadyStateResult::cov() const {
  if (!cov_) throw std::logic_error("steady-state covariance is infinite");
  return *cov_;
}

Vector SteadyStateResult::diagonal() const {
  return cov_ ? Vector(cov_->diagonal()) : Vector();
}

Matrix riccati_step(const Matrix& S, const Matrix& A, const Matrix& C,
                    const Matrix& W, const Matrix& V,
                    const SolverOptions& opts) {
  const auto n = A.rows();
  require_shape(A.cols() == n, "A must be square");
  require_shape(S.rows() == n && S.cols() == n, "S must match A");
  require_shape(W.rows() == n && W.cols() == n, "W must match A");
  require_shape(C.cols() == n || C.rows() == 0, "C must have n columns");
  require_shape(V.rows() == C.rows() && V.cols() == C.rows(),
                "V must be p x p with p = rows(C)");
  const Matrix post = measurement_update(S, C, noise_factor(V), opts);
  return symmetrized(A * post * A.transpose() + W);
}

Matrix posteriori_from_priori(const Matrix& sigma, const Matrix& C,
                              const Matrix& V, const SolverOptions& opts) {
  const auto n = sigma.rows();
  require_shape(sigma.cols() == n, "sigma must be square");
  require_shape(C.cols() == n || C.rows() == 0, "C must have n columns");
  require_shape(V.rows() == C.rows() && V.cols() == C.rows(),
                "V must be p x p with p = rows(C)");
  return measurement_update(sigma, C, noise_factor(V), opts);
}

SteadyStateResult dare_steady_state(const Matrix& A, const Matrix& C,
                                    const Matrix& W, const Matrix& V,
                                    const SolverOptions& opts) {
  opts.validate();
  const auto n = A.rows();
  require_shape(A.cols() == n && n > 0, "A must be square and nonempty");
  require_shape(W.rows() == n && W.cols() == n, "W must match A");
  require_shape(C.cols() == n || C.rows() == 0, "C must have n columns");
  require_shape(V.rows() == C.rows() && V.cols() == C.rows(),
                "V must be p x p with p = rows(C)");

  if (!is_stabilizable(A, W, opts.pbh_tol))
    throw RiccatiError(RiccatiError::Kind::StabilizabilityViolation,
                       "(A, W^1/2) is not stabilizable");
  if (!is_detectable(A, C, opts.pbh_tol)) return SteadyStateResult::infinite();

  const Matrix Vh = noise_factor(V);
  Matrix S = Matrix::Identity(n, n);
  double residual = std::numeric_limits<double>::infinity();
  for (long k = 1; k <= opts.max_iter; ++k) {
    Matrix next = symmetrized(
        A * measurement_update(S, C, Vh, opts) * A.transpose() + W);
    residual = (next - S).norm();
    S = std::move(next);
    if (!std::isfinite(residual)) break;
    if (residual < opts.tol) return SteadyStateResult::finite(std::move(S), k);
  }
  std::ostringstream os;
  os << "Riccati iteration did not converge (residual " << residual << ")";
  throw RiccatiError(RiccatiError::Kind::NoConvergence, os.str(), residual);
}

SteadyStateResult dare_steady_state(const SystemModel& model,
                                    const SelectionVector& selection,
                                    const SolverOptions& opts) {
  const auto sub = restrict_to(model, selection);
  return dare_steady_state(model.A, sub.C, model.W, sub.V, opts);
}

double coupling_check(const Matrix& priori, const Matrix& post,
                      const Matrix& A, const Matrix& W) {
  return (priori - (A * post * A.transpose() + W)).norm();
}

bool is_detectable(const Matrix& A, const Matrix& C, double pbh_tol) {
  Matrix rows = C;
  if (rows.rows() == 0) rows.resize(0, A.cols());
  return pbh_passes(A, rows, pbh_tol, true);
}

bool is_stabilizable(const Matrix& A, const Matrix& W, double pbh_tol) {
  return pbh_passes(A, psd_factor(W), pbh_tol, false);
}

Matrix pseudo_inverse_psd(const Matrix& M, double rtol) {
  if (M.size() == 0) return Matrix(M.rows(), M.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(M));
  const Vector& d = es.eigenvalues();
  const double cutoff = rtol * std::max(1.0, d.maxCoeff());
  Vector inv(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    inv[i] = d[i] > cutoff ? 1.0 / d[i] : 0.0;
  return symmetrized(es.eigenvectors() * inv.asDiagonal() *
                     es.eigenvectors().transpose());
}

Matrix psd_factor(const Matrix& M) {
  double lo = 0.0;
  double hi = 0.0;
  return factor_with_check(M, lo, hi);
}

}  // namespace kfsslab
