#include "kfsslab/oracles.hpp"

#include <cmath>
#include <string>

namespace kfsslab::oracles {

namespace {

void check_lambda(double lambda1) {
  if (!(std::abs(lambda1) < 1.0))
    throw DomainError("|lambda1| must be < 1, got " + std::to_string(lambda1));
}

void check_nonnegative(double x, const char* name) {
  if (!(x >= 0.0) || !std::isfinite(x))
    throw DomainError(std::string(name) + " must be finite and >= 0");
}

void check_h(double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("h must be finite and > 0");
}

// Positive root of n' s^2 + t s - x = 0 written as (sqrt(D) - t) / (2 n'),
// D = t^2 + 4 n' x. For t > 0 the rationalized 2x / (sqrt(D) + t) avoids
// cancellation; both expressions are the same number in exact arithmetic.
double stable_root(double t, double x, double n_prime) {
  const double D = t * t + 4.0 * n_prime * x;
  const double r = std::sqrt(D);
  if (t <= 0.0) return (r - t) / (2.0 * n_prime);
  return 2.0 * x / (r + t);
}

}  // namespace

double sigma11_scalar(double lambda1, double alpha_sq) {
  check_lambda(lambda1);
  check_nonnegative(alpha_sq, "alpha^2");
  const double a = 1.0 - lambda1 * lambda1;
  return stable_root(alpha_sq * a - 1.0, alpha_sq, 1.0);
}

double sigma11_multi(double lambda1, double rho_sq, int n_prime) {
  check_lambda(lambda1);
  check_nonnegative(rho_sq, "rho^2");
  if (n_prime < 1) throw DomainError("n' must be >= 1");
  const double a = 1.0 - lambda1 * lambda1;
  const double np = static_cast<double>(n_prime);
  return stable_root(rho_sq * a - np, rho_sq, np);
}

double sigma_limits(double lambda1) {
  check_lambda(lambda1);
  return 1.0 / (1.0 - lambda1 * lambda1);
}

DiagBounds diag_bounds(double lambda_i, double w_ii) {
  check_lambda(lambda_i);
  check_nonnegative(w_ii, "W_ii");
  const double hi = w_ii / (1.0 - lambda_i * lambda_i);
  return {w_ii, hi, 0.0, hi};
}

Example1Quantities example1_quantities(double lambda1, double h) {
  check_lambda(lambda1);
  check_h(h);
  const double h2 = h * h;
  Example1Quantities q{};
  q.sigma1 = sigma11_scalar(lambda1, 2.0 * h2);
  q.sigma2 = sigma11_scalar(lambda1, h2);
  q.sigma3 = sigma_limits(lambda1);
  q.sigma12 = q.sigma2;
  q.sigma23 = sigma11_scalar(lambda1, 0.5 * h2);

  q.trace_gre_priori = q.sigma23 + 2.0;
  q.trace_opt_priori = 3.0;
  q.trace_gre_post = 1.0 + h2 * (q.sigma23 - 1.0) / (2.0 * q.sigma23 + h2);
  q.trace_opt_post = 1.0;

  q.post_mu1 = 2.0 + h2 * (q.sigma1 - 1.0) / (0.5 * q.sigma1 + h2);
  q.post_mu2 = 2.0 + h2 * (q.sigma2 - 1.0) / (q.sigma2 + h2);
  q.post_mu3 = 2.0 + q.sigma3 - 1.0;
  q.post_mu12 = 1.0 + h2 * (q.sigma2 - 1.0) / (q.sigma2 + h2);
  q.post_mu23 = q.trace_gre_post;
  return q;
}

Example2Quantities example2_quantities(double lambda1, double h) {
  check_lambda(lambda1);
  check_h(h);
  const double h2 = h * h;
  Example2Quantities q{};
  q.sigma4p = sigma11_scalar(lambda1, h2);
  q.trace_gre_priori = q.sigma4p + 2.0;
  q.trace_opt_priori = sigma_limits(lambda1) + 2.0;
  q.trace_gre_post = 1.0 + h2 * (q.sigma4p - 1.0) / (q.sigma4p + h2);
  q.trace_opt_post = sigma_limits(lambda1);
  return q;
}

LimitRatios limit_ratio_kfss(double lambda1) {
  const double s = sigma_limits(lambda1);
  return {2.0 / 3.0 + s / 3.0, s};
}

LimitRatios limit_ratio_kfsa(double lambda1) {
  // Same limits as the selection counterexample.
  return limit_ratio_kfss(lambda1);
}

}  // namespace kfsslab::oracles
