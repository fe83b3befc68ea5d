#pragma once

#include <stdexcept>

namespace kfsslab::oracles {

/// Thrown when a closed form is evaluated outside its domain
/// (|lambda1| >= 1, negative variances, nonpositive h).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Closed forms for the single reachable state of A = diag(lambda1, 0, ...)
// with W = I. State 1 is measured either through one row [1 gamma] with
// noise variance sigma_v^2 (alpha^2 = |gamma|^2 + sigma_v^2), or through n'
// noiseless rows [1_{n'} rho I_{n'}].

/// Steady-state prior variance of state 1 for a single noisy row.
double sigma11_scalar(double lambda1, double alpha_sq);

/// Steady-state prior variance of state 1 for n' noiseless rows of the form
/// [1 rho e_i'].
double sigma11_multi(double lambda1, double rho_sq, int n_prime);

/// Common limit 1 / (1 - lambda1^2) of both closed forms.
double sigma_limits(double lambda1);

struct DiagBounds {
  double priori_lo;
  double priori_hi;
  double post_lo;
  double post_hi;
};

/// Per-state bounds on the steady-state diagonal for diagonal stable A and
/// diagonal W.
DiagBounds diag_bounds(double lambda_i, double w_ii);

/// State-1 variances and traces for the three-state selection
/// counterexample with rows [1 h h], [1 0 h], [0 1 1].
struct Example1Quantities {
  double sigma1;   ///< sensor {1}
  double sigma2;   ///< sensor {2}
  double sigma3;   ///< sensor {3}
  double sigma12;  ///< sensors {1,2}
  double sigma23;  ///< sensors {2,3}
  double trace_gre_priori;
  double trace_opt_priori;
  double trace_gre_post;
  double trace_opt_post;
  // Posterior traces scored by the greedy pass.
  double post_mu1;
  double post_mu2;
  double post_mu3;
  double post_mu12;
  double post_mu23;
};

Example1Quantities example1_quantities(double lambda1, double h);

/// Quantities for the four-sensor attack counterexample with rows
/// [1 h h], [1 0 h], [0 1 0], [0 0 1].
struct Example2Quantities {
  double sigma4p;  ///< state-1 variance once sensor 4 is removed
  double trace_gre_priori;
  double trace_opt_priori;
  double trace_gre_post;
  double trace_opt_post;
};

Example2Quantities example2_quantities(double lambda1, double h);

struct LimitRatios {
  double priori;
  double post;
};

/// Greedy-to-optimal ratio limits of the selection counterexample, h -> inf.
LimitRatios limit_ratio_kfss(double lambda1);

/// Optimal-to-greedy ratio limits of the attack counterexample, h -> 0.
LimitRatios limit_ratio_kfsa(double lambda1);

}  // namespace kfsslab::oracles
