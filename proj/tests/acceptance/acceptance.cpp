// Acceptance harness: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kfsslab/gadgets.hpp"
#include "kfsslab/oracles.hpp"
#include "kfsslab/riccati.hpp"
#include "kfsslab/solvers.hpp"
#include "support/reference.hpp"

using namespace kfsslab;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  double worst = 0.0;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
  void track(double err) { worst = std::max(worst, err); }
};

int run(int id, const char* title, double budget_s,
        const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.fail(std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs >= budget_s)
    out.fail("runtime " + std::to_string(secs) + " s over budget");
  std::printf("%s [%d] %s  (%.2f s, worst err %.3e)%s%s\n", out.ok ? "PASS" : "FAIL",
              id, title, secs, out.worst, out.ok ? "" : "  ", out.detail.c_str());
  std::fflush(stdout);
  return out.ok ? 0 : 1;
}

double coupling_residual(const Matrix& A, const Matrix& C, const Matrix& W,
                         const Matrix& V, const Matrix& priori) {
  const Matrix post = posteriori_from_priori(priori, C, V);
  return coupling_check(priori, post, A, W);
}

// Criterion 3 collects the coupling residual of every solve made by 1 and 2.
std::vector<double> g_coupling;

void closed_forms(Outcome& o) {
  const std::array<double, 8> alphas{0, 0.5, 1, 2, 5, 10, 100, 1e4};
  const std::array<int, 4> nps{1, 2, 3, 6};
  for (int k = 1; k <= 19; ++k) {
    const double lam = 0.05 * k;
    for (double a2 : alphas) {
      const Matrix A = Matrix::Constant(1, 1, lam);
      const Matrix C = Matrix::Ones(1, 1);
      const Matrix W = Matrix::Ones(1, 1);
      const Matrix V = Matrix::Constant(1, 1, a2);
      const auto r = dare_steady_state(A, C, W, V);
      const double err = std::abs(oracles::sigma11_scalar(lam, a2) - r.cov()(0, 0));
      o.track(err);
      if (err >= 1e-8) o.fail("scalar lambda=" + std::to_string(lam) + " a2=" + std::to_string(a2));
      g_coupling.push_back(coupling_residual(A, C, W, V, r.cov()));

      const double rho = std::sqrt(a2);
      for (int np : nps) {
        Matrix Am = Matrix::Zero(np + 1, np + 1);
        Am(0, 0) = lam;
        Matrix Cm = Matrix::Zero(np, np + 1);
        Cm.col(0).setOnes();
        Cm.rightCols(np) = rho * Matrix::Identity(np, np);
        const Matrix Wm = Matrix::Identity(np + 1, np + 1);
        const Matrix Vm = Matrix::Zero(np, np);
        const auto rm = dare_steady_state(Am, Cm, Wm, Vm);
        const double e = std::abs(oracles::sigma11_multi(lam, a2, np) - rm.cov()(0, 0));
        o.track(e);
        if (e >= 1e-8)
          o.fail("multi n'=" + std::to_string(np) + " lambda=" + std::to_string(lam) +
                 " rho2=" + std::to_string(a2));
        g_coupling.push_back(coupling_residual(Am, Cm, Wm, Vm, rm.cov()));
      }
    }
  }
}

void check_bounds(Outcome& o, const Matrix& A, const Matrix& C, const Matrix& W,
                  const Matrix& V) {
  const auto r = dare_steady_state(A, C, W, V);
  if (!r.is_finite()) {
    o.fail("stable model reported infinite");
    return;
  }
  const Matrix& S = r.cov();
  const Matrix post = posteriori_from_priori(S, C, V);
  g_coupling.push_back(coupling_check(S, post, A, W));
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double lam = A(i, i);
    const double hi = W(i, i) / (1.0 - lam * lam);
    const double slack = std::max({W(i, i) - S(i, i), S(i, i) - hi, -post(i, i),
                                   post(i, i) - hi});
    o.track(std::max(0.0, slack));
    if (slack > 1e-8) o.fail("diagonal bound violated at state " + std::to_string(i));
  }
}

void diagonal_bounds(Outcome& o) {
  std::mt19937 rng(20240601);
  std::uniform_real_distribution<double> lam_d(-0.95, 0.95), w_d(0.1, 3.0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int inst = 0; inst < 50; ++inst) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const int q = 1 + static_cast<int>(rng() % 6);
    Matrix A = Matrix::Zero(n, n), W = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      A(i, i) = lam_d(rng);
      W(i, i) = w_d(rng);
    }
    Matrix C(q, n);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < n; ++j) C(i, j) = (rng() % 3 == 0) ? 0.0 : g(rng);
    const Matrix V = ref::random_psd(rng, q, 0.5);
    for (unsigned mask = 0; mask < (1u << q); ++mask) {
      std::vector<int> idx;
      for (int i = 0; i < q; ++i)
        if (mask >> i & 1u) idx.push_back(i);
      check_bounds(o, A, ref::rows_of(C, idx), W, ref::principal(V, idx));
    }
  }

  // Unmeasured state: both variances sit at the open-loop value.
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 3, j = trial % n;
    Matrix A = Matrix::Zero(n, n), W = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      A(i, i) = lam_d(rng);
      W(i, i) = w_d(rng);
    }
    Matrix C(2, n);
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < n; ++k) C(i, k) = g(rng);
    C.col(j).setZero();
    const Matrix V = ref::random_psd(rng, 2, 1.0);
    const auto r = dare_steady_state(A, C, W, V);
    const Matrix post = posteriori_from_priori(r.cov(), C, V);
    g_coupling.push_back(coupling_check(r.cov(), post, A, W));
    const double open = W(j, j) / (1.0 - A(j, j) * A(j, j));
    const double e = std::max(std::abs(r.cov()(j, j) - open), std::abs(post(j, j) - open));
    o.track(e);
    if (e >= 1e-8) o.fail("zero-column equality");
  }

  // e_i in the row space with noiseless sensors: state i is known exactly.
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 4, i = trial % n;
    Matrix A = Matrix::Zero(n, n), W = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
      A(k, k) = lam_d(rng);
      W(k, k) = w_d(rng);
    }
    Eigen::RowVectorXd r(n);
    for (int k = 0; k < n; ++k) r(k) = g(rng);
    Matrix C(2, n);
    C.row(0) = r + Eigen::RowVectorXd::Unit(n, i);
    C.row(1) = r;
    const Matrix V = Matrix::Zero(2, 2);
    const auto res = dare_steady_state(A, C, W, V);
    const Matrix post = posteriori_from_priori(res.cov(), C, V);
    g_coupling.push_back(coupling_check(res.cov(), post, A, W));
    const double e = std::max(std::abs(res.cov()(i, i) - W(i, i)), std::abs(post(i, i)));
    o.track(e);
    if (e >= 1e-8) o.fail("row-space equality");
  }
}

void coupling(Outcome& o) {
  if (g_coupling.empty()) o.fail("no solves recorded");
  for (double r : g_coupling) {
    o.track(r);
    if (r >= 1e-8) o.fail("coupling residual " + std::to_string(r));
  }
}

std::vector<std::size_t> one_based(std::vector<std::size_t> v) {
  for (auto& x : v) ++x;
  return v;
}

void example_one(Outcome& o) {
  const double lam = 0.9;
  const std::vector<std::size_t> gre{2, 3}, opt{1, 3};
  std::array<double, 2> prev{0.0, 0.0};
  for (double h : {10.0, 100.0, 1e3, 1e4}) {
    const auto model = build_example1(lam, h);
    for (int mi = 0; mi < 2; ++mi) {
      const Metric metric = mi == 0 ? Metric::Priori : Metric::Posteriori;
      const auto g = greedy_select(model, 2, metric);
      const auto e = exhaustive_select(model, model.selection_costs, 2.0, metric);
      if (one_based(g.chosen) != gre) o.fail("greedy pick at h=" + std::to_string(h));
      if (one_based(e.chosen) != opt) o.fail("exhaustive pick at h=" + std::to_string(h));
      const double ratio = g.trace / e.trace;
      if (ratio <= prev[mi]) o.fail("ratio not increasing at h=" + std::to_string(h));
      prev[mi] = ratio;
    }
  }
  const auto lim = oracles::limit_ratio_kfss(lam);
  const double ep = std::abs(prev[0] / lim.priori - 1.0);
  const double eq = std::abs(prev[1] / lim.post - 1.0);
  o.track(std::max(ep, eq));
  if (std::abs(lim.priori - (2.0 / 3.0 + 1.0 / (3.0 * (1.0 - 0.81)))) > 1e-12 ||
      std::abs(lim.post - 1.0 / (1.0 - 0.81)) > 1e-12)
    o.fail("limit formula mismatch");
  if (ep >= 0.02) o.fail("priori ratio off by " + std::to_string(ep));
  if (eq >= 0.02) o.fail("posteriori ratio off by " + std::to_string(eq));
}

void example_two(Outcome& o) {
  const double lam = 0.9;
  const std::vector<std::size_t> opt{1, 2};
  const auto lim = oracles::limit_ratio_kfsa(lam);
  for (double h : {1e-2, 1e-4}) {
    const auto model = build_example2(lam, h);
    for (int mi = 0; mi < 2; ++mi) {
      const Metric metric = mi == 0 ? Metric::Priori : Metric::Posteriori;
      const auto g = greedy_attack(model, 2, metric);
      const auto e = exhaustive_attack(model, model.attack_costs, 2.0, metric);
      if (g.steps.empty() || g.steps.front().chosen != 3)
        o.fail("greedy did not attack sensor 4 first at h=" + std::to_string(h));
      if (one_based(e.chosen) != opt) o.fail("exhaustive attack at h=" + std::to_string(h));
      if (h == 1e-4) {
        const double ratio = e.trace / g.trace;
        const double err = std::abs(ratio / (mi == 0 ? lim.priori : lim.post) - 1.0);
        o.track(err);
        if (err >= 0.02) o.fail("ratio off by " + std::to_string(err));
      }
    }
  }
}

void reduction(Outcome& o) {
  const std::vector<std::array<int, 3>> pool{
      {1, 2, 3}, {4, 5, 6}, {1, 4, 5}, {2, 3, 6}, {1, 2, 4},
      {3, 5, 6}, {1, 3, 5}, {2, 4, 6}, {1, 2, 6}, {3, 4, 5}};
  // The cap is split evenly over tau, and each tau takes evenly spaced
  // collections from its lexicographic enumeration.
  std::set<std::vector<std::array<int, 3>>> seen;
  std::vector<std::vector<X3CInstance>> by_tau;
  for (int tau = 2; tau <= 6; ++tau) {
    std::vector<X3CInstance> all;
    std::vector<int> pick(tau);
    std::function<void(int, int)> walk = [&](int start, int depth) {
      if (depth == tau) {
        std::vector<std::array<int, 3>> subsets;
        for (int k : pick) subsets.push_back(pool[k]);
        auto key = subsets;
        std::sort(key.begin(), key.end());
        if (seen.insert(key).second) all.push_back({2, subsets});
        return;
      }
      for (int k = start; k < static_cast<int>(pool.size()); ++k) {
        pick[depth] = k;
        walk(k + 1, depth + 1);
      }
    };
    walk(0, 0);
    by_tau.push_back(std::move(all));
  }
  std::vector<X3CInstance> instances;
  std::size_t left = 500;
  for (std::size_t t = 0; t < by_tau.size(); ++t) {
    const auto& all = by_tau[t];
    const std::size_t quota = std::min(all.size(), left / (by_tau.size() - t));
    for (std::size_t i = 0; i < quota; ++i) instances.push_back(all[i * all.size() / quota]);
    left -= quota;
  }
  int yes = 0;
  for (const auto& x : instances) {
    const bool truth = x3c_bruteforce(x).answer;
    yes += truth ? 1 : 0;
    const auto s = x3c_decide_via_kfss(x, 1.0, Algorithm::Exhaustive);
    const auto a = x3c_decide_via_kfsa(x, 1.0, Algorithm::Exhaustive);
    if (s.answer != truth) o.fail("kfss disagrees on an instance with tau=" + std::to_string(x.subsets.size()));
    if (a.answer != truth) o.fail("kfsa disagrees on an instance with tau=" + std::to_string(x.subsets.size()));
  }
  if (instances.size() != 500) o.fail("expected 500 instances");
  if (yes == 0 || yes == static_cast<int>(instances.size())) o.fail("degenerate answer mix");
  std::printf("     reduction: %zu instances, %d yes\n", instances.size(), yes);
}

void monotonicity(Outcome& o) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> lam_d(0.01, 0.99), log_d(-3.0, 4.0);
  for (int k = 0; k < 1000; ++k) {
    const double lam = lam_d(rng);
    double a = std::pow(10.0, log_d(rng)), b = std::pow(10.0, log_d(rng));
    if (a > b) std::swap(a, b);
    if (a == b) b = std::nextafter(b, 2 * b + 1);
    const double sa = oracles::sigma11_scalar(lam, a);
    const double sb = oracles::sigma11_scalar(lam, b);
    const double lim = 1.0 / (1.0 - lam * lam);
    if (!(sa < sb)) o.fail("not strictly increasing");
    if (!(sb < lim)) o.fail("not below the limit");
  }
}

void certificate(Outcome& o) {
  std::mt19937 rng(11);
  int made = 0;
  while (made < 100) {
    const int m = 1 + static_cast<int>(rng() % 4);
    const int l = 1 + static_cast<int>(rng() % m);
    Matrix G = Matrix::Zero(l, 3 * m);
    std::vector<int> cols(3 * m);
    for (int r = 0; r < l; ++r) {
      for (int c = 0; c < 3 * m; ++c) cols[c] = c;
      std::shuffle(cols.begin(), cols.end(), rng);
      for (int t = 0; t < 3; ++t) G(r, cols[t]) = 1.0;
    }
    int kappa = 0;
    for (int c = 0; c < 3 * m; ++c) kappa += G.col(c).isZero() ? 1 : 0;
    if (kappa == 0) continue;
    ++made;

    const auto cert = no_instance_transform(G);
    const Matrix& N = cert.N;
    const double ortho = (N.transpose() * N - Matrix::Identity(3 * m, 3 * m)).cwiseAbs().maxCoeff();
    const double null = (G * cert.N1()).cwiseAbs().maxCoeff();
    o.track(std::max(ortho, null));
    if (ortho >= 1e-10) o.fail("N is not orthogonal");
    if (null >= 1e-10) o.fail("G_L N1 is not zero");
    const auto rank_of = [](const Matrix& M) {
      if (M.size() == 0) return Eigen::Index{0};
      Eigen::JacobiSVD<Matrix> svd(M);
      const auto& s = svd.singularValues();
      Eigen::Index r = 0;
      for (Eigen::Index i = 0; i < s.size(); ++i) r += s[i] > 1e-10 ? 1 : 0;
      return r;
    };
    const auto rg = rank_of(G);
    if (rank_of(G * cert.N2()) != rg || cert.N2().cols() != rg)
      o.fail("G_L N2 rank mismatch");
    const Eigen::RowVectorXd ones = Eigen::RowVectorXd::Ones(3 * m) * cert.N1();
    int units = 0;
    for (Eigen::Index c = 0; c < ones.size(); ++c) units += std::abs(ones(c) - 1.0) < 1e-10 ? 1 : 0;
    if (units < kappa) o.fail("too few unit entries in 1'N1");
  }
}

void enumerator(Outcome& o) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const int q = 2 + static_cast<int>(rng() % 5);
    const int budget = 1 + static_cast<int>(rng() % (q - 1));
    const bool attack = k % 2 == 1;
    const Metric metric = (k / 2) % 2 == 0 ? Metric::Priori : Metric::Posteriori;

    SystemModel model;
    model.A = ref::random_stable(rng, n, 0.95);
    model.C = Matrix(q, n);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < n; ++j) model.C(i, j) = g(rng);
    model.W = ref::random_psd(rng, n, 1.0) + 0.1 * Matrix::Identity(n, n);
    model.V = ref::random_psd(rng, q, 0.5) + 0.05 * Matrix::Identity(q, q);
    model.selection_costs = Vector::Ones(q);
    model.attack_costs = Vector::Ones(q);
    model.budget_select = model.budget_attack = budget;
    model = validate_model(model);

    const auto rep = attack ? exhaustive_attack(model, model.attack_costs, budget, metric)
                            : exhaustive_select(model, model.selection_costs, budget, metric);
    const ref::Instance inst{model.A, model.C, model.W, model.V};
    const auto best = ref::enumerate(inst, budget, attack, metric == Metric::Posteriori);
    const std::vector<std::size_t> want(best.support.begin(), best.support.end());
    const double err = std::abs(rep.trace - best.trace);
    o.track(err);
    if (rep.chosen != want) o.fail("support mismatch on instance " + std::to_string(k));
    if (err >= 1e-9) o.fail("trace mismatch on instance " + std::to_string(k));
  }
}

}  // namespace

int main() {
  int failures = 0;
  failures += run(1, "closed forms match the Riccati fixed point", 10.0, closed_forms);
  failures += run(2, "diagonal bounds and their equality cases", 0.0, diagonal_bounds);
  failures += run(3, "prior/posterior coupling on every solve above", 0.0, coupling);
  failures += run(4, "selection counterexample: picks, limits, monotone ratios", 5.0, example_one);
  failures += run(5, "attack counterexample: picks and limits", 5.0, example_two);
  failures += run(6, "X3C reductions agree with brute force", 600.0, reduction);
  failures += run(7, "closed form is increasing and bounded", 0.0, monotonicity);
  failures += run(8, "orthogonal certificate for no-instances", 0.0, certificate);
  failures += run(9, "exhaustive search matches an independent enumerator", 0.0, enumerator);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
