// Acceptance checks for the toolkit: one pass/fail line per criterion.
// Run all with no arguments, or a single one with --criterion K.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "ric/combinatorics.hpp"
#include "ric/dos_wham.hpp"
#include "ric/emc.hpp"
#include "ric/ensemble.hpp"
#include "ric/ric_bounds.hpp"
#include "ric/rng.hpp"
#include "ric/rs_solver.hpp"

using namespace ric;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double binary_entropy(double rho) {
  return -rho * std::log(rho) - (1.0 - rho) * std::log(1.0 - rho);
}

RsPoint solve_point(double alpha, double rho, double mu,
                    const SolveOptions& opts, const GaussHermite& rule) {
  return rs_point(alpha, rho, mu, initial_guess(alpha, rho, mu), opts, rule);
}

// ---------------------------------------------------------------- curves

// (lambda, sigma) interpolation table from RS points of one branch.
struct SigmaTable {
  std::vector<std::pair<double, double>> rows;  // sorted by lambda

  static SigmaTable from_curve(const std::vector<RsPoint>& pts) {
    SigmaTable t;
    for (const RsPoint& p : pts) t.rows.emplace_back(p.lambda, p.sigma);
    std::sort(t.rows.begin(), t.rows.end());
    return t;
  }
  bool covers(double lam) const {
    return !rows.empty() && lam >= rows.front().first &&
           lam <= rows.back().first;
  }
  double at(double lam) const {
    auto it = std::lower_bound(rows.begin(), rows.end(),
                               std::make_pair(lam, -1e300));
    if (it == rows.begin()) return it->second;
    const auto lo = it - 1;
    const double t = (lam - lo->first) / (it->first - lo->first);
    return lo->second + t * (it->second - lo->second);
  }
};

// Shared small-instance ensemble used by criteria 6 and 7.
MeasurementMatrix instance_n12() {
  EnsembleSpec spec;
  spec.n_cols = 12;
  spec.alpha = 0.5;
  spec.seed = 61;
  return generate(spec);
}

// Per-subset extreme eigenvalues indexed by colexicographic rank.
std::vector<double> eigen_table(const MeasurementMatrix& mat, int s,
                                Branch branch) {
  const auto subsets =
      oracles::all_subsets(static_cast<int>(mat.spec.n_cols), s);
  std::vector<double> lam(subsets.size(), 0.0);
  for (const auto& idx : subsets) {
    SubsetSelection sel{idx};
    lam[subset_rank(idx)] = extreme_eigenvalue(gram(mat, sel), branch);
  }
  return lam;
}

// ------------------------------------------------------------ criterion 1

Outcome criterion1() {
  const SolveOptions opts;
  const GaussHermite rule = GaussHermite::make(opts.quad_nodes);
  const std::pair<double, double> cases[] = {{0.5, 0.1}, {0.5, 0.25},
                                             {0.3, 0.1}};
  double worst = 0.0;
  for (const auto& [alpha, rho] : cases) {
    const auto edges = mp_support_edges(alpha, rho);
    for (int sign : {+1, -1}) {
      const double l1 =
          solve_point(alpha, rho, sign * 1e-3, opts, rule).lambda;
      const double l2 =
          solve_point(alpha, rho, sign * 2e-3, opts, rule).lambda;
      const double extrap = 2.0 * l1 - l2;  // first-order bias cancellation
      const double target = sign > 0 ? edges.first : edges.second;
      worst = std::max(worst, std::abs(extrap - target));
    }
  }
  return {worst < 1e-2, "max |lambda(mu->0) - spectral edge| = " + fmt(worst) +
                            " (tol 0.01) over 3 (alpha,rho) pairs x 2 branches"};
}

// ------------------------------------------------------------ criterion 2

Outcome criterion2() {
  const SolveOptions opts;
  const GaussHermite rule = GaussHermite::make(opts.quad_nodes);
  const std::pair<double, double> cases[] = {{0.5, 0.1}, {0.5, 0.25},
                                             {0.3, 0.1}};
  double worst = 0.0;
  for (const auto& [alpha, rho] : cases)
    for (int sign : {+1, -1}) {
      const double sigma =
          solve_point(alpha, rho, sign * 1e-3, opts, rule).sigma;
      worst = std::max(worst, std::abs(sigma - binary_entropy(rho)));
    }
  return {worst < 1e-3,
          "max |sigma(mu->0) - H(rho)| = " + fmt(worst) + " (tol 0.001)"};
}

// ------------------------------------------------------------ criterion 3

Outcome criterion3() {
  const SolveOptions opts;
  const GaussHermite rule = GaussHermite::make(opts.quad_nodes);
  double worst = 0.0;
  int solved = 0;
  for (int sign : {+1, -1}) {
    const auto grid = geometric_grid(1e-3, 1e3, 40, sign);
    const RsCurve curve = rs_curve(0.5, 0.1, grid, opts);
    if (!curve.failures.empty())
      return {false, "continuation failed at mu=" +
                         fmt(curve.failures.front().first) + ": " +
                         curve.failures.front().second};
    for (const RsPoint& p : curve.points) {
      const auto rr = saddle_residuals(0.5, 0.1, p.mu, p.saddle, rule);
      for (double r : rr) worst = std::max(worst, std::abs(r));
      ++solved;
    }
  }
  return {worst < 1e-8 && solved == 80,
          "max stationarity residual = " + fmt(worst) + " over " +
              std::to_string(solved) + " points (tol 1e-8)"};
}

// ------------------------------------------------------------ criterion 4

Outcome criterion4() {
  const SolveOptions opts;
  const GaussHermite rule = GaussHermite::make(opts.quad_nodes);
  const double h = 1e-4;
  double worst = 0.0;
  for (int sign : {+1, -1}) {
    const auto grid = geometric_grid(1e-2, 1e2, 12, sign);
    const RsCurve curve = rs_curve(0.5, 0.1, grid, opts);
    if (!curve.failures.empty())
      return {false,
              "continuation failed at mu=" + fmt(curve.failures.front().first)};
    for (const RsPoint& p : curve.points) {
      const double mu_p = p.mu * (1.0 + h), mu_m = p.mu * (1.0 - h);
      const SaddleResult rp =
          solve_saddle(0.5, 0.1, mu_p, p.saddle, opts, rule);
      const SaddleResult rm =
          solve_saddle(0.5, 0.1, mu_m, p.saddle, opts, rule);
      const double fd = -2.0 *
                        (free_entropy(0.5, 0.1, mu_p, rp.sp, rule) -
                         free_entropy(0.5, 0.1, mu_m, rm.sp, rule)) /
                        (mu_p - mu_m);
      worst = std::max(worst, std::abs(p.lambda - fd) / std::abs(fd));
    }
  }
  return {worst < 1e-3, "max relative |lambda_envelope - lambda_fd| = " +
                            fmt(worst) + " (tol 0.001)"};
}

// ------------------------------------------------------------ criterion 5

Outcome criterion5() {
  SplitMix64 rng(20260817ULL);
  const double beta = 1e4;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    SaddlePoint sp;
    sp.Q_hat = std::exp(-1.0 + 3.0 * rng.uniform01());
    sp.Delta_hat = 0.5 * rng.uniform01() * sp.Q_hat;
    sp.q0_hat = std::exp(-2.0 + 3.0 * rng.uniform01());
    sp.K = -2.0 + 5.0 * rng.uniform01();
    const double z = 1.5 * rng.normal();
    const double mu = std::exp(-2.0 + 3.0 * rng.uniform01());
    const double closed = xi_limit(z, sp);
    const double brute = oracles::xi_finite_beta(z, sp, mu, beta);
    worst = std::max(worst, std::abs(closed - brute) / brute);
  }
  return {worst < 1e-3, "max relative kernel error = " + fmt(worst) +
                            " over 100 draws at beta=1e4 (tol 0.001)"};
}

// ------------------------------------------------------------ criterion 6

Outcome criterion6() {
  const MeasurementMatrix mat = instance_n12();
  const int s = 3;
  double worst = 0.0;
  for (int sign : {+1, -1}) {
    const double mu = sign * 30.0 / 12.0;  // mu * N = +/-30
    Ladder ladder;
    ladder.mus = {mu};
    EmcOptions opts;
    opts.sweeps = 1000000;
    opts.seed = sign > 0 ? 471 : 472;
    opts.record_subsets = true;
    const EmcResult res = run_emc(mat, s, ladder, opts);
    const auto lam = eigen_table(mat, s, branch_for_mu(mu));
    const auto exact = oracles::boltzmann_weights(lam, 12, mu);
    std::vector<double> sampled(res.subset_counts[0].size());
    double total = 0.0;
    for (long long c : res.subset_counts[0]) total += static_cast<double>(c);
    for (std::size_t i = 0; i < sampled.size(); ++i)
      sampled[i] = static_cast<double>(res.subset_counts[0][i]) / total;
    worst = std::max(worst, oracles::total_variation(sampled, exact));
  }
  return {worst < 0.02, "max total variation vs exact Boltzmann law = " +
                            fmt(worst) +
                            " over 220 subsets, both signs (tol 0.02)"};
}

// ------------------------------------------------------------ criterion 7

Outcome criterion7() {
  const MeasurementMatrix mat = instance_n12();
  const int s = 3;
  const Ladder ladder = geometric_ladder(0.1, 2.5, 8, Branch::minimum);
  EmcOptions opts;
  opts.sweeps = 200000;
  opts.seed = 733;
  const EmcResult emc = run_emc(mat, s, ladder, opts);
  const DensityOfStates dos = wham_solve(emc.histograms);

  BinGrid grid;  // the exact density on the same grid as the reconstruction
  const double width = dos.bin_centers[1] - dos.bin_centers[0];
  grid.lambda_lo = dos.bin_centers.front() - 0.5 * width;
  grid.lambda_hi = dos.bin_centers.back() + 0.5 * width;
  grid.bins = dos.bins();
  const DensityOfStates exact =
      enumerate_exact(mat, s, Branch::minimum, grid).dos;

  double worst = 0.0;
  int compared = 0;
  for (int b = 0; b < dos.bins(); ++b) {
    if (!dos.support[b]) continue;
    if (!std::isfinite(exact.log_counts[b]))
      return {false, "supported bin at lambda=" + fmt(dos.bin_centers[b]) +
                         " holds no exact subsets"};
    worst = std::max(worst, std::abs(dos.log_counts[b] / 12.0 -
                                     exact.log_counts[b] / 12.0));
    ++compared;
  }
  const double phi0 = free_entropy_from_dos(dos, 0.0);
  const double phi0_err = std::abs(phi0 - std::log(220.0) / 12.0);
  const bool pass = compared > 0 && worst < 0.05 && phi0_err < 1e-3;
  return {pass, "max |sigma_wham - sigma_exact| = " + fmt(worst) + " over " +
                    std::to_string(compared) +
                    " supported bins (tol 0.05); |phi(0) - ln(220)/12| = " +
                    fmt(phi0_err) + " (tol 0.001)"};
}

// ------------------------------------------------------------ criterion 8

Outcome criterion8() {
  EnsembleSpec spec;
  spec.n_cols = 64;
  spec.alpha = 0.5;
  spec.seed = 64001;
  const MeasurementMatrix mat = generate(spec);
  const int s = 8;  // rho = 0.125

  const SolveOptions sopts;
  std::string detail;
  bool pass = true;
  for (int sign : {+1, -1}) {
    const Branch branch = sign > 0 ? Branch::minimum : Branch::maximum;
    const RsCurve curve =
        rs_curve(0.5, 0.125, geometric_grid(1e-3, 10.0, 60, sign), sopts);
    if (!curve.failures.empty())
      return {false, "rs continuation failed at mu=" +
                         fmt(curve.failures.front().first)};
    const SigmaTable table = SigmaTable::from_curve(curve.points);

    const Ladder ladder = geometric_ladder(0.02, 3.0, 22, branch);
    EmcOptions opts;
    opts.sweeps = 150000;
    opts.seed = sign > 0 ? 808 : 809;
    const EmcResult emc = run_emc(mat, s, ladder, opts);
    const DensityOfStates dos = wham_solve(emc.histograms);
    const auto se =
        bootstrap_sigma_stderr(emc.histograms, WhamOptions{}, 32, 4242);

    int compared = 0, violations = 0;
    double peak_sigma = -1e300, peak_lambda = 0.0, worst_excess = -1e300;
    for (int b = 0; b < dos.bins(); ++b) {
      if (!dos.support[b]) continue;
      const double sigma_emc = dos.log_counts[b] / 64.0;
      if (sigma_emc > peak_sigma) {
        peak_sigma = sigma_emc;
        peak_lambda = dos.bin_centers[b];
      }
      if (!table.covers(dos.bin_centers[b])) continue;
      const double sigma_rs = table.at(dos.bin_centers[b]);
      const double err = std::isfinite(se[b]) ? se[b] : 0.0;
      const double excess = sigma_emc - (sigma_rs + 2.0 * err);
      worst_excess = std::max(worst_excess, excess);
      if (excess > 0.0) ++violations;
      ++compared;
    }
    const bool peak_inside = peak_lambda > 0.25 && peak_lambda < 2.25;
    const std::string bname(branch == Branch::minimum ? "min" : "max");
    if (compared < 3) {
      pass = false;
      detail += bname + ": only " + std::to_string(compared) +
                " comparable bins; ";
      continue;
    }
    if (violations > 0 || !peak_inside) pass = false;
    detail += bname + ": " + std::to_string(violations) + "/" +
              std::to_string(compared) +
              " bins exceed sigma_rs + 2se (worst excess " +
              fmt(worst_excess) + "), entropy peak at lambda=" +
              fmt(peak_lambda) + (peak_inside ? " inside" : " OUTSIDE") +
              " (0.25, 2.25); ";
  }
  return {pass, detail};
}

// ------------------------------------------------------------ criterion 9

Outcome criterion9() {
  const SolveOptions sopts;
  const CurveOptions copts;
  const ZeroPointResult plus =
      refine_zero_point(0.5, 0.1, Branch::minimum, sopts, copts);
  const ZeroPointResult minus =
      refine_zero_point(0.5, 0.1, Branch::maximum, sopts, copts);
  const RicEstimate est =
      ric_from_zero_points(0.5, 0.1, plus.lambda_star, minus.lambda_star);
  const bool ok_delta = est.delta_max > 1.0944;
  const bool ok_range = est.delta_min >= 0.0 && est.delta_min <= 1.0 &&
                        plus.lambda_star >= 0.0 && plus.lambda_star <= 1.0;
  const bool ok_sigma = std::abs(plus.sigma_at) < 1e-4 &&
                        std::abs(minus.sigma_at) < 1e-4;
  return {ok_delta && ok_range && ok_sigma,
          "delta_max = " + fmt(est.delta_max) + " (> 1.0944), delta_min = " +
              fmt(est.delta_min) + " in [0,1], |sigma| at zeros = " +
              fmt(std::max(std::abs(plus.sigma_at),
                           std::abs(minus.sigma_at))) +
              " (tol 1e-4)"};
}

// ----------------------------------------------------------- criterion 10

Outcome criterion10() {
  std::vector<double> alphas;
  for (int i = 1; i <= 9; ++i) alphas.push_back(0.1 * i);
  const SolveOptions sopts;
  const CurveOptions copts;
  const PhaseOptions popts;

  const Condition conds[] = {Condition::l1_symmetric,
                             Condition::l1_asymmetric, Condition::l0};
  std::vector<std::vector<double>> rho_star(3);
  for (int c = 0; c < 3; ++c) {
    const PhaseBoundary pb =
        phase_boundary(alphas, conds[c], sopts, copts, popts);
    if (!pb.failures.empty())
      return {false, "boundary for " + to_string(conds[c]) + " failed at " +
                         fmt(pb.failures.front().first) + ": " +
                         pb.failures.front().second};
    for (const auto& [a, r] : pb.points) rho_star[c].push_back(r);
  }

  int nest_violations = 0, mono_violations = 0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(rho_star[0][i] <= rho_star[1][i] && rho_star[1][i] <= rho_star[2][i]))
      ++nest_violations;
  }
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 1; i < alphas.size(); ++i)
      if (rho_star[c][i] < rho_star[c][i - 1]) ++mono_violations;

  const bool pass = nest_violations == 0 && mono_violations == 0;
  return {pass, "nesting l1_sym <= l1_asym <= l0 violated at " +
                    std::to_string(nest_violations) +
                    "/9 alphas; monotonicity violated at " +
                    std::to_string(mono_violations) + " steps; rho*(0.5) = {" +
                    fmt(rho_star[0][4]) + ", " + fmt(rho_star[1][4]) + ", " +
                    fmt(rho_star[2][4]) + "}"};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion K]\n", argv[0]);
      return 2;
    }
  }
  if (only < 0 || only > 10) {
    std::fprintf(stderr, "criterion must be in 1..10\n");
    return 2;
  }

  const std::function<Outcome()> criteria[] = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9, criterion10};

  bool all_pass = true;
  for (int k = 1; k <= 10; ++k) {
    if (only != 0 && k != only) continue;
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", k,
                o.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
