#include "ric/dos_wham.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include "oracles.hpp"
#include "ric/combinatorics.hpp"
#include "ric/emc.hpp"
#include "ric/ensemble.hpp"

using namespace ric;

namespace {

EnergyHistogram make_hist(double mu, long n, int s,
                          const std::vector<long long>& counts,
                          double lo = 0.0, double hi = 4.0) {
  EnergyHistogram h;
  h.mu = mu;
  h.branch = branch_for_mu(mu);
  h.n_cols = n;
  h.subset_size = s;
  h.lambda_lo = lo;
  h.lambda_hi = hi;
  h.counts = counts;
  return h;
}

MeasurementMatrix small_matrix(long n, double alpha, std::uint64_t seed) {
  EnsembleSpec spec;
  spec.n_cols = n;
  spec.alpha = alpha;
  spec.seed = seed;
  return generate(spec);
}

double sum_exp(const std::vector<double>& logs) {
  double acc = 0.0;
  for (double v : logs)
    if (std::isfinite(v)) acc += std::exp(v);
  return acc;
}

}  // namespace

TEST_CASE("a single unbiased histogram is reproduced up to normalization") {
  std::vector<long long> counts(8, 0);
  counts[2] = 400;
  counts[3] = 900;
  counts[4] = 250;
  counts[5] = 50;  // below the default support threshold
  const EnergyHistogram h = make_hist(0.0, 12, 3, counts, 0.0, 2.0);
  const DensityOfStates dos = wham_solve({h});
  REQUIRE(dos.bins() == 8);
  CHECK(dos.n_cols == 12);
  CHECK(dos.subset_size == 3);
  const double total = sum_exp(dos.log_counts);
  CHECK(total == doctest::Approx(220.0).epsilon(1e-6));  // C(12,3)
  // With no reweighting the reconstructed density is the histogram itself.
  for (int b = 0; b < 8; ++b) {
    if (counts[b] == 0) {
      CHECK(!std::isfinite(dos.log_counts[b]));
      continue;
    }
    const double w = std::exp(dos.log_counts[b]);
    CHECK(w / total ==
          doctest::Approx(static_cast<double>(counts[b]) / 1600.0)
              .epsilon(1e-9));
  }
  CHECK(dos.support[3] == 1);
  CHECK(dos.support[5] == 0);  // only 50 raw samples
  CHECK(dos.support[0] == 0);  // empty
  CHECK(dos.samples[2] == 400);
}

TEST_CASE("duplicated histograms do not change the reconstruction") {
  std::vector<long long> counts(10, 0);
  for (int b = 2; b < 8; ++b) counts[b] = 100 * (b + 1);
  const EnergyHistogram h = make_hist(0.8, 12, 3, counts, 0.0, 2.5);
  const DensityOfStates one = wham_solve({h});
  const DensityOfStates two = wham_solve({h, h});
  REQUIRE(one.bins() == two.bins());
  for (int b = 0; b < one.bins(); ++b) {
    if (!std::isfinite(one.log_counts[b])) {
      CHECK(!std::isfinite(two.log_counts[b]));
      continue;
    }
    CHECK(one.log_counts[b] ==
          doctest::Approx(two.log_counts[b]).epsilon(1e-8));
  }
}

TEST_CASE("disjoint rungs raise a ladder gap error") {
  std::vector<long long> lo_counts(10, 0), hi_counts(10, 0);
  lo_counts[1] = 500;
  lo_counts[2] = 500;
  hi_counts[7] = 500;
  hi_counts[8] = 500;
  const EnergyHistogram a = make_hist(0.5, 12, 3, lo_counts, 0.0, 2.5);
  const EnergyHistogram b = make_hist(1.5, 12, 3, hi_counts, 0.0, 2.5);
  CHECK_THROWS_AS(wham_solve({a, b}), LadderGapError);
}

TEST_CASE("inconsistent histograms are rejected") {
  const EnergyHistogram a =
      make_hist(0.5, 12, 3, std::vector<long long>(10, 5), 0.0, 2.5);
  EnergyHistogram b = a;
  b.mu = 1.0;
  b.n_cols = 14;
  CHECK_THROWS_AS(wham_solve({a, b}), std::invalid_argument);
  b = a;
  b.mu = 1.0;
  b.lambda_hi = 3.0;
  CHECK_THROWS_AS(wham_solve({a, b}), std::invalid_argument);
  CHECK_THROWS_AS(wham_solve({}), std::invalid_argument);
}

TEST_CASE("non-convergence is reported") {
  std::vector<long long> c1(6, 0), c2(6, 0);
  c1[0] = 900;
  c1[1] = 90;
  c1[2] = 10;
  c2[1] = 10;
  c2[2] = 200;
  c2[3] = 790;
  const EnergyHistogram a = make_hist(0.3, 12, 3, c1, 0.0, 3.0);
  const EnergyHistogram b = make_hist(2.0, 12, 3, c2, 0.0, 3.0);
  WhamOptions opts;
  CHECK_NOTHROW(wham_solve({a, b}, opts));
  opts.max_iter = 1;
  CHECK_THROWS_AS(wham_solve({a, b}, opts), Error);
}

TEST_CASE("exact enumeration of a tiny ensemble") {
  const MeasurementMatrix mat = small_matrix(4, 0.75, 11);
  BinGrid grid;
  grid.lambda_lo = 0.0;
  grid.lambda_hi = 4.0;
  grid.bins = 100;
  const EnumerationResult res =
      enumerate_exact(mat, 2, Branch::minimum, grid);
  long long total = 0;
  for (long long v : res.dos.samples) total += v;
  CHECK(total == 6);  // C(4,2)
  CHECK(sum_exp(res.dos.log_counts) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(res.dos.log_normalization == doctest::Approx(std::log(6.0)));

  // Check the histogram against a brute-force pass over all subsets.
  const auto subsets = oracles::all_subsets(4, 2);
  std::vector<long long> want(grid.bins, 0);
  double lam_min = 1e300, lam_max = -1e300;
  for (const auto& idx : subsets) {
    SubsetSelection sel{idx};
    const auto ev = extreme_eigenvalues(gram(mat, sel));
    lam_min = std::min(lam_min, ev.first);
    lam_max = std::max(lam_max, ev.second);
    const double w = (grid.lambda_hi - grid.lambda_lo) / grid.bins;
    int b = static_cast<int>((ev.first - grid.lambda_lo) / w);
    b = std::max(0, std::min(grid.bins - 1, b));
    ++want[b];
  }
  for (int b = 0; b < grid.bins; ++b) CHECK(res.dos.samples[b] == want[b]);
  CHECK(res.lambda_min_star == doctest::Approx(lam_min).epsilon(1e-12));
  CHECK(res.lambda_max_star == doctest::Approx(lam_max).epsilon(1e-12));
}

TEST_CASE("orthonormal columns concentrate on a single bin") {
  MeasurementMatrix mat;
  mat.spec.n_cols = 4;
  mat.spec.alpha = 1.0;
  mat.spec.seed = 0;
  mat.entries = Mat::Identity(4, 4);
  BinGrid grid;
  grid.bins = 200;
  const EnumerationResult res =
      enumerate_exact(mat, 2, Branch::minimum, grid);
  CHECK(res.lambda_min_star == doctest::Approx(1.0));
  CHECK(res.lambda_max_star == doctest::Approx(1.0));
  int occupied = 0;
  const double half_bin = res.dos.bins() > 1
                              ? 0.5 * (res.dos.bin_centers[1] - res.dos.bin_centers[0])
                              : 0.01;
  for (int b = 0; b < res.dos.bins(); ++b)
    if (res.dos.samples[b] > 0) {
      ++occupied;
      CHECK(res.dos.samples[b] == 6);
      // 1.0 may sit exactly on a bin edge; allow half a bin plus an ulp.
      CHECK(std::abs(res.dos.bin_centers[b] - 1.0) <= half_bin + 1e-9);
      CHECK(res.dos.support[b] == 1);  // exact counts are their own support
    }
  CHECK(occupied == 1);
}

TEST_CASE("enumeration is deterministic and guarded") {
  const MeasurementMatrix mat = small_matrix(12, 0.5, 77);
  BinGrid grid;
  const EnumerationResult a = enumerate_exact(mat, 3, Branch::minimum, grid);
  long long total = 0;
  for (long long v : a.dos.samples) total += v;
  CHECK(total == 220);  // C(12,3)

#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const EnumerationResult b = enumerate_exact(mat, 3, Branch::minimum, grid);
  omp_set_num_threads(saved);
  CHECK(a.dos.samples == b.dos.samples);
  CHECK(a.dos.log_counts == b.dos.log_counts);
  CHECK(a.lambda_min_star == b.lambda_min_star);
  CHECK(a.lambda_max_star == b.lambda_max_star);
#endif

  // C(40, 20) is far beyond the enumeration guard.
  const MeasurementMatrix big = small_matrix(40, 0.5, 1);
  CHECK_THROWS_AS(enumerate_exact(big, 20, Branch::minimum, grid), Error);
}

TEST_CASE("free entropy from an exact density") {
  const MeasurementMatrix mat = small_matrix(12, 0.5, 77);
  BinGrid grid;
  const DensityOfStates dos =
      enumerate_exact(mat, 3, Branch::minimum, grid).dos;

  bool edge = true;
  const double phi0 = free_entropy_from_dos(dos, 0.0, &edge);
  CHECK(phi0 == doctest::Approx(std::log(220.0) / 12.0).epsilon(1e-12));
  CHECK_FALSE(edge);  // mu=0 is dominated by the bulk, not an edge bin

  // A strong bias is dominated by the extreme supported bin.
  free_entropy_from_dos(dos, 200.0, &edge);
  CHECK(edge);

  // Single-bin density: phi(mu) = (log W - N mu lambda/2) / N exactly.
  DensityOfStates single;
  single.branch = Branch::minimum;
  single.n_cols = 4;
  single.subset_size = 2;
  single.bin_centers = {1.01};
  single.log_counts = {std::log(6.0)};
  single.samples = {6};
  single.support = {1};
  single.log_normalization = std::log(6.0);
  const double mu = 2.0;
  CHECK(free_entropy_from_dos(single, mu) ==
        doctest::Approx((std::log(6.0) - 4.0 * mu * 1.01 / 2.0) / 4.0)
            .epsilon(1e-12));
}

TEST_CASE("legendre route through a sharp synthetic density") {
  // At large N the mu-tilted sums are saddle-dominated, so the Legendre
  // curve must land back on sigma(lambda) itself.
  const long n = 4000;
  DensityOfStates dos;
  dos.branch = Branch::minimum;
  dos.n_cols = n;
  dos.subset_size = 100;
  const int bins = 200;
  for (int b = 0; b < bins; ++b) {
    const double lam = (b + 0.5) * (2.0 / bins);
    const double sigma = 0.4 - 2.0 * (lam - 1.0) * (lam - 1.0);
    dos.bin_centers.push_back(lam);
    dos.log_counts.push_back(n * sigma);
    dos.samples.push_back(1000);
    dos.support.push_back(1);
  }
  double lse = -1e300;
  for (double v : dos.log_counts) lse = std::max(lse, v);
  double acc = 0.0;
  for (double v : dos.log_counts) acc += std::exp(v - lse);
  dos.log_normalization = lse + std::log(acc);

  std::vector<double> mu_grid;
  for (double mu = -2.0; mu <= 2.0; mu += 0.5) mu_grid.push_back(mu);
  const DosEntropyCurves curves = entropy_curve_from_dos(dos, mu_grid);

  REQUIRE(curves.lambda.size() == static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b)
    CHECK(curves.sigma[b] ==
          doctest::Approx(dos.log_counts[b] / n).epsilon(1e-12));

  REQUIRE(curves.leg_mu.size() == mu_grid.size());
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    const double mu = curves.leg_mu[i];
    const double lam_expected = 1.0 - mu / 8.0;  // maximizer of sigma - mu l/2
    CHECK(std::abs(curves.leg_lambda[i] - lam_expected) < 0.02);
    const double sig_expected =
        0.4 - 2.0 * (lam_expected - 1.0) * (lam_expected - 1.0);
    CHECK(std::abs(curves.leg_sigma[i] - sig_expected) < 2e-3);
  }
}

TEST_CASE("multihistogram reconstruction matches exhaustive enumeration") {
  const MeasurementMatrix mat = small_matrix(12, 0.5, 2026);
  const int s = 3;
  const Ladder ladder = geometric_ladder(0.2, 2.0, 4, Branch::minimum);
  EmcOptions opts;
  opts.sweeps = 50000;
  opts.seed = 404;
  const EmcResult emc = run_emc(mat, s, ladder, opts);

  const DensityOfStates dos = wham_solve(emc.histograms);
  BinGrid grid;
  grid.lambda_lo = dos.bin_centers.front() - 0.01;  // same 0.02-wide grid
  grid.lambda_hi = dos.bin_centers.back() + 0.01;
  grid.bins = dos.bins();
  const DensityOfStates exact =
      enumerate_exact(mat, s, Branch::minimum, grid).dos;

  // Identical grids by construction.
  REQUIRE(exact.bins() == dos.bins());
  CHECK(exact.bin_centers.front() ==
        doctest::Approx(dos.bin_centers.front()).epsilon(1e-12));

  bool edge = false;
  CHECK(free_entropy_from_dos(dos, 0.0, &edge) ==
        doctest::Approx(std::log(220.0) / 12.0).epsilon(1e-9));

  int compared = 0;
  for (int b = 0; b < dos.bins(); ++b) {
    if (!dos.support[b]) continue;
    REQUIRE(std::isfinite(exact.log_counts[b]));
    const double sig_emc = dos.log_counts[b] / 12.0;
    const double sig_exact = exact.log_counts[b] / 12.0;
    CHECK(std::abs(sig_emc - sig_exact) < 0.1);
    ++compared;
  }
  CHECK(compared >= 5);  // the ladder must actually cover a band of bins
}

TEST_CASE("bootstrap errors are finite where sampled and NaN elsewhere") {
  const MeasurementMatrix mat = small_matrix(10, 0.5, 31);
  const Ladder ladder = geometric_ladder(0.3, 1.5, 3, Branch::minimum);
  EmcOptions opts;
  opts.sweeps = 20000;
  opts.seed = 9;
  opts.blocks = 10;
  const EmcResult emc = run_emc(mat, 3, ladder, opts);
  const DensityOfStates dos = wham_solve(emc.histograms);

  const auto se = bootstrap_sigma_stderr(emc.histograms, WhamOptions{}, 16, 5);
  const auto se2 = bootstrap_sigma_stderr(emc.histograms, WhamOptions{}, 16, 5);
  REQUIRE(se.size() == static_cast<std::size_t>(dos.bins()));
  int finite = 0;
  for (int b = 0; b < dos.bins(); ++b) {
    if (dos.samples[b] == 0) {
      CHECK(std::isnan(se[b]));
    }
    if (dos.support[b] && std::isfinite(se[b])) {
      CHECK(se[b] >= 0.0);
      CHECK(se[b] < 1.0);  // sane scale for a well-sampled bin
      ++finite;
    }
    // Deterministic for a fixed seed.
    if (std::isfinite(se[b]) || std::isfinite(se2[b]))
      CHECK(se[b] == se2[b]);
  }
  CHECK(finite >= 5);
  CHECK_THROWS_AS(bootstrap_sigma_stderr(emc.histograms, WhamOptions{}, 1, 5),
                  std::invalid_argument);
}
