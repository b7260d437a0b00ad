#pragma once

#include <cstdint>
#include <vector>

#include "ric/emc.hpp"
#include "ric/ensemble.hpp"

namespace ric {

// Absolute density of states over the eigenvalue grid: log_counts[b] is the
// log of the reconstructed number of S-subsets whose branch eigenvalue falls
// in bin b, normalized so that sum_b exp(log_counts[b]) = C(N, S). Empty
// bins carry -inf. support[b] marks bins with at least min_support_samples
// raw samples. sigma(lambda_b) = log_counts[b] / N.
struct DensityOfStates {
  Branch branch = Branch::minimum;
  long n_cols = 0;      // N
  int subset_size = 0;  // S
  std::vector<double> bin_centers;
  std::vector<double> log_counts;
  std::vector<long long> samples;  // raw samples per bin, summed over rungs
  std::vector<char> support;
  double log_normalization = 0.0;  // log C(N, S)

  int bins() const { return static_cast<int>(bin_centers.size()); }
};

struct WhamOptions {
  double tol = 1e-10;        // on max |delta f_i| per iteration
  int max_iter = 100000;
  long long min_support_samples = 100;
};

// Multihistogram (Ferrenberg-Swendsen) reconstruction in log space:
//   log W_b = log(sum_i H_i(b)) - LSE_i[ log n_i - N mu_i lambda_b/2 - N f_i ]
//   N f_i   = LSE_b[ log W_b - N mu_i lambda_b/2 ]
// iterated to a fixed point (f gauge-fixed to f_0 = 0 each round), then
// shifted so the total equals C(N, S). Throws LadderGapError when adjacent
// rungs (by |mu|) share no occupied bins.
DensityOfStates wham_solve(const std::vector<EnergyHistogram>& histograms,
                           const WhamOptions& opts = {});

// phi(mu) = (1/N) log sum_b W_b exp(-N mu lambda_b / 2). Sets *edge_warning
// when the dominating bin is the first or last supported one (the estimate
// is then controlled by unsampled territory).
double free_entropy_from_dos(const DensityOfStates& dos, double mu,
                             bool* edge_warning = nullptr);

struct DosEntropyCurves {
  // Direct route: sigma_b = log W_b / N per bin.
  std::vector<double> lambda;
  std::vector<double> sigma;
  std::vector<long long> samples;
  // Legendre route over a mu grid: lambda(mu) = <lambda>_mu,
  // sigma(mu) = phi(mu) + mu lambda(mu)/2.
  std::vector<double> leg_mu;
  std::vector<double> leg_lambda;
  std::vector<double> leg_sigma;
};

DosEntropyCurves entropy_curve_from_dos(const DensityOfStates& dos,
                                        const std::vector<double>& mu_grid = {});

struct BinGrid {
  double lambda_lo = 0.0;
  double lambda_hi = 4.0;
  int bins = 200;
};

struct EnumerationResult {
  DensityOfStates dos;
  double lambda_min_star = 0.0;  // min over subsets of lambda_min
  double lambda_max_star = 0.0;  // max over subsets of lambda_max
};

// Exhaustive enumeration of all C(N, S) subsets (guarded at 1e7);
// parallelized over contiguous colex-rank ranges with a deterministic merge.
EnumerationResult enumerate_exact(const MeasurementMatrix& mat,
                                  int subset_size, Branch branch,
                                  const BinGrid& grid);

// Block-bootstrap standard errors of sigma_b: resample measurement blocks
// (jointly across rungs), re-run WHAM, return the per-bin standard deviation
// of sigma. Bins empty in a resample are skipped for that resample; bins
// never populated return NaN.
std::vector<double> bootstrap_sigma_stderr(
    const std::vector<EnergyHistogram>& histograms, const WhamOptions& opts,
    int n_boot, std::uint64_t seed);

}  // namespace ric
