#pragma once

#include <cstdint>
#include <vector>

#include "ric/ensemble.hpp"
#include "ric/rng.hpp"

namespace ric {

// Rung biases for exchange Monte Carlo: strictly monotone in |mu|, all the
// same sign (the sign selects the branch). Configurations, not biases, are
// swapped on accepted exchanges.
struct Ladder {
  std::vector<double> mus;
  int exchange_interval = 1;  // sweeps between exchange rounds

  int rungs() const { return static_cast<int>(mus.size()); }
  void validate() const;  // throws std::invalid_argument
};

Ladder geometric_ladder(double mu_lo_abs, double mu_hi_abs, int rungs,
                        Branch branch, int exchange_interval = 1);

// One replica: current subset, its bias, and the cached energy
// Lambda = extreme_eigenvalue(gram)/2 (recomputable audit invariant).
struct Walker {
  SubsetSelection selection;
  double mu = 0.0;
  Branch branch = Branch::minimum;
  double energy = 0.0;          // Lambda = lambda/2
  std::uint64_t rng_stream = 0;
};

// Histogram of visited eigenvalues (lambda = 2*Lambda) for one rung.
// Uniform bin grid; block_counts partition the measured sweeps into
// equal-size blocks for bootstrap error bars.
struct EnergyHistogram {
  int rung = 0;
  double mu = 0.0;
  Branch branch = Branch::minimum;
  long n_cols = 0;      // N
  int subset_size = 0;  // S
  double lambda_lo = 0.0;
  double lambda_hi = 4.0;
  std::vector<long long> counts;
  std::vector<std::vector<long long>> block_counts;  // [block][bin]

  int bins() const { return static_cast<int>(counts.size()); }
  double bin_width() const { return (lambda_hi - lambda_lo) / bins(); }
  double center(int b) const {
    return lambda_lo + (b + 0.5) * bin_width();
  }
  long long total_samples() const;
};

// Energy of a subset: Lambda = lambda_min/2 (minimum branch) or
// lambda_max/2 (maximum branch) of the subset Gram.
double subset_energy(const MeasurementMatrix& mat, const SubsetSelection& sel,
                     Branch branch);

// Uniform single-swap proposal: replace one selected column with one
// unselected column (symmetric; Hamming distance 2 in indicator space).
SubsetSelection propose_swap(const SubsetSelection& sel, long n_cols,
                             SplitMix64& rng);

// Metropolis rule for weight exp(-N mu Lambda): accept with probability
// min{1, exp(mu * N * delta)}, delta = Lambda(current) - Lambda(proposed).
bool metropolis_accept(double mu, long n, double delta, SplitMix64& rng);

// Exchange rule for adjacent rungs: accept with probability
// min{1, exp(N (mu_i - mu_j) (Lambda_i - Lambda_j))}.
bool exchange_accept(double mu_i, double mu_j, long n, double energy_i,
                     double energy_j, SplitMix64& rng);

struct EmcOptions {
  long long sweeps = 0;        // one sweep = N single-swap attempts per walker
  long long burn_in = 0;       // 0 -> defaults to 20% of sweeps
  int bins = 200;
  double lambda_lo = 0.0;
  double lambda_hi = 4.0;
  std::uint64_t seed = 0;
  int blocks = 20;             // measurement blocks for bootstrap errors
  bool record_subsets = false; // per-rung visit counts by colex rank
  double record_subsets_max = 1e6;  // guard on C(N, S) when recording
  int dense_eig_limit = 128;   // above this S use warm-started power iteration
  double low_exchange_threshold = 0.1;
};

struct EmcResult {
  std::vector<EnergyHistogram> histograms;   // one per rung
  std::vector<double> move_acceptance;       // per rung
  std::vector<double> exchange_acceptance;   // per adjacent pair
  bool low_exchange_warning = false;
  bool grid_extended_warning = false;
  double lambda_lowest_seen = 0.0;
  double lambda_highest_seen = 0.0;
  std::vector<std::vector<long long>> subset_counts;  // optional, [rung][rank]
  std::vector<Walker> final_walkers;
  long long measured_sweeps = 0;
};

// Exchange Monte Carlo over column subsets. Per-rung RNG streams are derived
// from (seed, rung), exchange decisions from a dedicated stream, so results
// are reproducible and independent of thread count. Sweeps between exchange
// rounds run in parallel over rungs. Energies are recorded once per sweep
// after burn-in. Bins are extended (grid growing by whole bin widths) if a
// sampled eigenvalue falls outside; the extension is flagged.
EmcResult run_emc(const MeasurementMatrix& mat, int subset_size,
                  const Ladder& ladder, const EmcOptions& opts);

}  // namespace ric
