#include "ric/emc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ric/combinatorics.hpp"

namespace ric {

void Ladder::validate() const {
  if (mus.empty()) throw std::invalid_argument("Ladder: needs at least one rung");
  if (exchange_interval < 1)
    throw std::invalid_argument("Ladder: exchange_interval must be >= 1");
  const double s = mus.front() > 0.0 ? 1.0 : -1.0;
  double prev_abs = 0.0;
  for (double mu : mus) {
    if (mu == 0.0) throw std::invalid_argument("Ladder: mu must be nonzero");
    if (mu * s < 0.0) throw std::invalid_argument("Ladder: mus must share a sign");
    const double a = std::abs(mu);
    if (a <= prev_abs)
      throw std::invalid_argument("Ladder: |mu| must be strictly increasing");
    prev_abs = a;
  }
}

Ladder geometric_ladder(double mu_lo_abs, double mu_hi_abs, int rungs,
                        Branch branch, int exchange_interval) {
  if (rungs < 1 || !(mu_lo_abs > 0.0) || !(mu_hi_abs >= mu_lo_abs))
    throw std::invalid_argument("geometric_ladder: bad arguments");
  Ladder l;
  l.exchange_interval = exchange_interval;
  l.mus.resize(rungs);
  const double s = mu_sign(branch);
  if (rungs == 1) {
    l.mus[0] = s * mu_lo_abs;
  } else {
    const double step = std::log(mu_hi_abs / mu_lo_abs) / (rungs - 1);
    for (int i = 0; i < rungs; ++i) l.mus[i] = s * mu_lo_abs * std::exp(step * i);
  }
  l.validate();
  return l;
}

long long EnergyHistogram::total_samples() const {
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

double subset_energy(const MeasurementMatrix& mat, const SubsetSelection& sel,
                     Branch branch) {
  return 0.5 * extreme_eigenvalue(gram(mat, sel), branch);
}

SubsetSelection propose_swap(const SubsetSelection& sel, long n_cols,
                             SplitMix64& rng) {
  sel.validate(n_cols);
  const int s = sel.size();
  if (s >= n_cols)
    throw std::invalid_argument("propose_swap: no columns left to swap in");
  std::vector<char> in(n_cols, 0);
  for (int idx : sel.indices) in[idx] = 1;
  const int drop_pos = static_cast<int>(rng.below(s));
  const std::uint64_t pick = rng.below(n_cols - s);
  int out_col = -1;
  std::uint64_t seen = 0;
  for (long c = 0; c < n_cols; ++c) {
    if (!in[c]) {
      if (seen == pick) {
        out_col = static_cast<int>(c);
        break;
      }
      ++seen;
    }
  }
  SubsetSelection next = sel;
  next.indices[drop_pos] = out_col;
  std::sort(next.indices.begin(), next.indices.end());
  return next;
}

bool metropolis_accept(double mu, long n, double delta, SplitMix64& rng) {
  const double x = mu * static_cast<double>(n) * delta;
  if (x >= 0.0) return true;
  return rng.uniform01() < std::exp(x);
}

bool exchange_accept(double mu_i, double mu_j, long n, double energy_i,
                     double energy_j, SplitMix64& rng) {
  const double x = static_cast<double>(n) * (mu_i - mu_j) * (energy_i - energy_j);
  if (x >= 0.0) return true;
  return rng.uniform01() < std::exp(x);
}

namespace {

// Mutable per-rung sampler state. The selection is kept position-stable
// (unsorted) so Gram rows track columns across swaps.
struct WalkerState {
  std::vector<int> sel;    // size S, arbitrary order
  std::vector<int> comp;   // size N - S
  Mat gram;                // S x S, rows/cols follow sel order
  double energy = 0.0;     // Lambda = lambda/2
  Vec eigvec;              // warm start for the iterative path
  SplitMix64 rng{0};
  long long proposed = 0;
  long long accepted = 0;
  double lam_min = std::numeric_limits<double>::infinity();
  double lam_max = -std::numeric_limits<double>::infinity();
};

double extreme_of(const Mat& g, Branch branch, bool dense, Vec* warm,
                  Eigen::SelfAdjointEigenSolver<Mat>& es) {
  const long s = g.rows();
  if (s == 1) return std::max(g(0, 0), 0.0);
  if (dense) {
    es.compute(g, Eigen::EigenvaluesOnly);
    double v = branch == Branch::minimum ? es.eigenvalues()(0)
                                         : es.eigenvalues()(s - 1);
    if (branch == Branch::minimum && v < 0.0 && v > -1e-10 * std::max(1.0, std::abs(es.eigenvalues()(s - 1))))
      v = 0.0;
    return v;
  }
  return extreme_eigenvalue_power(g, branch, warm);
}

struct Grid {
  double lo = 0.0;
  double width = 0.0;
  int bins = 0;

  int bin_of(double lambda) const {
    return static_cast<int>(std::floor((lambda - lo) / width));
  }
};

}  // namespace

EmcResult run_emc(const MeasurementMatrix& mat, int subset_size,
                  const Ladder& ladder, const EmcOptions& opts) {
  ladder.validate();
  mat.spec.validate();
  const long n = mat.spec.n_cols;
  const int s = subset_size;
  if (s < 1 || s >= n)
    throw std::invalid_argument("run_emc: need 1 <= S <= N-1");
  if (opts.sweeps < 1) throw std::invalid_argument("run_emc: sweeps must be >= 1");
  long long burn_in = opts.burn_in > 0 ? opts.burn_in : opts.sweeps / 5;
  if (burn_in >= opts.sweeps)
    throw std::invalid_argument("run_emc: burn_in must be < sweeps");
  if (opts.bins < 1 || !(opts.lambda_hi > opts.lambda_lo))
    throw std::invalid_argument("run_emc: bad bin grid");
  const Branch branch = branch_for_mu(ladder.mus.front());
  const int k = ladder.rungs();
  const long long measured = opts.sweeps - burn_in;
  const int blocks = static_cast<int>(
      std::max<long long>(1, std::min<long long>(opts.blocks, measured)));
  const bool dense = s <= opts.dense_eig_limit;

  long long n_subsets = 0;
  if (opts.record_subsets) {
    n_subsets = static_cast<long long>(
        binomial_checked(n, s, opts.record_subsets_max));
  }

  // Per-rung walkers with streams derived from (seed, rung); exchange
  // decisions use a dedicated stream so thread count cannot reorder draws.
  std::vector<WalkerState> walkers(k);
  Eigen::SelfAdjointEigenSolver<Mat> es0;
  for (int r = 0; r < k; ++r) {
    WalkerState& w = walkers[r];
    w.rng = SplitMix64(derive_stream(opts.seed, static_cast<std::uint64_t>(r)));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int t = 0; t < s; ++t) {
      const long j = t + static_cast<long>(w.rng.below(n - t));
      std::swap(perm[t], perm[j]);
    }
    w.sel.assign(perm.begin(), perm.begin() + s);
    w.comp.assign(perm.begin() + s, perm.end());
    w.gram.resize(s, s);
    for (int a = 0; a < s; ++a)
      for (int b = a; b < s; ++b) {
        const double v = mat.entries.col(w.sel[a]).dot(mat.entries.col(w.sel[b]));
        w.gram(a, b) = v;
        w.gram(b, a) = v;
      }
    w.energy = 0.5 * extreme_of(w.gram, branch, dense, &w.eigvec, es0);
  }
  SplitMix64 exchange_rng(derive_stream(opts.seed, (1ULL << 32) + 17));

  Grid grid{opts.lambda_lo, (opts.lambda_hi - opts.lambda_lo) / opts.bins,
            opts.bins};
  std::vector<std::vector<long long>> counts(k, std::vector<long long>(grid.bins, 0));
  std::vector<std::vector<std::vector<long long>>> block_counts(
      k, std::vector<std::vector<long long>>(blocks,
                                             std::vector<long long>(grid.bins, 0)));
  std::vector<std::vector<long long>> subset_counts;
  if (opts.record_subsets)
    subset_counts.assign(k, std::vector<long long>(n_subsets, 0));

  // Deferred out-of-grid samples: (rung, block, lambda), merged after each
  // parallel chunk once the grid has been extended to cover them.
  std::vector<std::vector<std::pair<int, double>>> overflow(k);
  bool extended = false;

  std::vector<long long> exch_attempt(std::max(0, k - 1), 0);
  std::vector<long long> exch_accept(std::max(0, k - 1), 0);
  double lam_lo_seen = std::numeric_limits<double>::infinity();
  double lam_hi_seen = -std::numeric_limits<double>::infinity();

  const long long xint = ladder.exchange_interval;
  long long round_index = 0;

  for (long long chunk_start = 0; chunk_start < opts.sweeps; chunk_start += xint) {
    const long long chunk_len = std::min<long long>(xint, opts.sweeps - chunk_start);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int r = 0; r < k; ++r) {
      WalkerState& w = walkers[r];
      const double mu = ladder.mus[r];
      Mat cand(s, s);
      Eigen::SelfAdjointEigenSolver<Mat> es;
      std::vector<int> rank_buf(s);
      for (long long t = 0; t < chunk_len; ++t) {
        const long long sweep = chunk_start + t;
        for (long att = 0; att < n; ++att) {
          const int i = static_cast<int>(w.rng.below(s));
          const int j = static_cast<int>(w.rng.below(n - s));
          const int out_col = w.comp[j];
          cand = w.gram;
          for (int a = 0; a < s; ++a) {
            if (a == i) continue;
            const double v = mat.entries.col(out_col).dot(mat.entries.col(w.sel[a]));
            cand(i, a) = v;
            cand(a, i) = v;
          }
          cand(i, i) = mat.entries.col(out_col).squaredNorm();
          Vec warm = w.eigvec;
          const double lam_cand = extreme_of(cand, branch, dense, &warm, es);
          const double e_cand = 0.5 * lam_cand;
          ++w.proposed;
          if (metropolis_accept(mu, n, w.energy - e_cand, w.rng)) {
            ++w.accepted;
            std::swap(w.comp[j], w.sel[i]);
            w.gram.swap(cand);
            w.energy = e_cand;
            w.eigvec = warm;
          }
        }
        if (sweep >= burn_in) {
          const double lam = 2.0 * w.energy;
          w.lam_min = std::min(w.lam_min, lam);
          w.lam_max = std::max(w.lam_max, lam);
          const long long ms = sweep - burn_in;
          const int blk = static_cast<int>(ms * blocks / measured);
          const int b = grid.bin_of(lam);
          if (b >= 0 && b < grid.bins) {
            ++counts[r][b];
            ++block_counts[r][blk][b];
          } else {
            overflow[r].emplace_back(blk, lam);
          }
          if (opts.record_subsets) {
            rank_buf = w.sel;
            std::sort(rank_buf.begin(), rank_buf.end());
            ++subset_counts[r][subset_rank(rank_buf)];
          }
        }
      }
    }

    // Fold deferred samples in, growing the grid by whole bin widths.
    bool any_overflow = false;
    for (int r = 0; r < k; ++r)
      if (!overflow[r].empty()) any_overflow = true;
    if (any_overflow) {
      extended = true;
      double need_lo = grid.lo, need_hi = grid.lo + grid.bins * grid.width;
      for (int r = 0; r < k; ++r)
        for (const auto& [blk, lam] : overflow[r]) {
          need_lo = std::min(need_lo, lam);
          need_hi = std::max(need_hi, lam);
        }
      const int grow_lo =
          need_lo < grid.lo
              ? static_cast<int>(std::floor((grid.lo - need_lo) / grid.width)) + 1
              : 0;
      const double hi_edge = grid.lo + grid.bins * grid.width;
      const int grow_hi =
          need_hi >= hi_edge
              ? static_cast<int>(std::floor((need_hi - hi_edge) / grid.width)) + 1
              : 0;
      grid.lo -= grow_lo * grid.width;
      grid.bins += grow_lo + grow_hi;
      for (int r = 0; r < k; ++r) {
        counts[r].insert(counts[r].begin(), grow_lo, 0);
        counts[r].resize(grid.bins, 0);
        for (auto& blkrow : block_counts[r]) {
          blkrow.insert(blkrow.begin(), grow_lo, 0);
          blkrow.resize(grid.bins, 0);
        }
        for (const auto& [blk, lam] : overflow[r]) {
          const int b = std::clamp(grid.bin_of(lam), 0, grid.bins - 1);
          ++counts[r][b];
          ++block_counts[r][blk][b];
        }
        overflow[r].clear();
      }
    }

    // Exchange round: adjacent pairs, parity alternating between rounds;
    // configurations (not biases) swap.
    const long long done = chunk_start + chunk_len;
    if (k > 1 && chunk_len == xint && done < opts.sweeps) {
      const int parity = static_cast<int>(round_index % 2);
      for (int p = parity; p + 1 < k; p += 2) {
        ++exch_attempt[p];
        if (exchange_accept(ladder.mus[p], ladder.mus[p + 1], n,
                            walkers[p].energy, walkers[p + 1].energy,
                            exchange_rng)) {
          ++exch_accept[p];
          std::swap(walkers[p].sel, walkers[p + 1].sel);
          std::swap(walkers[p].comp, walkers[p + 1].comp);
          walkers[p].gram.swap(walkers[p + 1].gram);
          std::swap(walkers[p].energy, walkers[p + 1].energy);
          std::swap(walkers[p].eigvec, walkers[p + 1].eigvec);
        }
      }
      ++round_index;
    }
  }

  EmcResult out;
  out.measured_sweeps = measured;
  out.grid_extended_warning = extended;
  out.histograms.resize(k);
  out.move_acceptance.resize(k);
  for (int r = 0; r < k; ++r) {
    EnergyHistogram& h = out.histograms[r];
    h.rung = r;
    h.mu = ladder.mus[r];
    h.branch = branch;
    h.n_cols = n;
    h.subset_size = s;
    h.lambda_lo = grid.lo;
    h.lambda_hi = grid.lo + grid.bins * grid.width;
    h.counts = counts[r];
    h.block_counts = block_counts[r];
    out.move_acceptance[r] =
        walkers[r].proposed > 0
            ? static_cast<double>(walkers[r].accepted) / walkers[r].proposed
            : 0.0;
    lam_lo_seen = std::min(lam_lo_seen, walkers[r].lam_min);
    lam_hi_seen = std::max(lam_hi_seen, walkers[r].lam_max);
  }
  out.exchange_acceptance.resize(std::max(0, k - 1));
  out.low_exchange_warning = false;
  for (int p = 0; p + 1 < k; ++p) {
    out.exchange_acceptance[p] =
        exch_attempt[p] > 0
            ? static_cast<double>(exch_accept[p]) / exch_attempt[p]
            : 0.0;
    if (exch_attempt[p] > 0 &&
        out.exchange_acceptance[p] < opts.low_exchange_threshold)
      out.low_exchange_warning = true;
  }
  out.lambda_lowest_seen = lam_lo_seen;
  out.lambda_highest_seen = lam_hi_seen;
  if (opts.record_subsets) out.subset_counts = std::move(subset_counts);
  out.final_walkers.resize(k);
  for (int r = 0; r < k; ++r) {
    Walker& w = out.final_walkers[r];
    w.selection.indices = walkers[r].sel;
    std::sort(w.selection.indices.begin(), w.selection.indices.end());
    w.mu = ladder.mus[r];
    w.branch = branch;
    w.energy = walkers[r].energy;
    w.rng_stream = derive_stream(opts.seed, static_cast<std::uint64_t>(r));
  }
  return out;
}

}  // namespace ric
