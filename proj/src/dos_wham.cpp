#include "ric/dos_wham.hpp"

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
#include "ric/errors.hpp"

namespace ric {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const std::vector<double>& terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (!std::isfinite(m)) return kNegInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

void check_consistent(const std::vector<EnergyHistogram>& hs) {
  if (hs.empty()) throw std::invalid_argument("wham: no histograms");
  const EnergyHistogram& h0 = hs.front();
  for (const EnergyHistogram& h : hs) {
    if (h.bins() != h0.bins() || h.lambda_lo != h0.lambda_lo ||
        h.lambda_hi != h0.lambda_hi || h.n_cols != h0.n_cols ||
        h.subset_size != h0.subset_size || h.branch != h0.branch)
      throw std::invalid_argument("wham: histograms disagree on grid/ensemble");
  }
}

}  // namespace

DensityOfStates wham_solve(const std::vector<EnergyHistogram>& histograms,
                           const WhamOptions& opts) {
  check_consistent(histograms);
  const int k = static_cast<int>(histograms.size());
  const int bins = histograms.front().bins();
  const long n = histograms.front().n_cols;
  const int s = histograms.front().subset_size;
  const double nd = static_cast<double>(n);
  const double width = histograms.front().bin_width();
  (void)width;

  std::vector<double> centers(bins);
  for (int b = 0; b < bins; ++b) centers[b] = histograms.front().center(b);

  std::vector<long long> total(bins, 0);
  std::vector<double> log_n(k, kNegInf);
  for (int i = 0; i < k; ++i) {
    long long ni = 0;
    for (int b = 0; b < bins; ++b) {
      total[b] += histograms[i].counts[b];
      ni += histograms[i].counts[b];
    }
    if (ni > 0) log_n[i] = std::log(static_cast<double>(ni));
  }

  // Adjacent rungs (ordered by |mu|) must visit at least one common bin,
  // otherwise the relative normalizations f_i are undetermined.
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(histograms[a].mu) < std::abs(histograms[b].mu);
  });
  for (int t = 0; t + 1 < k; ++t) {
    const EnergyHistogram& a = histograms[order[t]];
    const EnergyHistogram& b = histograms[order[t + 1]];
    bool shared = false;
    for (int u = 0; u < bins && !shared; ++u)
      shared = a.counts[u] > 0 && b.counts[u] > 0;
    if (!shared)
      throw LadderGapError("wham: rungs mu=" + std::to_string(a.mu) +
                           " and mu=" + std::to_string(b.mu) +
                           " share no occupied bins; densify the ladder");
  }

  std::vector<double> f(k, 0.0), f_new(k, 0.0);
  std::vector<double> log_w(bins, kNegInf);
  std::vector<double> scratch_k(k), scratch_b;
  scratch_b.reserve(bins);

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    for (int b = 0; b < bins; ++b) {
      if (total[b] == 0) {
        log_w[b] = kNegInf;
        continue;
      }
      for (int i = 0; i < k; ++i)
        scratch_k[i] = log_n[i] - nd * histograms[i].mu * centers[b] / 2.0 -
                       nd * f[i];
      log_w[b] = std::log(static_cast<double>(total[b])) - logsumexp(scratch_k);
    }
    double delta = 0.0;
    for (int i = 0; i < k; ++i) {
      scratch_b.clear();
      for (int b = 0; b < bins; ++b)
        if (total[b] > 0)
          scratch_b.push_back(log_w[b] - nd * histograms[i].mu * centers[b] / 2.0);
      f_new[i] = logsumexp(scratch_b) / nd;
    }
    const double gauge = f_new[0];
    for (int i = 0; i < k; ++i) {
      f_new[i] -= gauge;
      delta = std::max(delta, std::abs(f_new[i] - f[i]));
    }
    f = f_new;
    if (delta < opts.tol) break;
  }
  if (iter >= opts.max_iter)
    throw Error("wham: self-consistency did not converge");

  // Final density with converged f, shifted to count-normalization C(N, S).
  for (int b = 0; b < bins; ++b) {
    if (total[b] == 0) {
      log_w[b] = kNegInf;
      continue;
    }
    for (int i = 0; i < k; ++i)
      scratch_k[i] = log_n[i] - nd * histograms[i].mu * centers[b] / 2.0 -
                     nd * f[i];
    log_w[b] = std::log(static_cast<double>(total[b])) - logsumexp(scratch_k);
  }
  const double log_c = log_binomial(n, s);
  const double shift = log_c - logsumexp(log_w);

  DensityOfStates dos;
  dos.branch = histograms.front().branch;
  dos.n_cols = n;
  dos.subset_size = s;
  dos.bin_centers = centers;
  dos.log_counts.resize(bins);
  dos.samples = total;
  dos.support.resize(bins);
  dos.log_normalization = log_c;
  for (int b = 0; b < bins; ++b) {
    dos.log_counts[b] = total[b] > 0 ? log_w[b] + shift : kNegInf;
    dos.support[b] = total[b] >= opts.min_support_samples ? 1 : 0;
  }
  return dos;
}

double free_entropy_from_dos(const DensityOfStates& dos, double mu,
                             bool* edge_warning) {
  const double nd = static_cast<double>(dos.n_cols);
  double best = kNegInf;
  int best_b = -1;
  std::vector<double> terms;
  terms.reserve(dos.bins());
  for (int b = 0; b < dos.bins(); ++b) {
    if (!std::isfinite(dos.log_counts[b])) continue;
    const double t = dos.log_counts[b] - nd * mu * dos.bin_centers[b] / 2.0;
    terms.push_back(t);
    if (t > best) {
      best = t;
      best_b = b;
    }
  }
  if (terms.empty()) throw Error("free_entropy_from_dos: empty density");
  if (edge_warning) {
    int first_sup = -1, last_sup = -1;
    for (int b = 0; b < dos.bins(); ++b)
      if (dos.support[b]) {
        if (first_sup < 0) first_sup = b;
        last_sup = b;
      }
    *edge_warning = first_sup < 0 || best_b <= first_sup || best_b >= last_sup;
  }
  return logsumexp(terms) / nd;
}

DosEntropyCurves entropy_curve_from_dos(const DensityOfStates& dos,
                                        const std::vector<double>& mu_grid) {
  DosEntropyCurves out;
  const double nd = static_cast<double>(dos.n_cols);
  for (int b = 0; b < dos.bins(); ++b) {
    if (!std::isfinite(dos.log_counts[b])) continue;
    out.lambda.push_back(dos.bin_centers[b]);
    out.sigma.push_back(dos.log_counts[b] / nd);
    out.samples.push_back(dos.samples[b]);
  }
  for (double mu : mu_grid) {
    const double phi = free_entropy_from_dos(dos, mu);
    // <lambda>_mu under weights W_b exp(-N mu lambda_b / 2), evaluated at the
    // common log scale to avoid overflow.
    double m = kNegInf;
    for (int b = 0; b < dos.bins(); ++b) {
      if (!std::isfinite(dos.log_counts[b])) continue;
      m = std::max(m, dos.log_counts[b] - nd * mu * dos.bin_centers[b] / 2.0);
    }
    double zsum = 0.0, lsum = 0.0;
    for (int b = 0; b < dos.bins(); ++b) {
      if (!std::isfinite(dos.log_counts[b])) continue;
      const double w =
          std::exp(dos.log_counts[b] - nd * mu * dos.bin_centers[b] / 2.0 - m);
      zsum += w;
      lsum += w * dos.bin_centers[b];
    }
    const double lam = lsum / zsum;
    out.leg_mu.push_back(mu);
    out.leg_lambda.push_back(lam);
    out.leg_sigma.push_back(phi + mu * lam / 2.0);
  }
  return out;
}

EnumerationResult enumerate_exact(const MeasurementMatrix& mat, int subset_size,
                                  Branch branch, const BinGrid& grid) {
  mat.spec.validate();
  const long n = mat.spec.n_cols;
  const int s = subset_size;
  if (s < 1 || s > n) throw std::invalid_argument("enumerate_exact: bad S");
  if (grid.bins < 1 || !(grid.lambda_hi > grid.lambda_lo))
    throw std::invalid_argument("enumerate_exact: bad grid");
  const double total_d = binomial_checked(n, s, 1e7);
  const std::uint64_t total = static_cast<std::uint64_t>(total_d + 0.5);

  double lo = grid.lambda_lo;
  double width = (grid.lambda_hi - grid.lambda_lo) / grid.bins;
  int bins = grid.bins;

  int n_chunks = 1;
#ifdef _OPENMP
  n_chunks = std::max(1, std::min<int>(omp_get_max_threads(),
                                       static_cast<int>(total / 64 + 1)));
#endif
  std::vector<std::vector<long long>> chunk_counts(
      n_chunks, std::vector<long long>(bins, 0));
  std::vector<std::vector<double>> chunk_overflow(n_chunks);
  std::vector<double> chunk_min(n_chunks,
                                std::numeric_limits<double>::infinity());
  std::vector<double> chunk_max(n_chunks,
                                -std::numeric_limits<double>::infinity());

#ifdef _OPENMP
#pragma omp parallel for schedule(static, 1)
#endif
  for (int c = 0; c < n_chunks; ++c) {
    const std::uint64_t beg = total * c / n_chunks;
    const std::uint64_t end = total * (c + 1) / n_chunks;
    if (beg >= end) continue;
    std::vector<int> idx = subset_unrank(beg, n, s);
    Mat g(s, s);
    Eigen::SelfAdjointEigenSolver<Mat> es;
    SubsetSelection sel;
    for (std::uint64_t r = beg; r < end; ++r) {
      sel.indices = idx;
      g = gram(mat, sel);
      es.compute(g, Eigen::EigenvaluesOnly);
      double lmin = es.eigenvalues()(0);
      const double lmax = es.eigenvalues()(s - 1);
      if (lmin < 0.0 && lmin > -1e-10 * std::max(1.0, lmax)) lmin = 0.0;
      chunk_min[c] = std::min(chunk_min[c], lmin);
      chunk_max[c] = std::max(chunk_max[c], lmax);
      const double lam = branch == Branch::minimum ? lmin : lmax;
      const int b = static_cast<int>(std::floor((lam - lo) / width));
      if (b >= 0 && b < bins)
        ++chunk_counts[c][b];
      else
        chunk_overflow[c].push_back(lam);
      // colex successor: bump the lowest index that has headroom, reset below
      if (r + 1 < end) {
        int j = 0;
        while (j + 1 < s && idx[j] + 1 == idx[j + 1]) ++j;
        ++idx[j];
        for (int t = 0; t < j; ++t) idx[t] = t;
      }
    }
  }

  // Deterministic merge; grow the grid by whole bins if anything fell outside.
  double need_lo = lo, need_hi = lo + bins * width;
  bool any_overflow = false;
  for (int c = 0; c < n_chunks; ++c)
    for (double lam : chunk_overflow[c]) {
      any_overflow = true;
      need_lo = std::min(need_lo, lam);
      need_hi = std::max(need_hi, lam);
    }
  int grow_lo = 0, grow_hi = 0;
  if (any_overflow) {
    if (need_lo < lo)
      grow_lo = static_cast<int>(std::floor((lo - need_lo) / width)) + 1;
    const double hi_edge = lo + bins * width;
    if (need_hi >= hi_edge)
      grow_hi = static_cast<int>(std::floor((need_hi - hi_edge) / width)) + 1;
    lo -= grow_lo * width;
    bins += grow_lo + grow_hi;
  }
  std::vector<long long> counts(bins, 0);
  for (int c = 0; c < n_chunks; ++c) {
    for (int b = 0; b < grid.bins; ++b) counts[b + grow_lo] += chunk_counts[c][b];
    for (double lam : chunk_overflow[c]) {
      const int b = std::clamp(static_cast<int>(std::floor((lam - lo) / width)),
                               0, bins - 1);
      ++counts[b];
    }
  }

  EnumerationResult out;
  out.lambda_min_star = *std::min_element(chunk_min.begin(), chunk_min.end());
  out.lambda_max_star = *std::max_element(chunk_max.begin(), chunk_max.end());
  DensityOfStates& dos = out.dos;
  dos.branch = branch;
  dos.n_cols = n;
  dos.subset_size = s;
  dos.log_normalization = log_binomial(n, s);
  dos.bin_centers.resize(bins);
  dos.log_counts.resize(bins);
  dos.samples = counts;
  dos.support.resize(bins);
  for (int b = 0; b < bins; ++b) {
    dos.bin_centers[b] = lo + (b + 0.5) * width;
    dos.log_counts[b] =
        counts[b] > 0 ? std::log(static_cast<double>(counts[b])) : kNegInf;
    dos.support[b] = counts[b] > 0 ? 1 : 0;
  }
  return out;
}

std::vector<double> bootstrap_sigma_stderr(
    const std::vector<EnergyHistogram>& histograms, const WhamOptions& opts,
    int n_boot, std::uint64_t seed) {
  check_consistent(histograms);
  if (n_boot < 2) throw std::invalid_argument("bootstrap: need n_boot >= 2");
  const int k = static_cast<int>(histograms.size());
  const int bins = histograms.front().bins();
  const int blocks = static_cast<int>(histograms.front().block_counts.size());
  for (const EnergyHistogram& h : histograms)
    if (static_cast<int>(h.block_counts.size()) != blocks)
      throw std::invalid_argument("bootstrap: inconsistent block structure");
  if (blocks < 2) throw std::invalid_argument("bootstrap: need >= 2 blocks");
  const double nd = static_cast<double>(histograms.front().n_cols);

  SplitMix64 rng(derive_stream(seed, (1ULL << 33) + 5));
  std::vector<double> sum(bins, 0.0), sum2(bins, 0.0);
  std::vector<long long> hits(bins, 0);

  int done = 0, attempts = 0;
  while (done < n_boot) {
    if (++attempts > 10 * n_boot)
      throw Error("bootstrap: too many degenerate resamples");
    // Joint resample: one block index list applied to every rung, preserving
    // cross-rung correlations from exchange moves.
    std::vector<int> pick(blocks);
    for (int t = 0; t < blocks; ++t)
      pick[t] = static_cast<int>(rng.below(blocks));
    std::vector<EnergyHistogram> resampled = histograms;
    for (int i = 0; i < k; ++i) {
      std::fill(resampled[i].counts.begin(), resampled[i].counts.end(), 0LL);
      for (int t = 0; t < blocks; ++t)
        for (int b = 0; b < bins; ++b)
          resampled[i].counts[b] += histograms[i].block_counts[pick[t]][b];
    }
    DensityOfStates dos;
    try {
      dos = wham_solve(resampled, opts);
    } catch (const LadderGapError&) {
      continue;  // degenerate resample; redraw
    }
    for (int b = 0; b < bins; ++b) {
      if (!std::isfinite(dos.log_counts[b])) continue;
      const double sig = dos.log_counts[b] / nd;
      sum[b] += sig;
      sum2[b] += sig * sig;
      ++hits[b];
    }
    ++done;
  }

  std::vector<double> err(bins, std::numeric_limits<double>::quiet_NaN());
  for (int b = 0; b < bins; ++b) {
    if (hits[b] < 2) continue;
    const double m = sum[b] / hits[b];
    const double var = std::max(0.0, sum2[b] / hits[b] - m * m);
    err[b] = std::sqrt(var * hits[b] / (hits[b] - 1));
  }
  return err;
}

}  // namespace ric
