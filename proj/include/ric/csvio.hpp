#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ric/dos_wham.hpp"
#include "ric/emc.hpp"
#include "ric/ric_bounds.hpp"
#include "ric/rs_solver.hpp"

namespace ric {

// FNV-1a 64-bit, hex-encoded; used to stamp outputs with a config fingerprint.
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

// Key=value metadata embedded in the leading comment line of every file,
// e.g. "# ric-toolkit 0.1.0 config_hash=... alpha=0.5 rho=0.1".
using Metadata = std::map<std::string, std::string>;

std::string metadata_comment(const Metadata& meta);
Metadata parse_metadata_comment(const std::string& line);

// rs-curve CSV: comment line, then
// mu,q,chi,Q_hat,q0_hat,Delta_hat,K,phi,lambda,sigma,residual_max,iters
void write_rs_csv(const std::string& path, const std::vector<RsPoint>& points,
                  const Metadata& meta);
struct RsCsv {
  std::vector<RsPoint> points;
  Metadata meta;
};
RsCsv read_rs_csv(const std::string& path);

// RIC table CSV: alpha,rho,lambda_star_min,lambda_star_max,delta_min,
// delta_max,delta_sym
void write_ric_csv(const std::string& path,
                   const std::vector<RicEstimate>& rows, const Metadata& meta);

// Phase-boundary CSV: alpha,rho_star_l0,rho_star_l1_sym,rho_star_l1_asym
// (missing entries written as nan).
void write_phase_csv(const std::string& path,
                     const std::vector<double>& alphas,
                     const std::map<Condition, std::vector<double>>& rho_star,
                     const Metadata& meta);

// Per-rung histogram file: comment line; "mu N S branch total_samples"
// header + values; then bin_center,count rows.
void write_histogram(const std::string& path, const EnergyHistogram& h,
                     const Metadata& meta);
struct HistogramFile {
  EnergyHistogram histogram;
  Metadata meta;
};
HistogramFile read_histogram(const std::string& path);

// Density-of-states file: comment line; "branch N S normalization" header +
// values (normalization = C(N,S)); then lambda,sigma,samples,support rows.
// The support mask travels with the file: exact enumeration counts are their
// own support, sampled densities flag bins with enough samples.
void write_dos(const std::string& path, const DensityOfStates& dos,
               const Metadata& meta);
struct DosFile {
  DensityOfStates dos;
  Metadata meta;
};
DosFile read_dos(const std::string& path);

// Joined comparison CSV: lambda,sigma_rs,sigma_emc (RS interpolated onto the
// DOS bins that its lambda range covers).
struct ComparePoint {
  double lambda = 0.0;
  double sigma_rs = 0.0;
  double sigma_emc = 0.0;
};
void write_compare_csv(const std::string& path,
                       const std::vector<ComparePoint>& rows,
                       const Metadata& meta);

// Flat key=value manifest (sorted by key).
void write_manifest(const std::string& path, const Metadata& meta);

// gnuplot script emitters (plots reference the CSVs by relative path).
void write_entropy_plot_script(const std::string& path,
                               const std::string& rs_csv, double alpha,
                               double rho);
void write_compare_plot_script(const std::string& path,
                               const std::string& compare_csv, double alpha,
                               double rho);
void write_ric_plot_script(const std::string& path, const std::string& ric_csv,
                           double alpha);
void write_phase_plot_script(const std::string& path,
                             const std::string& phase_csv);

}  // namespace ric
