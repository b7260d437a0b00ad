#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ric/errors.hpp"

namespace ric {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class Normalization { raw, unit_columns };

// Which extreme eigenvalue of the subset Gram acts as the energy. The
// minimum branch is sampled with mu > 0, the maximum branch with mu < 0.
enum class Branch { minimum, maximum };

inline int mu_sign(Branch b) { return b == Branch::minimum ? +1 : -1; }
inline Branch branch_for_mu(double mu) {
  return mu >= 0.0 ? Branch::minimum : Branch::maximum;
}

std::string to_string(Normalization n);
std::string to_string(Branch b);
Normalization normalization_from_string(const std::string& s);
Branch branch_from_string(const std::string& s);

// M x N Gaussian measurement ensemble, M = round(N * alpha) >= 1.
// Entries i.i.d. N(0, 1/M) so columns have unit norm in expectation;
// unit_columns rescales each column to exactly unit norm.
struct EnsembleSpec {
  long n_cols = 0;  // N
  double alpha = 0.0;
  Normalization normalization = Normalization::raw;
  std::uint64_t seed = 0;

  long n_rows() const;         // M
  void validate() const;       // throws std::invalid_argument
};

struct MeasurementMatrix {
  Mat entries;  // M x N
  EnsembleSpec spec;
};

// Strictly increasing column indices in [0, N).
struct SubsetSelection {
  std::vector<int> indices;

  int size() const { return static_cast<int>(indices.size()); }
  void validate(long n_cols) const;  // throws std::invalid_argument
};

MeasurementMatrix generate(const EnsembleSpec& spec);

// S x S Gram A_T' A_T of the selected columns.
Mat gram(const MeasurementMatrix& mat, const SubsetSelection& sel);

// Extreme eigenvalue of a symmetric matrix (dense solver). For Gram inputs
// tiny negative round-off at the bottom is clamped to zero.
double extreme_eigenvalue(const Mat& g, Branch which);
std::pair<double, double> extreme_eigenvalues(const Mat& g);  // (min, max)

// Power iteration on a spectral shift of g, warm-startable; used instead of
// the dense solver for large subsets. |result - exact| <= tol.
double extreme_eigenvalue_power(const Mat& g, Branch which, Vec* warm_start,
                                double tol = 1e-11, int max_iter = 100000);

// Asymptotic support edges ((1 -/+ sqrt(rho/alpha))^2) of the typical
// spectral density of an S-column subset Gram, S = rho * N.
std::pair<double, double> mp_support_edges(double alpha, double rho);

// One-line header "N M alpha normalization seed", then entries. Binary mode
// stores raw little-endian doubles (exact round trip); CSV mode writes one
// row per matrix row with 17 significant digits.
void save_matrix(const std::string& path, const MeasurementMatrix& mat,
                 bool binary = true);
MeasurementMatrix load_matrix(const std::string& path);

}  // namespace ric
