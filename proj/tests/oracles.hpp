// Independent reference implementations used only by the test suites.
// Everything here is deliberately written without the library's own
// numerical machinery (no Eigen, no library quadrature) so that agreement
// is evidence rather than tautology.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ric/rs_solver.hpp"

namespace oracles {

// 99th percentile of chi^2 with 27 degrees of freedom (28 uniform cells).
inline constexpr double kChi2_99_dof27 = 46.963;

// ---------------------------------------------------------------- matrices

// Plain double-loop Gram of selected columns of a column-list matrix.
inline std::vector<std::vector<double>> naive_gram(
    const std::vector<std::vector<double>>& cols,
    const std::vector<int>& sel) {
  const int s = static_cast<int>(sel.size());
  std::vector<std::vector<double>> g(s, std::vector<double>(s, 0.0));
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < cols[sel[a]].size(); ++i)
        acc += cols[sel[a]][i] * cols[sel[b]][i];
      g[a][b] = acc;
    }
  return g;
}

// Classical Jacobi eigenvalue iteration for small symmetric matrices.
// Returns eigenvalues sorted ascending; accurate to ~1e-13 for n <= 8.
inline std::vector<double> jacobi_eigenvalues(
    std::vector<std::vector<double>> a) {
  const int n = static_cast<int>(a.size());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-28) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

// -------------------------------------------------------------- subsets

// Lexicographic enumeration of all k-subsets of {0..n-1}.
inline std::vector<std::vector<int>> all_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i;
  while (true) {
    out.push_back(c);
    int j = k - 1;
    while (j >= 0 && c[j] == n - k + j) --j;
    if (j < 0) break;
    ++c[j];
    for (int t = j + 1; t < k; ++t) c[t] = c[t - 1] + 1;
  }
  return out;
}

// Exact Boltzmann weights p(c) proportional to exp(-N mu lambda(c)/2) over a
// supplied table of per-subset eigenvalues.
inline std::vector<double> boltzmann_weights(const std::vector<double>& lambdas,
                                             long n, double mu) {
  double m = -1e300;
  for (double l : lambdas) m = std::max(m, -mu * n * l / 2.0);
  std::vector<double> p(lambdas.size());
  double z = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    p[i] = std::exp(-mu * n * lambdas[i] / 2.0 - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

inline double total_variation(const std::vector<double>& p,
                              const std::vector<double>& q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return tv / 2.0;
}

// ------------------------------------------------------ sharp-bias kernel

// Brute-force standard-normal expectation int Dy f(y) by a fine trapezoid
// rule on [-L, L]; exponentially accurate for analytic integrands with
// Gaussian-dominated decay, and entirely independent of the library's
// quadrature machinery.
template <typename F>
double expect_dy(F f, double half_width = 14.0, int points = 20001) {
  const double h = 2.0 * half_width / (points - 1);
  const double inv_sqrt2pi = 0.3989422804014326779;
  double acc = 0.0;
  for (int i = 0; i < points; ++i) {
    const double y = -half_width + i * h;
    const double term = inv_sqrt2pi * std::exp(-0.5 * y * y) * f(y);
    acc += (i == 0 || i == points - 1) ? 0.5 * term : term;
  }
  return acc * h;
}

// Finite-sharpness kernel at inverse temperature beta (m = mu/beta):
//   Xi_beta(z) = 1 + e^{-K} (m/Q_hat)^{m/2}
//                  * int Dy exp( (sqrt(Delta_hat) y + sqrt(q0_hat) z)^2
//                                / (2 Q_hat) )
// evaluated by brute-force quadrature. Requires mu > 0 and
// Delta_hat/Q_hat < 1 for convergence (test draws keep it <= 0.5).
inline double xi_finite_beta(double z, const ric::SaddlePoint& sp, double mu,
                             double beta) {
  if (!(mu > 0.0) || !(sp.Q_hat > 0.0) || !(sp.Delta_hat < sp.Q_hat))
    throw std::invalid_argument("xi_finite_beta: outside validity region");
  const double m = mu / beta;
  const double sd = std::sqrt(std::max(0.0, sp.Delta_hat));
  const double sq = std::sqrt(std::max(0.0, sp.q0_hat));
  const double inner = expect_dy([&](double y) {
    const double u = sd * y + sq * z;
    return std::exp(u * u / (2.0 * sp.Q_hat));
  });
  const double pref = std::pow(m / sp.Q_hat, m / 2.0);
  return 1.0 + std::exp(-sp.K) * pref * inner;
}

}  // namespace oracles
