#pragma once

#include <cmath>
#include <vector>

#include "ric/errors.hpp"

namespace ric {

// Gauss-Hermite rule for integrals against the standard normal measure,
//     int Dz f(z) = int dz exp(-z^2/2)/sqrt(2 pi) f(z) ~= sum_k w_k f(z_k).
// Nodes/weights come from Golub-Welsch on the probabilists' Hermite
// recurrence (Jacobi off-diagonals sqrt(k)); nodes are symmetrized in +/-
// pairs so odd moments cancel to round-off. Exact for polynomials of degree
// <= 2*order - 1.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;

  int order() const { return static_cast<int>(nodes.size()); }

  static GaussHermite make(int order);
};

// sum_k w_k f(z_k); throws Error if f returns a non-finite value at a node.
template <class F>
double integrate_gaussian(const GaussHermite& rule, F&& f) {
  double acc = 0.0;
  for (int k = 0; k < rule.order(); ++k) {
    const double v = f(rule.nodes[k]);
    if (!std::isfinite(v))
      throw Error("integrate_gaussian: non-finite integrand at node z=" +
                  std::to_string(rule.nodes[k]));
    acc += rule.weights[k] * v;
  }
  return acc;
}

}  // namespace ric
