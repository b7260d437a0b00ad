#include "ric/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>

namespace ric {

GaussHermite GaussHermite::make(int order) {
  if (order < 1) throw std::invalid_argument("GaussHermite: order must be >= 1");
  // Jacobi matrix of the probabilists' Hermite polynomials: zero diagonal,
  // off-diagonal sqrt(k). Eigenvalues are the nodes; weights are the squared
  // first components of the eigenvectors (total mass 1).
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(order > 1 ? order - 1 : 0);
  for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw Error("GaussHermite: tridiagonal eigensolve failed");

  GaussHermite rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = es.eigenvalues()[i];  // ascending
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;
  }
  // Symmetrize +/- node pairs so odd moments vanish to round-off.
  for (int i = 0; i < order / 2; ++i) {
    const int j = order - 1 - i;
    const double m = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -m;
    rule.nodes[j] = m;
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

}  // namespace ric
