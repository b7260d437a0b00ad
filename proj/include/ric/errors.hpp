#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace ric {

// Base class so callers can catch toolkit errors as a family.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user-facing configuration (unknown key, unparsable value, missing seed).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// File I/O failure (missing file, malformed header, write failure).
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// The Gaussian kernel of the replica integrand is only defined while
// Q_hat and Q_hat - Delta_hat share a sign; crossing that line means the
// inner integral diverges.
class SingularKernelError : public Error {
 public:
  explicit SingularKernelError(const std::string& msg) : Error(msg) {}
};

struct SaddlePoint;  // fwd decl (rs_solver.hpp)

// Fixed-point iteration failure; carries the last iterate for diagnostics.
class SaddleSolveError : public Error {
 public:
  SaddleSolveError(const std::string& msg, double mu, double q, double chi,
                   double Q_hat, double q0_hat, double Delta_hat, double K,
                   double residual_max, int iters)
      : Error(msg),
        mu(mu),
        q(q),
        chi(chi),
        Q_hat(Q_hat),
        q0_hat(q0_hat),
        Delta_hat(Delta_hat),
        K(K),
        residual_max(residual_max),
        iters(iters) {}
  double mu, q, chi, Q_hat, q0_hat, Delta_hat, K;
  double residual_max;
  int iters;
};

// Entropy zero-point search ran out of curve without a sign change.
class UnbracketedError : public Error {
 public:
  UnbracketedError(const std::string& msg, double last_lambda,
                   double last_sigma)
      : Error(msg), last_lambda(last_lambda), last_sigma(last_sigma) {}
  double last_lambda, last_sigma;
};

// Adjacent histograms in a multihistogram rebuild share no occupied bins.
class LadderGapError : public Error {
 public:
  explicit LadderGapError(const std::string& msg) : Error(msg) {}
};

}  // namespace ric
