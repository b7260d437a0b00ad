#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "ric/errors.hpp"
#include "ric/quadrature.hpp"

namespace ric {

// Order parameters of the replica-symmetric saddle for the biased subset
// ensemble at bias mu (mu > 0 tilts toward small lambda_min, mu < 0 toward
// large lambda_max):
//   q         inter-replica overlap in [0, 1)
//   chi       rescaled susceptibility, sign follows the branch
//   Q_hat, q0_hat, Delta_hat   conjugate parameters (Delta_hat = q1_hat - q0_hat)
//   K         sparsity multiplier fixing the mean subset fraction rho
// Validity requires Q_hat and Q_hat - Delta_hat to share a sign; on the
// physical branches both are positive.
struct SaddlePoint {
  double q = 0.0;
  double chi = 0.0;
  double Q_hat = 0.0;
  double q0_hat = 0.0;
  double Delta_hat = 0.0;
  double K = 0.0;
};

struct SolveOptions {
  double tol = 1e-10;     // max |residual| over the six stationarity equations
  int max_iter = 10000;   // outer damped-sweep iterations
  double damping = 0.5;   // fraction of the new iterate mixed in per sweep
  // Gauss-Hermite order for the Dz integrals in the mild regime. When the
  // kernel's logistic front becomes too sharp for this rule (large |mu|),
  // the integrator switches internally to composite Gauss-Legendre panels
  // refined around the front, keeping the discretized system aligned with
  // the true stationarity conditions at any sharpness.
  int quad_nodes = 96;
};

struct SaddleResult {
  SaddlePoint sp;
  // Residuals in the order: chi eq, q eq, unit eq, rho eq, Delta_hat eq,
  // q0_hat eq.
  std::array<double, 6> residuals{};
  double residual_max = 0.0;
  int iters = 0;
};

// One point of the entropy-vs-eigenvalue curve: phi is the tilted free
// entropy, lambda = -2 dphi/dmu the typical extreme eigenvalue at bias mu,
// sigma = phi + mu*lambda/2 the entropy density at that lambda.
struct RsPoint {
  double mu = 0.0;
  double phi = 0.0;
  double lambda = 0.0;
  double sigma = 0.0;
  SaddlePoint saddle;
  double residual_max = 0.0;
  int iters = 0;
};

struct RsCurve {
  std::vector<RsPoint> points;  // in continuation order (increasing |mu|)
  std::vector<std::pair<double, std::string>> failures;  // (mu, reason)
};

// Sharp-bias limit of the local kernel,
//   Xi(z) = 1 + exp(-K) * sqrt(Q_hat/(Q_hat - Delta_hat))
//             * exp( q0_hat z^2 / (2 (Q_hat - Delta_hat)) ).
// This is the closed form of the inner Gaussian integral
//   int Dy exp( (sqrt(Delta_hat) y + sqrt(q0_hat) z)^2 / (2 Q_hat) )
//     = sqrt(Q_hat/(Q_hat - Delta_hat)) * exp( q0_hat z^2 / (2 (Q_hat - Delta_hat)) ),
// valid while (Q_hat - Delta_hat)/Q_hat > 0, combined with the unit limit of
// the finite-bias prefactor (m/Q_hat)^{m/2} -> 1 as m -> 0. The same
// identity evaluates the kernel inside the free entropy. Throws
// SingularKernelError outside the validity region.
double xi_limit(double z, const SaddlePoint& sp);

// log(Xi(z) - 1): the stable building block used by the solver internals.
double log_xi_minus_one(double z, const SaddlePoint& sp);

// Small-|mu| asymptotic solution used to start the continuation:
//   K = log((1-rho)/rho),  chi = s*alpha*r/(1 - s*r),  Q_hat = |mu| r (1 - s*r),
// with r = sqrt(rho/alpha) and s = sign(mu); q starts at rho^2.
SaddlePoint initial_guess(double alpha, double rho, double mu);

// Damped fixed-point solve of the six stationarity equations at fixed mu.
// Each sweep recomputes (Delta_hat, q0_hat) from (q, chi), solves K and
// Q_hat by bracketed 1-D root finding (jointly, to mutual consistency),
// updates (q, chi), and mixes with the previous iterate. q = 0 solves the
// system identically at every mu but is only physical while locally stable;
// a solve that lands there verifies the linearized gain of the q update and
// reseeds at q > 0 when the q = 0 family has bifurcated. Throws
// SaddleSolveError on non-convergence or validity loss (carrying the last
// iterate).
SaddleResult solve_saddle(double alpha, double rho, double mu,
                          const SaddlePoint& init, const SolveOptions& opts,
                          const GaussHermite& rule);

// Residuals of the six stationarity equations at the given point.
std::array<double, 6> saddle_residuals(double alpha, double rho, double mu,
                                       const SaddlePoint& sp,
                                       const GaussHermite& rule);

// Tilted free entropy density phi(mu; rho) evaluated at a saddle point.
double free_entropy(double alpha, double rho, double mu, const SaddlePoint& sp,
                    const GaussHermite& rule);

// lambda(mu) = -2 dphi/dmu by the envelope theorem: only the explicit mu
// dependence contributes at a stationary point,
//   lambda = alpha/D - alpha mu q (1-q)/D^2 - (Delta_hat + q0_hat) chi / mu^2,
// with D = alpha + chi + mu (1 - q).
double typical_lambda(double alpha, double rho, double mu,
                      const SaddlePoint& sp);

// Solve + evaluate phi, lambda, sigma at one mu.
RsPoint rs_point(double alpha, double rho, double mu, const SaddlePoint& init,
                 const SolveOptions& opts, const GaussHermite& rule);

// Continuation along a single-signed mu grid (processed in increasing |mu|,
// each point warm-started from the previous). With collect_failures the
// failing mu values are recorded and skipped; otherwise failures propagate.
RsCurve rs_curve(double alpha, double rho, const std::vector<double>& mu_grid,
                 const SolveOptions& opts, bool collect_failures = false);

// Geometric |mu| grid with the given sign, increasing |mu|.
std::vector<double> geometric_grid(double lo_abs, double hi_abs, int n,
                                   int sign);

// max over tabulated points of (-mu*lambda/2 + sigma); inverse of the
// Legendre construction, used for consistency checks.
double legendre_free_entropy(const std::vector<RsPoint>& curve, double mu);

}  // namespace ric
