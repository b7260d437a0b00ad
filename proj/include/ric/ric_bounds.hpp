#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ric/ensemble.hpp"
#include "ric/rs_solver.hpp"

namespace ric {

// Restricted isometry constants from the entropy zero-points lambda*_+/-:
//   delta_min = min(1, 1 - max(0, lambda*_+)),  delta_max = lambda*_- - 1,
//   delta_sym = max(delta_min, delta_max).
struct RicEstimate {
  double alpha = 0.0;
  double rho = 0.0;
  double lambda_star_min = 0.0;  // lambda*_+ (lower zero, minimum branch)
  double lambda_star_max = 0.0;  // lambda*_- (upper zero, maximum branch)
  double delta_min = 0.0;
  double delta_max = 0.0;
  double delta_sym = 0.0;
};

RicEstimate ric_from_zero_points(double alpha, double rho, double lambda_plus,
                                 double lambda_minus);

enum class Condition { l0, l1_symmetric, l1_asymmetric };

std::string to_string(Condition c);
Condition condition_from_string(const std::string& s);

// Sufficient recovery conditions at sparsity 2S:
//   l0:            max(delta_min, delta_max) < 1
//   l1_symmetric:  max(delta_min, delta_max) < sqrt(2) - 1
//   l1_asymmetric: (4 sqrt(2) - 3) delta_min + delta_max < 4 (sqrt(2) - 1)
bool recovery_condition(double delta2s_min, double delta2s_max, Condition c);

struct ZeroPointResult {
  double lambda_star = 0.0;
  double sigma_at = 0.0;      // entropy at the reported point
  double mu_at = 0.0;         // bias at the reported point
  double bracket_width = 0.0; // final lambda bracket width
};

// Interpolation-only zero locator on a tabulated curve (monotone linear
// interpolation of sigma over lambda). An exact tabulated zero is returned
// as-is. Throws UnbracketedError (with the curve's last point) if sigma
// never changes sign.
double entropy_zero_point(const std::vector<RsPoint>& curve, Branch branch);

struct CurveOptions {
  double mu_start = 0.02;    // |mu| of the first continuation point
  double growth = 1.30;      // geometric growth of |mu| while extending
  double sigma_margin = 0.02;  // extend until sigma < -margin
  double mu_cap = 1e5;       // give up beyond this |mu|
  double lambda_bracket = 1e-4;  // refinement target width in lambda
  double sigma_tol = 5e-5;   // and |sigma| at the reported point
};

// Adaptive curve extension + bisection on mu re-solving the saddle until the
// lambda bracket is tight and sigma at the reported point is ~0.
ZeroPointResult refine_zero_point(double alpha, double rho, Branch branch,
                                  const SolveOptions& solve_opts,
                                  const CurveOptions& curve_opts);

// Both branches' zero points -> RIC estimate at (alpha, rho).
RicEstimate ric(double alpha, double rho, const SolveOptions& solve_opts = {},
                const CurveOptions& curve_opts = {});

struct PhaseOptions {
  double rho_tol = 1e-3;   // absolute bisection tolerance in rho
  bool scale_tol_by_alpha = true;  // use rho_tol * alpha instead
  double rho_floor_frac = 1e-3;    // lowest probed rho, as fraction of alpha
};

struct PhaseBoundary {
  Condition condition = Condition::l0;
  std::vector<std::pair<double, double>> points;  // (alpha, rho_star)
  std::vector<std::pair<double, std::string>> failures;  // (alpha, reason)
};

// Largest rho (per alpha) such that the recovery condition holds with the
// RICs evaluated at sparsity 2*rho; monotone bisection, 2*rho* <= alpha.
PhaseBoundary phase_boundary(const std::vector<double>& alpha_grid,
                             Condition condition,
                             const SolveOptions& solve_opts = {},
                             const CurveOptions& curve_opts = {},
                             const PhaseOptions& phase_opts = {});

}  // namespace ric
