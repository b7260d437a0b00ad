#include "ric/ric_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ric {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::l0: return "l0";
    case Condition::l1_symmetric: return "l1_sym";
    case Condition::l1_asymmetric: return "l1_asym";
  }
  return "?";
}

Condition condition_from_string(const std::string& s) {
  if (s == "l0") return Condition::l0;
  if (s == "l1_sym" || s == "l1_symmetric") return Condition::l1_symmetric;
  if (s == "l1_asym" || s == "l1_asymmetric") return Condition::l1_asymmetric;
  throw std::invalid_argument("unknown condition: " + s);
}

RicEstimate ric_from_zero_points(double alpha, double rho, double lambda_plus,
                                 double lambda_minus) {
  RicEstimate e;
  e.alpha = alpha;
  e.rho = rho;
  e.lambda_star_min = lambda_plus;
  e.lambda_star_max = lambda_minus;
  e.delta_min = std::min(1.0, 1.0 - std::max(0.0, lambda_plus));
  e.delta_max = lambda_minus - 1.0;
  e.delta_sym = std::max(e.delta_min, e.delta_max);
  return e;
}

bool recovery_condition(double delta2s_min, double delta2s_max, Condition c) {
  switch (c) {
    case Condition::l0:
      return std::max(delta2s_min, delta2s_max) < 1.0;
    case Condition::l1_symmetric:
      return std::max(delta2s_min, delta2s_max) < kSqrt2 - 1.0;
    case Condition::l1_asymmetric:
      return (4.0 * kSqrt2 - 3.0) * delta2s_min + delta2s_max <
             4.0 * (kSqrt2 - 1.0);
  }
  return false;
}

double entropy_zero_point(const std::vector<RsPoint>& curve, Branch branch) {
  if (curve.empty())
    throw std::invalid_argument("entropy_zero_point: empty curve");
  const double want_sign = mu_sign(branch);
  for (const auto& p : curve)
    if (p.mu * want_sign <= 0.0)
      throw std::invalid_argument(
          "entropy_zero_point: curve sign does not match branch");

  for (const auto& p : curve)
    if (p.sigma == 0.0) return p.lambda;

  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const auto& a = curve[i];
    const auto& b = curve[i + 1];
    if (a.sigma > 0.0 && b.sigma < 0.0) {
      const double t = a.sigma / (a.sigma - b.sigma);
      return a.lambda + t * (b.lambda - a.lambda);
    }
  }
  const auto& last = curve.back();
  throw UnbracketedError(
      "entropy_zero_point: no sign change on curve (last lambda=" +
          std::to_string(last.lambda) + ", sigma=" + std::to_string(last.sigma) + ")",
      last.lambda, last.sigma);
}

ZeroPointResult refine_zero_point(double alpha, double rho, Branch branch,
                                  const SolveOptions& solve_opts,
                                  const CurveOptions& curve_opts) {
  const GaussHermite rule = GaussHermite::make(solve_opts.quad_nodes);
  const double sgn = mu_sign(branch);

  // Extend geometrically in |mu| until sigma drops safely below zero.
  double mu_a = 0.0, sig_a = 0.0, lam_a = 0.0;
  double mu_b = 0.0, sig_b = 0.0, lam_b = 0.0;
  SaddlePoint warm = initial_guess(alpha, rho, sgn * curve_opts.mu_start);
  SaddlePoint warm_a = warm;  // continuation saddle at the positive end
  bool have_pos = false, have_neg = false;
  int past_crossing = 0;
  double last_lambda = std::numeric_limits<double>::quiet_NaN();
  double last_sigma = std::numeric_limits<double>::quiet_NaN();
  for (double mu_abs = curve_opts.mu_start; mu_abs <= curve_opts.mu_cap;
       mu_abs *= curve_opts.growth) {
    const double mu = sgn * mu_abs;
    RsPoint p;
    try {
      p = rs_point(alpha, rho, mu, warm, solve_opts, rule);
    } catch (const Error& e) {
      if (have_neg) break;  // bracket already in hand
      throw UnbracketedError(
          std::string("refine_zero_point: solver failed before a sign change (") +
              e.what() + ")",
          last_lambda, last_sigma);
    }
    warm = p.saddle;
    last_lambda = p.lambda;
    last_sigma = p.sigma;
    if (p.sigma > 0.0) {
      mu_a = mu;
      sig_a = p.sigma;
      lam_a = p.lambda;
      warm_a = p.saddle;
      have_pos = true;
    } else {
      mu_b = mu;
      sig_b = p.sigma;
      lam_b = p.lambda;
      have_neg = true;
      // Stop at a safe margin below zero, or after a few extra points: the
      // |mu| -> inf limit of sigma can sit arbitrarily close under zero at
      // small rho, and chasing the margin there only strains the solver.
      if (p.sigma < -curve_opts.sigma_margin || ++past_crossing >= 4) break;
    }
  }
  if (!have_pos || !have_neg)
    throw UnbracketedError(
        "refine_zero_point: entropy never changed sign up to mu_cap",
        last_lambda, last_sigma);

  // Bisection on |mu| (geometric midpoints), re-solving the saddle. The
  // continuation saddle at the positive end warm-starts each midpoint solve
  // (cold starts are only valid near mu = 0, far from the bracket).
  ZeroPointResult out;
  out.lambda_star = lam_a + (lam_b - lam_a) * sig_a / (sig_a - sig_b);
  out.sigma_at = sig_a;
  out.mu_at = mu_a;
  out.bracket_width = std::abs(lam_b - lam_a);
  for (int it = 0; it < 200; ++it) {
    out.bracket_width = std::abs(lam_b - lam_a);
    if (out.bracket_width <= curve_opts.lambda_bracket &&
        std::abs(out.sigma_at) <= curve_opts.sigma_tol)
      break;
    if (std::abs(mu_b) - std::abs(mu_a) < 1e-13 * std::abs(mu_a)) break;
    const double mu_mid = sgn * std::sqrt(std::abs(mu_a) * std::abs(mu_b));
    RsPoint p;
    try {
      p = rs_point(alpha, rho, mu_mid, warm_a, solve_opts, rule);
    } catch (const Error&) {
      // Keep the secant estimate from the current (validated) bracket.
      out.lambda_star = lam_a + (lam_b - lam_a) * sig_a / (sig_a - sig_b);
      out.sigma_at = sig_a;
      out.mu_at = mu_a;
      out.bracket_width = std::abs(lam_b - lam_a);
      break;
    }
    out.lambda_star = p.lambda;
    out.sigma_at = p.sigma;
    out.mu_at = mu_mid;
    if (p.sigma > 0.0) {
      mu_a = mu_mid;
      sig_a = p.sigma;
      lam_a = p.lambda;
      warm_a = p.saddle;
    } else {
      mu_b = mu_mid;
      sig_b = p.sigma;
      lam_b = p.lambda;
    }
  }
  return out;
}

RicEstimate ric(double alpha, double rho, const SolveOptions& solve_opts,
                const CurveOptions& curve_opts) {
  if (!(alpha > 0.0) || alpha > 1.0 || !(rho > 0.0) || !(rho < alpha))
    throw std::invalid_argument("ric: need 0 < rho < alpha <= 1");
  const ZeroPointResult plus =
      refine_zero_point(alpha, rho, Branch::minimum, solve_opts, curve_opts);
  const ZeroPointResult minus =
      refine_zero_point(alpha, rho, Branch::maximum, solve_opts, curve_opts);
  return ric_from_zero_points(alpha, rho, plus.lambda_star, minus.lambda_star);
}

namespace {

// Recovery test at subset fraction rho with RICs taken at sparsity 2*rho.
// Beyond 2*rho >= alpha a (2S)-subset Gram is rank deficient, so the minimum
// RIC saturates at 1 and every condition fails.
bool condition_holds_at(double alpha, double rho, Condition cond,
                        const SolveOptions& solve_opts,
                        const CurveOptions& curve_opts) {
  const double rho_eff = 2.0 * rho;
  if (rho_eff >= alpha * (1.0 - 1e-9)) return false;
  const RicEstimate est = ric(alpha, rho_eff, solve_opts, curve_opts);
  return recovery_condition(est.delta_min, est.delta_max, cond);
}

}  // namespace

PhaseBoundary phase_boundary(const std::vector<double>& alpha_grid,
                             Condition condition,
                             const SolveOptions& solve_opts,
                             const CurveOptions& curve_opts,
                             const PhaseOptions& phase_opts) {
  for (double a : alpha_grid)
    if (!(a > 0.0) || a > 1.0)
      throw std::invalid_argument("phase_boundary: alpha values must be in (0, 1]");

  PhaseBoundary out;
  out.condition = condition;
  const int n = static_cast<int>(alpha_grid.size());
  std::vector<double> stars(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> errors(n);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < n; ++i) {
    const double alpha = alpha_grid[i];
    const double tol = phase_opts.scale_tol_by_alpha
                           ? phase_opts.rho_tol * alpha
                           : phase_opts.rho_tol;
    const double floor = phase_opts.rho_floor_frac * alpha;
    const double cap = 0.5 * alpha;
    auto probe = [&](double rho) -> bool {
      try {
        return condition_holds_at(alpha, rho, condition, solve_opts, curve_opts);
      } catch (const Error&) {
        // Solver trouble this deep means rho is far beyond the boundary;
        // treat as non-recoverable (the bisection never returns here).
        if (rho > 0.2 * alpha) return false;
        throw;
      }
    };
    try {
      // Walk down from the cap to the highest power-of-two probe that holds.
      double lo = cap;
      bool lo_ok = probe(lo);
      double hi = cap;  // meaning: condition fails at hi (or hi is the cap)
      bool capped = lo_ok;
      while (!lo_ok && lo > floor) {
        hi = lo;
        lo *= 0.5;
        lo_ok = probe(lo);
      }
      if (!lo_ok) {
        errors[i] = "condition fails down to the rho floor";
        continue;
      }
      if (capped) {
        stars[i] = cap;  // 2*rho* = alpha cap
        continue;
      }
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid))
          lo = mid;
        else
          hi = mid;
      }
      stars[i] = lo;  // largest certified-recoverable rho
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  }

  for (int i = 0; i < n; ++i) {
    if (std::isnan(stars[i]))
      out.failures.emplace_back(alpha_grid[i], errors[i]);
    else
      out.points.emplace_back(alpha_grid[i], stars[i]);
  }
  return out;
}

}  // namespace ric
