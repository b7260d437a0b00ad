#include "ric/rs_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ric {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 40.0) return x;
  if (x < -40.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

// log(Xi - 1) = -K + base(z), base(z) = log sqrt(Q/(Q-Delta)) + a z^2 with
// a = q0_hat / (2 (Q - Delta)). Precomputed per (Q_hat, Delta_hat, q0_hat).
struct Kernel {
  double log_ratio_half = 0.0;
  double a = 0.0;

  static Kernel make(double Q_hat, double Delta_hat, double q0_hat) {
    const double qd = Q_hat - Delta_hat;
    const double ratio = Q_hat / qd;
    if (!(ratio > 0.0) || !std::isfinite(ratio))
      throw SingularKernelError(
          "kernel: Q_hat and Q_hat - Delta_hat must share a sign (Q_hat=" +
          std::to_string(Q_hat) + ", Delta_hat=" + std::to_string(Delta_hat) + ")");
    Kernel k;
    k.log_ratio_half = 0.5 * std::log(ratio);
    k.a = 0.5 * q0_hat / qd;
    return k;
  }

  double base(double z) const { return log_ratio_half + a * z * z; }
};

// All Dz integrands here are even in z and vary through the logistic factor
// sig(a z^2 - Ktil), Ktil = K - log_ratio_half, whose front sits at
// z* = sqrt(Ktil/a) with width delta = 1/(2 a z*). Once delta drops below
// the Gauss-Hermite node spacing the plain rule under-resolves the front and
// the discretized stationarity system drifts off the true saddle manifold
// (the integration-by-parts identities tying the equations to the gradient
// of phi stop holding). In that regime we integrate on composite
// Gauss-Legendre panels over z >= 0 (folded, density-weighted), with cut
// spacing chosen so the logistic argument changes by at most ~10 per panel.
constexpr double kGl16X[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
constexpr double kGl16W[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};
constexpr double kZCut = 13.5;  // exp(-z^2/2) ~ 3e-40 at the cut
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

struct ZQuad {
  const GaussHermite* gh = nullptr;  // mild front: plain rule over the line
  std::vector<double> z, w;          // sharp front: folded panel nodes

  template <class F>
  void each(F&& f) const {  // f(z, weight)
    if (gh) {
      for (int i = 0; i < gh->order(); ++i) f(gh->nodes[i], gh->weights[i]);
    } else {
      for (std::size_t i = 0; i < z.size(); ++i) f(z[i], w[i]);
    }
  }
};

ZQuad make_zquad(const GaussHermite& rule, const Kernel& ker, double K) {
  ZQuad q;
  double zs = 0.0, delta = 0.0;
  bool sharp = false;
  if (ker.a > 0.0) {
    const double Ktil = K - ker.log_ratio_half;
    if (Ktil > 0.0) {
      zs = std::sqrt(Ktil / ker.a);
      delta = 1.0 / (2.0 * ker.a * zs);
      sharp = delta < 0.5;
    } else {  // no zero crossing: central dimple of width ~ 1/sqrt(a)
      delta = 0.5 / std::sqrt(ker.a);
      sharp = ker.a > 2.0;
    }
  }
  if (!sharp) {
    q.gh = &rule;
    return q;
  }

  double cuts[32];
  int nc = 0;
  for (double c : {0.0, 0.7, 1.4, 2.1, 2.8, 3.6, 4.5, 5.6, 7.0, 9.0, 11.0, kZCut})
    cuts[nc++] = c;
  for (double k : {-30.0, -20.0, -12.0, -8.0, -5.0, -3.0, -1.5, 0.0, 1.5, 3.0,
                   5.0, 8.0, 12.0, 20.0, 30.0}) {
    const double c = zs + k * delta;
    if (c > 1e-13 && c < kZCut) cuts[nc++] = c;
  }
  std::sort(cuts, cuts + nc);
  q.z.reserve((nc - 1) * 16);
  q.w.reserve((nc - 1) * 16);
  for (int p = 0; p + 1 < nc; ++p) {
    const double half = 0.5 * (cuts[p + 1] - cuts[p]);
    const double mid = 0.5 * (cuts[p + 1] + cuts[p]);
    if (half < 1e-13) continue;
    for (int j = 0; j < 8; ++j) {
      for (double s : {-kGl16X[j], kGl16X[j]}) {
        const double zz = mid + half * s;
        q.z.push_back(zz);
        q.w.push_back(2.0 * kGl16W[j] * half * kInvSqrt2Pi *
                      std::exp(-0.5 * zz * zz));
      }
    }
  }
  return q;
}

struct Integrals {
  double occupancy = 0.0;   // int Dz sig            (rho equation)
  double unit = 0.0;        // int Dz sig (t1 + t2 z^2)  (unit equation)
  double q_integral = 0.0;  // t2 * int Dz sig^2 z^2     (q equation)
};

Integrals integrals_at(const GaussHermite& rule, const Kernel& ker, double K,
                       double Q_hat, double Delta_hat, double q0_hat) {
  const double qd = Q_hat - Delta_hat;
  const double t1 = Delta_hat / (Q_hat * qd);
  const double t2 = q0_hat / (qd * qd);
  const ZQuad zq = make_zquad(rule, ker, K);
  Integrals out;
  zq.each([&](double z, double w) {
    const double s = stable_sigmoid(ker.base(z) - K);
    out.occupancy += w * s;
    out.unit += w * s * (t1 + t2 * z * z);
    out.q_integral += w * s * s * z * z;
  });
  out.q_integral *= t2;
  return out;
}

// rho = int Dz sigmoid(base - K): strictly decreasing in K. Safeguarded
// Newton within an expanding bracket.
double solve_K(const GaussHermite& rule, const Kernel& ker, double rho,
               double K0) {
  auto g = [&](double K, double* dg) {
    const ZQuad zq = make_zquad(rule, ker, K);
    double s_sum = 0.0, d_sum = 0.0;
    zq.each([&](double z, double w) {
      const double s = stable_sigmoid(ker.base(z) - K);
      s_sum += w * s;
      d_sum += w * s * (1.0 - s);
    });
    if (dg) *dg = -d_sum;
    return s_sum - rho;
  };

  double lo = K0, hi = K0;
  double glo = g(lo, nullptr);
  double ghi = glo;
  double step = 1.0;
  while (glo < 0.0) {  // need g(lo) >= 0: move lo down
    hi = lo;
    ghi = glo;
    lo -= step;
    step *= 2.0;
    glo = g(lo, nullptr);
    if (step > 1e9) throw Error("solve_K: bracket expansion failed (low side)");
  }
  step = 1.0;
  while (ghi > 0.0) {
    lo = hi;
    glo = ghi;
    hi += step;
    step *= 2.0;
    ghi = g(hi, nullptr);
    if (step > 1e9) throw Error("solve_K: bracket expansion failed (high side)");
  }

  double K = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double dg = 0.0;
    const double gv = g(K, &dg);
    if (std::abs(gv) < 1e-14) return K;
    if (gv > 0.0)
      lo = K;
    else
      hi = K;
    double K_next = (dg != 0.0) ? K - gv / dg : 0.5 * (lo + hi);
    if (!(K_next > lo && K_next < hi)) K_next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(K))) return K_next;
    K = K_next;
  }
  return K;
}

// Unit equation at fixed K: F(Q) = int Dz sig (t1 + t2 z^2) - 1 on
// Q in (Delta_hat, inf), F -> +inf at the left end and -> -1 at infinity.
// Illinois regula falsi within an expanding bracket.
double solve_Q(const GaussHermite& rule, double K, double Delta_hat,
               double q0_hat, double rho, double Q0) {
  (void)rho;
  auto F = [&](double Q) {
    const Kernel ker = Kernel::make(Q, Delta_hat, q0_hat);
    const double qd = Q - Delta_hat;
    const double t1 = Delta_hat / (Q * qd);
    const double t2 = q0_hat / (qd * qd);
    const ZQuad zq = make_zquad(rule, ker, K);
    double acc = 0.0;
    zq.each([&](double z, double w) {
      const double s = stable_sigmoid(ker.base(z) - K);
      acc += w * s * (t1 + t2 * z * z);
    });
    return acc - 1.0;
  };

  const double floor_q = std::max(Delta_hat, 0.0);
  double a = std::max(Q0, floor_q * (1.0 + 1e-9) + 1e-300);
  double fa = F(a);
  double b = a, fb = fa;
  if (fa > 0.0) {  // expand right until F < 0
    double gap = std::max(a - floor_q, 1e-12 * std::max(1.0, a));
    for (int it = 0;; ++it) {
      b = a + gap;
      fb = F(b);
      if (fb <= 0.0) break;
      a = b;
      fa = fb;
      gap *= 2.0;
      if (it > 400) throw Error("solve_Q: bracket expansion failed (right)");
    }
  } else {  // shrink left toward the singular end until F > 0
    for (int it = 0;; ++it) {
      const double gap = a - floor_q;
      a = floor_q + 0.5 * gap;
      fa = F(a);
      if (fa >= 0.0) break;
      if (gap < 1e-290 || it > 2000)
        throw Error("solve_Q: bracket expansion failed (left)");
    }
  }

  // Illinois: keep the bracket [a, b] with fa >= 0 >= fb.
  double x = 0.5 * (a + b), fx;
  for (int it = 0; it < 300; ++it) {
    x = (fb - fa != 0.0) ? (a * fb - b * fa) / (fb - fa) : 0.5 * (a + b);
    if (!(x > a && x < b)) x = 0.5 * (a + b);
    fx = F(x);
    if (std::abs(fx) < 5e-14) return x;
    if (fx > 0.0) {
      a = x;
      fa = fx;
      fb *= 0.5;
    } else {
      b = x;
      fb = fx;
      fa *= 0.5;
    }
    if (b - a < 1e-15 * std::max(1.0, std::abs(x))) return x;
  }
  return x;
}

struct Derived {
  double D = 0.0;       // alpha + chi + mu (1 - q)
  double ac = 0.0;      // alpha + chi
  double Delta_hat = 0.0;
  double q0_hat = 0.0;
};

Derived derive_conjugates(double alpha, double mu, double q, double chi) {
  Derived d;
  d.ac = alpha + chi;
  d.D = d.ac + mu * (1.0 - q);
  if (!(d.ac * d.D > 0.0))
    throw SingularKernelError("conjugates: (alpha+chi)*D <= 0, validity lost");
  d.Delta_hat = alpha * mu * mu * (1.0 - q) / (d.ac * d.D);
  d.q0_hat = alpha * mu * mu * q / (d.D * d.D);
  return d;
}

}  // namespace

double log_xi_minus_one(double z, const SaddlePoint& sp) {
  const Kernel ker = Kernel::make(sp.Q_hat, sp.Delta_hat, sp.q0_hat);
  return ker.base(z) - sp.K;
}

double xi_limit(double z, const SaddlePoint& sp) {
  return 1.0 + std::exp(log_xi_minus_one(z, sp));
}

SaddlePoint initial_guess(double alpha, double rho, double mu) {
  const double r = std::sqrt(rho / alpha);
  const double s = mu >= 0.0 ? 1.0 : -1.0;
  SaddlePoint sp;
  sp.K = std::log((1.0 - rho) / rho);
  sp.chi = s * alpha * r / (1.0 - s * r);
  sp.Q_hat = std::abs(mu) * r * (1.0 - s * r);
  sp.q = rho * rho;
  const Derived d = derive_conjugates(alpha, mu, sp.q, sp.chi);
  sp.Delta_hat = d.Delta_hat;
  sp.q0_hat = d.q0_hat;
  return sp;
}

std::array<double, 6> saddle_residuals(double alpha, double rho, double mu,
                                       const SaddlePoint& sp,
                                       const GaussHermite& rule) {
  const Derived d = derive_conjugates(alpha, mu, sp.q, sp.chi);
  const Kernel ker = Kernel::make(sp.Q_hat, sp.Delta_hat, sp.q0_hat);
  const Integrals I =
      integrals_at(rule, ker, sp.K, sp.Q_hat, sp.Delta_hat, sp.q0_hat);
  return {sp.chi - mu * rho / sp.Q_hat,
          sp.q - I.q_integral,
          1.0 - I.unit,
          rho - I.occupancy,
          sp.Delta_hat - d.Delta_hat,
          sp.q0_hat - d.q0_hat};
}

SaddleResult solve_saddle(double alpha, double rho, double mu,
                          const SaddlePoint& init, const SolveOptions& opts,
                          const GaussHermite& rule) {
  if (mu == 0.0) throw std::invalid_argument("solve_saddle: mu must be nonzero");
  if (!(rho > 0.0) || !(rho < alpha))
    throw std::invalid_argument("solve_saddle: need 0 < rho < alpha");

  // q = 0 (with q0_hat = 0) solves the stationarity system identically at
  // every mu, so the iterate must never be clamped onto it exactly: past the
  // bifurcation where that family loses stability the physical solution has
  // q > 0 and an absorbed iterate could not escape. Keep a tiny positive
  // floor instead, and verify stability whenever the solve lands on it.
  constexpr double kQFloor = 1e-12;
  double q = std::clamp(init.q, kQFloor, 1.0 - 1e-9);
  double chi = init.chi;
  double Q = init.Q_hat;
  double K = init.K;

  auto fail = [&](const std::string& why, double rmax, int iters) {
    throw SaddleSolveError("solve_saddle(mu=" + std::to_string(mu) + "): " + why,
                           mu, q, chi, Q, 0.0, 0.0, K, rmax, iters);
  };

  // Joint scalar solve of the rho and unit equations for (K, Q_hat) at
  // fixed (Delta_hat, q0_hat); returns the integrals at the solution.
  auto inner_solve = [&](const Derived& d, double& K_io, double& Q_io) {
    if (Q_io <= std::max(d.Delta_hat, 0.0))
      Q_io = std::max(d.Delta_hat, 0.0) * (1.0 + 1e-6) + 1e-300;
    for (int inner = 0; inner < 12; ++inner) {
      const Kernel kq = Kernel::make(Q_io, d.Delta_hat, d.q0_hat);
      K_io = solve_K(rule, kq, rho, K_io);
      const double Q_next = solve_Q(rule, K_io, d.Delta_hat, d.q0_hat, rho, Q_io);
      const bool settled =
          std::abs(Q_next - Q_io) <= 1e-12 * std::max(std::abs(Q_next), 1e-12);
      Q_io = Q_next;
      if (settled) break;
    }
    const Kernel ker = Kernel::make(Q_io, d.Delta_hat, d.q0_hat);
    return integrals_at(rule, ker, K_io, Q_io, d.Delta_hat, d.q0_hat);
  };

  bool reseeded = false;
  double rmax = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    Derived d;
    try {
      d = derive_conjugates(alpha, mu, q, chi);
    } catch (const SingularKernelError& e) {
      fail(e.what(), rmax, iter);
    }

    const Integrals I = inner_solve(d, K, Q);
    const double q_new = I.q_integral;
    const double chi_new = mu * rho / Q;

    SaddleResult res;
    res.sp = SaddlePoint{q, chi, Q, d.q0_hat, d.Delta_hat, K};
    res.residuals = {chi - chi_new, q - q_new, 1.0 - I.unit, rho - I.occupancy,
                     0.0, 0.0};
    rmax = 0.0;
    for (double r : res.residuals) rmax = std::max(rmax, std::abs(r));
    res.residual_max = rmax;
    res.iters = iter;
    if (rmax < opts.tol) {
      if (q < 1e-7 && !reseeded) {
        // Converged onto the q -> 0 family: accept only if it is locally
        // stable, i.e. the linearized gain of the q update is below 1.
        bool unstable = false;
        try {
          const double qt = 1e-5;
          const Derived dt = derive_conjugates(alpha, mu, qt, chi);
          double Kt = K, Qt = Q;
          const Integrals It = inner_solve(dt, Kt, Qt);
          unstable = It.q_integral > qt * (1.0 + 1e-7);
        } catch (const Error&) {
        }
        if (unstable) {
          reseeded = true;
          q = 1e-3;
          continue;
        }
      }
      return res;
    }

    q = std::clamp(q + opts.damping * (q_new - q), kQFloor, 1.0 - 1e-12);
    chi = chi + opts.damping * (chi_new - chi);
  }
  fail("no convergence after max_iter (residual_max=" + std::to_string(rmax) + ")",
       rmax, opts.max_iter);
  return {};  // unreachable
}

double free_entropy(double alpha, double rho, double mu, const SaddlePoint& sp,
                    const GaussHermite& rule) {
  if (mu == 0.0) throw std::invalid_argument("free_entropy: mu must be nonzero");
  const double ac = alpha + sp.chi;
  const double D = ac + mu * (1.0 - sp.q);
  if (!(D > 0.0) || !(ac > 0.0))
    throw SingularKernelError("free_entropy: log arguments non-positive");
  const Kernel ker = Kernel::make(sp.Q_hat, sp.Delta_hat, sp.q0_hat);
  const ZQuad zq = make_zquad(rule, ker, sp.K);
  double dz = 0.0;
  zq.each([&](double z, double w) { dz += w * softplus(ker.base(z) - sp.K); });
  const double q1_hat = sp.Delta_hat + sp.q0_hat;
  return -0.5 * alpha * std::log(D) + 0.5 * alpha * std::log(ac) -
         0.5 * alpha * mu * sp.q / D + 0.5 * sp.Q_hat -
         0.5 * q1_hat * (1.0 + sp.chi / mu) + 0.5 * sp.q0_hat * sp.q +
         sp.K * rho + dz;
}

double typical_lambda(double alpha, double rho, double mu,
                      const SaddlePoint& sp) {
  (void)rho;
  const double ac = alpha + sp.chi;
  const double D = ac + mu * (1.0 - sp.q);
  const double q1_hat = sp.Delta_hat + sp.q0_hat;
  return alpha / D - alpha * mu * sp.q * (1.0 - sp.q) / (D * D) -
         q1_hat * sp.chi / (mu * mu);
}

RsPoint rs_point(double alpha, double rho, double mu, const SaddlePoint& init,
                 const SolveOptions& opts, const GaussHermite& rule) {
  const SaddleResult res = solve_saddle(alpha, rho, mu, init, opts, rule);
  RsPoint p;
  p.mu = mu;
  p.saddle = res.sp;
  p.phi = free_entropy(alpha, rho, mu, res.sp, rule);
  p.lambda = typical_lambda(alpha, rho, mu, res.sp);
  p.sigma = p.phi + 0.5 * mu * p.lambda;
  p.residual_max = res.residual_max;
  p.iters = res.iters;
  return p;
}

namespace {

// Continuation step from the converged saddle at mu_prev to mu. A coarse user
// grid can out-jump the warm start's basin, so on failure retry with
// geometric midpoints between |mu_prev| and |mu| re-seeding along the way.
// The grid controls what is sampled, not the step the solver must absorb.
RsPoint rs_point_continued(double alpha, double rho, double mu_prev,
                           const SaddlePoint& warm, double mu,
                           const SolveOptions& opts, const GaussHermite& rule) {
  try {
    return rs_point(alpha, rho, mu, warm, opts, rule);
  } catch (const Error&) {
    // fall through to sub-stepping
  }
  const double s = mu > 0 ? 1.0 : -1.0;
  const double lo = std::abs(mu_prev);
  const double hi = std::abs(mu);
  if (lo > 0.0 && lo < hi) {
    for (int substeps = 2; substeps <= 64; substeps *= 2) {
      const double ratio = std::log(hi / lo) / substeps;
      SaddlePoint sp = warm;
      try {
        RsPoint p;
        for (int k = 1; k <= substeps; ++k) {
          p = rs_point(alpha, rho, s * lo * std::exp(ratio * k), sp, opts, rule);
          sp = p.saddle;
        }
        return p;
      } catch (const Error&) {
        // halve the step and try again
      }
    }
  }
  // Give up; surface the direct step's failure.
  return rs_point(alpha, rho, mu, warm, opts, rule);
}

}  // namespace

RsCurve rs_curve(double alpha, double rho, const std::vector<double>& mu_grid,
                 const SolveOptions& opts, bool collect_failures) {
  if (mu_grid.empty()) throw std::invalid_argument("rs_curve: empty mu grid");
  for (double mu : mu_grid) {
    if (mu == 0.0) throw std::invalid_argument("rs_curve: mu grid must exclude 0");
    if (mu * mu_grid.front() < 0.0)
      throw std::invalid_argument("rs_curve: mu grid must be single-signed");
  }
  std::vector<double> grid = mu_grid;
  std::sort(grid.begin(), grid.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });

  const GaussHermite rule = GaussHermite::make(opts.quad_nodes);
  RsCurve out;
  SaddlePoint warm = initial_guess(alpha, rho, grid.front());
  double mu_prev = 0.0;
  bool have_warm_solution = false;
  for (double mu : grid) {
    try {
      const RsPoint p =
          have_warm_solution
              ? rs_point_continued(alpha, rho, mu_prev, warm, mu, opts, rule)
              : rs_point(alpha, rho, mu, warm, opts, rule);
      out.points.push_back(p);
      warm = p.saddle;
      mu_prev = mu;
      have_warm_solution = true;
    } catch (const Error& e) {
      if (!collect_failures) throw;
      out.failures.emplace_back(mu, e.what());
      if (!have_warm_solution) warm = initial_guess(alpha, rho, mu);
    }
  }
  return out;
}

std::vector<double> geometric_grid(double lo_abs, double hi_abs, int n,
                                   int sign) {
  if (n < 1 || !(lo_abs > 0.0) || !(hi_abs >= lo_abs) || sign == 0)
    throw std::invalid_argument("geometric_grid: bad arguments");
  std::vector<double> grid(n);
  const double s = sign > 0 ? 1.0 : -1.0;
  if (n == 1) {
    grid[0] = s * lo_abs;
    return grid;
  }
  const double ratio = std::log(hi_abs / lo_abs) / (n - 1);
  for (int i = 0; i < n; ++i) grid[i] = s * lo_abs * std::exp(ratio * i);
  return grid;
}

double legendre_free_entropy(const std::vector<RsPoint>& curve, double mu) {
  if (curve.empty()) throw std::invalid_argument("legendre_free_entropy: empty curve");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : curve)
    best = std::max(best, -0.5 * mu * p.lambda + p.sigma);
  return best;
}

}  // namespace ric
