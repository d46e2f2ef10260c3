#pragma once
//
// Gegenbauer polynomials, Gauss-Jacobi rules and sphere areas.
//

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "curvlens/errors.hpp"

namespace curvlens::special {

struct GegenbauerParams {
  int degree = 0;
  double alpha = 1.0;
  double t = 0.0;
};

inline void check_gegenbauer_domain(double alpha, double t) {
  if (!(alpha > 0.0))
    throw DomainError("gegenbauer: alpha must be positive");
  if (!(std::abs(t) <= 1.0))
    throw DomainError("gegenbauer: argument outside [-1, 1]");
}

// C_k^alpha(t) by the forward three-term recurrence
//   k C_k = 2(k+alpha-1) t C_{k-1} - (k+2alpha-2) C_{k-2}.
inline double gegenbauer_eval(const GegenbauerParams& p) {
  check_gegenbauer_domain(p.alpha, p.t);
  if (p.degree < 0)
    throw DomainError("gegenbauer: negative degree");
  if (p.degree == 0)
    return 1.0;
  double prev = 1.0;
  double cur = 2.0 * p.alpha * p.t;
  for (int k = 2; k <= p.degree; ++k) {
    const double next =
        (2.0 * (k + p.alpha - 1.0) * p.t * cur - (k + 2.0 * p.alpha - 2.0) * prev) / k;
    prev = cur;
    cur = next;
  }
  return cur;
}

// All values C_0..C_K at one argument; out must hold K+1 entries.
inline void gegenbauer_all(int K, double alpha, double t, double* out) {
  out[0] = 1.0;
  if (K == 0)
    return;
  out[1] = 2.0 * alpha * t;
  for (int k = 2; k <= K; ++k)
    out[k] = (2.0 * (k + alpha - 1.0) * t * out[k - 1] - (k + 2.0 * alpha - 2.0) * out[k - 2]) / k;
}

inline std::vector<double> gegenbauer_all(int K, double alpha, double t) {
  check_gegenbauer_domain(alpha, t);
  std::vector<double> v(static_cast<std::size_t>(K) + 1);
  gegenbauer_all(K, alpha, t, v.data());
  return v;
}

// C_k^alpha(1) = (2alpha)_k / k!
inline double gegenbauer_at_one(int k, double alpha) {
  return std::exp(std::lgamma(k + 2.0 * alpha) - std::lgamma(k + 1.0) - std::lgamma(2.0 * alpha));
}

// Jacobi P_m^{(a,b)}(x) and P_{m-1}^{(a,b)}(x).
inline void jacobi_pair(int m, double a, double b, double x, double& pm, double& pm1) {
  double p0 = 1.0;
  if (m == 0) {
    pm = 1.0;
    pm1 = 0.0;
    return;
  }
  double p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
  for (int j = 2; j <= m; ++j) {
    const double c = 2.0 * j + a + b;
    const double p2 = ((c - 1.0) * (c * (c - 2.0) * x + a * a - b * b) * p1 -
                       2.0 * (j + a - 1.0) * (j + b - 1.0) * c * p0) /
                      (2.0 * j * (j + a + b) * (c - 2.0));
    p0 = p1;
    p1 = p2;
  }
  pm = p1;
  pm1 = p0;
}

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Jacobi nodes and weights for (1-t)^a (1+t)^b on [-1, 1].
// Newton iteration with deflation against already-found roots, seeded by
// the Chebyshev-type angle approximation of each root.
inline Rule1D gauss_jacobi_rule(int m, double a, double b) {
  if (m < 1)
    throw DomainError("gauss_jacobi_rule: need at least one node");
  if (!(a > -1.0) || !(b > -1.0))
    throw DomainError("gauss_jacobi_rule: exponents must exceed -1");

  constexpr int max_iter = 100;
  constexpr double target = 1e-14;
  const double pi = std::numbers::pi;

  Rule1D rule;
  rule.nodes.resize(static_cast<std::size_t>(m));
  rule.weights.resize(static_cast<std::size_t>(m));

  const double log_norm = std::lgamma(m + a + 1.0) + std::lgamma(m + b + 1.0) -
                          std::lgamma(m + a + b + 1.0) - std::lgamma(m + 1.0) +
                          (a + b + 1.0) * std::log(2.0);

  for (int i = 0; i < m; ++i) {
    double x = std::cos(pi * (i + 0.75 + a / 2.0) / (m + (a + b + 1.0) / 2.0));
    bool done = false;
    double deriv = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      double pm = 0.0, pm1 = 0.0;
      jacobi_pair(m, a, b, x, pm, pm1);
      const double c = 2.0 * m + a + b;
      deriv = (m * ((a - b) - c * x) * pm + 2.0 * (m + a) * (m + b) * pm1) / (c * (1.0 - x * x));
      double defl = 0.0;
      for (int j = 0; j < i; ++j)
        defl += 1.0 / (x - rule.nodes[static_cast<std::size_t>(j)]);
      const double dx = pm / (deriv - pm * defl);
      x -= dx;
      if (std::abs(dx) <= target * (1.0 + std::abs(x))) {
        jacobi_pair(m, a, b, x, pm, pm1);
        deriv = (m * ((a - b) - c * x) * pm + 2.0 * (m + a) * (m + b) * pm1) / (c * (1.0 - x * x));
        done = true;
        break;
      }
    }
    if (!done || !(std::abs(x) < 1.0))
      throw ConvergenceError("gauss_jacobi_rule: Newton iteration failed", static_cast<std::size_t>(i));
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] =
        std::exp(log_norm) / ((1.0 - x * x) * deriv * deriv);
  }
  return rule;
}

inline Rule1D gauss_legendre_rule(int m) { return gauss_jacobi_rule(m, 0.0, 0.0); }

// Gauss-Legendre rule mapped to [lo, hi].
inline Rule1D gauss_legendre_on(int m, double lo, double hi) {
  Rule1D r = gauss_legendre_rule(m);
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

// Surface area of the unit n-sphere S^n in R^{n+1}.
inline double sphere_area(int n) {
  if (n < 0)
    throw DomainError("sphere_area: negative dimension");
  const double h = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

} // namespace curvlens::special
