#pragma once
//
// C-infinity cutoffs built from e^{-1/x}. Every function is a template over
// plain doubles and Jet<double, N>, so derivatives come out exactly.
//

#include <cmath>

#include "curvlens/jet.hpp"

namespace curvlens {

inline double scalar_value(double x) { return x; }
template <class T, int N>
T scalar_value(const Jet<T, N>& x) {
  return x.c[0];
}

namespace window {

// e^{-1/x} for x > 0, identically zero otherwise
template <class X>
X flat_exp(const X& x) {
  if (!(scalar_value(x) > 0.0))
    return X(0.0);
  using std::exp;
  return exp(-1.0 / x);
}

// 0 for x <= 0, 1 for x >= 1, smooth and monotone between
template <class X>
X smoothstep(const X& x) {
  const double v = scalar_value(x);
  if (v <= 0.0)
    return X(0.0);
  if (v >= 1.0)
    return X(1.0);
  const X a = flat_exp(x);
  const X b = flat_exp(1.0 - x);
  return a / (a + b);
}

template <class X>
X abs_even(const X& x) {
  return scalar_value(x) < 0.0 ? X(-x) : x;
}

} // namespace window

// Littlewood-Paley family and the auxiliary even cutoffs.
//
//   beta0(t) = 1 on [0,1], 0 on [2,inf)
//   beta(t)  = beta0(t) - beta0(2t), supported in (1/2, 2)
//   beta0(t) + sum_{k=1..K} beta(2^{-k} t) = beta0(2^{-K} t)
//
// rho is 1 on |t| <= 1/2 and 0 on |t| >= 1; eta is 1 near 0 and 0 on
// |t| >= 1/2.
struct WindowFamily {
  template <class X>
  X beta0(const X& t) const {
    return window::smoothstep(2.0 - window::abs_even(t));
  }
  template <class X>
  X beta(const X& t) const {
    const X a = window::abs_even(t);
    return beta0(a) - beta0(2.0 * a);
  }
  // beta(2^{-k} t)
  template <class X>
  X beta_dyadic(int k, const X& t) const {
    return beta(t * std::ldexp(1.0, -k));
  }
  template <class X>
  X rho(const X& t) const {
    return beta0(2.0 * t);
  }
  template <class X>
  X eta(const X& t) const {
    return beta0(4.0 * t);
  }
};

// Smooth bump equal to 1 on [lo + w, hi - w] and 0 outside (lo, hi).
struct BandCutoff {
  double lo = 0.3;
  double hi = 2.8;
  double ramp = 0.3;

  template <class X>
  X operator()(const X& d) const {
    return window::smoothstep((d - lo) / ramp) * window::smoothstep((hi - d) / ramp);
  }
};

} // namespace curvlens
