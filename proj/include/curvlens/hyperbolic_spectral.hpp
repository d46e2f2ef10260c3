#pragma once
//
// Radial kernels on hyperbolic space: descent operators (1/sinh t d/dt)^m
// applied by jets, the even-dimension descent integral, the closed-form H^3
// resolvent, spherical functions and band projectors, and the dyadic pieces
// S_0, S_k of the resolvent written through the wave group.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "curvlens/errors.hpp"
#include "curvlens/jet.hpp"
#include "curvlens/special_functions.hpp"
#include "curvlens/windows.hpp"

namespace curvlens::hyperbolic {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

struct HyperbolicContext {
  int n = 3;
  double kappa = 1.0;

  double shift() const { return kappa * 0.25 * (n - 1) * (n - 1); }
  void validate() const {
    if (n < 2 || n > 4)
      throw DomainError("HyperbolicContext: dimension must be 2, 3 or 4");
    if (!(kappa > 0.0))
      throw DomainError("HyperbolicContext: |curvature| must be positive");
  }
};

// (1/sinh t d/dt)^m g at t, with g evaluated on Jet<double, N>.
template <int N, class G>
auto jet_descend_odd(const G& g, int m, double t) {
  if (!(t > 0.0))
    throw DomainError("jet_descend_odd: radius must be positive");
  if (m < 0 || m > N)
    throw DomainError("jet_descend_odd: jet order insufficient for " + std::to_string(m) + " descents");
  using J = Jet<double, N>;
  const J x = J::variable(t);
  auto v = g(x);
  const J inv = 1.0 / sinh(x);
  for (int i = 0; i < m; ++i)
    v = v.differentiate() * inv;
  return v.c[0];
}

namespace detail {

inline special::Rule1D composite_gl(double lo, double hi, double h, int q = 16) {
  special::Rule1D out;
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / h)));
  const special::Rule1D ref = special::gauss_legendre_rule(q);
  const double width = (hi - lo) / panels;
  out.nodes.reserve(static_cast<std::size_t>(panels * q));
  out.weights.reserve(static_cast<std::size_t>(panels * q));
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
      out.nodes.push_back(a + 0.5 * width * (ref.nodes[i] + 1.0));
      out.weights.push_back(0.5 * width * ref.weights[i]);
    }
  }
  return out;
}

} // namespace detail

// int_t^s_max sinh s (cosh s - cosh t)^{-1/2} (1/sinh s d/ds)^{n/2} g(s) ds.
// With s = t + u^2 the integrand is bounded at u = 0, since
// cosh s - cosh t = 2 sinh((s+t)/2) sinh(u^2/2). freq bounds the oscillation
// rate of g and sets the panel width.
template <class G>
cplx descend_even(const G& g, int n, double t, double s_max, double freq = 1.0) {
  if (n % 2 != 0 || n < 2)
    throw DomainError("descend_even: even dimension expected");
  if (!(t > 0.0))
    throw DomainError("descend_even: radius must be positive");
  if (t >= s_max)
    return 0.0;
  const int m = n / 2;
  const double u_max = std::sqrt(s_max - t);
  auto integrand = [&](double u) -> cplx {
    const double s = t + u * u;
    const cplx h = jet_descend_odd<4>(g, m, s);
    return 2.0 * u * std::sinh(s) * h / std::sqrt(2.0 * std::sinh(0.5 * (s + t)) * std::sinh(0.5 * u * u));
  };
  const double h = std::min(0.125, 2.0 * pi / (2.0 * std::abs(freq) * u_max + 1.0));
  const special::Rule1D rule = detail::composite_gl(0.0, u_max, h);
  cplx acc = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const cplx v = integrand(rule.nodes[i]);
    peak = std::max(peak, std::abs(v));
    acc += rule.weights[i] * v;
  }
  if (std::abs(integrand(u_max)) > 1e-8 * peak)
    throw DomainError("descend_even: integrand has not decayed at s_max (nonintegrable or truncated input)");
  return acc;
}

// kernel of (P^2 + z^2)^{-1} on H^3: e^{-z r} / (4 pi sinh r)
inline cplx h3_resolvent_kernel(cplx z, double r) {
  if (!(z.real() > 0.0))
    throw DomainError("h3_resolvent_kernel: need Re z > 0");
  if (!(r > 0.0))
    throw DomainError("h3_resolvent_kernel: radius must be positive");
  return std::exp(-z * r) / (4.0 * pi * std::sinh(r));
}

// Re z > 0 partner of w = lambda + i mu: z = -i sgn(mu) w, so z^2 = -w^2.
inline cplx z_from_root(double lambda, double mu) {
  const double s = mu >= 0.0 ? 1.0 : -1.0;
  return cplx(0.0, -s) * cplx(lambda, mu);
}

// sin(mu r) / (mu sinh r); r/sinh r at mu = 0 and 1 at r = 0.
inline double spherical_function(double mu, double r) {
  if (r < 0.0)
    throw DomainError("spherical_function: negative radius");
  if (r == 0.0)
    return 1.0;
  const double x = mu * r;
  const double sinc = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return sinc * r / std::sinh(r);
}
template <class T, int N>
Jet<T, N> spherical_function(double mu, const Jet<T, N>& r) {
  return sin(r * mu) / (sinh(r) * mu);
}

// d nu(mu) = mu^2 / (2 pi^2) d mu on H^3
inline double plancherel_density(int n, double mu) {
  if (n != 3)
    throw DomainError("plancherel_density: only the H^3 density is available");
  if (mu < 0.0)
    throw DomainError("plancherel_density: mu must be nonnegative");
  return mu * mu / (2.0 * pi * pi);
}

// mu sin(mu r) / (2 pi^2 sinh r), the band-projector integrand phi_mu(r) dnu/dmu
inline double band_integrand(double mu, double r) {
  if (r == 0.0)
    return plancherel_density(3, mu);
  return mu * std::sin(mu * r) / (2.0 * pi * pi * std::sinh(r));
}

// Kernel of 1_{[lambda, lambda + 1/T]}(P) on H^3 by Gauss-Legendre in mu,
// 64 nodes per unit length, panel count doubled until successive values
// agree to 1e-10.
inline double band_projector_kernel(double lambda, double T, double r) {
  if (lambda < 0.0 || T < 1.0)
    throw DomainError("band_projector_kernel: need lambda >= 0 and T >= 1");
  const double lo = lambda, hi = lambda + 1.0 / T;
  const special::Rule1D ref = special::gauss_legendre_rule(64);
  auto integrate = [&](int panels) {
    double acc = 0.0;
    const double w = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double a = lo + p * w;
      for (std::size_t i = 0; i < ref.nodes.size(); ++i)
        acc += 0.5 * w * ref.weights[i] * band_integrand(a + 0.5 * w * (ref.nodes[i] + 1.0), r);
    }
    return acc;
  };
  int panels = std::max(1, static_cast<int>(std::ceil(hi - lo)));
  double prev = integrate(panels);
  for (int it = 0; it < 12; ++it) {
    panels *= 2;
    const double cur = integrate(panels);
    if (std::abs(cur - prev) <= 1e-10 * std::max(std::abs(cur), 1e-300))
      return cur;
    prev = cur;
  }
  throw ConvergenceError("band_projector_kernel: no Cauchy stability", static_cast<std::size_t>(panels));
}

// Same kernel from the antiderivative of mu sin(mu r):
// [sin(mu r)/r^2 - mu cos(mu r)/r]_lambda^{lambda+1/T} / (2 pi^2 sinh r).
inline double band_projector_closed(double lambda, double T, double r) {
  const double a = lambda, b = lambda + 1.0 / T;
  if (b * r < 1e-2) {
    // mu sin(mu r) = mu^2 r - mu^4 r^3 / 6 + mu^6 r^5 / 120
    auto prim = [r](double m) {
      const double m3 = m * m * m;
      return m3 * r / 3.0 - m3 * m * m * r * r * r / 30.0 + m3 * m3 * m * std::pow(r, 5) / 840.0;
    };
    const double v = prim(b) - prim(a);
    return r == 0.0 ? (b * b * b - a * a * a) / (6.0 * pi * pi) : v / (2.0 * pi * pi * std::sinh(r));
  }
  auto prim = [r](double m) { return std::sin(m * r) / (r * r) - m * std::cos(m * r) / r; };
  return (prim(b) - prim(a)) / (2.0 * pi * pi * std::sinh(r));
}

// int_0^d (band kernel)(x) sinh x dx = (1/(2 pi^2)) int_a^b (1 - cos(mu d)) dmu,
// so that the reduced zonal operator is a difference of this primitive.
inline double band_projector_primitive(double lambda, double T, double d) {
  const double a = lambda, b = lambda + 1.0 / T;
  if (b * d < 0.05) {
    // 1 - cos(x) = x^2/2 - x^4/24 + x^6/720 - x^8/40320
    auto prim = [d](double m) {
      const double x = m * d;
      const double x2 = x * x;
      return m * x2 * (1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0 - x2 * x2 * x2 / 362880.0);
    };
    return (prim(b) - prim(a)) / (2.0 * pi * pi);
  }
  return ((b - a) - (std::sin(b * d) - std::sin(a * d)) / d) / (2.0 * pi * pi);
}

// Spectral side of the resolvent: (1/(2 pi^2 sinh r)) int_0^inf mu sin(mu r) / (mu^2 + z^2) dmu.
// Gauss-Legendre on [0, M] with M r >= 40, then an integration-by-parts
// expansion of the tail using exact derivatives of mu/(mu^2+z^2).
inline cplx plancherel_resolvent(cplx z, double r) {
  if (!(z.real() > 0.0))
    throw DomainError("plancherel_resolvent: need Re z > 0");
  if (!(r > 0.0))
    throw DomainError("plancherel_resolvent: radius must be positive");
  const double M = std::max(40.0 / r, 40.0 + 4.0 * std::abs(z));
  const cplx iz(-z.imag(), z.real());
  auto f = [&](double mu) { return mu / (mu * mu + z * z); };
  const special::Rule1D rule = detail::composite_gl(0.0, M, 0.25, 16);
  cplx body = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    body += rule.weights[i] * f(rule.nodes[i]) * std::sin(rule.nodes[i] * r);

  // f^{(j)}(M) = (1/2)(-1)^j j! [(M + iz)^{-j-1} + (M - iz)^{-j-1}]
  auto deriv = [&](int j) {
    double fact = 1.0;
    for (int i = 2; i <= j; ++i)
      fact *= i;
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    return 0.5 * sign * fact * (std::pow(M + iz, -(j + 1)) + std::pow(M - iz, -(j + 1)));
  };
  // I(f) = f(M) cos(Mr)/r - f'(M) sin(Mr)/r^2 - I(f'')/r^2
  cplx tail = 0.0;
  double scale = 1.0;
  const double c = std::cos(M * r), s = std::sin(M * r);
  for (int j = 0; j < 24; j += 2) {
    const cplx term = scale * (deriv(j) * c / r - deriv(j + 1) * s / (r * r));
    tail += term;
    scale *= -1.0 / (r * r);
    if (std::abs(term) < 1e-18 * std::abs(body))
      break;
  }
  return (body + tail) / (2.0 * pi * pi * std::sinh(r));
}

// ---------------------------------------------------------------------------
// dyadic pieces of the resolvent
// ---------------------------------------------------------------------------

// Time profile sgn(mu)/(i w) e^{i sgn(mu) lambda t - |mu| t}, w = lambda + i mu,
// multiplied by a window; evaluated on jets.
struct WaveProfile {
  double lambda = 1.0;
  double mu = 1.0;

  template <class X>
  auto operator()(const X& t) const {
    const double s = mu >= 0.0 ? 1.0 : -1.0;
    const cplx pre = s / (cplx(0.0, 1.0) * cplx(lambda, mu));
    using std::exp;
    return exp(t * cplx(-std::abs(mu), s * lambda)) * pre;
  }
};

namespace detail {
inline void check_dyadic_params(double lambda, double mu, double r) {
  if (lambda < 1.0)
    throw DomainError("dyadic kernel: need lambda >= 1");
  if (mu == 0.0)
    throw DomainError("dyadic kernel: need mu != 0");
  if (!(r > 0.0))
    throw DomainError("dyadic kernel: radius must be positive");
}
} // namespace detail

// Uncalibrated kernel: odd n applies (1/sinh d/dt)^{(n-1)/2} to window * profile,
// even n uses the descent integral. support_end is where the window vanishes.
template <class Window>
cplx windowed_wave_kernel_raw(const HyperbolicContext& ctx, const Window& win, double support_end,
                              double lambda, double mu, double r) {
  ctx.validate();
  const WaveProfile prof{lambda, mu};
  auto g = [&](const auto& t) { return win(t) * prof(t); };
  if (ctx.n % 2 == 1) {
    if (r >= support_end)
      return 0.0;
    return jet_descend_odd<4>(g, (ctx.n - 1) / 2, r);
  }
  return descend_even(g, ctx.n, r, support_end, lambda);
}

// c_n. On H^3 the kernel of int g(t) cos(tP) dt is -g'(r)/(4 pi sinh r),
// i.e. c_3 = -1/(4 pi); calibrate_c3 recovers it from the closed form.
inline double kernel_constant(int n) {
  if (n == 3)
    return -1.0 / (4.0 * pi);
  return 1.0;
}
inline bool kernel_constant_calibrated(int n) { return n == 3; }

inline cplx s0_kernel(const HyperbolicContext& ctx, double lambda, double mu, double r,
                      const WindowFamily& win = {}) {
  detail::check_dyadic_params(lambda, mu, r);
  auto w = [&](const auto& t) { return win.beta0(t); };
  return kernel_constant(ctx.n) * windowed_wave_kernel_raw(ctx, w, 2.0, lambda, mu, r);
}

inline cplx sk_kernel(const HyperbolicContext& ctx, int k, double lambda, double mu, double r,
                      const WindowFamily& win = {}) {
  detail::check_dyadic_params(lambda, mu, r);
  if (k < 1)
    throw DomainError("sk_kernel: dyadic index must be at least 1");
  auto w = [&](const auto& t) { return win.beta_dyadic(k, t); };
  const double hi = std::ldexp(1.0, k + 1);
  if (ctx.n % 2 == 1 && r <= std::ldexp(1.0, k - 1))
    return 0.0;
  return kernel_constant(ctx.n) * windowed_wave_kernel_raw(ctx, w, hi, lambda, mu, r);
}

// Matches the uncalibrated dyadic reconstruction on H^3 against the closed
// form of (Delta + 1 + w^2)^{-1} = -(P^2 + z^2)^{-1} at a radius where two
// windows overlap. Returns the real constant and the relative imaginary part.
struct Calibration {
  double constant = 0.0;
  double imaginary_ratio = 0.0;
  double spread = 0.0; // relative variation over the probe radii
};

inline Calibration calibrate_c3(double lambda = 2.0, double mu = 0.5, const WindowFamily& win = {}) {
  const HyperbolicContext ctx{3};
  const cplx z = z_from_root(lambda, mu);
  std::vector<cplx> ratios;
  for (double r : {0.7, 1.5, 3.0}) {
    cplx raw = windowed_wave_kernel_raw(ctx, [&](const auto& t) { return win.beta0(t); }, 2.0, lambda, mu, r);
    for (int k = 1; k <= 3; ++k)
      raw += windowed_wave_kernel_raw(
          ctx, [&](const auto& t) { return win.beta_dyadic(k, t); }, std::ldexp(1.0, k + 1), lambda, mu, r);
    ratios.push_back(-h3_resolvent_kernel(z, r) / raw);
  }
  Calibration c;
  c.constant = ratios[0].real();
  for (const cplx& q : ratios) {
    c.imaginary_ratio = std::max(c.imaginary_ratio, std::abs(q.imag() / q.real()));
    c.spread = std::max(c.spread, std::abs(q - ratios[0]) / std::abs(ratios[0]));
  }
  return c;
}

// S_0 + sum_{k<=k_max} S_k
inline cplx dyadic_sum_kernel(const HyperbolicContext& ctx, int k_max, double lambda, double mu, double r,
                              const WindowFamily& win = {}) {
  cplx acc = s0_kernel(ctx, lambda, mu, r, win);
  for (int k = 1; k <= k_max; ++k)
    acc += sk_kernel(ctx, k, lambda, mu, r, win);
  return acc;
}

// A radial kernel with the metadata used by the norm engine and the exporters.
struct RadialProfile {
  std::function<cplx(double)> evaluator;
  double support = INFINITY;
  double singularity_order = 0.0; // |K(r)| ~ r^{-order} as r -> 0

  cplx operator()(double r) const { return evaluator(r); }

  // log-slope of |K| between r0 and r0/10
  double measured_singularity_order(double r0 = 1e-3) const {
    const double a = std::abs(evaluator(r0)), b = std::abs(evaluator(0.1 * r0));
    return std::log(b / a) / std::log(10.0);
  }

  void write_csv(std::ostream& os, const std::vector<double>& radii) const {
    os << "r,re,im\n";
    os.precision(17);
    for (double r : radii) {
      const cplx v = evaluator(r);
      os << r << ',' << v.real() << ',' << v.imag() << '\n';
    }
  }
};

inline RadialProfile h3_resolvent_profile(cplx z) {
  return {[z](double r) { return h3_resolvent_kernel(z, r); }, INFINITY, 1.0};
}

} // namespace curvlens::hyperbolic
