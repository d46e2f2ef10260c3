#pragma once
//
// Spectral calculus of the shifted Laplacian on the n-sphere of curvature
// kappa: eigenvalues, zonal projector kernels, multiplier kernels (resolvent,
// wave, local resolvent), the asymptotic-amplitude diagnostics for H_k and
// the curvature scaling transport.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "curvlens/errors.hpp"
#include "curvlens/grids.hpp"
#include "curvlens/jet.hpp"
#include "curvlens/special_functions.hpp"
#include "curvlens/windows.hpp"

namespace curvlens::sphere {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

struct SphereContext {
  int n = 3;
  double kappa = 1.0;

  double alpha() const { return 0.5 * (n - 1); }
  // curvature-one spectrum of sqrt(-Delta + ((n-1)/2)^2)
  double eigenvalue(int k) const { return k + alpha(); }
  double scaled_eigenvalue(int k) const { return std::sqrt(kappa) * eigenvalue(k); }
  double shift() const { return kappa * alpha() * alpha(); }
  double volume() const { return special::sphere_area(n) * std::pow(kappa, -0.5 * n); }
  // cosine of the angle subtended by geodesic distance d
  double cos_angle(double d) const { return std::cos(std::sqrt(kappa) * d); }

  void validate() const {
    if (n < 2 || n > 4)
      throw DomainError("SphereContext: dimension must be 2, 3 or 4");
    if (!(kappa > 0.0))
      throw DomainError("SphereContext: curvature must be positive");
  }
};

inline double eigenvalue(const SphereContext& ctx, int k) {
  if (k < 0)
    throw DomainError("eigenvalue: negative degree");
  return ctx.eigenvalue(k);
}

inline double scaled_eigenvalue(const SphereContext& ctx, int k) {
  if (k < 0)
    throw DomainError("scaled_eigenvalue: negative degree");
  return ctx.scaled_eigenvalue(k);
}

namespace detail {
inline std::uint64_t binom(std::int64_t m, std::int64_t r) {
  if (r < 0 || m < r)
    return 0;
  r = std::min(r, m - r);
  std::uint64_t out = 1;
  for (std::int64_t i = 1; i <= r; ++i)
    out = out * static_cast<std::uint64_t>(m - r + i) / static_cast<std::uint64_t>(i);
  return out;
}
} // namespace detail

// dim H_k = C(n+k, n) - C(n+k-2, n)
inline std::uint64_t harmonic_dim(const SphereContext& ctx, int k) {
  if (k < 0)
    throw DomainError("harmonic_dim: negative degree");
  return detail::binom(ctx.n + k, ctx.n) - detail::binom(ctx.n + k - 2, ctx.n);
}

// d_k / (vol * C_k(1)); multiplies C_k(cos angle) to give H_k.
inline double projector_scale(const SphereContext& ctx, int k) {
  return static_cast<double>(harmonic_dim(ctx, k)) /
         (ctx.volume() * special::gegenbauer_at_one(k, ctx.alpha()));
}

// H_k(x, y) as a function of cos(angle(x, y)), by the addition theorem.
inline double zonal_projector(const SphereContext& ctx, int k, double cosd) {
  const double ck = special::gegenbauer_eval({k, ctx.alpha(), cosd});
  return projector_scale(ctx, k) * ck;
}

// Spectral parameter zeta = (lambda + i mu)^2 on the principal branch.
struct SpectralParamZeta {
  cplx zeta;

  cplx root() const { return std::sqrt(zeta); }
  double lambda() const { return root().real(); }
  double mu() const { return root().imag(); }
  // Re zeta <= (Im zeta)^2, boundary included
  bool in_region() const { return zeta.real() <= zeta.imag() * zeta.imag(); }
  static SpectralParamZeta from_root(double lambda, double mu) {
    const cplx w(lambda, mu);
    return {w * w};
  }
};

// Degree window applied to multiplier coefficients.
struct DegreeWindow {
  enum class Kind { none, gaussian };
  Kind kind = Kind::none;
  double width = 0.0; // K_w in exp(-(k/K_w)^2)

  static DegreeWindow gaussian_for(int K) { return {Kind::gaussian, K / 3.0}; }
  double factor(int k) const {
    if (kind == Kind::none)
      return 1.0;
    const double x = k / width;
    return std::exp(-x * x);
  }
  std::string describe() const {
    return kind == Kind::none ? std::string("none")
                              : "gaussian(width=" + std::to_string(width) + ")";
  }
};

// sum_{k<=K} coeff[k] H_k, with the window already folded into coeff.
struct ZonalKernel {
  SphereContext ctx;
  int K = 0;
  DegreeWindow window;
  std::vector<cplx> coeff;      // multiplier times window, per degree
  std::vector<double> scale;    // projector_scale per degree
  std::vector<std::string> warnings;
  double spectrum_distance = INFINITY; // min_k |zeta - lambda_k^2| for resolvents
  double tail_estimate = 0.0;
  bool in_region = false;

  // value at cos(angle)
  cplx operator()(double cosd) const {
    const double a = ctx.alpha();
    double prev = 1.0, cur = 2.0 * a * cosd;
    cplx sum = coeff[0] * scale[0];
    if (K >= 1)
      sum += coeff[1] * scale[1] * cur;
    for (int k = 2; k <= K; ++k) {
      const double next = (2.0 * (k + a - 1.0) * cosd * cur - (k + 2.0 * a - 2.0) * prev) / k;
      prev = cur;
      cur = next;
      sum += coeff[static_cast<std::size_t>(k)] * scale[static_cast<std::size_t>(k)] * cur;
    }
    return sum;
  }
  cplx at_distance(double d) const { return (*this)(ctx.cos_angle(d)); }

  // sum_k |coeff_k| d_k / vol, a bound for sup |kernel|
  double sup_bound() const {
    double s = 0.0;
    for (int k = 0; k <= K; ++k)
      s += std::abs(coeff[static_cast<std::size_t>(k)]) *
           static_cast<double>(harmonic_dim(ctx, k)) / ctx.volume();
    return s;
  }
};

// Kernel of sum_{k<=K} m(sqrt(kappa) lambda_k) H_k with optional degree window.
inline ZonalKernel multiplier_kernel(const SphereContext& ctx, const std::function<cplx(double)>& m,
                                     int K, DegreeWindow window = {}) {
  ctx.validate();
  if (K < 1)
    throw DomainError("multiplier_kernel: truncation must be at least 1");
  ZonalKernel out;
  out.ctx = ctx;
  out.K = K;
  out.window = window;
  out.coeff.resize(static_cast<std::size_t>(K) + 1);
  out.scale.resize(static_cast<std::size_t>(K) + 1);
  for (int k = 0; k <= K; ++k) {
    out.coeff[static_cast<std::size_t>(k)] = m(ctx.scaled_eigenvalue(k)) * window.factor(k);
    out.scale[static_cast<std::size_t>(k)] = projector_scale(ctx, k);
  }
  return out;
}

// K = max(4 Re sqrt(zeta / kappa), 64)
inline int default_truncation(const SphereContext& ctx, cplx zeta) {
  const double lam = std::sqrt(zeta / ctx.kappa).real();
  return std::max(64, static_cast<int>(std::ceil(4.0 * lam)));
}

// Kernel of (Delta_kappa - kappa((n-1)/2)^2 + zeta)^{-1} = sum (zeta - kappa lambda_k^2)^{-1} H_k.
inline ZonalKernel resolvent_kernel(const SphereContext& ctx, SpectralParamZeta z, int K = 0,
                                    DegreeWindow window = {}) {
  ctx.validate();
  if (K <= 0)
    K = default_truncation(ctx, z.zeta);
  double dist = INFINITY;
  int nearest = 0;
  for (int k = 0; k <= K; ++k) {
    const double lk = ctx.scaled_eigenvalue(k);
    const double dk = std::abs(z.zeta - lk * lk);
    if (dk < dist) {
      dist = dk;
      nearest = k;
    }
  }
  if (dist < 1e-12)
    throw SpectrumHit("resolvent_kernel: zeta coincides with lambda_" + std::to_string(nearest) +
                          "^2",
                      nearest);
  const cplx zeta = z.zeta;
  ZonalKernel out = multiplier_kernel(
      ctx, [zeta](double tau) { return 1.0 / (zeta - tau * tau); }, K, window);
  out.spectrum_distance = dist;
  out.in_region = z.in_region();
  if (dist < 1e-3)
    out.warnings.push_back("zeta within " + std::to_string(dist) + " of lambda_" +
                           std::to_string(nearest) + "^2");

  // |H_k| <= d_k/vol and |zeta - lambda_k^2|^{-1} <= (lambda_k^2 - |zeta|)^{-1};
  // the series of these bounds diverges for n >= 3, so the block (K, 8K]
  // serves as the tail indicator.
  double tail = 0.0;
  const double az = std::abs(zeta);
  for (int k = K + 1; k <= 8 * K; ++k) {
    const double lk = ctx.scaled_eigenvalue(k);
    if (lk * lk <= 2.0 * az)
      tail += static_cast<double>(harmonic_dim(ctx, k)) / ctx.volume() / std::abs(zeta - lk * lk);
    else
      tail += static_cast<double>(harmonic_dim(ctx, k)) / ctx.volume() / (lk * lk - az);
  }
  out.tail_estimate = tail;
  if (tail > 1e-8 * out.sup_bound())
    out.warnings.push_back("truncation tail indicator " + std::to_string(tail) +
                           " exceeds 1e-8 of kernel scale");
  return out;
}

// cos(t * sqrt(kappa) lambda_k)
inline double wave_multiplier(const SphereContext& ctx, double t, int k) {
  return std::cos(t * ctx.scaled_eigenvalue(k));
}

// Windowed kernel of cos(tP).
inline ZonalKernel wave_kernel(const SphereContext& ctx, double t, int K, DegreeWindow window) {
  if (window.kind == DegreeWindow::Kind::none)
    throw DomainError("wave_kernel: a degree window is required");
  return multiplier_kernel(ctx, [t](double tau) { return cplx(std::cos(t * tau)); }, K, window);
}

namespace detail {

// composite Gauss-Legendre nodes on [lo, hi] with panel width <= h
inline special::Rule1D composite_gl(double lo, double hi, double h, int q = 16) {
  special::Rule1D out;
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / h)));
  const special::Rule1D ref = special::gauss_legendre_rule(q);
  const double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
      out.nodes.push_back(a + 0.5 * width * (ref.nodes[i] + 1.0));
      out.weights.push_back(0.5 * width * ref.weights[i]);
    }
  }
  return out;
}

// sgn(mu)/(i w) e^{i sgn(mu) lambda t - |mu| t}, w = lambda + i mu
inline cplx damped_wave_weight(double lambda, double mu, double t) {
  const double s = mu >= 0.0 ? 1.0 : -1.0;
  const cplx w(lambda, mu);
  return s / (cplx(0.0, 1.0) * w) * std::exp(cplx(-std::abs(mu) * t, s * lambda * t));
}

} // namespace detail

// Resolvent by integrating the windowed wave kernel against
// sgn(mu)/(i(lambda+i mu)) e^{i sgn(mu) lambda t - |mu| t} over [0, T_max].
inline ZonalKernel resolvent_via_wave(const SphereContext& ctx, SpectralParamZeta z, double t_max,
                                      int K, DegreeWindow window, int nodes_per_panel = 16) {
  ctx.validate();
  const double lambda = z.lambda(), mu = z.mu();
  if (mu == 0.0)
    throw DomainError("resolvent_via_wave: mu = 0 gives an undamped time integral");
  if (t_max * std::abs(mu) < 30.0)
    throw DomainError("resolvent_via_wave: insufficient damping, need T_max >= " +
                      std::to_string(30.0 / std::abs(mu)));
  const double top = std::abs(lambda) + ctx.scaled_eigenvalue(K) + 1.0;
  const special::Rule1D time = detail::composite_gl(0.0, t_max, std::min(0.5, pi / top), nodes_per_panel);
  std::vector<cplx> g(time.nodes.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    g[j] = time.weights[j] * detail::damped_wave_weight(lambda, mu, time.nodes[j]);

  ZonalKernel out = multiplier_kernel(ctx, [](double) { return cplx(1.0); }, K, window);
  for (int k = 0; k <= K; ++k) {
    const double lk = ctx.scaled_eigenvalue(k);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
      acc += g[j] * std::cos(time.nodes[j] * lk);
    out.coeff[static_cast<std::size_t>(k)] *= acc;
  }
  out.in_region = z.in_region();
  return out;
}

// m_{lambda,mu}(tau) = sgn(mu)/(i(lambda+i mu)) int_0^inf (1-rho(t)) e^{i sgn(mu) lambda t - |mu| t} cos(t tau) dt,
// evaluated as (zeta - tau^2)^{-1} minus the rho-localized integral over [0, 1].
inline cplx tail_multiplier(double lambda, double mu, double tau, const WindowFamily& win = {}) {
  if (lambda < 0.5 || std::abs(mu) < 0.5)
    throw DomainError("tail_multiplier: need lambda, |mu| >= 1/2");
  const cplx w(lambda, mu);
  const special::Rule1D time =
      detail::composite_gl(0.0, 1.0, std::min(0.25, pi / (std::abs(lambda) + std::abs(tau) + 1.0)));
  cplx local = 0.0;
  for (std::size_t j = 0; j < time.nodes.size(); ++j) {
    const double t = time.nodes[j];
    local += time.weights[j] * win.rho(t) * detail::damped_wave_weight(lambda, mu, t) * std::cos(t * tau);
  }
  return 1.0 / (w * w - tau * tau) - local;
}

// Local resolvent R_0^{lambda,mu} as a spectral sum: multipliers from time
// quadrature of rho(t) sgn(mu)/(i w) e^{...} cos(t tau) on [0, 1].
inline ZonalKernel local_resolvent_kernel(const SphereContext& ctx, double lambda, double mu, int K,
                                          DegreeWindow window, const WindowFamily& win = {}) {
  const special::Rule1D time = detail::composite_gl(
      0.0, 1.0, std::min(0.25, pi / (std::abs(lambda) + ctx.scaled_eigenvalue(K) + 1.0)));
  std::vector<cplx> g(time.nodes.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    g[j] = time.weights[j] * win.rho(time.nodes[j]) *
           detail::damped_wave_weight(lambda, mu, time.nodes[j]);
  return multiplier_kernel(
      ctx,
      [&](double tau) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j)
          acc += g[j] * std::cos(time.nodes[j] * tau);
        return acc;
      },
      K, window);
}

// On S^3 (curvature 1) the time integral of g(t) cos(tP) with g supported in
// [0, pi) has kernel -g'(d) / (4 pi sin d). Exact local resolvent kernel.
inline cplx local_resolvent_s3(double lambda, double mu, double d, const WindowFamily& win = {}) {
  using J = Jet<double, 1>;
  const J t = J::variable(d);
  const double s = mu >= 0.0 ? 1.0 : -1.0;
  const cplx w(lambda, mu);
  const cplx pre = s / (cplx(0.0, 1.0) * w);
  // rho(t) * pre * exp(i s lambda t - |mu| t)
  const Jet<cplx, 1> phase = t * cplx(-std::abs(mu), s * lambda);
  const Jet<cplx, 1> g = win.rho(t) * exp(phase) * pre;
  return -g.c[1] / (4.0 * pi * std::sin(d));
}

// Closed-form S^3 kernel of (Delta - 1 + zeta)^{-1}, zeta = w^2:
// -sin(w (pi - d)) / (4 pi sin d sin(pi w)).
inline cplx resolvent_s3_closed(cplx zeta, double d) {
  const cplx w = std::sqrt(zeta);
  return -std::sin(w * (pi - d)) / (4.0 * pi * std::sin(d) * std::sin(pi * w));
}

// ---------------------------------------------------------------------------
// amplitude extraction
// ---------------------------------------------------------------------------

struct AmplitudePair {
  cplx plus;  // a_+(d)
  cplx minus; // a_-(d)
  cplx predicted; // representation evaluated at d
  bool ill_conditioned = false;
};

// Solves F(d +- delta/2) = u e^{+-i pi/4} + v e^{-+i pi/4}, delta = pi/(2 lambda),
// for u = b_+ e^{i lambda d}, v = b_- e^{-i lambda d}, where F is the kernel
// divided by its geometric envelope lambda^p (sin d)^{-q}. Returns
// a_pm = b_pm * (sin d)^{-q} and the prediction lambda^p (u + v) (sin d)^{-q}.
template <class Kernel>
AmplitudePair extract_amplitudes(const Kernel& kernel, double d, double lambda, double lam_power,
                                 double sin_power, double lo, double hi,
                                 const std::function<double(double)>& envelope_sin =
                                     [](double x) { return std::sin(x); }) {
  const double delta = pi / (2.0 * lambda);
  const double dp = d + 0.5 * delta, dm = d - 0.5 * delta;
  auto normalized = [&](double x) {
    return kernel(x) * std::pow(envelope_sin(x), sin_power) / std::pow(lambda, lam_power);
  };
  const cplx fp = normalized(dp), fm = normalized(dm);
  const cplx e = std::polar(1.0, pi / 4.0);
  const cplx two_i(0.0, 2.0);
  const cplx u = (fp * e - fm * std::conj(e)) / two_i;
  const cplx v = (fm * e - fp * std::conj(e)) / two_i;
  const double env = std::pow(envelope_sin(d), -sin_power);
  AmplitudePair out;
  out.plus = u * std::polar(1.0, -lambda * d) * env;
  out.minus = v * std::polar(1.0, lambda * d) * env;
  out.predicted = std::pow(lambda, lam_power) * (u + v) * env;
  out.ill_conditioned = dm < lo || dp > hi;
  return out;
}

struct AsymptoticFit {
  int n = 3;
  int k = 0;
  double lambda = 0.0;
  double sup_ratio = 0.0;            // sup |H_k| / (1+k)^{n-1}
  double max_residual = 0.0;         // envelope-relative, over [1/lambda, 3pi/4]
  double residual_at_half_pi = 0.0;  // |H - repr| / |H| at d = pi/2
  std::vector<double> distances;
  std::vector<double> residuals;
  double derivative_bound[3] = {0.0, 0.0, 0.0}; // max |d^j a_pm| d^j
  double parity_residual = 0.0;                 // H_k(-t) vs (-1)^k H_k(t), relative to sup
  double antipodal_residual = 0.0;              // lambda-bearing phase
  double antipodal_residual_literal = 0.0;      // phase e^{+-i d(x,y*)} as printed
  int ill_conditioned_points = 0;
};

// Checks sup growth, the two-phase representation of H_k, amplitude
// derivative bounds and the antipodal identity on a distance grid.
inline AsymptoticFit projector_asymptotics_check(const SphereContext& ctx, int k, int grid_points = 400) {
  ctx.validate();
  if (ctx.kappa != 1.0)
    throw DomainError("projector_asymptotics_check: curvature-one context expected");
  const double lam = ctx.eigenvalue(k);
  if (!(1.0 / lam < 0.75 * pi))
    throw DomainError("projector_asymptotics_check: degree below asymptotic threshold");
  const int n = ctx.n;
  const double p = 0.5 * (n - 1);
  auto H = [&](double d) { return cplx(zonal_projector(ctx, k, std::cos(d))); };

  AsymptoticFit fit;
  fit.n = n;
  fit.k = k;
  fit.lambda = lam;

  double sup = 0.0;
  for (int i = 0; i <= 4 * grid_points; ++i) {
    const double d = pi * i / (4.0 * grid_points);
    sup = std::max(sup, std::abs(zonal_projector(ctx, k, std::cos(d))));
  }
  fit.sup_ratio = sup / std::pow(1.0 + k, n - 1);

  const double lo = 1.0 / lam, hi = 0.75 * pi;
  std::vector<cplx> ap, am;
  for (int i = 0; i < grid_points; ++i) {
    const double d = lo + (hi - lo) * i / (grid_points - 1);
    const AmplitudePair a = extract_amplitudes(H, d, lam, p, p, lo, hi);
    const double env = std::pow(lam, p) * (std::abs(a.plus) + std::abs(a.minus));
    const double res = std::abs(H(d) - a.predicted) / env;
    fit.distances.push_back(d);
    fit.residuals.push_back(res);
    fit.max_residual = std::max(fit.max_residual, res);
    fit.ill_conditioned_points += a.ill_conditioned ? 1 : 0;
    ap.push_back(a.plus);
    am.push_back(a.minus);
  }
  {
    const AmplitudePair a = extract_amplitudes(H, 0.5 * pi, lam, p, p, lo, hi);
    fit.residual_at_half_pi = std::abs(H(0.5 * pi) - a.predicted) / std::abs(H(0.5 * pi));
  }

  // finite differences of the amplitudes on the grid
  const double h = (hi - lo) / (grid_points - 1);
  for (int i = 1; i + 1 < grid_points; ++i) {
    const double d = fit.distances[static_cast<std::size_t>(i)];
    for (const auto* a : {&ap, &am}) {
      const auto& v = *a;
      const std::size_t u = static_cast<std::size_t>(i);
      fit.derivative_bound[0] = std::max(fit.derivative_bound[0], std::abs(v[u]));
      fit.derivative_bound[1] =
          std::max(fit.derivative_bound[1], std::abs((v[u + 1] - v[u - 1]) / (2.0 * h)) * d);
      fit.derivative_bound[2] = std::max(
          fit.derivative_bound[2], std::abs((v[u + 1] - 2.0 * v[u] + v[u - 1]) / (h * h)) * d * d);
    }
  }

  // parity on a cosine grid
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  for (int i = 0; i <= grid_points; ++i) {
    const double t = -1.0 + 2.0 * i / grid_points;
    const double r = std::abs(zonal_projector(ctx, k, -t) - sign * zonal_projector(ctx, k, t));
    fit.parity_residual = std::max(fit.parity_residual, r / sup);
  }

  // antipodal representation for pi/4 <= d <= pi - 1/lambda, amplitudes taken at pi - d
  for (int i = 0; i < grid_points; ++i) {
    const double d = 0.25 * pi + (pi - lo - 0.25 * pi) * i / (grid_points - 1);
    const double ds = pi - d;
    const AmplitudePair a = extract_amplitudes(H, ds, lam, p, p, lo, hi);
    const cplx repr = sign * std::pow(lam, p) *
                      (a.plus * std::polar(1.0, lam * ds) + a.minus * std::polar(1.0, -lam * ds));
    const cplx literal = sign * std::pow(lam, p) *
                         (a.plus * std::polar(1.0, ds) + a.minus * std::polar(1.0, -ds));
    fit.antipodal_residual = std::max(fit.antipodal_residual, std::abs(H(d) - repr) / sup);
    fit.antipodal_residual_literal =
        std::max(fit.antipodal_residual_literal, std::abs(H(d) - literal) / sup);
  }
  return fit;
}

struct LocalResolventReport {
  double lambda = 0.0, mu = 0.0;
  std::vector<double> distances;
  std::vector<double> far_constant;  // |a_pm| d^{(n-1)/2} lambda^{-(n-3)/2}, d >= 1/lambda
  std::vector<double> near_constant; // |kernel| d^{n-2}, d < 1/lambda
  double max_far = 0.0;
  double max_near = 0.0;
  double amplitude_near_antipode = 0.0; // max |a_pm| for d >= pi - 0.5
  int ill_conditioned_points = 0;
};

// Conformance of the local resolvent kernel to the amplitude bounds:
// |a_pm| <= C lambda^{(n-3)/2} d^{-(n-1)/2} for d >= 1/lambda and
// |kernel| <= C d^{2-n} below 1/lambda. Uses the exact S^3 kernel.
inline LocalResolventReport local_resolvent_check(const SphereContext& ctx, double lambda, double mu,
                                                  const std::vector<double>& distances,
                                                  const WindowFamily& win = {}) {
  if (ctx.n != 3 || ctx.kappa != 1.0)
    throw DomainError("local_resolvent_check: exact kernel implemented for the unit S^3");
  if (lambda < 1.0)
    throw DomainError("local_resolvent_check: need lambda >= 1");
  const int n = ctx.n;
  auto kern = [&](double d) { return local_resolvent_s3(lambda, mu, d, win); };
  LocalResolventReport rep;
  rep.lambda = lambda;
  rep.mu = mu;
  for (double d : distances) {
    rep.distances.push_back(d);
    if (d >= 1.0 / lambda) {
      const AmplitudePair a = extract_amplitudes(kern, d, lambda, 0.0, 0.5 * (n - 1), 1.0 / lambda, pi);
      const double amp = std::max(std::abs(a.plus), std::abs(a.minus));
      const double c = amp * std::pow(d, 0.5 * (n - 1)) * std::pow(lambda, -0.5 * (n - 3));
      rep.far_constant.push_back(c);
      rep.near_constant.push_back(0.0);
      rep.max_far = std::max(rep.max_far, c);
      rep.ill_conditioned_points += a.ill_conditioned ? 1 : 0;
      if (d >= pi - 0.5)
        rep.amplitude_near_antipode = std::max(rep.amplitude_near_antipode, amp);
    } else {
      const double c = std::abs(kern(d)) * std::pow(d, n - 2);
      rep.near_constant.push_back(c);
      rep.far_constant.push_back(0.0);
      rep.max_near = std::max(rep.max_near, c);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// curvature scaling
// ---------------------------------------------------------------------------

struct ScalingReport {
  double kappa = 1.0;
  double r = 2.0, s = 2.0;
  std::vector<double> radii_kappa;      // transported polar radii
  std::vector<cplx> samples_kappa;      // u_kappa at those radii
  double norm_s_unit = 0.0, norm_s_kappa = 0.0;
  double s_factor_expected = 1.0;       // kappa^{-n/(2s)}
  double s_identity_error = 0.0;        // relative
  double norm_r_image_unit = 0.0, norm_r_image_kappa = 0.0;
  double r_factor_expected = 1.0;       // kappa^{n/(2r)} kappa^{-1}
  double r_identity_error = 0.0;        // relative
};

// Zonal u_1(r) on the unit sphere transported to curvature kappa by
// u_kappa(t) = u_1(sqrt(kappa) t). The shifted Laplacians are applied through
// radial jets, so both identities hold up to quadrature roundoff.
template <class U>
ScalingReport scaling_transport(const SphereContext& unit, const U& u, double kappa, double r, double s,
                                cplx zeta, int nodes = 96) {
  unit.validate();
  if (!(kappa > 0.0))
    throw DomainError("scaling_transport: curvature must be positive");
  const int n = unit.n;
  const double sh = unit.alpha() * unit.alpha();
  const double sk = std::sqrt(kappa);
  const special::QuadratureRule r1 = special::polar_rule(n, nodes, 1.0);
  const special::QuadratureRule rk = special::polar_rule(n, nodes, kappa);

  using J = Jet<double, 2>;
  auto image_unit = [&](double a) {
    const J j = u(J::variable(a));
    const cplx v = j.c[0], d1 = j.c[1], d2 = 2.0 * j.c[2];
    return d2 + double(n - 1) / std::tan(a) * d1 - sh * v + zeta * v;
  };
  auto image_kappa = [&](double t) {
    const J j = u(J::variable(t) * sk);
    const cplx v = j.c[0], d1 = j.c[1], d2 = 2.0 * j.c[2];
    return d2 + double(n - 1) * sk / std::tan(sk * t) * d1 - kappa * sh * v + kappa * zeta * v;
  };
  auto pnorm = [](const special::QuadratureRule& rule, const auto& f, double p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
      acc += rule.weights[i] * std::pow(std::abs(f(rule.coords[i])), p);
    return std::pow(acc, 1.0 / p);
  };

  ScalingReport rep;
  rep.kappa = kappa;
  rep.r = r;
  rep.s = s;
  for (std::size_t i = 0; i < rk.size(); ++i) {
    rep.radii_kappa.push_back(rk.coords[i]);
    rep.samples_kappa.push_back(u(J::variable(rk.coords[i]) * sk).c[0]);
  }
  auto u1 = [&](double a) { return cplx(u(J::variable(a)).c[0]); };
  auto uk = [&](double t) { return cplx(u(J::variable(t) * sk).c[0]); };
  rep.norm_s_unit = pnorm(r1, u1, s);
  rep.norm_s_kappa = pnorm(rk, uk, s);
  rep.s_factor_expected = std::pow(kappa, -0.5 * n / s);
  rep.s_identity_error =
      std::abs(rep.norm_s_kappa - rep.s_factor_expected * rep.norm_s_unit) / rep.norm_s_kappa;

  rep.norm_r_image_unit = pnorm(r1, image_unit, r);
  rep.norm_r_image_kappa = pnorm(rk, image_kappa, r);
  rep.r_factor_expected = std::pow(kappa, 0.5 * n / r) / kappa;
  rep.r_identity_error = std::abs(rep.norm_r_image_unit - rep.r_factor_expected * rep.norm_r_image_kappa) /
                         rep.norm_r_image_unit;
  return rep;
}

} // namespace curvlens::sphere
