#pragma once
//
// Mixed-norm lower bounds for discretized integral operators: L^p norms on
// quadrature rules, the duality map, the nonlinear power method, zonal
// reductions to one radial variable and log-log slope fits.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "curvlens/errors.hpp"
#include "curvlens/grids.hpp"
#include "curvlens/parallel.hpp"
#include "curvlens/special_functions.hpp"
#include "curvlens/sphere_spectral.hpp"

namespace curvlens::norm {

using cplx = std::complex<double>;

inline constexpr double infinity_proxy = 64.0;

struct MixedNormSpec {
  double r = 2.0;
  double s = 2.0;

  double r_used() const { return std::isinf(r) ? infinity_proxy : r; }
  double s_used() const { return std::isinf(s) ? infinity_proxy : s; }

  // n(1/r - 1/s) = 2 and both exponents farther than 1/(2n) from 1/2
  bool admissible(int n) const {
    const double ir = 1.0 / r, is = 1.0 / s;
    return std::abs(n * (ir - is) - 2.0) < 1e-12 && std::abs(ir - 0.5) > 0.5 / n &&
           std::abs(is - 0.5) > 0.5 / n;
  }
  // n(1/r - 1/s) = 2 with 2n/(n+3) <= r <= 2n/(n+1), the closed range used for
  // the nonlocal dyadic pieces
  bool in_closed_segment(int n) const {
    const double ir = 1.0 / r, is = 1.0 / s;
    return std::abs(n * (ir - is) - 2.0) < 1e-12 && r >= 2.0 * n / (n + 3.0) - 1e-12 &&
           r <= 2.0 * n / (n + 1.0) + 1e-12;
  }
  void validate() const {
    if (!(r > 1.0) || !(s > 1.0))
      throw DomainError("MixedNormSpec: exponents must exceed 1");
  }
  std::string describe() const {
    std::ostringstream os;
    os << "(" << r << ", " << s << ")";
    return os.str();
  }
};

// Throws ConfigError unless (r, s) is admissible in dimension n (or lies in
// the closed dyadic range when allow_closed is set).
inline void require_admissible(const MixedNormSpec& spec, int n, bool allow_closed = false) {
  spec.validate();
  if (spec.admissible(n) || (allow_closed && spec.in_closed_segment(n)))
    return;
  std::ostringstream os;
  os << "exponent pair " << spec.describe() << " is not admissible in dimension " << n
     << ": need n(1/r - 1/s) = 2 and |1/r - 1/2|, |1/s - 1/2| > 1/(2n)";
  throw ConfigError(os.str());
}

inline double lp_norm(std::span<const cplx> f, std::span<const double> w, double p) {
  if (!(p >= 1.0))
    throw DomainError("lp_norm: p must be at least 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (w[i] > 0.0)
        m = std::max(m, std::abs(f[i]));
    return m;
  }
  // scaled to avoid overflow for large p
  double m = 0.0;
  for (const cplx& v : f)
    m = std::max(m, std::abs(v));
  if (m == 0.0)
    return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    acc += w[i] * std::pow(std::abs(f[i]) / m, p);
  return m * std::pow(acc, 1.0 / p);
}

inline double lp_norm(std::span<const cplx> f, const special::QuadratureRule& rule, double p) {
  return lp_norm(f, rule.weights, p);
}

// |f|^{p-1} f/|f|, with 0 -> 0
inline std::vector<cplx> duality_map(std::span<const cplx> f, double p) {
  if (!(p > 1.0) || std::isinf(p))
    throw DomainError("duality_map: p must lie in (1, inf)");
  std::vector<cplx> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = std::abs(f[i]);
    out[i] = a == 0.0 ? cplx(0.0) : f[i] * std::pow(a, p - 2.0);
  }
  return out;
}

// (T f)_a = sum_b M_ab w_b f_b between two weighted node sets; the adjoint is
// taken with respect to the weighted inner products on both sides.
struct DiscretizedOperator {
  std::size_t rows = 0, cols = 0;
  std::vector<double> out_weights, in_weights;
  std::vector<cplx> matrix; // row-major
  std::string descriptor;
  int workers = 1;

  cplx& at(std::size_t a, std::size_t b) { return matrix[a * cols + b]; }
  const cplx& at(std::size_t a, std::size_t b) const { return matrix[a * cols + b]; }

  std::vector<cplx> apply(std::span<const cplx> f) const {
    std::vector<cplx> fw(cols);
    for (std::size_t b = 0; b < cols; ++b)
      fw[b] = in_weights[b] * f[b];
    std::vector<cplx> out(rows);
    parallel_for(rows, workers, [&](std::size_t a) {
      const cplx* row = matrix.data() + a * cols;
      cplx acc = 0.0;
      for (std::size_t b = 0; b < cols; ++b)
        acc += row[b] * fw[b];
      out[a] = acc;
    });
    return out;
  }

  std::vector<cplx> apply_adjoint(std::span<const cplx> g) const {
    std::vector<cplx> gw(rows);
    for (std::size_t a = 0; a < rows; ++a)
      gw[a] = out_weights[a] * g[a];
    std::vector<cplx> out(cols);
    parallel_for(cols, workers, [&](std::size_t b) {
      cplx acc = 0.0;
      for (std::size_t a = 0; a < rows; ++a)
        acc += std::conj(matrix[a * cols + b]) * gw[a];
      out[b] = acc;
    });
    return out;
  }
};

// Dense operator from a two-point kernel on two rules.
inline DiscretizedOperator dense_operator(const special::QuadratureRule& out_rule,
                                          const special::QuadratureRule& in_rule,
                                          const std::function<cplx(std::size_t, std::size_t)>& kernel,
                                          std::string descriptor, int workers = 1) {
  DiscretizedOperator T;
  T.rows = out_rule.size();
  T.cols = in_rule.size();
  T.out_weights = out_rule.weights;
  T.in_weights = in_rule.weights;
  T.matrix.resize(T.rows * T.cols);
  T.descriptor = std::move(descriptor);
  T.workers = workers;
  parallel_for(T.rows, workers, [&](std::size_t a) {
    for (std::size_t b = 0; b < T.cols; ++b)
      T.matrix[a * T.cols + b] = kernel(a, b);
  });
  return T;
}

struct PowerOptions {
  int restarts = 4;   // random restarts after the pole bump
  double tol = 1e-6;  // relative objective gain
  int max_iter = 200;
  std::uint64_t seed = 20240601;
  std::vector<cplx> initial; // replaces the pole bump when nonempty
  bool use_bump = true;
};

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
  std::vector<double> history;     // objective per step of the best restart
  std::vector<double> restart_values;
  std::vector<cplx> witness;
  double witness_norm_r = 0.0;     // ||f||_r
  double witness_norm_s = 0.0;     // ||T f||_s
  double r_requested = 2.0, s_requested = 2.0;
  double r_used = 2.0, s_used = 2.0;
  std::vector<std::string> aborted;

  bool history_nondecreasing(double rel = 1e-12) const {
    for (std::size_t i = 1; i < history.size(); ++i)
      if (history[i] < history[i - 1] * (1.0 - rel))
        return false;
    return true;
  }
};

namespace detail {

inline bool all_finite(std::span<const cplx> v) {
  for (const cplx& x : v)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
      return false;
  return true;
}

inline std::vector<cplx> pole_bump(std::size_t n) {
  const double width = std::max(2.0, static_cast<double>(n) / 32.0);
  std::vector<cplx> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / width;
    f[i] = std::exp(-x * x);
  }
  return f;
}

} // namespace detail

// Nonlinear power method for ||T||_{L^r -> L^s}:
//   f <- normalize_r(J_{r'}(T* J_s(T f))),
// whose objective ||Tf||_s / ||f||_r never decreases. Returns the best
// objective over the bump start and the random restarts.
inline NormEstimate mixed_norm_power_iterate(const DiscretizedOperator& T, const MixedNormSpec& spec,
                                             const PowerOptions& opt = {}) {
  spec.validate();
  const double r = spec.r_used(), s = spec.s_used();
  const double rp = r / (r - 1.0);
  NormEstimate best;
  best.r_requested = spec.r;
  best.s_requested = spec.s;
  best.r_used = r;
  best.s_used = s;
  best.value = -1.0;

  std::vector<std::vector<cplx>> starts;
  if (!opt.initial.empty())
    starts.push_back(opt.initial);
  else if (opt.use_bump)
    starts.push_back(detail::pole_bump(T.cols));
  for (int k = 0; k < opt.restarts; ++k) {
    std::mt19937_64 gen(opt.seed + static_cast<std::uint64_t>(k));
    std::normal_distribution<double> nd;
    std::vector<cplx> f(T.cols);
    for (auto& v : f) {
      const double re = nd(gen);
      const double im = nd(gen);
      v = cplx(re, im);
    }
    starts.push_back(std::move(f));
  }

  for (std::size_t run = 0; run < starts.size(); ++run) {
    std::vector<cplx> f = starts[run];
    const double f0 = lp_norm(f, T.in_weights, r);
    if (!(f0 > 0.0)) {
      best.aborted.push_back("start " + std::to_string(run) + ": zero initial vector");
      continue;
    }
    for (auto& v : f)
      v /= f0;
    std::vector<double> hist;
    bool converged = false, failed = false;
    int it = 0;
    std::vector<cplx> g = T.apply(f);
    double obj = lp_norm(g, T.out_weights, s);
    hist.push_back(obj);
    for (it = 1; it <= opt.max_iter; ++it) {
      if (!detail::all_finite(g) || !std::isfinite(obj)) {
        failed = true;
        break;
      }
      if (obj == 0.0)
        break;
      for (auto& v : g)
        v /= obj;
      const std::vector<cplx> y = duality_map(g, s);
      const std::vector<cplx> z = T.apply_adjoint(y);
      std::vector<cplx> fn = duality_map(z, rp);
      const double nrm = lp_norm(fn, T.in_weights, r);
      if (!(nrm > 0.0) || !std::isfinite(nrm)) {
        failed = !std::isfinite(nrm);
        break;
      }
      for (auto& v : fn)
        v /= nrm;
      std::vector<cplx> gn = T.apply(fn);
      const double on = lp_norm(gn, T.out_weights, s);
      if (!std::isfinite(on)) {
        failed = true;
        break;
      }
      const double gain = (on - obj) / obj;
      hist.push_back(on);
      if (on >= obj) {
        f = std::move(fn);
        g = std::move(gn);
        obj = on;
      }
      if (gain < opt.tol) {
        converged = true;
        break;
      }
    }
    if (failed) {
      best.aborted.push_back("start " + std::to_string(run) + ": non-finite values");
      continue;
    }
    best.restart_values.push_back(obj);
    ++best.restarts;
    if (obj > best.value) {
      best.value = obj;
      best.iterations = std::min(it, opt.max_iter);
      best.converged = converged;
      best.history = hist;
      best.witness = f;
    }
  }
  if (best.value < 0.0)
    throw NumericalAbort("mixed_norm_power_iterate: every start produced non-finite values");
  best.witness_norm_r = lp_norm(best.witness, T.in_weights, r);
  best.witness_norm_s = lp_norm(T.apply(best.witness), T.out_weights, s);
  return best;
}

// ---------------------------------------------------------------------------
// zonal reductions
// ---------------------------------------------------------------------------
//
// For a kernel K(d(x, y)) and zonal f about a pole, Tf is zonal and
//   Tf(a) = sum_b W_b M(a, b) f(b),
// with W the polar/radial rule weights (which include the direction-sphere
// area) and M the average of K over the sphere of radius b seen from a point
// at radius a.

// Funk-Hecke: the average of C_k(cos d) is C_k(cos a) C_k(cos b) / C_k(1), so
// a spectral kernel reduces exactly to a separable sum.
inline DiscretizedOperator reduce_sphere_spectral(const sphere::ZonalKernel& K,
                                                  const special::QuadratureRule& polar, int workers = 1) {
  const std::size_t N = polar.size();
  const std::size_t D = static_cast<std::size_t>(K.K) + 1;
  const double alpha = K.ctx.alpha();
  std::vector<double> P(N * D);
  for (std::size_t i = 0; i < N; ++i)
    special::gegenbauer_all(K.K, alpha, K.ctx.cos_angle(polar.coords[i]), P.data() + i * D);
  std::vector<cplx> c(D);
  for (std::size_t k = 0; k < D; ++k)
    c[k] = K.coeff[k] * K.scale[k] / special::gegenbauer_at_one(static_cast<int>(k), alpha);
  DiscretizedOperator T;
  T.rows = T.cols = N;
  T.out_weights = T.in_weights = polar.weights;
  T.matrix.resize(N * N);
  T.workers = workers;
  T.descriptor = "sphere zonal reduction (Funk-Hecke, K=" + std::to_string(K.K) +
                 ", window=" + K.window.describe() + ")";
  parallel_for(N, workers, [&](std::size_t a) {
    std::vector<cplx> ca(D);
    for (std::size_t k = 0; k < D; ++k)
      ca[k] = c[k] * P[a * D + k];
    for (std::size_t b = 0; b < N; ++b) {
      cplx acc = 0.0;
      const double* pb = P.data() + b * D;
      for (std::size_t k = 0; k < D; ++k)
        acc += ca[k] * pb[k];
      T.matrix[a * N + b] = acc;
    }
  });
  return T;
}

// Generic sphere kernel: M(a,b) = (w_{n-2}/w_{n-1}) int_0^pi K(d) sin^{n-2}phi dphi,
// cos d = cos a cos b + sin a sin b cos phi, by Gauss-Jacobi in cos phi.
// Intended for kernels that are smooth across d = 0.
inline DiscretizedOperator reduce_sphere_generic(const sphere::SphereContext& ctx,
                                                 const std::function<cplx(double)>& kernel,
                                                 const special::QuadratureRule& polar, int angular_nodes,
                                                 int workers = 1) {
  const int n = ctx.n;
  const double e = 0.5 * (n - 3);
  const special::Rule1D ang = special::gauss_jacobi_rule(angular_nodes, e, e);
  const double factor = special::sphere_area(n - 2) / special::sphere_area(n - 1);
  const double sk = std::sqrt(ctx.kappa);
  const std::size_t N = polar.size();
  DiscretizedOperator T;
  T.rows = T.cols = N;
  T.out_weights = T.in_weights = polar.weights;
  T.matrix.resize(N * N);
  T.workers = workers;
  T.descriptor = "sphere zonal reduction (angular Gauss-Jacobi, " + std::to_string(angular_nodes) + " nodes)";
  parallel_for(N, workers, [&](std::size_t a) {
    const double ca = std::cos(sk * polar.coords[a]), sa = std::sin(sk * polar.coords[a]);
    for (std::size_t b = 0; b < N; ++b) {
      const double cb = std::cos(sk * polar.coords[b]), sb = std::sin(sk * polar.coords[b]);
      cplx acc = 0.0;
      for (std::size_t j = 0; j < ang.nodes.size(); ++j) {
        const double c = std::clamp(ca * cb + sa * sb * ang.nodes[j], -1.0, 1.0);
        acc += ang.weights[j] * kernel(std::acos(c) / sk);
      }
      T.matrix[a * N + b] = factor * acc;
    }
  });
  return T;
}

// H^3 of curvature -kappa with a known primitive Phi, Phi'(d) = K(d) S(d),
// S(x) = sinh(sqrt(kappa) x)/sqrt(kappa):
//   M(rho, s) = (Phi(rho+s) - Phi(|rho-s|)) / (2 S(rho) S(s)).
// Finite on the diagonal even for K ~ 1/d, so no diagonal policy is needed.
inline DiscretizedOperator reduce_h3_primitive(const std::function<cplx(double)>& primitive,
                                               const special::QuadratureRule& radial, std::string descriptor,
                                               int workers = 1, double kappa = 1.0) {
  const std::size_t N = radial.size();
  const double sk = std::sqrt(kappa);
  std::vector<double> sh(N);
  for (std::size_t i = 0; i < N; ++i)
    sh[i] = std::sinh(sk * radial.coords[i]) / sk;
  DiscretizedOperator T;
  T.rows = T.cols = N;
  T.out_weights = T.in_weights = radial.weights;
  T.matrix.resize(N * N);
  T.workers = workers;
  T.descriptor = "H^3 zonal reduction (primitive): " + descriptor;
  parallel_for(N, workers, [&](std::size_t a) {
    const double ra = radial.coords[a];
    for (std::size_t b = 0; b < N; ++b) {
      const double rb = radial.coords[b];
      T.matrix[a * N + b] = (primitive(ra + rb) - primitive(std::abs(ra - rb))) / (2.0 * sh[a] * sh[b]);
    }
  });
  return T;
}

// H^3 generic: (1/(2 sinh rho sinh s)) int_{|rho-s|}^{rho+s} K(d) sinh d dd by
// composite Gauss-Legendre (panel width <= h). K sinh d must be integrable.
inline DiscretizedOperator reduce_h3_generic(const std::function<cplx(double)>& kernel,
                                             const special::QuadratureRule& radial, double h,
                                             std::string descriptor, int workers = 1) {
  const std::size_t N = radial.size();
  const special::Rule1D ref = special::gauss_legendre_rule(12);
  DiscretizedOperator T;
  T.rows = T.cols = N;
  T.out_weights = T.in_weights = radial.weights;
  T.matrix.resize(N * N);
  T.workers = workers;
  T.descriptor = "H^3 zonal reduction (quadrature in d): " + descriptor;
  parallel_for(N, workers, [&](std::size_t a) {
    const double ra = radial.coords[a];
    for (std::size_t b = 0; b < N; ++b) {
      const double rb = radial.coords[b];
      const double lo = std::abs(ra - rb), hi = ra + rb;
      const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / h)));
      const double w = (hi - lo) / panels;
      cplx acc = 0.0;
      for (int p = 0; p < panels; ++p)
        for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
          const double d = lo + w * (p + 0.5 * (ref.nodes[i] + 1.0));
          acc += 0.5 * w * ref.weights[i] * kernel(d) * std::sinh(d);
        }
      T.matrix[a * N + b] = acc / (2.0 * std::sinh(ra) * std::sinh(rb));
    }
  });
  return T;
}

// ---------------------------------------------------------------------------
// slope fits
// ---------------------------------------------------------------------------

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;    // log y at log x = 0
  double half_width = 0.0;   // 95% Student-t half-width of the slope
  std::size_t points = 0;
};

// Least squares of log y against log x.
inline SlopeFit slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw DomainError("slope_fit: need at least three (x, y) pairs");
  const std::size_t m = x.size();
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw DomainError("slope_fit: log-log fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 1e-14 * m))
    throw DomainError("slope_fit: degenerate abscissas");
  SlopeFit fit;
  fit.points = m;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += e * e;
  }
  const double se = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(m - 2));
  fit.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  return fit;
}

} // namespace curvlens::norm
