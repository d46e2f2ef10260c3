#pragma once
//
// Quadrature rules on spheres, hyperbolic balls and their radial sections.
//

#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "curvlens/errors.hpp"
#include "curvlens/special_functions.hpp"

namespace curvlens::special {

// Flat storage: node i occupies coords[i*dim .. i*dim+dim).
// Sphere grids carry ambient coordinates, ball grids (radius, direction...),
// radial and polar rules a single geodesic radius.
struct QuadratureRule {
  std::size_t dim = 1;
  std::vector<double> coords;
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  std::span<const double> node(std::size_t i) const {
    return {coords.data() + i * dim, dim};
  }
  double total_weight() const {
    double s = 0.0;
    for (double w : weights)
      s += w;
    return s;
  }
  void push(std::span<const double> x, double w) {
    coords.insert(coords.end(), x.begin(), x.end());
    weights.push_back(w);
  }
};

inline void write_csv(std::ostream& os, const QuadratureRule& rule) {
  for (std::size_t j = 0; j < rule.dim; ++j)
    os << 'x' << j << ',';
  os << "weight\n";
  os.precision(17);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    for (double c : rule.node(i))
      os << c << ',';
    os << rule.weights[i] << '\n';
  }
}

namespace detail {

// Recursively expands polar angles; prefix holds the running product of sines.
inline void sphere_grid_fill(int n, int res, std::size_t level, double sin_prod, double w,
                             std::vector<double>& x, const std::vector<Rule1D>& polar,
                             QuadratureRule& out) {
  const std::size_t polar_count = polar.size();
  if (level == polar_count) {
    const int naz = 2 * res;
    const double dphi = 2.0 * std::numbers::pi / naz;
    for (int j = 0; j < naz; ++j) {
      const double phi = (j + 0.5) * dphi;
      x[static_cast<std::size_t>(n) - 1] = sin_prod * std::cos(phi);
      x[static_cast<std::size_t>(n)] = sin_prod * std::sin(phi);
      out.push(x, w * dphi);
    }
    return;
  }
  const Rule1D& r = polar[level];
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double t = r.nodes[i];
    const double s = std::sqrt(1.0 - t * t);
    x[level] = sin_prod * t;
    sphere_grid_fill(n, res, level + 1, sin_prod * s, w * r.weights[i], x, polar, out);
  }
}

} // namespace detail

// Product rule on the unit n-sphere: Gauss-Jacobi in each polar angle
// (cos theta_j with weight sin^{n-j}) times the trapezoid rule in azimuth.
// n = 1 is the circle (azimuth only).
inline QuadratureRule sphere_grid(int n, int resolution) {
  if (n < 1 || n > 4)
    throw DomainError("sphere_grid: unsupported dimension " + std::to_string(n));
  if (resolution < 4)
    throw DomainError("sphere_grid: resolution must be at least 4");
  std::vector<Rule1D> polar;
  for (int j = 1; j <= n - 1; ++j) {
    const double e = 0.5 * (n - j - 1);
    polar.push_back(gauss_jacobi_rule(resolution, e, e));
  }
  QuadratureRule out;
  out.dim = static_cast<std::size_t>(n) + 1;
  std::vector<double> x(out.dim, 0.0);
  detail::sphere_grid_fill(n, resolution, 0, 1.0, 1.0, x, polar, out);
  return out;
}

// Geodesic ball of radius R_max in H^n: radial Gauss-Legendre times
// directions from sphere_grid(n-1). Node layout (r, direction in R^n).
inline QuadratureRule ball_grid(int n, double r_max, int resolution) {
  if (n < 2 || n > 4)
    throw DomainError("ball_grid: unsupported dimension " + std::to_string(n));
  if (!(r_max > 0.0))
    throw DomainError("ball_grid: radius must be positive");
  const Rule1D radial = gauss_legendre_on(resolution, 0.0, r_max);
  const QuadratureRule dirs = sphere_grid(n - 1, resolution);
  QuadratureRule out;
  out.dim = static_cast<std::size_t>(n) + 1;
  std::vector<double> x(out.dim);
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    const double r = radial.nodes[i];
    const double wr = radial.weights[i] * std::pow(std::sinh(r), n - 1);
    x[0] = r;
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      auto d = dirs.node(j);
      std::copy(d.begin(), d.end(), x.begin() + 1);
      out.push(x, wr * dirs.weights[j]);
    }
  }
  return out;
}

// Radial section of dV on H^n restricted to [0, R_max]: composite
// Gauss-Legendre on panels of width <= panel_width, with geometric
// refinement of the first panel toward r = 0. Weights include the
// direction-sphere area, so sums of |f|^p w are norms of radial functions.
inline QuadratureRule radial_rule(int n, double r_max, double panel_width, int nodes_per_panel,
                                  int grading_levels = 6, double kappa = 1.0) {
  if (n < 2 || n > 4)
    throw DomainError("radial_rule: unsupported dimension " + std::to_string(n));
  if (!(r_max > 0.0) || !(panel_width > 0.0) || !(kappa > 0.0))
    throw DomainError("radial_rule: radius, panel width and curvature must be positive");
  const double first = std::min(panel_width, r_max);
  std::vector<double> cleaned{0.0};
  for (int l = grading_levels; l >= 1; --l)
    cleaned.push_back(first * std::ldexp(1.0, -l));
  cleaned.push_back(first);
  const double rest = r_max - first;
  if (rest > 1e-14 * r_max) {
    const int panels = static_cast<int>(std::ceil(rest / panel_width - 1e-12));
    for (int p = 1; p <= panels; ++p)
      cleaned.push_back(first + rest * p / panels);
  }

  const double sk = std::sqrt(kappa);
  const double area = sphere_area(n - 1);
  const Rule1D ref = gauss_legendre_rule(nodes_per_panel);
  QuadratureRule out;
  out.dim = 1;
  for (std::size_t p = 0; p + 1 < cleaned.size(); ++p) {
    const double lo = cleaned[p], hi = cleaned[p + 1];
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
      const double r = mid + half * ref.nodes[i];
      const double jac = std::pow(std::sinh(sk * r) / sk, n - 1);
      const double x[1] = {r};
      out.push(x, area * half * ref.weights[i] * jac);
    }
  }
  return out;
}

// Radial section of dV on the n-sphere of curvature kappa: Gauss-Jacobi in
// cos(sqrt(kappa) r) with weight sin^{n-1}; nodes are geodesic radii in
// (0, pi/sqrt(kappa)), weights include the direction-sphere area.
inline QuadratureRule polar_rule(int n, int m, double kappa = 1.0) {
  if (n < 2 || n > 4)
    throw DomainError("polar_rule: unsupported dimension " + std::to_string(n));
  if (!(kappa > 0.0))
    throw DomainError("polar_rule: curvature must be positive");
  const double e = 0.5 * (n - 2);
  const Rule1D gj = gauss_jacobi_rule(m, e, e);
  const double sk = std::sqrt(kappa);
  const double scale = sphere_area(n - 1) * std::pow(kappa, -0.5 * n);
  QuadratureRule out;
  out.dim = 1;
  // ascending radius = descending cosine
  for (std::size_t i = 0; i < gj.nodes.size(); ++i) {
    const double x[1] = {std::acos(gj.nodes[i]) / sk};
    out.push(x, scale * gj.weights[i]);
  }
  return out;
}

} // namespace curvlens::special
