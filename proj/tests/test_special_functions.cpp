#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "curvlens/grids.hpp"
#include "curvlens/jet.hpp"
#include "curvlens/special_functions.hpp"
#include "curvlens/windows.hpp"

using namespace curvlens;
using namespace curvlens::special;
constexpr double pi = std::numbers::pi;

namespace {

// (2a)_k/k! * 2F1(-k, k+2a; a+1/2; (1-t)/2), a terminating sum summed in
// 50-digit arithmetic because its terms cancel heavily near t = -1
double gegenbauer_hypergeometric(int k, double a, double t) {
  using F = boost::multiprecision::cpp_bin_float_50;
  const F x = (F(1) - F(t)) / 2;
  F term = 1, sum = 1;
  for (int j = 0; j < k; ++j) {
    term *= F(j - k) * (F(j + k) + 2 * F(a)) / ((F(j) + F(a) + F(0.5)) * F(j + 1)) * x;
    sum += term;
  }
  return gegenbauer_at_one(k, a) * static_cast<double>(sum);
}

double jacobi_moment(double a, double b, int j) {
  boost::math::quadrature::tanh_sinh<double> ts;
  // the complement argument keeps the endpoint singularities accurate
  return ts.integrate(
      [&](double t, double tc) {
        const double one_minus = t > 0 ? tc : 1.0 - t;
        const double one_plus = t < 0 ? -tc : 1.0 + t;
        return std::pow(one_minus, a) * std::pow(one_plus, b) * std::pow(t, j);
      },
      -1.0, 1.0);
}

} // namespace

TEST(Gegenbauer, LowDegreeClosedForms) {
  EXPECT_DOUBLE_EQ(gegenbauer_eval({0, 1.0, 0.3}), 1.0);
  EXPECT_NEAR(gegenbauer_eval({1, 1.0, 0.3}), 0.6, 1e-15);
  EXPECT_NEAR(gegenbauer_eval({2, 1.0, 0.5}), 0.0, 1e-15);
  EXPECT_NEAR(gegenbauer_eval({2, 1.5, 1.0}), 6.0, 1e-13);
}

TEST(Gegenbauer, MatchesHypergeometricSum) {
  for (double a : {0.5, 1.0, 1.5})
    for (int k : {3, 7, 12, 20})
      for (double t : {-0.9, -0.3, 0.0, 0.41, 0.97}) {
        const double ref = gegenbauer_hypergeometric(k, a, t);
        EXPECT_NEAR(gegenbauer_eval({k, a, t}), ref, 1e-10 * std::max(1.0, std::abs(ref)))
            << k << ' ' << a << ' ' << t;
      }
}

TEST(Gegenbauer, SecondKindIsChebyshevU) {
  for (int k : {5, 64, 255}) {
    const double th = 0.731;
    EXPECT_NEAR(gegenbauer_eval({k, 1.0, std::cos(th)}), std::sin((k + 1) * th) / std::sin(th), 1e-10 * k);
  }
}

TEST(Gegenbauer, ValueAtOne) {
  for (double a : {0.5, 1.0, 1.5})
    for (int k : {0, 1, 9, 40})
      EXPECT_NEAR(gegenbauer_eval({k, a, 1.0}) / gegenbauer_at_one(k, a), 1.0, 1e-12);
}

TEST(Gegenbauer, DomainErrors) {
  EXPECT_THROW(gegenbauer_eval({3, 1.0, 1.2}), DomainError);
  EXPECT_THROW(gegenbauer_eval({3, 0.0, 0.2}), DomainError);
  EXPECT_THROW(gegenbauer_eval({-1, 1.0, 0.2}), DomainError);
}

TEST(GaussJacobi, MomentsAgainstTanhSinh) {
  for (auto [a, b] : {std::pair{0.0, 0.0}, {0.5, 0.5}, {1.0, 1.0}, {-0.5, 0.25}, {2.0, 0.0}}) {
    const Rule1D r = gauss_jacobi_rule(12, a, b);
    for (int j = 0; j <= 23; ++j) {
      double q = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i)
        q += r.weights[i] * std::pow(r.nodes[i], j);
      const double ref = jacobi_moment(a, b, j);
      EXPECT_NEAR(q, ref, 1e-12 * std::max(1.0, std::abs(ref))) << a << ' ' << b << ' ' << j;
    }
  }
}

TEST(GaussJacobi, MomentRecursionLargeRule) {
  // M_{j+1} = [(b-a) M_j + j M_{j-1}] / (a+b+2+j)
  const double a = 0.5, b = 0.5;
  const Rule1D r = gauss_jacobi_rule(200, a, b);
  std::vector<double> m(30);
  m[0] = std::exp((a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1) + std::lgamma(b + 1) - std::lgamma(a + b + 2));
  m[1] = (b - a) * m[0] / (a + b + 2.0);
  for (int j = 1; j + 1 < 30; ++j)
    m[j + 1] = ((b - a) * m[j] + j * m[j - 1]) / (a + b + 2.0 + j);
  for (int j = 0; j < 30; ++j) {
    double q = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      q += r.weights[i] * std::pow(r.nodes[i], j);
    EXPECT_NEAR(q, m[j], 1e-12 * m[0]) << j;
  }
}

TEST(GaussJacobi, RejectsBadInput) {
  EXPECT_THROW(gauss_jacobi_rule(0, 0.0, 0.0), DomainError);
  EXPECT_THROW(gauss_jacobi_rule(4, -1.0, 0.0), DomainError);
}

TEST(Grids, SphereAreas) {
  EXPECT_NEAR(sphere_area(1), 2 * pi, 1e-14);
  EXPECT_NEAR(sphere_area(2), 4 * pi, 1e-14);
  EXPECT_NEAR(sphere_area(3), 2 * pi * pi, 1e-13);
  for (int n = 1; n <= 4; ++n) {
    const QuadratureRule g = sphere_grid(n, 10);
    EXPECT_NEAR(g.total_weight(), sphere_area(n), 1e-12);
    double x0sq = 0.0, xnsq = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      x0sq += g.weights[i] * g.node(i)[0] * g.node(i)[0];
      xnsq += g.weights[i] * g.node(i)[static_cast<std::size_t>(n)] * g.node(i)[static_cast<std::size_t>(n)];
      double norm = 0.0;
      for (double c : g.node(i))
        norm += c * c;
      ASSERT_NEAR(norm, 1.0, 1e-13);
    }
    EXPECT_NEAR(x0sq, sphere_area(n) / (n + 1), 1e-12);
    EXPECT_NEAR(xnsq, sphere_area(n) / (n + 1), 1e-12);
  }
}

TEST(Grids, RadialRuleVolume) {
  const QuadratureRule r = radial_rule(3, 3.0, 0.25, 12);
  // vol B_R in H^3 = pi (sinh 2R - 2R)
  EXPECT_NEAR(r.total_weight(), pi * (std::sinh(6.0) - 6.0), 1e-10 * pi * std::sinh(6.0));
  const QuadratureRule p = polar_rule(3, 40, 4.0);
  EXPECT_NEAR(p.total_weight(), 2 * pi * pi / 8.0, 1e-12);
  EXPECT_LT(p.coords.front(), p.coords.back());
}

TEST(Grids, BallGridVolume) {
  const QuadratureRule b = ball_grid(2, 1.5, 16);
  EXPECT_NEAR(b.total_weight(), 2 * pi * (std::cosh(1.5) - 1.0), 1e-10);
}

TEST(Grids, CsvExport) {
  std::ostringstream os;
  write_csv(os, polar_rule(2, 4));
  EXPECT_EQ(os.str().substr(0, 10), "x0,weight\n");
}

TEST(Jet, ProductQuotientAndTranscendentals) {
  using J = Jet<double, 4>;
  const J t = J::variable(0.7);
  const J f = sin(t) * exp(t) / cosh(t);
  // d/dt at 0.7 by hand
  const double s = std::sin(0.7), c = std::cos(0.7), e = std::exp(0.7), ch = std::cosh(0.7), sh = std::sinh(0.7);
  EXPECT_NEAR(f.value(), s * e / ch, 1e-15);
  EXPECT_NEAR(f.derivative(1), (c * e + s * e) / ch - s * e * sh / (ch * ch), 1e-14);
  const J g = cos(t) * cos(t) + sin(t) * sin(t);
  for (int j = 1; j <= 4; ++j)
    EXPECT_NEAR(g.c[j], 0.0, 1e-14);
}

TEST(Windows, PartitionOfUnity) {
  WindowFamily w;
  for (int i = 0; i <= 2000; ++i) {
    const double t = std::exp(-6.0 + 12.0 * i / 2000.0);
    double s = w.beta0(t);
    for (int k = 1; k <= 12; ++k)
      s += w.beta_dyadic(k, t);
    ASSERT_NEAR(s, 1.0, 1e-12) << t;
    double all = 0.0;
    for (int j = -20; j <= 20; ++j)
      all += w.beta(std::ldexp(t, -j));
    ASSERT_NEAR(all, 1.0, 1e-12) << t;
  }
  EXPECT_EQ(w.beta0(0.5), 1.0);
  EXPECT_EQ(w.beta0(2.0), 0.0);
  EXPECT_EQ(w.beta(0.5), 0.0);
  EXPECT_EQ(w.rho(1.0), 0.0);
  EXPECT_EQ(w.rho(0.5), 1.0);
}

TEST(Windows, JetDerivativeMatchesDifferenceQuotient) {
  WindowFamily w;
  using J = Jet<double, 2>;
  for (double t : {1.2, 1.5, 1.8}) {
    const J v = w.beta0(J::variable(t));
    const double h = 1e-5;
    EXPECT_NEAR(v.derivative(1), (w.beta0(t + h) - w.beta0(t - h)) / (2 * h), 1e-7);
    EXPECT_NEAR(v.derivative(2), (w.beta0(t + h) - 2 * w.beta0(t) + w.beta0(t - h)) / (h * h), 1e-3);
  }
}
