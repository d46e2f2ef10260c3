#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <complex>
#include <sstream>

#include "curvlens/hyperbolic_spectral.hpp"

using namespace curvlens;
using namespace curvlens::hyperbolic;
using cplx = std::complex<double>;

TEST(Descent, OddClosedForms) {
  auto ch = [](const auto& t) { return cosh(t); };
  EXPECT_NEAR(jet_descend_odd<3>(ch, 1, 0.8), 1.0, 1e-14);
  EXPECT_NEAR(jet_descend_odd<3>(ch, 2, 0.8), 0.0, 1e-14);
  const double lam = 3.0;
  auto e = [lam](const auto& t) { return exp(t * cplx(0.0, lam)); };
  const cplx got = jet_descend_odd<2>(e, 1, 1.0);
  const cplx ref = cplx(0.0, lam) * std::exp(cplx(0.0, lam)) / std::sinh(1.0);
  EXPECT_LT(std::abs(got - ref), 1e-14);
  EXPECT_THROW(jet_descend_odd<1>(e, 2, 1.0), DomainError);
  EXPECT_THROW(jet_descend_odd<2>(e, 1, 0.0), DomainError);
}

TEST(Descent, OddAgainstSymbolicLibrary) {
  // g = t^2 e^{-t} sin(2t); derivatives written out by hand
  auto g = [](const auto& t) { return t * t * exp(-t) * sin(t * 2.0); };
  auto g1 = [](double t) {
    return std::exp(-t) * (2 * t * std::sin(2 * t) - t * t * std::sin(2 * t) + 2 * t * t * std::cos(2 * t));
  };
  auto g2 = [](double t) {
    const double e = std::exp(-t), s = std::sin(2 * t), c = std::cos(2 * t);
    // derivative of e^{-t}(2t s - t^2 s + 2 t^2 c)
    const double p = 2 * t * s - t * t * s + 2 * t * t * c;
    const double dp = 2 * s + 4 * t * c - 2 * t * s - 2 * t * t * c + 4 * t * c - 4 * t * t * s;
    return e * (dp - p);
  };
  for (double t : {0.3, 1.0, 2.5}) {
    const double sh = std::sinh(t), chh = std::cosh(t);
    EXPECT_NEAR(jet_descend_odd<3>(g, 1, t), g1(t) / sh, 1e-12);
    // D^2 g = (g'' sinh - g' cosh) / sinh^3
    const double d2 = (g2(t) * sh - g1(t) * chh) / (sh * sh * sh);
    EXPECT_NEAR(jet_descend_odd<3>(g, 2, t), d2, 1e-10 * std::max(1.0, std::abs(d2)));
  }
}

TEST(Descent, EvenEmptySupport) {
  WindowFamily w;
  auto g = [&](const auto& s) { return w.beta(s * (2.0 / 3.0)); }; // supported in (3/4, 3)
  EXPECT_EQ(std::abs(descend_even(g, 2, 3.0, 3.0)), 0.0);
}

TEST(Descent, EvenAgainstQuadratureOracle) {
  auto g = [](const auto& s) { return exp(s * -2.0); };
  const double t = 1.0;
  const cplx got = descend_even(g, 2, t, t + 40.0);
  // int_t^inf -2 e^{-2s} (cosh s - cosh t)^{-1/2} ds, substituting s = t + v
  boost::math::quadrature::exp_sinh<double> es;
  const double ref = es.integrate([t](double v) {
    const double s = t + v;
    return -2.0 * std::exp(-2.0 * s) / std::sqrt(2.0 * std::sinh(0.5 * (s + t)) * std::sinh(0.5 * v));
  });
  EXPECT_NEAR(got.real(), ref, 1e-8 * std::abs(ref));
  EXPECT_NEAR(got.imag(), 0.0, 1e-15);
}

TEST(Descent, EvenEndpointIntegrandBounded) {
  // 2u/sqrt(2 sinh((s+t)/2) sinh(u^2/2)) stays bounded as u -> 0
  const double t = 1.0;
  for (double u : {1e-1, 1e-3, 1e-6}) {
    const double s = t + u * u;
    const double v = 2 * u / std::sqrt(2 * std::sinh(0.5 * (s + t)) * std::sinh(0.5 * u * u));
    EXPECT_LT(v, 2.0 / std::sqrt(std::sinh(t)) + 1e-6);
  }
}

TEST(Descent, EvenDetectsNonDecay) {
  auto g = [](const auto& s) { return exp(s * 0.5); };
  EXPECT_THROW(descend_even(g, 2, 1.0, 10.0), DomainError);
}

TEST(H3Resolvent, ClosedFormValues) {
  EXPECT_NEAR(h3_resolvent_kernel(1.0, 1.0).real(), std::exp(-1.0) / (4 * pi * std::sinh(1.0)), 1e-16);
  // 0.0249106 to seven digits; quoted elsewhere as "about 0.02490"
  EXPECT_NEAR(h3_resolvent_kernel(1.0, 1.0).real(), 0.0249106, 1e-7);
  const double r = 1e-6;
  EXPECT_NEAR(h3_resolvent_kernel(1.0, r).real() * 4 * pi * r, 1.0, 1e-5);
  EXPECT_THROW(h3_resolvent_kernel(cplx(0.0, 1.0), 1.0), DomainError);
  EXPECT_NEAR(h3_resolvent_profile(2.0).measured_singularity_order(), 1.0, 1e-3);
}

TEST(H3Resolvent, PlancherelReconstruction) {
  for (cplx z : {cplx(1.0), cplx(2.0), cplx(1.0, 0.5)})
    for (int i = 0; i <= 20; ++i) {
      const double r = 0.1 + 4.9 * i / 20.0;
      const cplx ref = h3_resolvent_kernel(z, r);
      EXPECT_LT(std::abs(plancherel_resolvent(z, r) - ref), 1e-6 * std::abs(ref)) << z << ' ' << r;
    }
}

TEST(SphericalFunction, LimitsAndEigenRelation) {
  EXPECT_NEAR(spherical_function(3.0, 0.0), 1.0, 0.0);
  EXPECT_NEAR(spherical_function(3.0, 1e-7), 1.0, 1e-12);
  EXPECT_NEAR(spherical_function(pi, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(spherical_function(0.0, 1.0), 1.0 / std::sinh(1.0), 1e-15);
  using J = Jet<double, 2>;
  for (double mu : {0.5, 2.0, 7.0})
    for (double r : {0.3, 1.4, 4.0}) {
      const J f = spherical_function(mu, J::variable(r));
      // (Delta + 1) f = f'' + 2 coth(r) f' + f
      const double lap = 2 * f.c[2] + 2.0 / std::tanh(r) * f.c[1] + f.c[0];
      EXPECT_NEAR(lap, -mu * mu * f.c[0], 1e-8 * std::max(1.0, mu * mu * std::abs(f.c[0])));
    }
}

TEST(Plancherel, Density) {
  EXPECT_EQ(plancherel_density(3, 0.0), 0.0);
  EXPECT_NEAR(plancherel_density(3, 2.0), 4.0 / (2 * pi * pi), 1e-16);
  EXPECT_THROW(plancherel_density(2, 1.0), DomainError);
}

TEST(BandProjector, DiagonalLimitAndOracle) {
  const double lam = 5.0, T = 4.0;
  const double diag = (std::pow(lam + 1 / T, 3) - std::pow(lam, 3)) / (6 * pi * pi);
  EXPECT_NEAR(band_projector_kernel(lam, T, 1e-7), diag, 1e-10 * diag);
  EXPECT_GT(band_projector_kernel(lam, T, 0.0), 0.0);
  boost::math::quadrature::tanh_sinh<double> ts;
  const double ref = ts.integrate([](double mu) { return band_integrand(mu, 1.0); }, 0.0, 1.0);
  EXPECT_NEAR(band_projector_kernel(0.0, 1.0, 1.0), ref, 1e-8 * std::abs(ref));
  for (double r : {1e-3, 0.05, 0.7, 3.0})
    EXPECT_NEAR(band_projector_kernel(lam, T, r), band_projector_closed(lam, T, r),
                1e-9 * band_projector_closed(lam, T, 0.0));
}

TEST(BandProjector, PrimitiveDifferentiates) {
  for (double d : {0.002, 0.3, 2.0}) {
    const double h = 1e-5 * std::max(d, 0.01);
    const double num = (band_projector_primitive(8.0, 2.0, d + h) - band_projector_primitive(8.0, 2.0, d - h)) / (2 * h);
    EXPECT_NEAR(num, band_projector_closed(8.0, 2.0, d) * std::sinh(d), 1e-6 * band_projector_closed(8.0, 2.0, 0.0));
  }
}

TEST(Dyadic, SupportsAndVanishing) {
  const HyperbolicContext h3{3};
  EXPECT_EQ(std::abs(s0_kernel(h3, 4.0, 1.0, 2.5)), 0.0);
  EXPECT_EQ(std::abs(sk_kernel(h3, 3, 4.0, 1.0, 3.9)), 0.0);
  EXPECT_EQ(std::abs(sk_kernel(h3, 3, 4.0, 1.0, 16.5)), 0.0);
  EXPECT_GT(std::abs(sk_kernel(h3, 3, 4.0, 1.0, 6.0)), 0.0);
  EXPECT_THROW(s0_kernel(h3, 0.5, 1.0, 1.0), DomainError);
  EXPECT_THROW(s0_kernel(h3, 4.0, 0.0, 1.0), DomainError);
}

TEST(Dyadic, CalibrationRecoversConstant) {
  const Calibration c = calibrate_c3();
  EXPECT_NEAR(c.constant, -1.0 / (4 * pi), 1e-12);
  EXPECT_LT(c.imaginary_ratio, 1e-12);
  EXPECT_LT(c.spread, 1e-12);
}

TEST(Dyadic, ReconstructionMatchesClosedForm) {
  const HyperbolicContext h3{3};
  for (auto [lam, mu] : {std::pair{8.0, 0.01}, {2.0, 0.5}, {5.0, -1.5}}) {
    const cplx z = z_from_root(lam, mu);
    for (int i = 0; i <= 40; ++i) {
      const double r = 0.05 + (16.0 - 0.05) * i / 40.0;
      const cplx ref = -h3_resolvent_kernel(z, r);
      EXPECT_LT(std::abs(dyadic_sum_kernel(h3, 4, lam, mu, r) - ref), 1e-6 * std::abs(ref)) << lam << ' ' << r;
    }
  }
}

TEST(Dyadic, SupDecaySuperpolynomial) {
  const HyperbolicContext h3{3};
  std::vector<double> sups;
  for (int k = 1; k <= 5; ++k) {
    double s = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double r = std::ldexp(1.0, k - 1) * (1.0 + 3.0 * i / 400.0);
      s = std::max(s, std::abs(sk_kernel(h3, k, 8.0, 0.01, r)));
    }
    sups.push_back(s);
  }
  for (std::size_t k = 1; k < sups.size(); ++k)
    EXPECT_LT(sups[k], sups[k - 1] / 4.0);
}

TEST(Dyadic, S0AmplitudeConformance) {
  const HyperbolicContext h3{3};
  double prev = 0.0;
  for (double lam : {20.0, 40.0, 80.0}) {
    double cmax = 0.0, near = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double r = std::exp(std::log(0.2 / lam) + (std::log(1.0) - std::log(0.2 / lam)) * i / 200.0);
      const double v = std::abs(s0_kernel(h3, lam, 1.0, r));
      if (r >= 1.0 / lam)
        cmax = std::max(cmax, v * std::sinh(r)); // n = 3: |a| r lambda^0
      else
        near = std::max(near, v * r);
    }
    EXPECT_LT(near, 1.0);
    if (prev > 0.0)
      EXPECT_NEAR(cmax / prev, 1.0, 0.25);
    prev = cmax;
  }
}

TEST(Dyadic, EvenDimensionPiecesAreFinite) {
  const HyperbolicContext h2{2}, h4{4};
  for (double r : {0.3, 1.0, 1.9}) {
    EXPECT_TRUE(std::isfinite(std::abs(s0_kernel(h2, 3.0, 1.0, r))));
    EXPECT_TRUE(std::isfinite(std::abs(s0_kernel(h4, 3.0, 1.0, r))));
  }
  EXPECT_EQ(std::abs(s0_kernel(h2, 3.0, 1.0, 2.5)), 0.0);
  // even dimensions have no sharp Huygens principle: S_1 is felt inside r < 1
  EXPECT_GT(std::abs(sk_kernel(h2, 1, 3.0, 1.0, 0.5)), 0.0);
}

TEST(RadialProfile, CsvExport) {
  std::ostringstream os;
  h3_resolvent_profile(1.0).write_csv(os, {0.5, 1.0});
  EXPECT_EQ(os.str().substr(0, 9), "r,re,im\n0");
}
