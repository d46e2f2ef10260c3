#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "curvlens/grids.hpp"
#include "curvlens/sphere_spectral.hpp"

using namespace curvlens;
using namespace curvlens::sphere;
using cplx = std::complex<double>;

TEST(SphereSpectrum, EigenvaluesAndDimensions) {
  const SphereContext s2{2}, s3{3}, s4{4};
  EXPECT_DOUBLE_EQ(eigenvalue(s2, 3), 3.5);
  EXPECT_DOUBLE_EQ(eigenvalue(s3, 3), 4.0);
  for (int k = 0; k < 30; ++k) {
    EXPECT_EQ(harmonic_dim(s2, k), static_cast<std::uint64_t>(2 * k + 1));
    EXPECT_EQ(harmonic_dim(s3, k), static_cast<std::uint64_t>((k + 1) * (k + 1)));
    EXPECT_EQ(harmonic_dim(s4, k), static_cast<std::uint64_t>((k + 1) * (k + 2) * (2 * k + 3) / 6));
  }
  EXPECT_THROW(eigenvalue(s3, -1), DomainError);
  const SphereContext k4{3, 4.0};
  EXPECT_DOUBLE_EQ(scaled_eigenvalue(k4, 2), 6.0);
}

TEST(SphereSpectrum, ProjectorDiagonalIsDimensionOverVolume) {
  for (int n = 2; n <= 4; ++n) {
    const SphereContext ctx{n};
    for (int k : {0, 1, 5, 40})
      EXPECT_NEAR(zonal_projector(ctx, k, 1.0) * ctx.volume() / static_cast<double>(harmonic_dim(ctx, k)), 1.0,
                  1e-12);
  }
}

TEST(SphereSpectrum, S3ProjectorClosedForm) {
  // H_k on S^3: (k+1) sin((k+1)d) / (2 pi^2 sin d)
  const SphereContext ctx{3};
  for (int k : {3, 17, 64})
    for (double d : {0.2, 1.1, 2.9}) {
      const double j = k + 1;
      EXPECT_NEAR(zonal_projector(ctx, k, std::cos(d)), j * std::sin(j * d) / (2 * pi * pi * std::sin(d)),
                  1e-11 * j * j);
    }
}

TEST(SphereSpectrum, ProjectorsReproduceOnGrid) {
  // int H_k(x,z) H_j(z,y) dz = delta_kj H_k(x,y)
  const SphereContext ctx{2};
  const special::QuadratureRule g = special::sphere_grid(2, 16);
  auto dot = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      s += g.node(a)[i] * g.node(b)[i];
    return std::clamp(s, -1.0, 1.0);
  };
  const std::size_t x = 5, y = 300;
  for (int k : {2, 6})
    for (int j : {2, 6, 7}) {
      double acc = 0.0;
      for (std::size_t z = 0; z < g.size(); ++z)
        acc += g.weights[z] * zonal_projector(ctx, k, dot(x, z)) * zonal_projector(ctx, j, dot(z, y));
      const double expect = k == j ? zonal_projector(ctx, k, dot(x, y)) : 0.0;
      EXPECT_NEAR(acc, expect, 1e-10) << k << ' ' << j;
    }
}

TEST(SphereResolvent, SpectralSumMatchesClosedFormOnS3) {
  const SphereContext ctx{3};
  for (cplx zeta : {cplx(-4.0, 0.0), cplx(2.0, 3.0), cplx(30.0, 11.0)}) {
    const int K = 3000;
    const ZonalKernel kern = resolvent_kernel(ctx, {zeta}, K, DegreeWindow::gaussian_for(K));
    for (double d : {0.4, 1.0, 2.0, 2.8}) {
      const cplx ref = resolvent_s3_closed(zeta, d);
      EXPECT_LT(std::abs(kern.at_distance(d) - ref), 1e-4 * std::abs(ref)) << zeta << ' ' << d;
    }
  }
}

TEST(SphereResolvent, NegativeZetaKernelHasOneSignAndDecays) {
  // zeta = -1: kernel of (Delta - 1 - 1)^{-1} = -(-Delta + 2)^{-1}
  const SphereContext ctx{3};
  double prev = INFINITY;
  for (int i = 1; i < 60; ++i) {
    const double d = pi * i / 60.0;
    const cplx v = resolvent_s3_closed(cplx(-1.0), d);
    EXPECT_LT(std::abs(v.imag()), 1e-15);
    EXPECT_LT(v.real(), 0.0);
    EXPECT_LT(-v.real(), prev);
    prev = -v.real();
  }
  const ZonalKernel k = resolvent_kernel(ctx, {cplx(-1.0)}, 2000, DegreeWindow::gaussian_for(2000));
  EXPECT_LT(std::abs(k.at_distance(1.0).imag()), 1e-14);
  EXPECT_LT(k.at_distance(1.0).real(), 0.0);
}

TEST(SphereResolvent, SpectrumHitAndNearHitWarning) {
  const SphereContext ctx{3};
  try {
    resolvent_kernel(ctx, {cplx(36.0, 0.0)});
    FAIL() << "expected SpectrumHit";
  } catch (const SpectrumHit& e) {
    EXPECT_EQ(e.degree(), 5);
  }
  const ZonalKernel near = resolvent_kernel(ctx, {cplx(36.0 + 1e-6, 0.0)});
  EXPECT_FALSE(near.warnings.empty());
  const ZonalKernel base = resolvent_kernel(ctx, {cplx(25.0, 5.0)});
  EXPECT_GT(std::abs(near.at_distance(0.7)), 1e5 * std::abs(base.at_distance(0.7)));
}

TEST(SphereResolvent, RegionMembership) {
  EXPECT_TRUE(SpectralParamZeta{cplx(25.0, 5.0)}.in_region());
  EXPECT_TRUE(SpectralParamZeta{cplx(-100.0, 0.0)}.in_region());
  EXPECT_FALSE(SpectralParamZeta{cplx(441.0, 1e-4)}.in_region());
}

TEST(SphereWave, MultiplierPeriodicity) {
  const SphereContext s3{3}, s4{4};
  double res3 = 0.0, res4 = 0.0;
  for (int k = 0; k <= 200; ++k)
    for (double t : {0.0, 0.37, 1.9, 5.2}) {
      res3 = std::max(res3, std::abs(wave_multiplier(s3, t + 2 * pi, k) - wave_multiplier(s3, t, k)));
      res4 = std::max(res4, std::abs(wave_multiplier(s4, t + 2 * pi, k) + wave_multiplier(s4, t, k)));
    }
  EXPECT_LT(res3, 1e-12);
  EXPECT_LT(res4, 1e-12);
}

TEST(SphereWave, WaveKernelNeedsWindow) {
  EXPECT_THROW(wave_kernel(SphereContext{3}, 1.0, 32, {}), DomainError);
}

TEST(SphereWave, ResolventViaWaveMatchesSpectral) {
  const SphereContext ctx{3};
  const int K = 64;
  const DegreeWindow w = DegreeWindow::gaussian_for(K);
  for (cplx root : {cplx(3.0, 1.0), cplx(7.5, -2.0), cplx(0.0, 2.0)}) {
    const SpectralParamZeta z{root * root};
    const ZonalKernel a = resolvent_kernel(ctx, z, K, w);
    const ZonalKernel b = resolvent_via_wave(ctx, z, 40.0, K, w);
    double sup = 0.0, err = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double d = 0.2 + 2.8 * i / 100.0;
      sup = std::max(sup, std::abs(a.at_distance(d)));
      err = std::max(err, std::abs(a.at_distance(d) - b.at_distance(d)));
    }
    EXPECT_LT(err / sup, 1e-6) << root;
  }
  EXPECT_THROW(resolvent_via_wave(ctx, {cplx(9.0, 0.0)}, 40.0, K, w), DomainError);
  EXPECT_THROW(resolvent_via_wave(ctx, SpectralParamZeta::from_root(3.0, 0.5), 40.0, K, w), DomainError);
}

TEST(SphereLocal, ExactS3KernelMatchesSpectralRoute) {
  const SphereContext ctx{3};
  const double lam = 6.0, mu = 1.0;
  const int K = 1500;
  const ZonalKernel spec = local_resolvent_kernel(ctx, lam, mu, K, DegreeWindow::gaussian_for(K));
  double sup = 0.0, err = 0.0;
  for (int i = 0; i <= 60; ++i) {
    const double d = 0.3 + 0.9 * i / 60.0;
    const cplx ref = local_resolvent_s3(lam, mu, d);
    sup = std::max(sup, std::abs(ref));
    err = std::max(err, std::abs(spec.at_distance(d) - ref));
  }
  EXPECT_LT(err, 1e-3 * sup);
  // supported in d < 1
  EXPECT_EQ(std::abs(local_resolvent_s3(lam, mu, 1.2)), 0.0);
}

TEST(SphereLocal, AmplitudeConstantsBounded) {
  const SphereContext ctx{3};
  std::vector<double> ds;
  for (int i = 1; i <= 200; ++i)
    ds.push_back(std::exp(std::log(1e-3) + (std::log(pi - 0.05) - std::log(1e-3)) * i / 200.0));
  double prev = 0.0;
  for (double lam : {20.0, 40.0, 80.0}) {
    const LocalResolventReport r = local_resolvent_check(ctx, lam, 1.0, ds);
    EXPECT_GT(r.max_far, 0.0);
    EXPECT_LT(r.max_near, 1.0);
    EXPECT_EQ(r.amplitude_near_antipode, 0.0); // the local piece vanishes past d = 1
    if (prev > 0.0)
      EXPECT_LT(r.max_far / prev, 1.5);
    prev = r.max_far;
  }
}

TEST(SphereTail, MultiplierDecays) {
  // faster than any power: each doubling past tau = 40 gains more than 2^4
  double prev = std::abs(tail_multiplier(5.0, 1.0, 40.0));
  for (double tau : {80.0, 160.0, 320.0}) {
    const double v = std::abs(tail_multiplier(5.0, 1.0, tau));
    EXPECT_LT(v, prev / 16.0) << tau;
    prev = v;
  }
  EXPECT_LT(prev, 1e-9);
  EXPECT_THROW(tail_multiplier(5.0, 0.1, 1.0), DomainError);
}

TEST(SphereAsymptotics, S3RepresentationIsExact) {
  const AsymptoticFit fit = projector_asymptotics_check(SphereContext{3}, 64);
  EXPECT_LT(fit.max_residual, 1e-10);
  EXPECT_LT(fit.antipodal_residual, 1e-10);
  EXPECT_GT(fit.antipodal_residual_literal, 0.1);
  EXPECT_LT(fit.parity_residual, 1e-12);
  EXPECT_LT(fit.derivative_bound[1], 10 * fit.derivative_bound[0]);
}

TEST(SphereAsymptotics, S2ResidualShrinksWithDegree) {
  const AsymptoticFit a = projector_asymptotics_check(SphereContext{2}, 16);
  const AsymptoticFit b = projector_asymptotics_check(SphereContext{2}, 64);
  EXPECT_LT(b.residual_at_half_pi, a.residual_at_half_pi + 1e-12);
  EXPECT_LT(b.residual_at_half_pi, 0.05);
}

TEST(SphereScaling, TransportIdentities) {
  const SphereContext unit{3};
  auto u = [](const auto& r) {
    using std::cos;
    using std::exp;
    return exp(cos(r) * 2.0) * (cos(r) * cos(r) + 0.5);
  };
  for (double kappa : {0.25, 1.0, 4.0}) {
    const ScalingReport rep = scaling_transport(unit, u, kappa, 1.2, 6.0, cplx(25.0, 5.0));
    EXPECT_LT(rep.s_identity_error, 1e-10);
    EXPECT_LT(rep.r_identity_error, 1e-10);
  }
  auto one = [](const auto& r) { return r * 0.0 + 1.0; };
  const ScalingReport rep = scaling_transport(unit, one, 4.0, 1.2, 6.0, cplx(25.0, 5.0));
  EXPECT_NEAR(rep.norm_s_kappa / rep.norm_s_unit, std::pow(4.0, -0.25), 1e-12);
}
