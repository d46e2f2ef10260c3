#pragma once
//
// Parameter scans behind the experiment subcommands. Each scan returns a
// small summary struct (what the assertions look at) plus flat JSON records
// (what gets written to records.json / records.csv).
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "json.hpp"

#include "curvlens/grids.hpp"
#include "curvlens/hyperbolic_spectral.hpp"
#include "curvlens/norm_engine.hpp"
#include "curvlens/sphere_spectral.hpp"

namespace curvlens::scans {

using json = nlohmann::json;
using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

struct EstimateOptions {
  norm::PowerOptions power;
  int workers = 1;
};

inline json estimate_fields(const norm::NormEstimate& e) {
  return {{"estimate", e.value},
          {"iterations", e.iterations},
          {"converged", e.converged},
          {"restarts", e.restarts},
          {"witness_norm_r", e.witness_norm_r},
          {"witness_norm_s", e.witness_norm_s},
          {"r_used", e.r_used},
          {"s_used", e.s_used}};
}

inline json fit_fields(const norm::SlopeFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"half_width", f.half_width},
          {"points", f.points}};
}

inline json complex_fields(const std::string& name, cplx v) {
  return {{name + "_re", v.real()}, {name + "_im", v.imag()}};
}

inline void merge(json& into, const json& from) {
  for (auto it = from.begin(); it != from.end(); ++it)
    into[it.key()] = it.value();
}

// ---------------------------------------------------------------------------
// sphere projectors
// ---------------------------------------------------------------------------

struct ProjectorAlgebra {
  double max_trace_error = 0.0;          // relative to d_k
  double max_orthogonality_error = 0.0;  // relative to sqrt(H_k(1) H_j(1))
  double max_parity_error = 0.0;
  std::size_t grid_points = 0;
  std::vector<json> records;
};

// H_k H_j = delta_kj H_k and trace H_k = d_k on the product grid. Entries of
// the composition are evaluated at a handful of sample node pairs, which is
// exact for k + j below the grid degree and O(N) per entry.
inline ProjectorAlgebra projector_algebra(int n, int k_max, int resolution, int workers = 1) {
  const sphere::SphereContext ctx{n};
  ctx.validate();
  const special::QuadratureRule grid = special::sphere_grid(n, resolution);
  const std::size_t N = grid.size(), D = static_cast<std::size_t>(k_max) + 1, dim = grid.dim;
  const double alpha = ctx.alpha(), vol = ctx.volume();

  const std::vector<std::size_t> samples{0, N / 5 + 1, N / 2 + 3, (4 * N) / 5 + 7};
  std::vector<double> scale(D);
  for (std::size_t k = 0; k < D; ++k)
    scale[k] = sphere::projector_scale(ctx, static_cast<int>(k));

  auto dot = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j)
      s += grid.coords[a * dim + j] * grid.coords[b * dim + j];
    return std::clamp(s, -1.0, 1.0);
  };
  // rows of H_k(x_a, .) for each sample a
  std::vector<std::vector<double>> table(samples.size(), std::vector<double>(N * D));
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    for (std::size_t b = 0; b < N; ++b) {
      double* out = table[i].data() + b * D;
      special::gegenbauer_all(k_max, alpha, dot(samples[i], b), out);
      for (std::size_t k = 0; k < D; ++k)
        out[k] *= scale[k];
    }
  });

  ProjectorAlgebra res;
  res.grid_points = N;
  const double total = grid.total_weight();
  for (std::size_t k = 0; k < D; ++k) {
    const double dk = static_cast<double>(sphere::harmonic_dim(ctx, static_cast<int>(k)));
    const double diag = sphere::zonal_projector(ctx, static_cast<int>(k), 1.0);
    const double tr = diag * total;
    // trace(H_k^2) from the first sample row, times the volume by invariance
    double hs = 0.0;
    for (std::size_t b = 0; b < N; ++b)
      hs += grid.weights[b] * table[0][b * D + k] * table[0][b * D + k];
    hs *= vol;
    const double err = std::max(std::abs(tr - dk), std::abs(hs - dk)) / dk;
    res.max_trace_error = std::max(res.max_trace_error, err);
    res.records.push_back({{"stage", "trace"}, {"k", k}, {"d_k", dk}, {"trace", tr},
                           {"trace_of_square", hs}, {"relative_error", err}});
  }

  std::vector<double> orth(D * D, 0.0);
  for (std::size_t ia = 0; ia < samples.size(); ++ia)
    for (std::size_t ic = 0; ic < samples.size(); ++ic) {
      const double t_ac = dot(samples[ia], samples[ic]);
      const std::vector<double> direct = special::gegenbauer_all(k_max, alpha, t_ac);
      for (std::size_t k = 0; k < D; ++k)
        for (std::size_t j = 0; j < D; ++j) {
          double acc = 0.0;
          for (std::size_t b = 0; b < N; ++b)
            acc += grid.weights[b] * table[ia][b * D + k] * table[ic][b * D + j];
          const double expect = k == j ? scale[k] * direct[k] : 0.0;
          const double norm = std::sqrt(sphere::zonal_projector(ctx, static_cast<int>(k), 1.0) *
                                        sphere::zonal_projector(ctx, static_cast<int>(j), 1.0));
          orth[k * D + j] = std::max(orth[k * D + j], std::abs(acc - expect) / norm);
        }
    }
  for (std::size_t k = 0; k < D; ++k)
    for (std::size_t j = 0; j < D; ++j) {
      res.max_orthogonality_error = std::max(res.max_orthogonality_error, orth[k * D + j]);
      res.records.push_back({{"stage", "orthogonality"}, {"k", k}, {"j", j}, {"deviation", orth[k * D + j]}});
    }

  // H_k(x, -y) = (-1)^k H_k(x, y)
  for (std::size_t k = 0; k < D; ++k) {
    double worst = 0.0;
    const double top = sphere::zonal_projector(ctx, static_cast<int>(k), 1.0);
    for (int i = 0; i <= 200; ++i) {
      const double t = -1.0 + 2.0 * i / 200.0;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      worst = std::max(worst, std::abs(sphere::zonal_projector(ctx, static_cast<int>(k), -t) -
                                       sign * sphere::zonal_projector(ctx, static_cast<int>(k), t)) /
                                  top);
    }
    res.max_parity_error = std::max(res.max_parity_error, worst);
  }
  res.records.push_back({{"stage", "parity"}, {"max_relative_error", res.max_parity_error}});
  return res;
}

struct SupGrowth {
  norm::SlopeFit fit;          // against k
  norm::SlopeFit fit_shifted;  // against 1 + k
  std::vector<json> records;
};

inline SupGrowth sup_growth(const sphere::SphereContext& ctx, const std::vector<int>& degrees,
                            int cos_points = 4001) {
  SupGrowth out;
  std::vector<double> ks, k1, sups;
  for (int k : degrees) {
    double s = 0.0;
    for (int i = 0; i < cos_points; ++i) {
      const double t = -1.0 + 2.0 * i / (cos_points - 1);
      s = std::max(s, std::abs(sphere::zonal_projector(ctx, k, t)));
    }
    ks.push_back(k);
    k1.push_back(k + 1.0);
    sups.push_back(s);
    out.records.push_back({{"stage", "sup_growth"}, {"k", k}, {"sup", s}});
  }
  out.fit = norm::slope_fit(ks, sups);
  out.fit_shifted = norm::slope_fit(k1, sups);
  return out;
}

// sum_{j<=k} [j == k] H_j, i.e. the kernel of H_k alone
inline sphere::ZonalKernel projector_kernel(const sphere::SphereContext& ctx, int k) {
  const double target = ctx.scaled_eigenvalue(k);
  const double tol = 1e-9 * std::max(1.0, target);
  return sphere::multiplier_kernel(
      ctx, [=](double tau) { return cplx(std::abs(tau - target) < tol ? 1.0 : 0.0); }, std::max(1, k));
}

struct NormGrowth {
  norm::SlopeFit fit;
  int refinement_flags = 0;
  std::vector<json> records;
};

// Lower bounds of ||H_k||_{r->s} on zonal functions, polar rule of 2k+32 nodes;
// a second pass at 2k+64 nodes is the refinement diagnostic.
inline NormGrowth projector_norm_growth(const sphere::SphereContext& ctx, const std::vector<int>& degrees,
                                        const norm::MixedNormSpec& spec, const EstimateOptions& opt) {
  NormGrowth out;
  std::vector<double> ks, vals;
  for (int k : degrees) {
    const sphere::ZonalKernel K = projector_kernel(ctx, k);
    const auto T = norm::reduce_sphere_spectral(K, special::polar_rule(ctx.n, 2 * k + 32, ctx.kappa), opt.workers);
    const norm::NormEstimate e = norm::mixed_norm_power_iterate(T, spec, opt.power);
    const auto T2 = norm::reduce_sphere_spectral(K, special::polar_rule(ctx.n, 2 * k + 64, ctx.kappa), opt.workers);
    const norm::NormEstimate e2 = norm::mixed_norm_power_iterate(T2, spec, opt.power);
    const bool flag = e2.value < e.value * (1.0 - 1e-2);
    out.refinement_flags += flag ? 1 : 0;
    json rec{{"stage", "norm_growth"}, {"k", k}, {"nodes", 2 * k + 32}, {"refined_estimate", e2.value},
             {"refinement_regression", flag}};
    merge(rec, estimate_fields(e));
    out.records.push_back(rec);
    ks.push_back(k);
    vals.push_back(e.value);
  }
  out.fit = norm::slope_fit(ks, vals);
  return out;
}

inline json asymptotics_record(const sphere::AsymptoticFit& f) {
  return {{"stage", "asymptotics"},
          {"n", f.n},
          {"k", f.k},
          {"lambda", f.lambda},
          {"sup_ratio", f.sup_ratio},
          {"max_residual", f.max_residual},
          {"residual_at_half_pi", f.residual_at_half_pi},
          {"derivative_bound_0", f.derivative_bound[0]},
          {"derivative_bound_1", f.derivative_bound[1]},
          {"derivative_bound_2", f.derivative_bound[2]},
          {"parity_residual", f.parity_residual},
          {"antipodal_residual", f.antipodal_residual},
          {"antipodal_residual_literal_phase", f.antipodal_residual_literal},
          {"ill_conditioned_points", f.ill_conditioned_points}};
}

// ---------------------------------------------------------------------------
// sphere resolvent
// ---------------------------------------------------------------------------

struct WaveIdentity {
  double max_relative_error = 0.0;
  std::vector<json> records;
};

// Spectral resolvent against the damped time integral of the wave kernel, both
// with the same degree window; error relative to the sup over d in [0.2, 3].
inline WaveIdentity wave_identity_check(const sphere::SphereContext& ctx, const std::vector<cplx>& roots, int K) {
  WaveIdentity out;
  const sphere::DegreeWindow w = sphere::DegreeWindow::gaussian_for(K);
  for (cplx root : roots) {
    const sphere::SpectralParamZeta z{root * root};
    const double t_max = 40.0 / std::abs(z.mu());
    const sphere::ZonalKernel a = sphere::resolvent_kernel(ctx, z, K, w);
    const sphere::ZonalKernel b = sphere::resolvent_via_wave(ctx, z, t_max, K, w);
    double sup = 0.0, err = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double d = 0.2 + 2.8 * i / 200.0;
      const cplx va = a.at_distance(d);
      sup = std::max(sup, std::abs(va));
      err = std::max(err, std::abs(va - b.at_distance(d)));
    }
    json rec{{"stage", "wave_identity"}, {"K", K}, {"t_max", t_max}, {"relative_error", err / sup}};
    merge(rec, complex_fields("zeta", z.zeta));
    out.records.push_back(rec);
    out.max_relative_error = std::max(out.max_relative_error, err / sup);
  }
  return out;
}

struct Periodicity {
  double residual_n3 = 0.0; // cos((t + 2pi) lambda_k) - cos(t lambda_k), n = 3
  double residual_n4 = 0.0; // cos((t + 2pi) lambda_k) + cos(t lambda_k), n = 4
  std::vector<json> records;
};

inline Periodicity wave_periodicity(int k_max = 200) {
  Periodicity out;
  const sphere::SphereContext s3{3}, s4{4};
  for (int k = 0; k <= k_max; ++k)
    for (double t : {0.0, 0.37, 1.9, 5.2}) {
      out.residual_n3 = std::max(out.residual_n3, std::abs(sphere::wave_multiplier(s3, t + 2 * pi, k) -
                                                           sphere::wave_multiplier(s3, t, k)));
      out.residual_n4 = std::max(out.residual_n4, std::abs(sphere::wave_multiplier(s4, t + 2 * pi, k) +
                                                           sphere::wave_multiplier(s4, t, k)));
    }
  out.records.push_back({{"stage", "periodicity"}, {"n", 3}, {"k_max", k_max}, {"residual", out.residual_n3}});
  out.records.push_back({{"stage", "periodicity"}, {"n", 4}, {"k_max", k_max}, {"residual", out.residual_n4}});
  return out;
}

struct ResolventEstimate {
  cplx zeta;
  bool in_region = false;
  int K = 0;
  int nodes = 0;
  norm::NormEstimate estimate;
  double refined = 0.0;
  std::vector<std::string> warnings;
};

// One resolvent norm estimate on zonal functions; nodes = K + 32 unless given.
inline ResolventEstimate sphere_resolvent_estimate(const sphere::SphereContext& ctx, cplx zeta,
                                                   const norm::MixedNormSpec& spec, const EstimateOptions& opt,
                                                   bool refine = true) {
  ResolventEstimate out;
  out.zeta = zeta;
  const sphere::SpectralParamZeta z{zeta};
  const sphere::ZonalKernel K = sphere::resolvent_kernel(ctx, z);
  out.in_region = z.in_region();
  out.K = K.K;
  out.nodes = K.K + 32;
  out.warnings = K.warnings;
  const auto T = norm::reduce_sphere_spectral(K, special::polar_rule(ctx.n, out.nodes, ctx.kappa), opt.workers);
  out.estimate = norm::mixed_norm_power_iterate(T, spec, opt.power);
  if (refine) {
    const sphere::ZonalKernel K2 = sphere::resolvent_kernel(ctx, z, 2 * K.K);
    const auto T2 =
        norm::reduce_sphere_spectral(K2, special::polar_rule(ctx.n, 2 * K.K + 64, ctx.kappa), opt.workers);
    out.refined = norm::mixed_norm_power_iterate(T2, spec, opt.power).value;
  }
  return out;
}

struct RegionScan {
  std::vector<ResolventEstimate> path;
  std::vector<ResolventEstimate> probes;
  double path_min = 0.0, path_max = 0.0;
  double ratio = 0.0;
  std::vector<json> records;
};

// Boundary path zeta = sigma^2 + i sigma plus arbitrary probe points. Probe
// records carry their estimate divided by the path max and by the path min.
inline RegionScan resolvent_uniformity_scan(const sphere::SphereContext& ctx, const std::vector<double>& sigmas,
                                            const std::vector<cplx>& probes, const norm::MixedNormSpec& spec,
                                            const EstimateOptions& opt) {
  RegionScan out;
  out.path_min = INFINITY;
  for (double s : sigmas) {
    out.path.push_back(sphere_resolvent_estimate(ctx, cplx(s * s, s), spec, opt));
    out.path_min = std::min(out.path_min, out.path.back().estimate.value);
    out.path_max = std::max(out.path_max, out.path.back().estimate.value);
  }
  out.ratio = out.path_max / out.path_min;
  for (cplx z : probes)
    out.probes.push_back(sphere_resolvent_estimate(ctx, z, spec, opt));

  auto record = [&](const ResolventEstimate& e, const char* stage) {
    json rec{{"stage", stage}, {"in_region", e.in_region}, {"K", e.K}, {"nodes", e.nodes},
             {"refined_estimate", e.refined},
             {"refinement_regression", e.refined < e.estimate.value * (1.0 - 1e-2)},
             {"warnings", e.warnings.size()}};
    merge(rec, complex_fields("zeta", e.zeta));
    merge(rec, estimate_fields(e.estimate));
    return rec;
  };
  for (const auto& e : out.path)
    out.records.push_back(record(e, "boundary_path"));
  for (const auto& e : out.probes) {
    json rec = record(e, "probe");
    rec["over_path_max"] = e.estimate.value / out.path_max;
    rec["over_path_min"] = e.estimate.value / out.path_min;
    out.records.push_back(rec);
  }
  return out;
}

struct TailTable {
  double doubling_gain_min = INFINITY; // smallest |m(tau)| / |m(2 tau)| past tau = 40
  std::vector<json> records;
};

inline TailTable tail_multiplier_table(double lambda, double mu, const std::vector<double>& taus) {
  TailTable out;
  double prev = -1.0, prev_tau = 0.0;
  for (double tau : taus) {
    const double v = std::abs(sphere::tail_multiplier(lambda, mu, tau));
    out.records.push_back({{"stage", "tail_multiplier"}, {"lambda", lambda}, {"mu", mu}, {"tau", tau},
                           {"abs_multiplier", v}});
    if (prev > 0.0 && prev_tau >= 40.0 && std::abs(tau - 2.0 * prev_tau) < 1e-12 && v > 0.0)
      out.doubling_gain_min = std::min(out.doubling_gain_min, prev / v);
    prev = v;
    prev_tau = tau;
  }
  return out;
}

// ---------------------------------------------------------------------------
// curvature scaling
// ---------------------------------------------------------------------------

struct ScalingScan {
  double max_transport_error = 0.0;
  double max_constant_error = 0.0;
  std::vector<json> records;
};

// Transport identities for a fixed smooth zonal profile, and the resolvent
// estimate at curvature kappa against the kappa = 1 estimate times
// kappa^{n/2 (1/r - 1/s) - 1} (equal to 1 on admissible pairs).
inline ScalingScan sphere_scaling_scan(int n, const std::vector<double>& kappas, const norm::MixedNormSpec& spec,
                                       cplx zeta, const EstimateOptions& opt) {
  ScalingScan out;
  const sphere::SphereContext unit{n};
  auto u = [](const auto& r) {
    using std::cos;
    using std::exp;
    return exp(cos(r) * 2.0) * (cos(r) * cos(r) + 0.5);
  };
  const ResolventEstimate base = sphere_resolvent_estimate(unit, zeta, spec, opt, false);
  for (double kappa : kappas) {
    const sphere::ScalingReport rep = sphere::scaling_transport(unit, u, kappa, spec.r_used(), spec.s_used(), zeta);
    const double terr = std::max(rep.s_identity_error, rep.r_identity_error);
    out.max_transport_error = std::max(out.max_transport_error, terr);

    const sphere::SphereContext ctx{n, kappa};
    const ResolventEstimate e = sphere_resolvent_estimate(ctx, kappa * zeta, spec, opt, false);
    const double factor = std::pow(kappa, 0.5 * n * (1.0 / spec.r_used() - 1.0 / spec.s_used()) - 1.0);
    const double cerr = std::abs(e.estimate.value - factor * base.estimate.value) / e.estimate.value;
    out.max_constant_error = std::max(out.max_constant_error, cerr);
    out.records.push_back({{"stage", "scaling"},
                           {"kappa", kappa},
                           {"s_factor_expected", rep.s_factor_expected},
                           {"s_identity_error", rep.s_identity_error},
                           {"r_factor_expected", rep.r_factor_expected},
                           {"r_identity_error", rep.r_identity_error},
                           {"estimate_unit", base.estimate.value},
                           {"estimate_kappa", e.estimate.value},
                           {"constant_factor", factor},
                           {"constant_error", cerr}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// hyperbolic space
// ---------------------------------------------------------------------------

struct PlancherelCheck {
  double max_relative_error = 0.0;
  std::vector<json> records;
};

inline PlancherelCheck plancherel_check(const std::vector<cplx>& zs, double r_lo, double r_hi, int points) {
  PlancherelCheck out;
  for (cplx z : zs) {
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
      const double r = r_lo + (r_hi - r_lo) * i / (points - 1);
      const cplx ref = hyperbolic::h3_resolvent_kernel(z, r);
      worst = std::max(worst, std::abs(hyperbolic::plancherel_resolvent(z, r) - ref) / std::abs(ref));
    }
    json rec{{"stage", "plancherel"}, {"r_min", r_lo}, {"r_max", r_hi}, {"relative_error", worst}};
    merge(rec, complex_fields("z", z));
    out.records.push_back(rec);
    out.max_relative_error = std::max(out.max_relative_error, worst);
  }
  return out;
}

// radius rule for the band operators: the band of width 1/T needs B_R with
// R >= 2T before the estimate settles
inline double band_radius(double base_R, double T) { return std::max(base_R, 2.0 * T); }

inline norm::NormEstimate band_projector_estimate(double lambda, double T, double R, const EstimateOptions& opt,
                                                  const norm::MixedNormSpec& spec = {2.0, 4.0}) {
  const double h = std::min(0.25, 4.0 / std::max(lambda, 1e-300));
  const auto rule = special::radial_rule(3, R, h, 12);
  const auto op = norm::reduce_h3_primitive(
      [=](double d) { return cplx(hyperbolic::band_projector_primitive(lambda, T, d)); }, rule,
      "band projector", opt.workers);
  return norm::mixed_norm_power_iterate(op, spec, opt.power);
}

struct SteinTomasScan {
  norm::SlopeFit fit;     // T^{1/2} estimate vs lambda at T = 1
  double band_ratio = 0;  // max/min of T^{1/2} estimates across T at the band lambda
  int r_instability_flags = 0;
  std::vector<json> records;
};

inline SteinTomasScan stein_tomas_scan(const std::vector<double>& lambdas, const std::vector<double>& Ts,
                                       double band_lambda, double R, const std::vector<double>& stability_radii,
                                       const std::vector<double>& probe_lambdas, const EstimateOptions& opt) {
  for (double l : lambdas)
    if (l < 1.0)
      throw DomainError("stein_tomas_scan: need lambda >= 1");
  for (double t : Ts)
    if (t < 1.0)
      throw DomainError("stein_tomas_scan: need T >= 1");
  SteinTomasScan out;
  std::vector<double> xs, ys;
  for (double lam : lambdas) {
    const norm::NormEstimate e = band_projector_estimate(lam, 1.0, R, opt);
    json rec{{"stage", "lambda_scan"}, {"lambda", lam}, {"T", 1.0}, {"R", R}, {"scaled_estimate", e.value}};
    merge(rec, estimate_fields(e));
    out.records.push_back(rec);
    xs.push_back(lam);
    ys.push_back(e.value);
  }
  out.fit = norm::slope_fit(xs, ys);

  double lo = INFINITY, hi = 0.0;
  for (double T : Ts) {
    const double RT = band_radius(R, T);
    const norm::NormEstimate e = band_projector_estimate(band_lambda, T, RT, opt);
    const double scaled = std::sqrt(T) * e.value;
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
    json rec{{"stage", "T_band"}, {"lambda", band_lambda}, {"T", T}, {"R", RT}, {"scaled_estimate", scaled}};
    merge(rec, estimate_fields(e));
    out.records.push_back(rec);
  }
  out.band_ratio = hi / lo;

  // R-stability: successive radii differing by more than 20% are flagged
  double prev = -1.0;
  for (double Rs : stability_radii) {
    const norm::NormEstimate e = band_projector_estimate(band_lambda, 1.0, Rs, opt);
    const bool flag = prev > 0.0 && std::abs(e.value - prev) > 0.2 * prev;
    out.r_instability_flags += flag ? 1 : 0;
    json rec{{"stage", "R_stability"}, {"lambda", band_lambda}, {"T", 1.0}, {"R", Rs},
             {"scaled_estimate", e.value}, {"unstable", flag}};
    merge(rec, estimate_fields(e));
    out.records.push_back(rec);
    prev = e.value;
  }

  // small-lambda probe: recorded only
  for (double lam : probe_lambdas) {
    const norm::NormEstimate e = band_projector_estimate(lam, 1.0, R, opt);
    json rec{{"stage", "small_lambda_probe"}, {"lambda", lam}, {"T", 1.0}, {"R", R}, {"scaled_estimate", e.value}};
    merge(rec, estimate_fields(e));
    out.records.push_back(rec);
  }
  return out;
}

struct DyadicDecay {
  double slope_log2 = 0.0;         // log2 estimate per unit k
  norm::SlopeFit fit;              // estimate vs 2^k (same slope, with half-width)
  double sup_slope_log2 = 0.0;     // log2 sup |S_k| per unit k; -N
  double l2l4_constant_max = 0.0;  // max_k estimate / (2^{k/2} lambda^{-3/4})
  double l2l4_constant_first = 0.0;
  std::vector<json> records;
};

inline double sk_sup(const hyperbolic::HyperbolicContext& ctx, int k, double lambda, double mu) {
  double s = 0.0;
  for (int i = 0; i <= 800; ++i) {
    const double r = std::ldexp(1.0, k - 1) * (1.0 + 3.0 * i / 800.0);
    s = std::max(s, std::abs(hyperbolic::sk_kernel(ctx, k, lambda, mu, r)));
  }
  return s;
}

// NormEstimate of each S_k on B_{2^{k+1}}, zonal reduction through the
// primitive c_3 beta(2^{-k} d) G(d) of K(d) sinh d.
inline DyadicDecay dyadic_decay_scan(const std::vector<int>& ks, double lambda, double mu,
                                     const norm::MixedNormSpec& spec, const EstimateOptions& opt) {
  norm::require_admissible(spec, 3, true);
  const hyperbolic::HyperbolicContext h3{3};
  const hyperbolic::WaveProfile prof{lambda, mu};
  const WindowFamily win;
  const double c3 = hyperbolic::kernel_constant(3);
  DyadicDecay out;
  std::vector<double> xs, ys, lsup;
  for (int k : ks) {
    const double R = std::ldexp(1.0, k + 1);
    const double h = std::min(0.25, 2.0 / lambda);
    const auto rule = special::radial_rule(3, R, h, 12);
    const auto op = norm::reduce_h3_primitive(
        [&](double d) { return c3 * win.beta_dyadic(k, d) * prof(d); }, rule, "dyadic piece", opt.workers);
    const norm::NormEstimate e = norm::mixed_norm_power_iterate(op, spec, opt.power);
    const norm::NormEstimate e24 = norm::mixed_norm_power_iterate(op, {2.0, 4.0}, opt.power);
    const double c24 = e24.value / (std::sqrt(std::ldexp(1.0, k)) * std::pow(lambda, -0.75));
    const double sup = sk_sup(h3, k, lambda, mu);
    json rec{{"stage", "dyadic_decay"}, {"k", k}, {"R", R}, {"nodes", rule.size()}, {"lambda", lambda},
             {"mu", mu}, {"l2_l4_estimate", e24.value}, {"l2_l4_constant", c24}, {"kernel_sup", sup}};
    merge(rec, estimate_fields(e));
    out.records.push_back(rec);
    xs.push_back(std::ldexp(1.0, k));
    ys.push_back(e.value);
    lsup.push_back(std::log2(sup));
    out.l2l4_constant_max = std::max(out.l2l4_constant_max, c24);
    if (out.l2l4_constant_first == 0.0)
      out.l2l4_constant_first = c24;
  }
  out.fit = norm::slope_fit(xs, ys);
  out.slope_log2 = out.fit.slope; // log y vs log 2^k: identical to log2 y vs k
  // least squares of log2 sup against k
  double mk = 0.0, ms = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mk += ks[i];
    ms += lsup[i];
  }
  mk /= ks.size();
  ms /= ks.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxx += (ks[i] - mk) * (ks[i] - mk);
    sxy += (ks[i] - mk) * (lsup[i] - ms);
  }
  out.sup_slope_log2 = sxy / sxx;
  return out;
}

struct DyadicReconstruction {
  double calibrated_constant = 0.0;
  double calibration_error = 0.0; // against -1/(4 pi)
  double max_relative_error = 0.0;
  std::vector<json> records;
};

inline DyadicReconstruction dyadic_reconstruction(const std::vector<std::pair<double, double>>& roots, int k_max,
                                                  int points = 81) {
  DyadicReconstruction out;
  const hyperbolic::Calibration cal = hyperbolic::calibrate_c3();
  out.calibrated_constant = cal.constant;
  out.calibration_error = std::abs(cal.constant - hyperbolic::kernel_constant(3)) / std::abs(cal.constant);
  out.records.push_back({{"stage", "calibration"}, {"constant", cal.constant},
                         {"imaginary_ratio", cal.imaginary_ratio}, {"spread", cal.spread},
                         {"relative_error", out.calibration_error}});
  const hyperbolic::HyperbolicContext h3{3};
  const double r_hi = std::ldexp(1.0, k_max);
  for (auto [lam, mu] : roots) {
    const cplx z = hyperbolic::z_from_root(lam, mu);
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
      const double r = 0.05 + (r_hi - 0.05) * i / (points - 1);
      const cplx ref = -hyperbolic::h3_resolvent_kernel(z, r);
      worst = std::max(worst, std::abs(hyperbolic::dyadic_sum_kernel(h3, k_max, lam, mu, r) - ref) / std::abs(ref));
    }
    out.records.push_back({{"stage", "reconstruction"}, {"lambda", lam}, {"mu", mu}, {"k_max", k_max},
                           {"r_max", r_hi}, {"relative_error", worst}});
    out.max_relative_error = std::max(out.max_relative_error, worst);
  }
  return out;
}

struct S0Conformance {
  double near_max = 0.0;         // |S_0| r below 1/lambda
  double far_spread = 0.0;       // max/min over lambda of sup |S_0| sinh r above 1/lambda
  std::vector<json> records;
};

inline S0Conformance s0_conformance(const std::vector<double>& lambdas, double mu) {
  S0Conformance out;
  const hyperbolic::HyperbolicContext h3{3};
  double lo = INFINITY, hi = 0.0;
  for (double lam : lambdas) {
    double cmax = 0.0, near = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double r = std::exp(std::log(0.2 / lam) + (0.0 - std::log(0.2 / lam)) * i / 200.0);
      const double v = std::abs(hyperbolic::s0_kernel(h3, lam, mu, r));
      if (r >= 1.0 / lam)
        cmax = std::max(cmax, v * std::sinh(r));
      else
        near = std::max(near, v * r);
    }
    out.near_max = std::max(out.near_max, near);
    lo = std::min(lo, cmax);
    hi = std::max(hi, cmax);
    out.records.push_back({{"stage", "s0_conformance"}, {"lambda", lam}, {"mu", mu}, {"far_constant", cmax},
                           {"near_constant", near}});
  }
  out.far_spread = hi / lo;
  return out;
}

inline norm::NormEstimate h3_resolvent_estimate(cplx zeta, double R, const norm::MixedNormSpec& spec,
                                                const EstimateOptions& opt, double kappa = 1.0) {
  const cplx z = std::sqrt(-zeta);
  const double sk = std::sqrt(kappa);
  const double h = std::min(0.25, 1.0 / std::abs(z));
  const auto rule = special::radial_rule(3, R / sk, h / sk, 12, 6, kappa);
  const auto op = norm::reduce_h3_primitive(
      [=](double d) { return -std::exp(-z * sk * d) / (4.0 * pi * z * sk); }, rule, "closed-form resolvent",
      opt.workers, kappa);
  return norm::mixed_norm_power_iterate(op, spec, opt.power);
}

struct H3AllZeta {
  double band_ratio = 0.0;
  double small_over_unit = 0.0;    // |zeta| = 0.01 i against zeta = i
  double transport_error = 0.0;    // kappa transport, relative
  int r_instability_flags = 0;
  std::vector<json> records;
};

// Closed-form H^3 resolvent (P^2 + z^2)^{-1}, z = sqrt(-zeta), over moduli x
// phases (2j+1) pi / phases.
inline H3AllZeta h3_full_resolvent_scan(const std::vector<double>& moduli, int phases, double R,
                                        const std::vector<double>& stability_radii, double kappa,
                                        const norm::MixedNormSpec& spec, const EstimateOptions& opt) {
  norm::require_admissible(spec, 3);
  H3AllZeta out;
  double lo = INFINITY, hi = 0.0;
  for (double m : moduli)
    for (int j = 0; j < phases; ++j) {
      const cplx zeta = std::polar(m, (2 * j + 1) * pi / phases);
      const norm::NormEstimate e = h3_resolvent_estimate(zeta, R, spec, opt);
      lo = std::min(lo, e.value);
      hi = std::max(hi, e.value);
      json rec{{"stage", "all_zeta"}, {"R", R}, {"r", spec.r}, {"s", spec.s}, {"modulus", m}};
      merge(rec, complex_fields("zeta", zeta));
      merge(rec, estimate_fields(e));
      out.records.push_back(rec);
    }
  out.band_ratio = hi / lo;

  const double small = h3_resolvent_estimate(cplx(0.0, 0.01), R, spec, opt).value;
  const double unit = h3_resolvent_estimate(cplx(0.0, 1.0), R, spec, opt).value;
  out.small_over_unit = small / unit;
  out.records.push_back({{"stage", "small_zeta"}, {"zeta_im_small", 0.01}, {"estimate_small", small},
                         {"estimate_unit", unit}, {"ratio", small / unit}});

  for (double m : moduli) {
    const cplx zeta = std::polar(m, pi / 2.0);
    double prev = -1.0;
    for (double Rs : stability_radii) {
      const norm::NormEstimate e = h3_resolvent_estimate(zeta, Rs, spec, opt);
      const bool flag = prev > 0.0 && std::abs(e.value - prev) > 0.2 * prev;
      out.r_instability_flags += flag ? 1 : 0;
      json rec{{"stage", "R_stability"}, {"R", Rs}, {"modulus", m}, {"unstable", flag}};
      merge(rec, complex_fields("zeta", zeta));
      merge(rec, estimate_fields(e));
      out.records.push_back(rec);
      prev = e.value;
    }
  }

  const cplx zt(0.0, 1.0);
  const double e1 = h3_resolvent_estimate(zt, R, spec, opt).value;
  const double ek = h3_resolvent_estimate(zt, R, spec, opt, kappa).value;
  const double factor = std::pow(kappa, 1.5 * (1.0 / spec.r_used() - 1.0 / spec.s_used()) - 1.0);
  out.transport_error = std::abs(ek - factor * e1) / ek;
  out.records.push_back({{"stage", "curvature_transport"}, {"kappa", kappa}, {"estimate_unit", e1},
                         {"estimate_kappa", ek}, {"factor", factor}, {"relative_error", out.transport_error}});
  return out;
}

// ---------------------------------------------------------------------------
// oscillatory operators
// ---------------------------------------------------------------------------

struct OscillatoryCheck {
  int n = 3;
  double p = 2.0, q = 6.0;
  norm::SlopeFit fit;
  double lambda_one_estimate = 0.0;
  std::vector<json> records;
};

// I_lambda f = int e^{i lambda d} a(d) f, a the smooth band cutoff on [0.3, 2.8],
// on zonal functions of S^n.
inline OscillatoryCheck oscillatory_operator_check(int n, double p, double q, const std::vector<double>& lambdas,
                                                   const EstimateOptions& opt) {
  const sphere::SphereContext ctx{n};
  const BandCutoff cut;
  const norm::MixedNormSpec spec{p, q};
  spec.validate();
  OscillatoryCheck out;
  out.n = n;
  out.p = p;
  out.q = q;
  std::vector<double> xs, ys;
  for (double lam : lambdas) {
    const int m = static_cast<int>(2 * lam) + 32;
    const auto op = norm::reduce_sphere_generic(
        ctx, [&](double d) { return std::polar(cut(d), lam * d); }, special::polar_rule(n, m), m + 16, opt.workers);
    const norm::NormEstimate e = norm::mixed_norm_power_iterate(op, spec, opt.power);
    json rec{{"stage", "oscillatory"}, {"n", n}, {"p", p}, {"q", q}, {"lambda", lam}, {"nodes", m},
             {"target_slope", -n / q}};
    merge(rec, estimate_fields(e));
    out.records.push_back(rec);
    if (lam == 1.0)
      out.lambda_one_estimate = e.value;
    if (lam >= 2.0) {
      xs.push_back(lam);
      ys.push_back(e.value);
    }
  }
  out.fit = norm::slope_fit(xs, ys);
  return out;
}

} // namespace curvlens::scans
