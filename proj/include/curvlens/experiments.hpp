#pragma once
//
// Experiment runners behind the CLI subcommands: config parsing (unknown keys
// are errors), stage timing, assertions, and artifact output.
//

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "curvlens/errors.hpp"
#include "curvlens/report.hpp"
#include "curvlens/scans.hpp"

namespace curvlens::experiments {

using json = nlohmann::json;
using cplx = std::complex<double>;
using report::Assertion;

// ---------------------------------------------------------------------------
// config access
// ---------------------------------------------------------------------------

class ConfigReader {
public:
  ConfigReader(json j, std::string where) : j_(std::move(j)), where_(std::move(where)) {
    if (!j_.is_object())
      throw ConfigError(where_ + ": expected a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    used_.insert(key);
    if (!j_.contains(key))
      return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  // number, or the string "inf"
  double get_extended(const std::string& key, double fallback) {
    used_.insert(key);
    if (!j_.contains(key))
      return fallback;
    const json& v = j_.at(key);
    if (v.is_number())
      return v.get<double>();
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity"))
      return INFINITY;
    throw ConfigError(where_ + "." + key + ": expected a number or \"inf\"");
  }

  ConfigReader section(const std::string& key) {
    used_.insert(key);
    return ConfigReader(j_.contains(key) ? j_.at(key) : json::object(), where_ + "." + key);
  }

  // list of {"re": .., "im": ..} or [re, im]
  std::vector<cplx> get_complex_list(const std::string& key, const std::vector<cplx>& fallback) {
    used_.insert(key);
    if (!j_.contains(key))
      return fallback;
    const json& v = j_.at(key);
    if (!v.is_array())
      throw ConfigError(where_ + "." + key + ": expected an array");
    std::vector<cplx> out;
    for (const json& e : v)
      out.push_back(parse_complex(e, where_ + "." + key));
    return out;
  }
  cplx get_complex(const std::string& key, cplx fallback) {
    used_.insert(key);
    return j_.contains(key) ? parse_complex(j_.at(key), where_ + "." + key) : fallback;
  }

  // every key present must have been read
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key()))
        throw ConfigError(where_ + ": unknown key \"" + it.key() + "\"");
  }

private:
  static cplx parse_complex(const json& e, const std::string& where) {
    try {
      if (e.is_number())
        return {e.get<double>(), 0.0};
      if (e.is_array() && e.size() == 2)
        return {e[0].get<double>(), e[1].get<double>()};
      if (e.is_object() && e.size() <= 2 && e.contains("re"))
        return {e.at("re").get<double>(), e.value("im", 0.0)};
    } catch (const json::exception&) {
    }
    throw ConfigError(where + ": expected a complex number as [re, im] or {\"re\", \"im\"}");
  }

  json j_;
  std::string where_;
  std::set<std::string> used_;
};

inline norm::MixedNormSpec read_exponents(ConfigReader& parent, const std::string& key,
                                          norm::MixedNormSpec fallback) {
  ConfigReader c = parent.section(key);
  norm::MixedNormSpec s{c.get_extended("r", fallback.r), c.get_extended("s", fallback.s)};
  c.finish();
  if (!(s.r > 1.0) || !(s.s > 1.0))
    throw ConfigError("exponent pair " + s.describe() + ": both exponents must exceed 1");
  return s;
}

// ---------------------------------------------------------------------------
// results
// ---------------------------------------------------------------------------

struct RunOptions {
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

struct ExperimentResult {
  std::string experiment;
  json config;
  std::uint64_t seed = 0;
  int workers = 1;
  std::vector<report::Stage> stages;
  std::vector<Assertion> assertions;
  std::vector<json> records;
  std::vector<report::Plot> plots;

  bool passed() const {
    for (const auto& a : assertions)
      if (!a.passed)
        return false;
    return true;
  }
  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& a : assertions)
      if (!a.passed)
        out.push_back(a.name);
    return out;
  }
  json manifest() const {
    json st = json::array(), as = json::array();
    for (const auto& s : stages)
      st.push_back(s.to_json());
    for (const auto& a : assertions)
      as.push_back(a.to_json());
    return {{"experiment", experiment},
            {"config", config},
            {"config_hash", report::config_hash(config)},
            {"seed", seed},
            {"workers", workers},
            {"versions", {{"curvlens", report::library_version}, {"nlohmann_json", NLOHMANN_JSON_VERSION_MAJOR * 10000 + NLOHMANN_JSON_VERSION_MINOR * 100 + NLOHMANN_JSON_VERSION_PATCH}}},
            {"stages", st},
            {"assertions", as},
            {"passed", passed()}};
  }
};

namespace detail {

class StageRunner {
public:
  explicit StageRunner(ExperimentResult& r) : r_(r) {}
  void run(const std::string& name, const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r_.stages.push_back({name, dt, false, ""});
  }
  void skip(const std::string& name, const std::string& reason) { r_.stages.push_back({name, 0.0, true, reason}); }

private:
  ExperimentResult& r_;
};

inline void append(std::vector<json>& into, const std::vector<json>& from) {
  into.insert(into.end(), from.begin(), from.end());
}

inline scans::EstimateOptions read_power(ConfigReader& cfg, std::uint64_t seed, int workers) {
  ConfigReader p = cfg.section("power");
  scans::EstimateOptions opt;
  opt.power.restarts = p.get<int>("restarts", 4);
  opt.power.tol = p.get<double>("tol", 1e-6);
  opt.power.max_iter = p.get<int>("max_iter", 200);
  p.finish();
  if (opt.power.restarts < 0 || opt.power.max_iter < 1 || !(opt.power.tol > 0.0))
    throw ConfigError("power: restarts >= 0, max_iter >= 1 and tol > 0 required");
  opt.power.seed = seed;
  opt.workers = workers;
  return opt;
}

inline bool stage_enabled(const std::vector<std::string>& stages, const std::string& name) {
  return stages.empty() || std::find(stages.begin(), stages.end(), name) != stages.end();
}

inline void check_stages(const std::vector<std::string>& requested, const std::vector<std::string>& known) {
  for (const auto& s : requested)
    if (std::find(known.begin(), known.end(), s) == known.end())
      throw ConfigError("stages: unknown stage \"" + s + "\"");
}

inline std::vector<double> column(const std::vector<json>& recs, const std::string& stage, const std::string& key) {
  std::vector<double> out;
  for (const json& r : recs)
    if (r.value("stage", "") == stage && r.contains(key))
      out.push_back(r.at(key).get<double>());
  return out;
}

} // namespace detail

// Smallest degree at which the two-phase representation is checked.
inline constexpr int asymptotic_threshold = 16;

// ---------------------------------------------------------------------------
// sphere-projector
// ---------------------------------------------------------------------------

inline void run_sphere_projector(ConfigReader& cfg, ExperimentResult& res, const scans::EstimateOptions& opt) {
  const int n = cfg.get<int>("dimension", 3);
  const int k_max = cfg.get<int>("k_max", 256);
  const norm::MixedNormSpec spec = read_exponents(cfg, "exponents", {1.2, 6.0});
  ConfigReader alg = cfg.section("algebra");
  const int alg_k = std::min(k_max, alg.get<int>("k_max", 12));
  const int resolution = alg.get<int>("resolution", 24);
  alg.finish();
  std::vector<int> sup_deg = cfg.get<std::vector<int>>("sup_degrees", {16, 32, 64, 128, 256});
  std::vector<int> norm_deg = cfg.get<std::vector<int>>("norm_degrees", {8, 16, 24, 32, 48, 64, 96});
  const int asym_k = std::min(k_max, cfg.get<int>("asymptotic_degree", 64));
  cfg.finish();

  if (n < 2 || n > 4)
    throw ConfigError("dimension must be 2, 3 or 4");
  if (k_max < 1 || resolution < 2)
    throw ConfigError("k_max and algebra.resolution must be positive");
  norm::require_admissible(spec, n);
  std::erase_if(sup_deg, [&](int k) { return k > k_max || k < 1; });
  std::erase_if(norm_deg, [&](int k) { return k > k_max || k < 1; });

  const sphere::SphereContext ctx{n};
  detail::StageRunner st(res);
  st.run("algebra", [&] {
    const auto a = scans::projector_algebra(n, alg_k, resolution, opt.workers);
    detail::append(res.records, a.records);
    res.assertions.push_back(report::at_most("trace equals dimension", 1, a.max_trace_error, 1e-8));
    res.assertions.push_back(report::at_most("pairwise orthogonality", 1, a.max_orthogonality_error, 1e-8));
    res.assertions.push_back(report::at_most("antipodal parity", 0, a.max_parity_error, 1e-12));
  });

  std::optional<scans::SupGrowth> sup;
  std::optional<scans::NormGrowth> growth;
  if (sup_deg.size() >= 3)
    st.run("sup_growth", [&] {
      sup = scans::sup_growth(ctx, sup_deg);
      detail::append(res.records, sup->records);
      json f = scans::fit_fields(sup->fit);
      f["stage"] = "sup_fit";
      f["slope_against_1_plus_k"] = sup->fit_shifted.slope;
      res.records.push_back(f);
      res.assertions.push_back(report::within("sup growth slope", 2, sup->fit.slope, n - 1.0, 0.05));
    });
  else
    st.skip("sup_growth", "fewer than three degrees within k_max");

  if (norm_deg.size() >= 3)
    st.run("norm_growth", [&] {
      growth = scans::projector_norm_growth(ctx, norm_deg, spec, opt);
      detail::append(res.records, growth->records);
      json f = scans::fit_fields(growth->fit);
      f["stage"] = "norm_fit";
      res.records.push_back(f);
      res.assertions.push_back(report::within("projector norm growth slope", 3, growth->fit.slope, 1.0, 0.15));
    });
  else
    st.skip("norm_growth", "fewer than three degrees within k_max");

  if (asym_k >= asymptotic_threshold)
    st.run("asymptotics", [&] {
      const auto f = sphere::projector_asymptotics_check(ctx, asym_k);
      res.records.push_back(scans::asymptotics_record(f));
      res.assertions.push_back(report::at_most("two-phase reconstruction residual", 4, f.max_residual, 0.05));
      res.assertions.push_back(report::at_most("antipodal identity residual", 4, f.antipodal_residual, 1e-10));
    });
  else
    st.skip("asymptotics", "k below asymptotic threshold");

  report::Plot plot{"growth.svg", "projector growth on S^" + std::to_string(n), "k", "value", true, true, {}};
  if (sup)
    plot.series.push_back({"sup |H_k|", detail::column(sup->records, "sup_growth", "k"),
                           detail::column(sup->records, "sup_growth", "sup")});
  if (growth)
    plot.series.push_back({"||H_k|| " + spec.describe(), detail::column(growth->records, "norm_growth", "k"),
                           detail::column(growth->records, "norm_growth", "estimate")});
  if (!plot.series.empty())
    res.plots.push_back(plot);
}

// ---------------------------------------------------------------------------
// sphere-resolvent
// ---------------------------------------------------------------------------

inline void run_sphere_resolvent(ConfigReader& cfg, ExperimentResult& res, const scans::EstimateOptions& opt) {
  const int n = cfg.get<int>("dimension", 3);
  const norm::MixedNormSpec spec = read_exponents(cfg, "exponents", {1.2, 6.0});
  const std::vector<std::string> stages = cfg.get<std::vector<std::string>>("stages", {});
  const std::vector<double> sigmas = cfg.get<std::vector<double>>("boundary_sigmas", {5, 10, 20, 40});
  const std::vector<cplx> probes = cfg.get_complex_list("probes", {cplx(441.0, 1e-4), cplx(-100.0, 0.0)});
  const double blowup = cfg.get<double>("blowup_factor", 50.0);
  const double max_ratio = cfg.get<double>("max_path_ratio", 5.0);
  ConfigReader wave = cfg.section("wave_identity");
  const int wave_K = wave.get<int>("K", 64);
  const std::vector<cplx> roots = wave.get_complex_list(
      "roots", {cplx(3, 1), cplx(7.5, -2), cplx(0, 2), cplx(10, 1), cplx(1, 3), cplx(20, -1.5)});
  wave.finish();
  ConfigReader tail = cfg.section("tail");
  const double tail_lambda = tail.get<double>("lambda", 5.0), tail_mu = tail.get<double>("mu", 1.0);
  const std::vector<double> taus = tail.get<std::vector<double>>("taus", {10, 20, 40, 80, 160, 320});
  tail.finish();
  cfg.finish();

  detail::check_stages(stages, {"boundary_path", "wave_identity", "periodicity", "tail"});
  if (n < 2 || n > 4)
    throw ConfigError("dimension must be 2, 3 or 4");
  norm::require_admissible(spec, n);
  for (cplx r : roots)
    if (std::abs(r.imag()) < 1.0)
      throw ConfigError("wave_identity.roots: need |Im sqrt(zeta)| >= 1");
  if (sigmas.size() < 2)
    throw ConfigError("boundary_sigmas: need at least two points");

  const sphere::SphereContext ctx{n};
  detail::StageRunner st(res);
  if (detail::stage_enabled(stages, "boundary_path"))
    st.run("boundary_path", [&] {
      const auto scan = scans::resolvent_uniformity_scan(ctx, sigmas, probes, spec, opt);
      detail::append(res.records, scan.records);
      res.assertions.push_back(report::at_most("boundary path max/min ratio", 7, scan.ratio, max_ratio));
      for (const auto& p : scan.probes) {
        std::ostringstream label;
        label << "probe zeta=" << p.zeta.real() << (p.zeta.imag() < 0 ? "" : "+") << p.zeta.imag() << "i";
        if (!p.in_region)
          res.assertions.push_back(
              report::at_least(label.str() + " over boundary max", 7, p.estimate.value / scan.path_max, blowup));
        else
          res.assertions.push_back(
              report::at_most(label.str() + " over boundary min", 7, p.estimate.value / scan.path_min, 1.0));
      }
      std::vector<double> s, e;
      for (const auto& p : scan.path) {
        s.push_back(p.zeta.imag());
        e.push_back(p.estimate.value);
      }
      res.plots.push_back({"boundary_path.svg", "resolvent estimates along the region boundary", "sigma",
                           "estimate " + spec.describe(), true, true, {{"zeta = sigma^2 + i sigma", s, e}}});
    });
  if (detail::stage_enabled(stages, "wave_identity"))
    st.run("wave_identity", [&] {
      const auto w = scans::wave_identity_check(ctx, roots, wave_K);
      detail::append(res.records, w.records);
      res.assertions.push_back(report::at_most("resolvent via wave integral", 5, w.max_relative_error, 1e-4));
    });
  if (detail::stage_enabled(stages, "periodicity"))
    st.run("periodicity", [&] {
      const auto p = scans::wave_periodicity();
      detail::append(res.records, p.records);
      res.assertions.push_back(report::at_most("wave periodicity n=3", 6, p.residual_n3, 1e-12));
      res.assertions.push_back(report::at_most("wave antiperiodicity n=4", 6, p.residual_n4, 1e-12));
    });
  if (detail::stage_enabled(stages, "tail"))
    st.run("tail", [&] {
      const auto t = scans::tail_multiplier_table(tail_lambda, tail_mu, taus);
      detail::append(res.records, t.records);
      if (std::isfinite(t.doubling_gain_min))
        res.assertions.push_back(report::at_least("tail multiplier gain per doubling", 0, t.doubling_gain_min, 16.0));
    });
}

// ---------------------------------------------------------------------------
// sphere-scaling
// ---------------------------------------------------------------------------

inline void run_sphere_scaling(ConfigReader& cfg, ExperimentResult& res, const scans::EstimateOptions& opt) {
  const int n = cfg.get<int>("dimension", 3);
  const norm::MixedNormSpec spec = read_exponents(cfg, "exponents", {1.2, 6.0});
  const std::vector<double> kappas = cfg.get<std::vector<double>>("kappas", {0.25, 1.0, 4.0});
  const cplx zeta = cfg.get_complex("zeta", cplx(25.0, 5.0));
  cfg.finish();
  if (n < 2 || n > 4)
    throw ConfigError("dimension must be 2, 3 or 4");
  for (double k : kappas)
    if (!(k > 0.0))
      throw ConfigError("kappas: curvature must be positive");
  norm::require_admissible(spec, n);

  detail::StageRunner st(res);
  st.run("scaling", [&] {
    const auto s = scans::sphere_scaling_scan(n, kappas, spec, zeta, opt);
    detail::append(res.records, s.records);
    res.assertions.push_back(report::at_most("transport identities", 8, s.max_transport_error, 1e-10));
    res.assertions.push_back(report::at_most("scaled constant equality", 8, s.max_constant_error, 1e-10));
    res.plots.push_back({"scaling.svg", "resolvent estimate against curvature", "kappa", "estimate", true, false,
                         {{"estimate at kappa", detail::column(s.records, "scaling", "kappa"),
                           detail::column(s.records, "scaling", "estimate_kappa")}}});
  });
}

// ---------------------------------------------------------------------------
// hyp-stein-tomas
// ---------------------------------------------------------------------------

inline void run_hyp_stein_tomas(ConfigReader& cfg, ExperimentResult& res, const scans::EstimateOptions& opt) {
  const std::vector<double> lambdas = cfg.get<std::vector<double>>("lambdas", {4, 8, 16, 32, 64});
  const std::vector<double> Ts = cfg.get<std::vector<double>>("T_values", {1, 4, 16});
  const double band_lambda = cfg.get<double>("band_lambda", 16.0);
  const double R = cfg.get<double>("R", 4.0);
  const std::vector<double> radii = cfg.get<std::vector<double>>("stability_radii", {2, 4, 8});
  const std::vector<double> probes = cfg.get<std::vector<double>>("probe_lambdas", {0.05});
  cfg.finish();
  if (lambdas.size() < 3)
    throw ConfigError("lambdas: need at least three values");
  if (!(R > 0.0))
    throw ConfigError("R must be positive");
  for (double l : lambdas)
    if (l < 1.0)
      throw ConfigError("lambdas: need lambda >= 1");
  for (double t : Ts)
    if (t < 1.0)
      throw ConfigError("T_values: need T >= 1");

  detail::StageRunner st(res);
  st.run("stein_tomas", [&] {
    const auto s = scans::stein_tomas_scan(lambdas, Ts, band_lambda, R, radii, probes, opt);
    detail::append(res.records, s.records);
    json f = scans::fit_fields(s.fit);
    f["stage"] = "lambda_fit";
    f["target"] = 0.25;
    res.records.push_back(f);
    res.assertions.push_back(report::at_most("band projector lambda slope", 10, s.fit.slope, 0.30));
    if (Ts.size() >= 2)
      res.assertions.push_back(report::at_most("T band ratio", 10, s.band_ratio, 2.0));
    res.records.push_back({{"stage", "R_stability_summary"}, {"flags", s.r_instability_flags}});
    res.plots.push_back({"stein_tomas.svg", "band projector L2 -> L4 lower bounds", "lambda",
                         "T^(1/2) estimate", true, true,
                         {{"T = 1, R = " + std::to_string(R), detail::column(s.records, "lambda_scan", "lambda"),
                           detail::column(s.records, "lambda_scan", "scaled_estimate")}}});
  });
}

// ---------------------------------------------------------------------------
// hyp-resolvent
// ---------------------------------------------------------------------------

inline void run_hyp_resolvent(ConfigReader& cfg, ExperimentResult& res, const scans::EstimateOptions& opt) {
  const std::vector<std::string> stages = cfg.get<std::vector<std::string>>("stages", {});
  const norm::MixedNormSpec spec = read_exponents(cfg, "exponents", {1.2, 6.0});

  ConfigReader az = cfg.section("all_zeta");
  const std::vector<double> moduli = az.get<std::vector<double>>("moduli", {0.01, 1, 10, 100});
  const int phases = az.get<int>("phases", 8);
  const double R = az.get<double>("R", 4.0);
  const std::vector<double> radii = az.get<std::vector<double>>("stability_radii", {2, 4, 8});
  const double kappa = az.get<double>("kappa", 4.0);
  az.finish();

  ConfigReader dy = cfg.section("dyadic");
  const std::vector<int> ks = dy.get<std::vector<int>>("k_values", {1, 2, 3, 4, 5});
  const double dy_lambda = dy.get<double>("lambda", 8.0), dy_mu = dy.get<double>("mu", 0.01);
  const norm::MixedNormSpec dy_spec = read_exponents(dy, "exponents", {1.2, 6.0});
  dy.finish();

  ConfigReader rc = cfg.section("reconstruction");
  const int rc_k = rc.get<int>("k_max", 4);
  std::vector<std::pair<double, double>> rc_roots;
  for (cplx w : rc.get_complex_list("roots", {cplx(8, 0.01), cplx(2, 0.5), cplx(5, -1.5)}))
    rc_roots.emplace_back(w.real(), w.imag());
  rc.finish();

  ConfigReader pl = cfg.section("plancherel");
  const std::vector<cplx> zs = pl.get_complex_list("z_values", {cplx(1, 0), cplx(2, 0), cplx(1, 0.5)});
  const double r_lo = pl.get<double>("r_min", 0.1), r_hi = pl.get<double>("r_max", 5.0);
  pl.finish();

  ConfigReader s0 = cfg.section("s0");
  const std::vector<double> s0_lambdas = s0.get<std::vector<double>>("lambdas", {20, 40, 80});
  const double s0_mu = s0.get<double>("mu", 1.0);
  s0.finish();
  cfg.finish();

  detail::check_stages(stages, {"all_zeta", "dyadic_decay", "reconstruction", "plancherel", "s0_conformance"});
  norm::require_admissible(spec, 3);
  norm::require_admissible(dy_spec, 3, true);
  if (phases < 1 || !(R > 0.0) || !(kappa > 0.0))
    throw ConfigError("all_zeta: phases >= 1, R > 0 and kappa > 0 required");
  if (ks.size() < 3 || *std::min_element(ks.begin(), ks.end()) < 1)
    throw ConfigError("dyadic.k_values: need at least three indices >= 1");
  if (dy_lambda < 1.0 || dy_mu == 0.0)
    throw ConfigError("dyadic: need lambda >= 1 and mu != 0");
  for (cplx z : zs)
    if (!(z.real() > 0.0))
      throw ConfigError("plancherel.z_values: need Re z > 0");

  detail::StageRunner st(res);
  if (detail::stage_enabled(stages, "all_zeta"))
    st.run("all_zeta", [&] {
      const auto s = scans::h3_full_resolvent_scan(moduli, phases, R, radii, kappa, spec, opt);
      detail::append(res.records, s.records);
      res.assertions.push_back(report::at_most("all-zeta band ratio", 14, s.band_ratio, 3.0));
      res.assertions.push_back(report::within("small zeta against zeta = i", 0, s.small_over_unit, 1.0, 2.0));
      res.assertions.push_back(report::at_most("curvature transport", 0, s.transport_error, 1e-10));
    });
  if (detail::stage_enabled(stages, "dyadic_decay"))
    st.run("dyadic_decay", [&] {
      const auto d = scans::dyadic_decay_scan(ks, dy_lambda, dy_mu, dy_spec, opt);
      detail::append(res.records, d.records);
      json f = scans::fit_fields(d.fit);
      f["stage"] = "dyadic_fit";
      f["slope_log2_per_k"] = d.slope_log2;
      f["sup_slope_log2_per_k"] = d.sup_slope_log2;
      f["l2_l4_constant_max"] = d.l2l4_constant_max;
      res.records.push_back(f);
      res.assertions.push_back(report::within("dyadic estimate slope", 11, d.slope_log2, -1.0, 0.2));
      res.assertions.push_back(report::at_most("dyadic kernel sup slope", 11, d.sup_slope_log2, -2.0));
      std::vector<double> x;
      for (int k : ks)
        x.push_back(std::ldexp(1.0, k));
      res.plots.push_back({"dyadic_decay.svg", "dyadic pieces S_k", "2^k", "value", true, true,
                           {{"estimate " + dy_spec.describe(), x, detail::column(d.records, "dyadic_decay", "estimate")},
                            {"sup |S_k|", x, detail::column(d.records, "dyadic_decay", "kernel_sup")},
                            {"L2 -> L4 estimate", x, detail::column(d.records, "dyadic_decay", "l2_l4_estimate")}}});
      // kernel profiles
      const hyperbolic::HyperbolicContext h3{3};
      report::Plot prof{"kernel_profiles.svg", "radial kernels", "r", "|K(r)|", false, true, {}};
      std::vector<double> r0, v0, rh, vh;
      for (int i = 1; i <= 200; ++i) {
        const double r = 2.0 * i / 200.0;
        r0.push_back(r);
        v0.push_back(std::abs(hyperbolic::s0_kernel(h3, dy_lambda, dy_mu, r)));
      }
      prof.series.push_back({"S_0", r0, v0});
      for (int k : ks) {
        std::vector<double> rk, vk;
        for (int i = 1; i < 200; ++i) {
          const double r = std::ldexp(1.0, k - 1) * (1.0 + 3.0 * i / 200.0);
          rk.push_back(r);
          vk.push_back(std::abs(hyperbolic::sk_kernel(h3, k, dy_lambda, dy_mu, r)));
        }
        prof.series.push_back({"S_" + std::to_string(k), rk, vk});
      }
      const cplx z = hyperbolic::z_from_root(dy_lambda, dy_mu);
      for (int i = 1; i <= 200; ++i) {
        const double r = std::ldexp(1.0, ks.back() + 1) * i / 200.0;
        rh.push_back(r);
        vh.push_back(std::abs(hyperbolic::h3_resolvent_kernel(z, r)));
      }
      prof.series.push_back({"closed form", rh, vh});
      res.plots.push_back(prof);
    });
  if (detail::stage_enabled(stages, "reconstruction"))
    st.run("reconstruction", [&] {
      const auto r = scans::dyadic_reconstruction(rc_roots, rc_k);
      detail::append(res.records, r.records);
      res.assertions.push_back(report::at_most("calibrated kernel constant", 12, r.calibration_error, 1e-10));
      res.assertions.push_back(report::at_most("dyadic sum against closed form", 12, r.max_relative_error, 1e-6));
    });
  if (detail::stage_enabled(stages, "plancherel"))
    st.run("plancherel", [&] {
      const auto p = scans::plancherel_check(zs, r_lo, r_hi, 50);
      detail::append(res.records, p.records);
      res.assertions.push_back(report::at_most("Plancherel reconstruction", 9, p.max_relative_error, 1e-6));
    });
  if (detail::stage_enabled(stages, "s0_conformance"))
    st.run("s0_conformance", [&] {
      const auto c = scans::s0_conformance(s0_lambdas, s0_mu);
      detail::append(res.records, c.records);
      res.assertions.push_back(report::at_most("S_0 near-diagonal constant", 0, c.near_max, 1.0));
      res.assertions.push_back(report::at_most("S_0 amplitude constant spread", 0, c.far_spread, 1.5));
    });
}

// ---------------------------------------------------------------------------
// osc-check
// ---------------------------------------------------------------------------

inline void run_osc_check(ConfigReader& cfg, ExperimentResult& res, const scans::EstimateOptions& opt) {
  const std::vector<double> lambdas = cfg.get<std::vector<double>>("lambdas", {1, 4, 8, 16, 32, 64});
  const double slack = cfg.get<double>("slope_slack", 0.05);
  struct Case {
    int n;
    double p, q;
  };
  const json list = cfg.get<json>("cases", json::parse(R"([{"n": 2, "p": 2, "q": 6}, {"n": 3, "p": 1.5, "q": 6}])"));
  if (!list.is_array())
    throw ConfigError("cases: expected an array");
  std::vector<Case> cases;
  for (const json& c : list) {
    ConfigReader cr(c, "config.cases[]");
    Case k{cr.get<int>("n", 3), cr.get_extended("p", 2.0), cr.get_extended("q", 6.0)};
    cr.finish();
    cases.push_back(k);
  }
  cfg.finish();
  std::size_t fit_points = 0;
  for (double l : lambdas)
    fit_points += l >= 2.0 ? 1 : 0;
  if (fit_points < 3)
    throw ConfigError("lambdas: need at least three values >= 2 for the fit");
  for (const Case& c : cases)
    if (c.n < 2 || c.n > 3 || !(c.p > 1.0) || !(c.q > 1.0) || std::isinf(c.q))
      throw ConfigError("cases: need n in {2, 3} and finite exponents above 1");

  detail::StageRunner st(res);
  report::Plot plot{"oscillatory.svg", "oscillatory operator lower bounds", "lambda", "estimate", true, true, {}};
  for (const Case& c : cases) {
    std::ostringstream name;
    name << "oscillatory n=" << c.n << " (" << c.p << ", " << c.q << ")";
    st.run(name.str(), [&] {
      const auto o = scans::oscillatory_operator_check(c.n, c.p, c.q, lambdas, opt);
      detail::append(res.records, o.records);
      json f = scans::fit_fields(o.fit);
      f["stage"] = "oscillatory_fit";
      f["n"] = c.n;
      f["p"] = c.p;
      f["q"] = c.q;
      f["target_slope"] = -c.n / c.q;
      res.records.push_back(f);
      res.assertions.push_back(report::at_most(name.str() + " slope", 13, o.fit.slope, -c.n / c.q + slack));
      if (o.lambda_one_estimate > 0.0)
        res.assertions.push_back(report::at_least(name.str() + " finite at lambda=1", 0,
                                                  std::isfinite(o.lambda_one_estimate) ? 1.0 : 0.0, 1.0));
      std::vector<double> x, y;
      for (const json& r : o.records)
        if (r.at("lambda").get<double>() >= 2.0) {
          x.push_back(r.at("lambda").get<double>());
          y.push_back(r.at("estimate").get<double>());
        }
      plot.series.push_back({name.str(), x, y});
    });
  }
  res.plots.push_back(plot);
}

// ---------------------------------------------------------------------------
// dispatch and output
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"sphere-projector", "sphere-resolvent", "sphere-scaling",
                                              "hyp-stein-tomas",  "hyp-resolvent",    "osc-check"};
  return names;
}

inline ExperimentResult run_experiment(const std::string& name, const json& config, const RunOptions& ro) {
  ConfigReader cfg(config, "config");
  const std::string declared = cfg.get<std::string>("experiment", name);
  if (declared != name)
    throw ConfigError("config is for \"" + declared + "\", not \"" + name + "\"");
  std::uint64_t seed = cfg.get<std::uint64_t>("seed", 20240601);
  if (ro.seed)
    seed = *ro.seed;
  cfg.get<std::string>("output_dir", "");
  if (ro.workers < 1)
    throw ConfigError("workers must be at least 1");

  ExperimentResult res;
  res.experiment = name;
  res.config = config;
  res.config["experiment"] = name;
  res.config["seed"] = seed;
  res.seed = seed;
  res.workers = ro.workers;
  const scans::EstimateOptions opt = detail::read_power(cfg, seed, ro.workers);

  if (name == "sphere-projector")
    run_sphere_projector(cfg, res, opt);
  else if (name == "sphere-resolvent")
    run_sphere_resolvent(cfg, res, opt);
  else if (name == "sphere-scaling")
    run_sphere_scaling(cfg, res, opt);
  else if (name == "hyp-stein-tomas")
    run_hyp_stein_tomas(cfg, res, opt);
  else if (name == "hyp-resolvent")
    run_hyp_resolvent(cfg, res, opt);
  else if (name == "osc-check")
    run_osc_check(cfg, res, opt);
  else
    throw ConfigError("unknown experiment \"" + name + "\"");
  return res;
}

inline void write_artifacts(const ExperimentResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json recs = json::array();
  for (const json& r : res.records)
    recs.push_back(r);
  report::write_text(dir / "manifest.json", res.manifest().dump(2) + "\n");
  report::write_text(dir / "records.json", recs.dump(2) + "\n");
  report::write_text(dir / "records.csv", report::records_csv(res.records));
  for (const auto& p : res.plots)
    report::write_text(dir / p.file, report::svg_plot(p));
}

// ---------------------------------------------------------------------------
// consolidated report
// ---------------------------------------------------------------------------

struct Criterion {
  int id;
  const char* claim;
  const char* subcommand;
};

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {1, "projector algebra: trace and orthogonality", "sphere-projector"},
      {2, "projector sup growth (1+k)^(n-1)", "sphere-projector"},
      {3, "projector norm growth (1+k) on (6/5, 6)", "sphere-projector"},
      {4, "two-phase projector asymptotics and antipodal identity", "sphere-projector"},
      {5, "resolvent equals damped wave integral", "sphere-resolvent"},
      {6, "wave kernel periodicity", "sphere-resolvent"},
      {7, "sphere resolvent uniform on the region, blowup outside", "sphere-resolvent"},
      {8, "curvature scaling of the sphere resolvent", "sphere-scaling"},
      {9, "hyperbolic Plancherel reconstruction of the resolvent", "hyp-resolvent"},
      {10, "band projector L2 -> L4 growth lambda^(1/4)", "hyp-stein-tomas"},
      {11, "dyadic resolvent pieces decay like 2^(-k)", "hyp-resolvent"},
      {12, "dyadic pieces sum to the closed-form resolvent", "hyp-resolvent"},
      {13, "oscillatory operator decay lambda^(-n/q)", "osc-check"},
      {14, "hyperbolic resolvent bounded for every complex zeta", "hyp-resolvent"},
  };
  return list;
}

struct MergedReport {
  json document;
  std::string markdown;
  bool all_passed = true;
};

inline MergedReport merge_manifests(const std::vector<std::filesystem::path>& dirs) {
  if (dirs.empty())
    throw ConfigError("report: no run directories given");
  std::map<std::string, json> by_experiment;
  for (const auto& d : dirs) {
    const json m = report::read_json(d / "manifest.json");
    if (!m.contains("experiment") || !m.contains("config_hash") || !m.contains("assertions"))
      throw ConfigError(d.string() + ": not a run manifest");
    const std::string name = m.at("experiment").get<std::string>();
    auto it = by_experiment.find(name);
    if (it != by_experiment.end() && it->second.at("config_hash") != m.at("config_hash"))
      throw ConfigError("report: runs of \"" + name + "\" have conflicting config hashes");
    by_experiment[name] = m;
  }

  MergedReport out;
  json runs = json::array(), crit = json::array();
  for (const auto& [name, m] : by_experiment) {
    runs.push_back({{"experiment", name}, {"config_hash", m.at("config_hash")}, {"passed", m.at("passed")}});
    out.all_passed = out.all_passed && m.at("passed").get<bool>();
  }
  std::ostringstream md;
  md << "# curvlens consolidated report\n\n| # | claim | subcommand | status | measured |\n|---|---|---|---|---|\n";
  for (const Criterion& c : criteria()) {
    std::string status = "not run";
    json found = json::array();
    auto it = by_experiment.find(c.subcommand);
    if (it != by_experiment.end()) {
      bool ok = true;
      for (const json& a : it->second.at("assertions"))
        if (a.value("criterion", 0) == c.id) {
          found.push_back(a);
          ok = ok && a.at("passed").get<bool>();
        }
      status = found.empty() ? "not run" : (ok ? "pass" : "fail");
    }
    std::ostringstream meas;
    for (std::size_t i = 0; i < found.size(); ++i)
      meas << (i ? "; " : "") << found[i].at("name").get<std::string>() << " = " << std::setprecision(4)
           << found[i].at("measured").get<double>();
    md << "| " << c.id << " | " << c.claim << " | " << c.subcommand << " | " << status << " | " << meas.str()
       << " |\n";
    crit.push_back({{"criterion", c.id}, {"claim", c.claim}, {"subcommand", c.subcommand}, {"status", status},
                    {"assertions", found}});
  }
  out.document = {{"runs", runs}, {"criteria", crit}, {"all_passed", out.all_passed}};
  out.markdown = md.str();
  return out;
}

} // namespace curvlens::experiments
