// curvlens: experiment runner.
//
//   curvlens <subcommand> [--config FILE] [--seed N] [--workers N] [--out DIR]
//   curvlens report DIR... [--out DIR]
//
// Exit codes: 0 all assertions pass, 2 assertion failures, 3 configuration or
// usage errors, 4 numerical aborts.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "curvlens/experiments.hpp"

namespace fs = std::filesystem;
using namespace curvlens;

namespace {

constexpr int exit_ok = 0, exit_assert = 2, exit_config = 3, exit_numeric = 4;

fs::path default_out(const std::string& experiment) {
  if (const char* env = std::getenv("CURVLENS_OUT"); env && *env)
    return fs::path(env) / experiment;
  return fs::path("curvlens_out") / experiment;
}

int run_one(const std::string& name, const std::string& config_path, std::optional<std::uint64_t> seed,
            int workers, const std::string& out) {
  nlohmann::json config = nlohmann::json::object();
  if (!config_path.empty())
    config = report::read_json(config_path);
  experiments::RunOptions ro;
  ro.seed = seed;
  ro.workers = workers;

  fs::path dir;
  if (!out.empty())
    dir = out;
  else if (config.is_object() && config.contains("output_dir") && config["output_dir"].is_string() &&
           !config["output_dir"].get<std::string>().empty())
    dir = config["output_dir"].get<std::string>();
  else
    dir = default_out(name);

  const experiments::ExperimentResult res = experiments::run_experiment(name, config, ro);
  experiments::write_artifacts(res, dir);

  for (const auto& s : res.stages) {
    std::cout << "stage " << std::left << std::setw(28) << s.name;
    if (s.skipped)
      std::cout << "skipped: " << s.reason << '\n';
    else
      std::cout << std::fixed << std::setprecision(2) << s.wall_seconds << " s\n";
  }
  std::cout << std::defaultfloat;
  for (const auto& a : res.assertions)
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << std::setprecision(6) << a.measured << ' '
              << a.comparison << ' ' << (a.comparison == "within" ? std::to_string(a.target) + " +- " : "")
              << a.threshold << '\n';
  std::cout << "artifacts: " << dir.string() << '\n';
  if (!res.passed()) {
    std::cerr << "failed assertions:\n";
    for (const auto& f : res.failures())
      std::cerr << "  " << f << '\n';
    return exit_assert;
  }
  return exit_ok;
}

int run_report(const std::vector<std::string>& dirs, const std::string& out) {
  std::vector<fs::path> paths(dirs.begin(), dirs.end());
  const experiments::MergedReport rep = experiments::merge_manifests(paths);
  const fs::path dir = out.empty() ? default_out("report") : fs::path(out);
  fs::create_directories(dir);
  report::write_text(dir / "report.json", rep.document.dump(2) + "\n");
  report::write_text(dir / "report.md", rep.markdown);
  std::cout << rep.markdown;
  return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvlens: resolvent and spectral projector norm experiments"};
  app.require_subcommand(1);

  struct Opts {
    std::string config, out;
    std::uint64_t seed = 0;
    int workers = 1;
  };
  std::vector<Opts> opts(experiments::subcommands().size());
  std::vector<CLI::Option*> seed_opts;
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < experiments::subcommands().size(); ++i) {
    auto* sub = app.add_subcommand(experiments::subcommands()[i]);
    sub->add_option("--config", opts[i].config, "JSON config file")->check(CLI::ExistingFile);
    seed_opts.push_back(sub->add_option("--seed", opts[i].seed, "seed for random restarts"));
    sub->add_option("--workers", opts[i].workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", opts[i].out, "output directory");
    subs.push_back(sub);
  }
  std::vector<std::string> report_dirs;
  std::string report_out;
  auto* rep = app.add_subcommand("report", "merge run manifests");
  rep->add_option("dirs", report_dirs, "run directories containing manifest.json");
  rep->add_option("--out", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (rep->parsed()) {
      if (report_dirs.empty()) {
        std::cerr << "report: at least one run directory is required\n" << rep->help();
        return exit_config;
      }
      return run_report(report_dirs, report_out);
    }
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) {
        std::optional<std::uint64_t> seed;
        if (seed_opts[i]->count() > 0)
          seed = opts[i].seed;
        return run_one(experiments::subcommands()[i], opts[i].config, seed, opts[i].workers, opts[i].out);
      }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const SpectrumHit& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const DomainError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return exit_numeric;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return exit_numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_numeric;
  }
  return exit_config;
}
