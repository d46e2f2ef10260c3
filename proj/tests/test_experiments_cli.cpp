#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "curvlens/experiments.hpp"
#include "curvlens/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string cli = CURVLENS_CLI_PATH;
const fs::path configs = CURVLENS_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("curvlens_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + cli + "' " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = scratch(name);
  std::ofstream(p) << j.dump(2);
  return p;
}

} // namespace

TEST(Cli, SmallProjectorRunSkipsAsymptotics) {
  const fs::path out = scratch("small");
  ASSERT_EQ(run("sphere-projector --config '" + (configs / "sphere_projector_small.json").string() + "' --out '" +
                out.string() + "'"),
            0);
  const json m = curvlens::report::read_json(out / "manifest.json");
  EXPECT_EQ(m["experiment"], "sphere-projector");
  EXPECT_TRUE(m["passed"].get<bool>());
  bool skipped = false;
  for (const json& s : m["stages"])
    if (s["skipped"].get<bool>() && s["reason"] == "k below asymptotic threshold")
      skipped = true;
  EXPECT_TRUE(skipped);
  EXPECT_TRUE(m.contains("config_hash"));
  EXPECT_TRUE(m.contains("versions"));
  EXPECT_TRUE(fs::exists(out / "records.json"));
  EXPECT_TRUE(fs::exists(out / "records.csv"));
}

TEST(Cli, InadmissibleExponentsExitThree) {
  EXPECT_EQ(run("sphere-projector --config '" + (configs / "bad_exponents.json").string() + "' --out '" +
                scratch("bad").string() + "'"),
            3);
}

TEST(Cli, UnknownKeyExitsThree) {
  const fs::path cfg = write_config("typo.json", {{"experiment", "sphere-scaling"}, {"kapas", {1, 4}}});
  EXPECT_EQ(run("sphere-scaling --config '" + cfg.string() + "' --out '" + scratch("typo_out").string() + "'"), 3);
}

TEST(Cli, MismatchedExperimentExitsThree) {
  EXPECT_EQ(run("sphere-scaling --config '" + (configs / "sphere_projector_small.json").string() + "' --out '" +
                scratch("mismatch").string() + "'"),
            3);
}

TEST(Cli, UsageErrorsExitThree) {
  EXPECT_EQ(run("no-such-command"), 3);
  EXPECT_EQ(run("sphere-scaling --config /nonexistent/file.json"), 3);
  EXPECT_EQ(run("report"), 3);
}

TEST(Cli, FailedAssertionExitsTwo) {
  json j = curvlens::report::read_json(configs / "sphere_resolvent_boundary.json");
  j["max_path_ratio"] = 1.0;
  const fs::path cfg = write_config("strict.json", j);
  const fs::path out = scratch("strict_out");
  EXPECT_EQ(run("sphere-resolvent --config '" + cfg.string() + "' --out '" + out.string() + "'"), 2);
  const json m = curvlens::report::read_json(out / "manifest.json");
  EXPECT_FALSE(m["passed"].get<bool>());
}

TEST(Cli, SameSeedSameRecords) {
  const std::string cfg = (configs / "sphere_scaling.json").string();
  const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  ASSERT_EQ(run("sphere-scaling --config '" + cfg + "' --seed 7 --out '" + a.string() + "'"), 0);
  ASSERT_EQ(run("sphere-scaling --config '" + cfg + "' --seed 7 --workers 2 --out '" + b.string() + "'"), 0);
  EXPECT_EQ(slurp(a / "records.json"), slurp(b / "records.json"));
  ASSERT_EQ(run("sphere-scaling --config '" + cfg + "' --out '" + c.string() + "'"), 0);
  EXPECT_EQ(curvlens::report::read_json(a / "manifest.json")["seed"], 7);
  EXPECT_EQ(curvlens::report::read_json(c / "manifest.json")["seed"], 20240601);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const fs::path root = scratch("envroot");
  ASSERT_EQ(run("sphere-resolvent --config '" + (configs / "sphere_resolvent_wave.json").string() + "'",
                "CURVLENS_OUT='" + root.string() + "'"),
            0);
  EXPECT_TRUE(fs::exists(root / "sphere-resolvent" / "manifest.json"));
}

TEST(Cli, ReportMergesRuns) {
  const fs::path a = scratch("rep_a"), b = scratch("rep_b"), out = scratch("rep_out");
  ASSERT_EQ(run("sphere-resolvent --config '" + (configs / "sphere_resolvent_wave.json").string() + "' --out '" +
                a.string() + "'"),
            0);
  ASSERT_EQ(run("sphere-scaling --config '" + (configs / "sphere_scaling.json").string() + "' --out '" + b.string() +
                "'"),
            0);
  ASSERT_EQ(run("report '" + a.string() + "' '" + b.string() + "' --out '" + out.string() + "'"), 0);
  const json r = curvlens::report::read_json(out / "report.json");
  EXPECT_TRUE(r.is_object());
  EXPECT_TRUE(fs::exists(out / "report.md"));
  const std::string md = slurp(out / "report.md");
  EXPECT_NE(md.find("sphere-resolvent"), std::string::npos);
  EXPECT_NE(md.find("sphere-scaling"), std::string::npos);
}

TEST(Cli, ReportRejectsConflictingConfigs) {
  const fs::path a = scratch("conf_a"), b = scratch("conf_b");
  const std::string cfg = (configs / "sphere_scaling.json").string();
  ASSERT_EQ(run("sphere-scaling --config '" + cfg + "' --out '" + a.string() + "'"), 0);
  json j = curvlens::report::read_json(cfg);
  j["kappas"] = {1, 4};
  const fs::path cfg2 = write_config("scaling2.json", j);
  ASSERT_EQ(run("sphere-scaling --config '" + cfg2.string() + "' --out '" + b.string() + "'"), 0);
  EXPECT_EQ(run("report '" + a.string() + "' '" + b.string() + "' --out '" + scratch("conf_out").string() + "'"), 3);
  EXPECT_EQ(run("report '" + scratch("empty_dir").string() + "' --out '" + scratch("empty_out").string() + "'"), 3);
}

TEST(Experiments, CriteriaTableCoversAll) {
  const auto& c = curvlens::experiments::criteria();
  EXPECT_EQ(c.size(), 14u);
  for (const auto& e : c) {
    bool known = false;
    for (const auto& s : curvlens::experiments::subcommands())
      known = known || s == e.subcommand;
    EXPECT_TRUE(known) << e.subcommand;
  }
}

TEST(Experiments, ConfigHashIsKeyOrderIndependent) {
  const json a = json::parse(R"({"a": 1, "b": [1, 2]})");
  const json b = json::parse(R"({"b": [1, 2], "a": 1})");
  EXPECT_EQ(curvlens::report::config_hash(a), curvlens::report::config_hash(b));
  EXPECT_NE(curvlens::report::config_hash(a), curvlens::report::config_hash(json::parse(R"({"a": 2})")));
}

TEST(Report, CsvQuotingAndColumns) {
  const std::string csv = curvlens::report::records_csv(
      {json{{"stage", "x"}, {"b", 1.5}, {"a", "p,q"}}, json{{"stage", "y"}, {"c", true}}});
  EXPECT_EQ(csv, "stage,a,b,c\nx,\"p,q\",1.5,\ny,,,true\n");
}
