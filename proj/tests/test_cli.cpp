#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path out_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("cglforge_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args) {
  std::string cmd = std::string(CGLFORGE_CLI) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json load(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

}  // namespace

TEST(Cli, AnalyzeBrusselator) {
  fs::path dir = out_dir("analyze");
  ASSERT_EQ(run("analyze --model brusselator --out " + dir.string()), 0);
  json r = load(dir / "analyze.json");
  const json& res = r.at("body").at("result");
  for (const char* h : {"H1", "H2", "H3", "H4"}) EXPECT_EQ(res.at("hypotheses").at("status").at(h).at("status"), "pass") << h;
  EXPECT_NEAR(res.at("hypotheses").at("critical_point").at("k_star").get<double>(), std::sqrt(0.5), 1e-8);
  EXPECT_EQ(r.at("body").at("exit_status"), 0);
  EXPECT_EQ(r.at("body").at("command"), "analyze");
}

TEST(Cli, ReportBodyIsDeterministic) {
  fs::path a = out_dir("det_a"), b = out_dir("det_b");
  ASSERT_EQ(run("coefficients --model brusselator_advective --out " + a.string()), 0);
  ASSERT_EQ(run("coefficients --model brusselator_advective --out " + b.string()), 0);
  json ra = load(a / "coefficients.json"), rb = load(b / "coefficients.json");
  EXPECT_EQ(ra.at("body").dump(), rb.at("body").dump());
  EXPECT_EQ(ra.at("header").at("determinism_hash"), rb.at("header").at("determinism_hash"));
}

TEST(Cli, CoefficientsReportCriticality) {
  fs::path dir = out_dir("coefficients");
  ASSERT_EQ(run("coefficients --model brusselator --out " + dir.string()), 0);
  json c = load(dir / "coefficients.json").at("body").at("result").at("coefficients");
  EXPECT_TRUE(c.contains("criticality"));
  EXPECT_LE(std::abs(c.at("gamma")[1].get<double>()), 1e-8);
}

TEST(Cli, WaveCsvProfiles) {
  fs::path dir = out_dir("wave");
  ASSERT_EQ(run("wave --model brusselator --eps 0.02,0.04 --format csv --out " + dir.string()), 0);
  int profiles = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().rfind("profile_eps", 0) == 0) ++profiles;
  EXPECT_EQ(profiles, 2);
}

TEST(Cli, InvalidInputsExitWithError) {
  fs::path dir = out_dir("invalid");
  EXPECT_EQ(run("wave --model brusselator --eps 0.04,0.02 --out " + dir.string()), 1);
  EXPECT_EQ(run("analyze --model no_such_model --out " + dir.string()), 1);
  EXPECT_NE(run("--model brusselator"), 0);
}
