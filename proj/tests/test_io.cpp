#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <cglforge/cglforge.hpp>

using namespace cglforge;

namespace {

const char* kBrusselatorJson = R"({
  "version": 1,
  "n": 2,
  "name": "bruss_json",
  "parameter": "b",
  "bracket": [1.35, 3.375],
  "linear": {
    "kind": "local",
    "coefficients": [
      [[-1, 1], 4, [0, -1], -4],
      [0, 0, 0, 0],
      [1, 0, 0, 16]
    ]
  },
  "nonlinearity": {
    "kind": "semilinear",
    "components": [
      [{"coef": 0.5, "powers": [2, 0, 1]}, {"coef": 4, "powers": [1, 1, 0]}, {"coef": 1, "powers": [2, 1, 0]}],
      [{"coef": -0.5, "powers": [2, 0, 1]}, {"coef": -4, "powers": [1, 1, 0]}, {"coef": -1, "powers": [2, 1, 0]}]
    ]
  }
})";

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string parse_error_message(const std::string& text) {
  try {
    model_from_json(parse_json_text(text, "inline"));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    return e.what();
  }
  ADD_FAILURE() << "expected a ParseError";
  return {};
}

}  // namespace

TEST(ModelJson, HandWrittenBrusselatorMatchesFixture) {
  Fixture loaded = model_from_json(parse_json_text(kBrusselatorJson, "inline"));
  Fixture ref = brusselator();
  EXPECT_EQ(loaded.model.name, "bruss_json");
  EXPECT_EQ(loaded.model.parameter_name, "b");
  for (double k : {0.0, 0.4, 1.3})
    for (double mu : {1.0, 2.25})
      EXPECT_LE((symbol(loaded.model, k, mu) - symbol(ref.model, k, mu)).norm(), 1e-14);
  TuringPoint p = locate_critical(loaded.model, loaded.truth.mu_lo, loaded.truth.mu_hi);
  TuringPoint q = locate_critical(ref.model, ref.truth.mu_lo, ref.truth.mu_hi);
  EXPECT_NEAR(p.k_star, q.k_star, 1e-10);
  EXPECT_NEAR(p.mu_c, q.mu_c, 1e-10);
  EXPECT_NEAR(std::abs(cgl_coefficients(loaded.model, p).gamma - cgl_coefficients(ref.model, q).gamma), 0.0, 1e-10);
}

TEST(ModelJson, FixtureReferenceWithOverrides) {
  Fixture fx = model_from_json(parse_json_text(R"({"version": 1, "fixture": "brusselator", "set": {"a": 3}})", "x"));
  EXPECT_DOUBLE_EQ(fx.params.at("a"), 3.0);
  try {
    model_from_json(parse_json_text(R"({"version": 1, "fixture": "nope"})", "x"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownFixture);
  }
}

TEST(ModelJson, SyntaxErrorReportsLineAndColumn) {
  try {
    parse_json_text("{\n  \"version\": 1,\n  \"n\": ,\n}", "model.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("model.json:3:"), std::string::npos) << e.what();
  }
}

TEST(ModelJson, SemanticErrorsNameTheJsonPath) {
  EXPECT_NE(parse_error_message(R"({"version": 2, "fixture": "brusselator"})").find("$.version"), std::string::npos);
  EXPECT_NE(parse_error_message(R"({"version": 1, "n": 1, "linear": {"kind": "local", "coefficients": [[1]]},
      "nonlinearity": {"kind": "semilinear", "components": [[{"coef": 1, "powers": [1, 0]}]]}})")
                .find("$.nonlinearity.components[0]"),
            std::string::npos);
  EXPECT_NE(parse_error_message(R"({"version": 1, "n": 2, "linear": {"kind": "local", "coefficients": [[1, 2, 3]]},
      "nonlinearity": {"kind": "semilinear", "components": [[], []]}})")
                .find("$.linear.coefficients[0]"),
            std::string::npos);
  EXPECT_NE(parse_error_message(R"({"version": 1, "n": 1, "linear": {"kind": "local", "coefficients": [[1]]},
      "nonlinearity": {"kind": "magic"}})")
                .find("$.nonlinearity.kind"),
            std::string::npos);
  EXPECT_NE(parse_error_message(R"({"version": 1, "n": 1, "linear": {"kind": "local", "coefficients": [[1]]},
      "nonlinearity": {"kind": "quasilinear", "h": [[]], "f": [[]], "g": [[]], "equilibrium": [0]}})")
                .find("$.linear"),
            std::string::npos);
}

TEST(ModelJson, MultilinearPayloadWithFilter) {
  const char* doc = R"({"version": 1, "n": 1, "bracket": [-0.5, 0.5],
    "linear": {"kind": "local", "coefficients": [[[-1, 1]], [0], [-2], [0], [-1]]},
    "nonlinearity": {"kind": "multilinear", "filter": {"kind": "lorentzian", "rho": 0.5},
                     "pointwise": [[{"coef": -1, "powers": [3, 0]}]]}})";
  Fixture fx = model_from_json(parse_json_text(doc, "x"));
  ASSERT_TRUE(fx.model.is_multilinear());
  TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  CglCoefficients c = cgl_coefficients(fx.model, p);
  // cubic Swift-Hohenberg with the resonant sum filtered at k* = 1: -3/4 / (1 + rho)
  EXPECT_NEAR(c.gamma.real(), -0.75 / 1.5, 1e-8);
}

TEST(ModelJson, LoadFromFile) {
  auto path = temp_path("cglforge_model_test.json");
  {
    std::ofstream f(path);
    f << kBrusselatorJson;
  }
  LoadedModel lm = load_model_file(path);
  EXPECT_EQ(lm.fixture.model.n, 2);
  EXPECT_EQ(lm.source.at("name"), "bruss_json");
  std::remove(path.c_str());
  EXPECT_THROW(load_model_file(temp_path("cglforge_missing_model.json")), Error);
}

TEST(Report, BodyHashIsDeterministic) {
  json cfg = {{"eps", {0.02, 0.04}}};
  json res = {{"gamma", to_json(cplx(-0.25, 0.125))}};
  json a = make_report("coefficients", cfg, res, 0);
  json b = make_report("coefficients", cfg, res, 0);
  EXPECT_EQ(a.at("body").dump(), b.at("body").dump());
  EXPECT_EQ(a.at("header").at("determinism_hash"), b.at("header").at("determinism_hash"));
  EXPECT_TRUE(verify_report_hash(a));
  a["body"]["exit_status"] = 1;
  EXPECT_FALSE(verify_report_hash(a));
  EXPECT_EQ(b.at("body").at("version"), kVersion);
}

TEST(Report, HashIsFnv1a) {
  // published FNV-1a 64-bit test vectors
  EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(Report, ComplexAndCoefficientSerialization) {
  EXPECT_EQ(to_json(cplx(1.5, -2.0)).dump(), "[1.5,-2.0]");
  Fixture fx = brusselator();
  TuringPoint p = locate_critical(fx.model, fx.truth.mu_lo, fx.truth.mu_hi);
  json j = to_json(cgl_coefficients(fx.model, p));
  EXPECT_TRUE(j.contains("gamma"));
  EXPECT_TRUE(j.contains("criticality"));
  json t = to_json(p);
  EXPECT_NEAR(t.at("k_star").get<double>(), std::sqrt(0.5), 1e-8);
}

TEST(Report, MonomialStrings) {
  EXPECT_EQ(monomial_string(make_monomial({amp_var(0), amp_var(0), amp_var(0, 0, true)})), "A*A*conj(A)");
  EXPECT_EQ(monomial_string({amp_var(0, 2)}), "d2X(A)");
  EXPECT_EQ(monomial_string(make_monomial({amp_var(0), mu_var()})), "mu_tilde*A");
  EXPECT_EQ(monomial_string({amp_var(1, 1, true)}), "d1X(conj(A1))");
  EXPECT_EQ(monomial_string({}), "1");
}

TEST(Csv, ProfileReproducesModes) {
  WaveSolution w;
  w.modes = Cmat::Zero(2, 3);
  w.modes(0, 0) = 0.5;
  w.modes(0, 1) = cplx(0.25, 0.0);
  w.modes(1, 2) = cplx(0.0, 0.1);
  auto path = temp_path("cglforge_profile_test.csv");
  write_profile_csv(path, w, 8);
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "xi,u1,u2");
  int rows = 0;
  while (std::getline(in, line)) {
    double xi, u1, u2;
    char c1, c2;
    std::istringstream ls(line);
    ls >> xi >> c1 >> u1 >> c2 >> u2;
    EXPECT_NEAR(u1, 0.5 + 0.5 * std::cos(xi), 1e-14);
    EXPECT_NEAR(u2, -0.2 * std::sin(2 * xi), 1e-14);
    ++rows;
  }
  EXPECT_EQ(rows, 8);
  std::remove(path.c_str());
}

TEST(Csv, TraceAndGapHeaders) {
  SimulationTrace tr;
  tr.times = {0.0, 1.0};
  tr.l2_norms = {1.0, 0.5};
  tr.sup_norms = {2.0, 1.0};
  auto p1 = temp_path("cglforge_trace_test.csv");
  write_trace_csv(p1, tr);
  EXPECT_EQ(read_file(p1), "t,l2,sup\n0,1,2\n1,0.5,1\n");
  ErrorTrace et;
  et.slow_times = {0.0};
  et.gaps = {0.0};
  et.full = tr;
  auto p2 = temp_path("cglforge_gap_test.csv");
  write_gap_csv(p2, et);
  EXPECT_EQ(read_file(p2).substr(0, 12), "T,t,gap,sup\n");
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}
