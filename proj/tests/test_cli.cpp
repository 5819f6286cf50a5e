#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("psdpencil_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args) {
  const auto out = scratch() / "stdout", err = scratch() / "stderr";
  const std::string cmd = std::string(PSDPENCIL_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string instance(const std::string& name) { return std::string(INSTANCES_DIR) + "/" + name; }

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Cli, ExpandFourByFourMatchesGolden) {
  const auto r = run("expand " + instance("expand_4x4.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  // x^3 row: −(p + q) − tr(B) t = −3 − 4t
  int found = 0;
  for (const auto& term : j["poly"]) {
    if (term["x"] == 3 && term["t"] == 0) found += term["c"] == "-3";
    if (term["x"] == 3 && term["t"] == 1) found += term["c"] == "-4";
  }
  EXPECT_EQ(found, 2);
  for (const auto& e : j["edge_coefficients"]) EXPECT_TRUE(e["agrees"].get<bool>());
}

TEST(Cli, ExpandSmallCases) {
  auto r = run("expand " + instance("scalar_n1.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  auto poly = Json::parse(r.out)["poly"];
  EXPECT_EQ(poly, Json::parse(R"([{"t":0,"x":1,"c":"1"},{"t":0,"x":0,"c":"-1"},{"t":1,"x":0,"c":"-1"}])"));
  r = run("expand " + instance("unperturbed.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  poly = Json::parse(r.out)["poly"];
  // (x − 2)(x − 1)x
  EXPECT_EQ(poly, Json::parse(R"([{"t":0,"x":3,"c":"1"},{"t":0,"x":2,"c":"-3"},{"t":0,"x":1,"c":"2"}])"));
}

TEST(Cli, ExpandWritesOutputFile) {
  const auto path = scratch() / "expand.json";
  const auto r = run("expand " + instance("mixed_degrees.json") + " -o " + path.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_NO_THROW(Json::parse(slurp(path)));
}

TEST(Cli, DiagramExamples) {
  auto r = run("diagram " + instance("mixed_degrees.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  auto d = Json::parse(r.out)["diagram"];
  std::vector<std::string> slopes;
  for (const auto& e : d["edges"]) slopes.push_back(e["slope"]);
  EXPECT_EQ(slopes, (std::vector<std::string>{"0", "1", "2"}));
  EXPECT_EQ(d["eigenvalue_degrees"], Json::parse(R"(["0","1","1","2"])"));

  r = run("diagram " + instance("kernel3_indefinite.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  bool slope2 = false;
  const auto d54 = Json::parse(r.out);
  for (const auto& e : d54["diagram"]["edges"]) slope2 |= e["slope"] == "2";
  EXPECT_TRUE(slope2);

  r = run("diagram " + instance("unperturbed.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto du = Json::parse(r.out);
  for (const auto& e : du["diagram"]["edges"]) EXPECT_EQ(e["slope"], "0");
}

TEST(Cli, IterateKernel3Linear) {
  const auto csv = scratch() / "trace.csv";
  const auto r = run("iterate " + instance("kernel3_rank_ok.json") + " --t0 0.1 -o " + csv.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["predicted"], "linear");
  EXPECT_EQ(j["measured"], "linear");
  EXPECT_TRUE(j["agreement"].get<bool>());
  const auto text = slurp(csv);
  EXPECT_EQ(text.rfind("k,t_k,err_k\n0,0.10000000000000001,", 0), 0u);
}

TEST(Cli, IterateMixedDegreesUpperBoundNotTight) {
  const auto r = run("iterate " + instance("mixed_degrees.json") + " --t0 0.1");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["predicted"], "sublinear_half");
  EXPECT_EQ(j["measured"], "linear");
  EXPECT_FALSE(j["agreement"].get<bool>());
  EXPECT_FALSE(j["tight"].get<bool>());
}

TEST(Cli, IterateTightInstancePowerLaw) {
  const auto r = run("iterate " + instance("tight_3x3.json") + " --t0 0.1 --max-iter 100000 --tol 1e-300");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["predicted"], "sublinear_half");
  EXPECT_TRUE(j["tight"].get<bool>());
  EXPECT_EQ(j["measured"], "power_law");
  EXPECT_NEAR(j["exponent"].get<double>(), -0.5, 0.05);
  EXPECT_TRUE(j["agreement"].get<bool>());
}

TEST(Cli, IterateMatrixPath) {
  const auto r = run("iterate " + instance("mixed_degrees.json") + " --t0 0.1 --path matrix");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["path"], "matrix");
}

TEST(Cli, ClassifyTight) {
  const auto r = run("classify " + instance("tight_3x3.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["predicted"], "sublinear_half");
  EXPECT_TRUE(j["tight"].get<bool>());
  EXPECT_EQ(j["sd_indicator"]["b22_semidefiniteness"], "positive_semidefinite");
}

TEST(Cli, VerifyExamples) {
  auto r = run("verify --seed 42 --nmax 5 --trials 100");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["status"], "ok");
  r = run("verify --trials 0");
  EXPECT_EQ(r.code, 0) << r.err;
  r = run("verify --seed 7 --nmax 4 --trials 30 --mutant");
  EXPECT_EQ(r.code, 3);
  const auto j = Json::parse(r.err);
  ASSERT_FALSE(j["violations"].empty());
  EXPECT_TRUE(j["violations"][0].contains("instance"));
}

TEST(Cli, Determinism) {
  const auto a = run("verify --seed 9 --nmax 5 --trials 40");
  const auto b = run("verify --seed 9 --nmax 5 --trials 40");
  EXPECT_EQ(a.out, b.out);
  const auto c = run("diagram " + instance("expand_4x4.json"));
  const auto d = run("diagram " + instance("expand_4x4.json"));
  EXPECT_EQ(c.out, d.out);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("iterate " + instance("mixed_degrees.json")).code, 1);  // --t0 missing
  EXPECT_EQ(run("iterate " + instance("mixed_degrees.json") + " --t0 0").code, 1);
  EXPECT_EQ(run("verify --nmax 9").code, 1);

  auto r = run("expand /nonexistent/file.json");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent/file.json"), std::string::npos);
  const auto bad = write_file("bad.json", R"({"A": {"rows": 1, "cols": 1, "data": [["x"]]}, "B": {"rows": 1, "cols": 1, "data": [[1]]}})");
  r = run("expand " + bad.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("A.data[0][0]"), std::string::npos) << r.err;
  const auto notpsd = write_file("notpsd.json", R"({"A": {"rows": 2, "cols": 2, "data": [[1, 0], [0, -1]]}, "B": {"rows": 2, "cols": 2, "data": [[1, 0], [0, 1]]}})");
  r = run("diagram " + notpsd.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("PSD"), std::string::npos) << r.err;
}
