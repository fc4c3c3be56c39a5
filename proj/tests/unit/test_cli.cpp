#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cli.hpp"
#include "gapcount/pdo_lab.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;

const std::string kData = GAPCOUNT_TEST_DATA;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = gapcount::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "gapcount_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TEST(Cli, BandsCsvSchema) {
  auto path = scratch("bands.csv");
  auto r = call({"bands", "--graph", kData + "/chain.json", "--grid", "64", "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto lines = lines_of(slurp(path));
  ASSERT_EQ(lines.size(), 65u);
  EXPECT_EQ(lines[0], "k_1,E_1");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    double k = 0, e = 0;
    char comma = 0;
    std::istringstream row(lines[i]);
    row >> k >> comma >> e;
    EXPECT_NEAR(k, -M_PI + 2 * M_PI * static_cast<double>(i - 1) / 64, 1e-14);
    EXPECT_NEAR(e, 2 - 2 * std::cos(k), 1e-13);
  }
}

TEST(Cli, GammaPrintsChainValue) {
  auto r = call({"gamma", "--graph", kData + "/chain.json", "--lambda", "-1", "--p", "1", "--sign",
                 "minus", "--theta", "const:1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(r.out), oracle::chain_gamma_minus(-1.0, 1.0), 1e-10);
  EXPECT_TRUE(r.out.starts_with("0.894427"));
}

TEST(Cli, MissingGraphIsUsageError) {
  auto r = call({"gamma", "--lambda", "-1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--graph"), std::string::npos);
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
}

TEST(Cli, MalformedGraphReportsLine) {
  auto path = scratch("bad.json");
  std::ofstream(path) << "{\n  \"dim\": 1,\n  \"vertices\": [{\"id\": 1, \"offset\": [0.0], \"Q\": \"x\"}],\n"
                         "  \"edges\": []\n}\n";
  auto r = call({"gaps", "--graph", path.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("/vertices/0/Q"), std::string::npos) << r.err;

  std::ofstream(path, std::ios::trunc) << "{\n  \"dim\": 1,\n  \"vertices\": [\n";
  r = call({"gaps", "--graph", path.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
}

TEST(Cli, DimerGapsMatchClosedForm) {
  auto r = call({"gaps", "--graph", kData + "/dimer.json", "--grid", "64"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 4u);
  auto [lo, hi] = oracle::dimer_gap();
  std::vector<std::string> cells;
  std::istringstream row(lines[2]);
  for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
  ASSERT_GE(cells.size(), 4u);
  EXPECT_EQ(cells[1], "interior");
  // the grid contains both band extremizers k = 0 and k = -pi
  EXPECT_NEAR(std::stod(cells[2]), lo, 1e-9);
  EXPECT_NEAR(std::stod(cells[3]), hi, 1e-9);
}

TEST(Cli, CountRoutesAgree) {
  auto r = call({"count", "--graph", kData + "/chain.json", "--L", "60", "--lambda", "-1", "--tau",
                 "5,10", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  ASSERT_EQ(doc.size(), 2u);
  for (const auto& row : doc) {
    EXPECT_EQ(row["N_bs"], row["N_direct"]);
    EXPECT_GT(row["N_bs"].get<int>(), 0);
  }
}

TEST(Cli, SpectrumLambdaIsConfigError) {
  auto r = call({"gamma", "--graph", kData + "/chain.json", "--lambda", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, WeakLpReportsBadLine) {
  auto path = scratch("seq.txt");
  std::ofstream(path) << "1\n0.5 # comment\nabc\n";
  auto r = call({"weaklp", "--input", path.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(":3:"), std::string::npos) << r.err;
}

TEST(Cli, WeakLpHarmonicWindow) {
  auto path = scratch("harmonic.txt");
  {
    std::ofstream out(path);
    out.precision(17);
    for (int m = 1; m <= 200; ++m) out << 1.0 / m << "\n";
  }
  auto r = call({"weaklp", "--input", path.string(), "--p", "1", "--window", "0.01", "0.05",
                 "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  EXPECT_NEAR(doc["weak_quasinorm"].get<double>(), 1.0, 1e-12);
  EXPECT_GE(doc["window"]["inf"].get<double>(), 0.9);
  EXPECT_LE(doc["window"]["sup"].get<double>(), 1.0 + 1e-12);
}

TEST(Cli, PdoSvaluesMatchDirectKernel) {
  auto r = call({"pdo", "--L", "4", "--p", "1", "--f", "half:1", "--M", "32", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto got = nlohmann::json::parse(r.out)["svalues"].get<std::vector<double>>();
  auto f = gapcount::TorusFunction::parse("half:1", 1);
  auto one = [](std::span<const double>) { return oracle::Complex(1.0); };
  std::vector<std::vector<int>> cells;
  std::vector<oracle::Complex> w;
  for (int n = -4; n <= 4; ++n) {
    cells.push_back({n});
    w.push_back(n == 0 ? 0.0 : 1.0 / std::abs(n));
  }
  auto want = oracle::direct_pdo_svalues(1, [&](std::span<const double> k) { return f(k); }, one,
                                          cells, w, 32);
  ASSERT_GE(want.size(), got.size());
  for (std::size_t m = 0; m < got.size(); ++m) EXPECT_NEAR(got[m], want[m], 1e-10) << m;
}

TEST(Cli, OutputIndependentOfThreadCount) {
  std::vector<std::string> outputs;
  for (const char* threads : {"1", "3"}) {
    setenv("GAPCOUNT_THREADS", threads, 1);
    auto a = call({"asymptotics", "--graph", kData + "/chain.json", "--lambda", "-1", "--tau",
                   "10,20", "--L", "100,200"});
    auto b = call({"pdo", "--mode", "dp", "--L", "6,8", "--p", "1"});
    outputs.push_back(a.out + b.out);
  }
  unsetenv("GAPCOUNT_THREADS");
  EXPECT_EQ(outputs[0], outputs[1]);
  EXPECT_FALSE(outputs[0].empty());
}

TEST(Cli, VerifySubset) {
  auto r = call({"verify", "--only", "1,3"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(call({"verify", "--only", "x"}).code, 2);
}

}  // namespace
