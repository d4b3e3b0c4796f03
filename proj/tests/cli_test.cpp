#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "scorauc/cli.hpp"

using namespace scorauc;
using io::json;
namespace fs = std::filesystem;

namespace {

const std::string kPqr = R"({"family":"pqr"})";
const std::string kQd = R"({"family":"qd","qbar":2.0})";

struct Run {
  int code;
  std::string out, err;
  json report() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct CliFiles : ::testing::Test {
  fs::path dir;
  void SetUp() override {
    dir = fs::temp_directory_path() / ("scorauc_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                       "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

}  // namespace

TEST(Cli, ClassifyExample) {
  const auto r = run({"classify", "--rule", kPqr, "--eta", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report()["admits_cbe"], true);
  EXPECT_EQ(run({"classify", "--rule", kQd, "--eta", "2", "--f-lo", "0.5", "--f-hi", "1.5"}).report()["admits_cbe"],
            false);
}

TEST(Cli, BreakevenExample) {
  const auto r = run({"breakeven", "--rule", kQd, "--eta", "2", "--m", "1", "--f", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.report();
  EXPECT_NEAR(j["q"].get<double>(), 1.0 / 3.0, 1e-6);
  EXPECT_NEAR(j["effort"].get<double>(), 1.0 / 9.0, 1e-6);
  EXPECT_NEAR(j["p"].get<double>(), 10.0 / 9.0, 1e-6);
  EXPECT_EQ(j["m"], 1.0);
}

TEST(Cli, SolveRefusesQualityDiscount) {
  const auto r = run({"solve", "--rule", kQd});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("solve-br"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown subcommand"), std::string::npos);
  EXPECT_NE(r.err.find("classify"), std::string::npos);
  r = run({"classify", "--rule", kPqr, "--bogus"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"breakeven", "--rule", kPqr, "--m", "abc", "--f", "1"}).code, 1);
}

TEST(Cli, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("learn-demo"), std::string::npos);
}

TEST(Cli, ValidationErrors) {
  EXPECT_EQ(run({"classify"}).code, 2);
  EXPECT_EQ(run({"classify", "--rule", R"({"family":"qd","qbar":0.5})"}).code, 2);
  EXPECT_EQ(run({"classify", "--rule", "/nonexistent/rule.json"}).code, 2);
  EXPECT_EQ(run({"breakeven", "--rule", kPqr, "--m", "1"}).code, 2);
  EXPECT_EQ(run({"classify", "--rule", kPqr, "--eta", "0.5"}).code, 2);
  EXPECT_EQ(run({"learn-demo", "--rule", kQd, "--f-lo", "0.5", "--f-hi", "1.5"}).code, 2);
  EXPECT_EQ(run({"simulate", "--rule", kPqr, "--method", "exact"}).code, 2);
}

TEST(Cli, SolveBestResponseReportsNonConvergence) {
  const auto r = run({"solve-br", "--rule", kQd, "--f-lo", "0.5", "--f-hi", "1.5", "--grid", "12", "--max-iter", "2",
                      "--br-tol", "1e-12"});
  EXPECT_EQ(r.code, 3);
  const auto j = r.report();
  EXPECT_EQ(j["mode"], "best-response-fixed-point");
  EXPECT_EQ(j["converged"], false);
  EXPECT_EQ(j["iterations"], 2);
}

TEST_F(CliFiles, FlagsOverrideConfig) {
  const auto cfg = write("run.json", R"({"rule":{"family":"qd","qbar":2.0},"eta":3,"type":{"m":1,"f":1}})");
  auto r = run({"breakeven", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GT(std::abs(r.report()["effort"].get<double>() - 1.0 / 9.0), 1e-3);
  r = run({"breakeven", "--config", cfg.string(), "--eta", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.report()["effort"].get<double>(), 1.0 / 9.0, 1e-6);
}

TEST_F(CliFiles, ConfigResolvesRelativePaths) {
  write("qd.json", kQd);
  const auto cfg = write("run.json", R"({"rule":"qd.json","eta":2,"type":{"m":1,"f":2}})");
  const auto r = run({"breakeven", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.report()["effort"].get<double>(), 1.0, 1e-6);
}

TEST_F(CliFiles, ConfigRejectsUnknownFields) {
  const auto cfg = write("run.json", R"({"rule":{"family":"pqr"},"etaa":2})");
  EXPECT_EQ(run({"classify", "--config", cfg.string()}).code, 2);
  EXPECT_EQ(run({"classify", "--config", write("bad.json", "{").string()}).code, 2);
}

TEST_F(CliFiles, SolveWritesDeterministicCsv) {
  const auto a = dir / "a.csv", b = dir / "b.csv", rep = dir / "report.json";
  auto r = run({"solve", "--rule", kPqr, "--grid", "10", "--csv", a.string(), "--out", rep.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  r = run({"solve", "--rule", kPqr, "--grid", "10", "--csv", b.string(), "--threads", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = slurp(a);
  EXPECT_EQ(text, slurp(b));
  EXPECT_EQ(text.substr(0, text.find('\n')), "m,f,p,q,score");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 101);
  const auto j = json::parse(slurp(rep));
  EXPECT_EQ(j["mode"], "invariant-closed-path");
  EXPECT_EQ(j["converged"], true);
  EXPECT_LT(j["max_foc_residual"].get<double>(), 1e-1);
}

TEST_F(CliFiles, MonteCarloCsvIsThreadInvariant) {
  const auto a = dir / "a.csv", b = dir / "b.csv";
  const std::vector<std::string> base{"simulate", "--rule", kPqr, "--grid", "12", "--method", "mc",
                                      "--draws",  "3000",   "--seed", "4", "--probes", "3"};
  auto args = base;
  args.insert(args.end(), {"--csv", a.string(), "--threads", "1"});
  ASSERT_EQ(run(args).code, 0);
  args = base;
  args.insert(args.end(), {"--csv", b.string(), "--threads", "3"});
  ASSERT_EQ(run(args).code, 0);
  const auto text = slurp(a);
  EXPECT_EQ(text, slurp(b));
  EXPECT_EQ(text.substr(0, text.find('\n')), "m,f,X,Y,T,U,se_U");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 10);
}

TEST(Cli, PseudotypeOnTheRatioRule) {
  const auto r = run({"pseudotype", "--rule", kPqr, "--m", "2", "--f", "0.2", "--m-ref", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.report()["pseudotype"].get<double>(), 0.4, 1e-9);
}

TEST(Cli, LearnDemoPasses) {
  const auto r = run({"learn-demo", "--rule", kPqr, "--g-cells", "20", "--m", "1.5", "--f", "0.3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.report();
  EXPECT_EQ(j["verdict"]["pass"], true);
  EXPECT_EQ(j["realizations"].size(), j["bids"].size());
  EXPECT_GE(j["realizations"].size(), 4u);
}
