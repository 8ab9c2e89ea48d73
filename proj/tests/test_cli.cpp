#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI with `args`; captures stdout, and stderr too when asked.
Result run(const std::string& args, bool merge_stderr = false) {
  std::string cmd = std::string("\"") + PITOS_CLI_PATH + "\" " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pitos-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, TestPrintsVerdictJson) {
  write("x.txt", "# header\n0.1\n0.52\n\n0.33  # inline\n0.9\n0.71\n");
  const auto r = run("test --input " + path("x.txt"));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["test"], "PITOS");
  EXPECT_EQ(j["n"], 5);
  EXPECT_EQ(j["m"], 81 + 5);  // ceil(10 n ln n) + n
  EXPECT_GE(j["p_star"].get<double>(), j["p_value"].get<double>());
  EXPECT_TRUE(j["default_pairs"].get<bool>());
}

TEST_F(Cli, BadLineIsReportedByNumber) {
  write("bad.txt", "0.1\n0.2\n0.3\n0.4\n0.5\n0.6\nabc\n0.8\n");
  const auto r = run("test --input " + path("bad.txt"), true);
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("line 7"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("abc"), std::string::npos) << r.out;
}

TEST_F(Cli, OutOfRangeValueFails) {
  write("bad.txt", "0.1\n1.2\n");
  EXPECT_NE(run("test --input " + path("bad.txt")).code, 0);
}

TEST_F(Cli, ClassicMethods) {
  write("x.txt", "0.1\n0.5\n0.33\n0.9\n0.71\n0.05\n");
  for (const char* m : {"ad", "nb", "ks", "cvm"}) {
    const auto r = run(std::string("test --method ") + m + " --null-b 500 --seed 3 --input " + path("x.txt"));
    ASSERT_EQ(r.code, 0) << m;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["n"], 6);
    EXPECT_EQ(j["null_b"], 500);
    EXPECT_GT(j["p_value"].get<double>(), 0.0);
  }
}

TEST_F(Cli, EmitDetail) {
  write("x.txt", "0.1\n0.5\n0.33\n");
  ASSERT_EQ(run("test --input " + path("x.txt") + " --emit-detail " + path("d.csv")).code, 0);
  const std::string d = slurp(path("d.csv"));
  EXPECT_EQ(d.rfind("k,i,j,p\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(d.begin(), d.end(), '\n')), 1 + 33 + 3);
}

TEST_F(Cli, NullCdfRoutesThroughPit) {
  write("x.txt", "0.01\n0.02\n0.5\n0.98\n0.99\n0.03\n0.97\n");
  const auto r = run("test --null-cdf 'beta(0.6,0.6)' --input " + path("x.txt"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["null_cdf"], "beta(0.6,0.6)");
  write("d.txt", "0.5\n0.25\n0.99\n");
  EXPECT_EQ(run("test --null-cdf discrete-uniform-99 --input " + path("d.txt")).code, 0);
}

TEST_F(Cli, PairsForTwentyFive) {
  const auto r = run("pairs --n 25");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 831);
  EXPECT_EQ(r.out.rfind("k,i,j\n", 0), 0u);
  EXPECT_NE(r.out.find("\n830,25,25\n"), std::string::npos);
}

TEST_F(Cli, WarpWarns) {
  const auto r = run("pairs --n 5 --warp 1,1", true);
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("warning"), std::string::npos);
}

TEST_F(Cli, SampleThenTestAcrossSeeds) {
  // Uniform samples: p* should rarely fall below 0.01.
  int small = 0;
  for (int seed = 1; seed <= 200; ++seed) {
    const std::string file = path("s.txt");
    ASSERT_EQ(run("sample --dist uniform --n 20 --seed " + std::to_string(seed) + " --out " + file).code, 0);
    const auto r = run("test --input " + file);
    ASSERT_EQ(r.code, 0) << seed;
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j["n"], 20);
    small += j["p_star"].get<double>() <= 0.01 ? 1 : 0;
  }
  EXPECT_LE(small, 8);
}

TEST_F(Cli, ScenariosCsv) {
  const auto r = run("scenarios --name random-gap --count 4 --seed 2");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("index,scenario,distribution,center,halfwidth\n", 0), 0u);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
  EXPECT_NE(run("scenarios --name nope --count 1").code, 0);
}

TEST_F(Cli, OutputsAreByteIdenticalAcrossThreads) {
  const std::string cache = " --cache-dir " + path("cache");
  const std::vector<std::pair<std::string, std::string>> jobs = {
      {"power", "power --dist 'beta(1.2,0.8)' --tests pitos,ad,nb,ks,cvm,lrt --n 20,40 --reps 60 --null-b 400 "
                "--seed 4 --out "},
      {"calibrate", "calibrate --test pitos --n 20 --reps 200 --seed 4 --out "},
      {"study", "study --scenario outliers --dists 3 --reps 30 --n 25 --null-b 300 --seed 4 --out "},
  };
  for (const auto& [name, args] : jobs) {
    std::string first;
    std::string first_side;
    for (const char* threads : {"1", "1", "3"}) {
      const std::string out = path(name + "-" + threads + ".csv");
      ASSERT_EQ(run(std::string("--threads ") + threads + cache + " " + args + out).code, 0) << name;
      const std::string body = slurp(out);
      const std::string side = slurp(out + ".json");
      ASSERT_FALSE(body.empty());
      if (first.empty()) {
        first = body;
        first_side = side;
      } else {
        EXPECT_EQ(body, first) << name << " threads=" << threads;
        EXPECT_EQ(side, first_side) << name << " threads=" << threads;
      }
    }
  }
}

TEST_F(Cli, HelpAndErrors) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("power --help").code, 0);
  EXPECT_NE(run("").code, 0);
  EXPECT_NE(run("test --input /nonexistent/file").code, 0);
  EXPECT_NE(run("sample --dist nope --n 3").code, 0);
}
