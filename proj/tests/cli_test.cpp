#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result velest(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / ("velest_cli_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = std::string(VELEST_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  fs::remove(log);
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("velest_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(Cli, RunWritesArtifacts) {
  const fs::path out = scratch("run");
  const Result r = velest("run --preset fig12 --seed 3 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* file : {"trace.csv", "metrics.json", "config.json", "trace.gp"}) {
    EXPECT_TRUE(fs::exists(out / file)) << file;
  }
  EXPECT_NE(r.output.find("saito"), std::string::npos);
  EXPECT_NE(r.output.find("kalman"), std::string::npos);

  const Result rep = velest("report " + out.string());
  EXPECT_EQ(rep.code, 0) << rep.output;
  EXPECT_NE(rep.output.find("fig12"), std::string::npos);
  fs::remove_all(out);
}

TEST(Cli, ReportRecomputesFromTrace) {
  const fs::path out = scratch("recompute");
  ASSERT_EQ(velest("run --preset fig12 --seed 3 --out " + out.string()).code, 0);
  const std::string first = velest("report " + out.string()).output;
  fs::remove(out / "metrics.json");
  const Result again = velest("report " + out.string());
  EXPECT_EQ(again.code, 0) << again.output;
  EXPECT_NE(again.output.find("saito"), std::string::npos);
  fs::remove_all(out);
}

TEST(Cli, RunIsDeterministic) {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  ASSERT_EQ(velest("run --preset fig14-rain-decel --seed 9 --out " + a.string()).code, 0);
  ASSERT_EQ(velest("run --preset fig14-rain-decel --seed 9 --out " + b.string()).code, 0);
  std::ifstream fa(a / "trace.csv"), fb(b / "trace.csv");
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, ValidationErrorsExitTwo) {
  const fs::path out = scratch("bad");
  EXPECT_EQ(velest("run --preset nowhere --out " + out.string()).code, 2);
  EXPECT_EQ(velest("run --preset fig12").code, 2);
  EXPECT_EQ(velest("frobnicate").code, 2);
  EXPECT_EQ(velest("report " + out.string() + "_missing").code, 2);

  fs::create_directories(out);
  write(out / "bad.json", R"({"noise": {"dropout_prob_stereo": 3}})");
  EXPECT_EQ(velest("run --config " + (out / "bad.json").string() + " --out " + (out / "r").string())
                .code,
            2);
  write(out / "unknown.json", R"({"wheels": 4})");
  EXPECT_EQ(
      velest("run --config " + (out / "unknown.json").string() + " --out " + (out / "r").string())
          .code,
      2);
  write(out / "broken.json", "{");
  EXPECT_EQ(
      velest("run --config " + (out / "broken.json").string() + " --out " + (out / "r").string())
          .code,
      2);
  EXPECT_EQ(velest("compare --estimators saito,lidar --preset fig12 --seeds 1").code, 2);
  fs::remove_all(out);
}

TEST(Cli, StrictModeExitsThreeOnInsufficientData) {
  const fs::path out = scratch("strict");
  fs::create_directories(out);
  write(out / "sparse.json", R"({"noise": {"dropout_prob_stereo": 0.9}})");
  const std::string args = "run --preset fig13-rain --config " + (out / "sparse.json").string() +
                           " --out " + (out / "r").string();
  const Result lenient = velest(args);
  EXPECT_EQ(lenient.code, 0) << lenient.output;
  EXPECT_NE(lenient.output.find("insufficient data"), std::string::npos);
  EXPECT_EQ(velest("--strict " + args).code, 3);
  EXPECT_EQ(velest("--strict report " + (out / "r").string()).code, 3);
  // A complete run passes in strict mode.
  EXPECT_EQ(velest("--strict run --preset fig12 --seed 1 --out " + (out / "ok").string()).code, 0);
  fs::remove_all(out);
}

TEST(Cli, AblateWritesCsv) {
  const fs::path out = scratch("ablate");
  fs::create_directories(out);
  const Result r = velest("ablate --preset fig14-rain-decel --seeds 2 --out " +
                          (out / "ablation.csv").string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("{1,2,3}"), std::string::npos);
  std::ifstream in(out / "ablation.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "toggles,median_percent,seed_1,seed_2");
  fs::remove_all(out);
}

TEST(Cli, HelpExitsZero) {
  EXPECT_EQ(velest("--help").code, 0);
  EXPECT_EQ(velest("run --help").code, 0);
}
