#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
CliRun cli(const std::string& args) {
  const std::string cmd = std::string(VFT_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string sample(const std::string& name) { return std::string(VFT_SAMPLES_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vft_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int count_lines(const std::string& s, bool skip_comments) {
  int n = 0;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) {
    if (line.empty() || (skip_comments && line[0] == '#')) continue;
    ++n;
  }
  return n;
}

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("plan").code, 1);
  EXPECT_EQ(cli("plan --scene /nonexistent.json").code, 1);
  const CliRun r = cli("bench --suite easy --repeats 1");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("--seed"), std::string::npos);
  const CliRun g = cli("plan --scene " + sample("isolated.json") + " --gamma 1.5");
  EXPECT_EQ(g.code, 1);
  EXPECT_NE(g.out.find("gamma"), std::string::npos);
  EXPECT_EQ(cli("plan --scene " + sample("isolated.json") + " --n-max many").code, 1);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(cli("--help").code, 0); }

TEST(Cli, RuntimeErrorsExitTwo) {
  const fs::path dir = scratch("runtime");
  std::ofstream(dir / "bad.json") << "{ \"objects\": [ }";
  EXPECT_EQ(cli("plan --scene " + (dir / "bad.json").string()).code, 2);
  std::ofstream(dir / "overlap.json")
      << R"({"workspace_cm": 44.8, "objects": [
            {"id": "a", "target": true, "pose": {"x_cm": 20, "y_cm": 20, "theta_deg": 0}, "shape": {"kind": "box", "w_cm": 4, "h_cm": 4}},
            {"id": "b", "target": false, "pose": {"x_cm": 21, "y_cm": 20, "theta_deg": 0}, "shape": {"kind": "box", "w_cm": 4, "h_cm": 4}}]})";
  const CliRun r = cli("render --scene " + (dir / "overlap.json").string() + " --out " + (dir / "o.svg").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("a,b"), std::string::npos);
  fs::create_directories(dir / "empty");
  EXPECT_EQ(cli("bench --suite " + (dir / "empty").string() + " --seed 1").code, 2);
}

TEST(Cli, PlanPrintsActionAndValue) {
  const CliRun r = cli("plan --scene " + sample("easy_000.json") + " --seed 2 --n-max 40");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("push start=("), std::string::npos);
  EXPECT_NE(r.out.find("value=1"), std::string::npos);
  EXPECT_EQ(r.out, cli("plan --scene " + sample("easy_000.json") + " --seed 2 --n-max 40").out);
}

TEST(Cli, PlanTraceAndDot) {
  const fs::path dir = scratch("trace");
  const CliRun r = cli("plan --scene " + sample("easy_000.json") + " --n-max 25 --trace " + (dir / "t.jsonl").string() +
                    " --dot " + (dir / "t.dot").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(count_lines(read(dir / "t.jsonl"), false), 25);
  EXPECT_EQ(read(dir / "t.dot").rfind("digraph", 0), 0u);
}

TEST(Cli, ConfigFileAndFlagOverride) {
  const fs::path dir = scratch("config");
  std::ofstream(dir / "c.json") << R"({"planner": {"n_max": 7}})";
  const CliRun a = cli("plan --scene " + sample("easy_000.json") + " --config " + (dir / "c.json").string());
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_NE(a.out.find("nodes=8 "), std::string::npos) << a.out;
  const CliRun b = cli("plan --scene " + sample("easy_000.json") + " --config " + (dir / "c.json").string() + " --n-max 5");
  EXPECT_NE(b.out.find("nodes=6 "), std::string::npos) << b.out;
  std::ofstream(dir / "bad.json") << R"({"planner": {"nmax": 7}})";
  EXPECT_EQ(cli("plan --scene " + sample("easy_000.json") + " --config " + (dir / "bad.json").string()).code, 1);
}

TEST(Cli, RunEpisodeFramesMatchActions) {
  const fs::path dir = scratch("episode");
  for (const std::string name : {"isolated.json", "easy_000.json", "packed_000.json"}) {
    const fs::path frames = dir / name;
    const CliRun r = cli("run-episode --scene " + sample(name) + " --seed 4 --n-max 40 --budget 6 --render-dir " +
                      frames.string() + " --log " + (dir / (name + ".log")).string());
    ASSERT_EQ(r.code, 0) << r.out;
    const std::size_t at = r.out.find("actions=");
    ASSERT_NE(at, std::string::npos);
    const int actions = std::stoi(r.out.substr(at + 8));
    int svgs = 0;
    for (const auto& e : fs::directory_iterator(frames)) svgs += e.path().extension() == ".svg";
    EXPECT_EQ(svgs, actions + 1) << name;
    EXPECT_TRUE(fs::exists(frames / "frame_0000.svg"));
    EXPECT_NE(read(dir / (name + ".log")).find("\"records\""), std::string::npos);
  }
}

TEST(Cli, BenchRowCountAndDeterminism) {
  const fs::path dir = scratch("bench");
  const fs::path suite = dir / "suite";
  ASSERT_EQ(cli("gen-suite --kind easy --count 2 --seed 3 --out " + suite.string()).code, 0);
  const std::string args = "bench --suite " + suite.string() + " --planner vft --repeats 3 --seed 1 --n-max 20 --out ";
  const CliRun a = cli(args + (dir / "a.csv").string());
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_NE(a.out.find("completion"), std::string::npos);
  const std::string csv = read(dir / "a.csv");
  EXPECT_EQ(count_lines(csv, true), 1 + 3 * 2);
  ASSERT_EQ(cli(args + (dir / "b.csv").string() + " --jobs 2").code, 0);
  const auto strip = [](const std::string& text) {
    std::string out;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
  };
  EXPECT_EQ(strip(csv), strip(read(dir / "b.csv")));
}

TEST(Cli, BenchGeneratedSuiteBothPlanners) {
  const fs::path dir = scratch("bench_gen");
  const CliRun r = cli("bench --suite easy --count 2 --planner both --repeats 2 --seed 5 --n-max 20 --out " +
                    (dir / "r.csv").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(count_lines(read(dir / "r.csv"), true), 1 + 2 * 2 * 2);
}

TEST(Cli, RenderWritesSvgAndPgm) {
  const fs::path dir = scratch("render");
  const CliRun r = cli("render --scene " + sample("isolated.json") + " --out " + (dir / "s.svg").string() +
                    " --reward-map " + (dir / "m.pgm").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(read(dir / "s.svg").find("<svg"), std::string::npos);
  EXPECT_EQ(read(dir / "m.pgm").rfind("P5", 0), 0u);
  EXPECT_NE(r.out.find("reward 1"), std::string::npos);
}

TEST(Cli, GenSuiteWritesLoadableFiles) {
  const fs::path dir = scratch("gen");
  const CliRun r = cli("gen-suite --kind packed --count 3 --seed 2 --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  for (const std::string id : {"packed_000", "packed_001", "packed_002"}) {
    ASSERT_TRUE(fs::exists(dir / (id + ".json")));
    EXPECT_EQ(cli("render --scene " + (dir / (id + ".json")).string() + " --out " + (dir / (id + ".svg")).string()).code,
              0);
  }
  EXPECT_EQ(cli("gen-suite --kind hard --out " + dir.string()).code, 1);
}
