#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "forge/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = forge::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kSpecs = FORGE_DEFAULT_DATA_DIR "/specs/";

bool has(const std::string& s, const std::string& x) { return s.find(x) != std::string::npos; }

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("forge_cli_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, AnalyzeSummary) {
  const auto r = run({"analyze", kSpecs + "hrn-5x5x3x_m16.json"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has(r.out, "343.04K ReLUs")) << r.out;
  EXPECT_TRUE(has(r.out, "M FLOPs"));
}

TEST(Cli, AnalyzePerStageFormats) {
  const auto t = run({"analyze", kSpecs + "resnet18_m64.json", "--per-stage"});
  EXPECT_EQ(t.code, 0);
  EXPECT_TRUE(has(t.out, "557.06K"));
  const auto c = run({"analyze", kSpecs + "resnet18_m64.json", "--per-stage", "--format", "csv"});
  EXPECT_TRUE(has(c.out, "stage,blocks,channels,relus"));
  const auto j = run({"analyze", kSpecs + "resnet18_m64.json", "--format", "json"});
  EXPECT_EQ(nlohmann::json::parse(j.out)["rows"][0]["value"], 557056);
}

TEST(Cli, SynthPrintsConstraintsAndNames) {
  const auto r = run({"synth", "--backbone", "resnet18", "--order", "3,2,4,1"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has(r.out, "β>4, γ<4, αβ>16, βγ<16, α>4, αβγ>64")) << r.out;
  for (const char* n : {"HRN-5x5x3x", "HRN-5x7x2x", "HRN-6x6x2x", "HRN-7x5x2x"}) EXPECT_TRUE(has(r.out, n)) << n;
}

TEST(Cli, SynthInfeasibleExitsOne) {
  const auto r = run({"synth", "--order", "3,2,4,1", "--lambda-bounds", "2:4"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(has(r.out, "infeasible"));
}

TEST(Cli, SynthEmitsLoadableSpecs) {
  const auto dir = scratch("synth");
  const auto r = run({"synth", "--order", "3,2,4,1", "--emit-specs", dir.string(), "--low-relu"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto spec = forge::load_spec((dir / "hrn-5x5x3x_m16.json").string());
  EXPECT_EQ(forge::profile(spec).total_relus, 343040);
  EXPECT_TRUE(std::filesystem::exists(dir / "hrn-2x5x3x_m16.json"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, RankGroupsByNetwork) {
  const auto r = run({"rank", FORGE_DEFAULT_DATA_DIR "/probes/hrn_alpha_sweep.csv", "--kd", "--format", "csv"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has(r.out, "HRN-2x5x3x,S3>S4>S2>S1"));
  EXPECT_TRUE(has(r.out, "HRN-5x5x3x,S3>S2>S4>S1"));
}

TEST(Cli, TransformAutoCullAndThin) {
  const auto dir = scratch("transform");
  std::filesystem::create_directories(dir);
  const auto out = (dir / "t.json").string();
  const auto r = run({"transform", kSpecs + "hrn-2x5x3x_m16.json", "--cull", "auto", "--thin", "-o", out});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has(r.out, "cull:1 thin:2,3,4: 52.22K ReLUs")) << r.out;
  const auto s = run({"transform", out, "--reuse", "16", "-o", out});
  EXPECT_TRUE(has(s.out, "3.26K ReLUs")) << s.out;
  std::filesystem::remove_all(dir);
}

TEST(Cli, PlanListsVariants) {
  const auto r = run({"plan", kSpecs + "hrn-2x5x3x_m16.json", "--format", "csv"});
  EXPECT_EQ(r.code, 0) << r.err;
  for (const char* x : {"186368", "52224", "26112", "13056", "6528", "3264"}) EXPECT_TRUE(has(r.out, x)) << x;
}

TEST(Cli, CostFromCounts) {
  const auto r = run({"cost", "--relus", "26.1K", "--flops", "44.6M", "--format", "json"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["rows"][0]["value"].get<double>(), 26.1 * 0.1123, 1e-6);
}

TEST(Cli, MissingCalibrationExitsTwo) {
  const auto r = run({"cost", kSpecs + "resnet18_m64.json", "--calib", "/nonexistent"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(has(r.err, "calibration file not found"));
}

TEST(Cli, MissingSpecExitsTwo) { EXPECT_EQ(run({"analyze", "/nonexistent.json"}).code, 2); }

TEST(Cli, BadSpecExitsOne) {
  const auto dir = scratch("bad");
  std::filesystem::create_directories(dir);
  const auto path = (dir / "bad.json").string();
  std::ofstream(path) << "{\"version\": 1, \"nme\": \"x\"}";
  const auto r = run({"analyze", path});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(has(r.err, "nme"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"analyze"}).code, 2);
  EXPECT_EQ(run({"reproduce", "everything"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, ParetoFrontierAndComparison) {
  const std::string d = FORGE_DEFAULT_DATA_DIR "/results/";
  const auto f = run({"pareto", d + "cifar100_hrn.csv"});
  EXPECT_EQ(f.code, 0) << f.err;
  const auto c = run({"pareto", d + "cifar100_hrn.csv", d + "cifar100_baselines.csv", "--format", "csv"});
  EXPECT_EQ(c.code, 0) << c.err;
  EXPECT_TRUE(has(c.out, "SENet-25K")) << c.out;
}

TEST(Cli, BuildRoundTrips) {
  const auto r = run({"build", "--m", "16", "--abg", "5,5,3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(forge::deserialize(r.out), forge::load_spec(kSpecs + "hrn-5x5x3x_m16.json"));
}

TEST(Cli, ReproduceTargets) {
  for (const char* t : {"iso-relu", "transform-chain", "baselines", "low-relu", "basech-stagech", "hrn-sweep",
                        "stage-trends", "pi-comparison"}) {
    const auto r = run({"reproduce", t});
    EXPECT_EQ(r.code, 0) << t << ": " << r.err;
    EXPECT_FALSE(r.out.empty()) << t;
  }
  const auto chain = run({"reproduce", "transform-chain"});
  for (const char* x : {"163.33K", "104.45K", "52.22K", "26.11K", "13.06K", "6.53K", "3.26K"})
    EXPECT_TRUE(has(chain.out, x)) << x;
  const auto probes = run({"reproduce", "hrn-sweep", "--format", "csv"});
  EXPECT_FALSE(has(probes.out, ",no,")) << probes.out;
}
