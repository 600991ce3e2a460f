#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "muz/apf.hpp"
#include "muz/cli.hpp"
#include "muz/passes.hpp"
#include "muz/syntax.hpp"

using namespace muz;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("muz_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name, const std::string& text) {
    const std::string p = (dir_ / name).string();
    std::ofstream(p) << text;
    return p;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "muz");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return cli_main(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  static std::string model(const std::string& f) { return std::string(MUZ_MODELS_DIR) + "/" + f; }

  fs::path dir_;
  std::ostringstream out_, err_;
};

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorKind::Kind), kExitStatic);
  EXPECT_EQ(exit_code_for(ErrorKind::Causality), kExitStatic);
  EXPECT_EQ(exit_code_for(ErrorKind::Degenerate), kExitDegenerate);
  EXPECT_EQ(exit_code_for(ErrorKind::NonFinite), kExitDegenerate);
  EXPECT_EQ(exit_code_for(ErrorKind::Io), kExitIo);
}

TEST(Obs, Columns) {
  ObsTable t = read_obs_csv("step,y,v_0,v_1,b\n0,0.5,1,2,true\n1,-1.5,3,4,false\n");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(obs_input(t, Pattern::var("y"), 1), Value(-1.5));
  EXPECT_EQ(obs_input(t, Pattern::var("b"), 0), Value(true));
  const Value v = obs_input(t, Pattern::var("v"), 1);
  EXPECT_EQ(v.as_vec(), (std::vector<double>{3.0, 4.0}));
  Value pr = obs_input(t, Pattern::pair(Pattern::var("y"), Pattern::var("b")), 0);
  EXPECT_EQ(pr.fst(), Value(0.5));
  EXPECT_THROW(obs_input(t, Pattern::var("z"), 0), Error);
}

TEST(Obs, Formatting) {
  EXPECT_EQ(fmt_real(0.1), "0.10000000000000001");
  std::vector<double> xs;
  flatten_output(Value::pair(Value(1.0), Value(true)), xs);
  EXPECT_EQ(xs, (std::vector<double>{1.0, 1.0}));
}

TEST_F(Cli, CheckPrintsParameters) {
  ASSERT_EQ(run({"check", model("drift_radar.muz")}), kExitOk);
  auto j = nlohmann::json::parse(out_.str());
  EXPECT_EQ(j["f"]["theta"].get<std::string>(), "gaussian(zeros, st)");
}

TEST_F(Cli, SampleInNode) {
  EXPECT_EQ(run({"check", file("bad.muz", "node f(x) = sample(gaussian(x, 1.0))\n")}), kExitStatic);
  EXPECT_NE(err_.str().find("Kind"), std::string::npos);
}

TEST_F(Cli, SyntaxError) { EXPECT_EQ(run({"check", file("bad.muz", "node f(x) = x where\n")}), kExitStatic); }

TEST_F(Cli, EmptyFile) { EXPECT_EQ(run({"check", file("empty.muz", "")}), kExitStatic); }

TEST_F(Cli, MissingFile) { EXPECT_EQ(run({"check", path("nope.muz")}), kExitIo); }

TEST_F(Cli, UnknownFlag) { EXPECT_EQ(run({"check", model("bernoulli.muz"), "--frobnicate"}), kExitStatic); }

TEST_F(Cli, DumpAst) {
  ASSERT_EQ(run({"dump-ast", model("bernoulli.muz")}), kExitOk);
  EXPECT_TRUE(nlohmann::json::parse(out_.str()).is_array());
}

TEST_F(Cli, RunDetNode) {
  const std::string src = file("acc.muz", "node acc(u) = x where rec init x = 0.0 and x = last x + u\n");
  const std::string obs = file("obs.csv", "step,u\n0,1\n1,2\n2,3.5\n");
  ASSERT_EQ(run({"run", src, "--node", "acc", "--obs", obs}), kExitOk);
  EXPECT_EQ(lines(out_.str()), (std::vector<std::string>{"step,value_0", "0,1", "1,3", "2,6.5"}));
}

TEST_F(Cli, RunRejectsProbaNode) {
  EXPECT_EQ(run({"run", model("bernoulli.muz"), "--node", "coin", "--steps", "1"}), kExitStatic);
}

TEST_F(Cli, InferZeroSteps) {
  ASSERT_EQ(run({"infer", model("bernoulli.muz"), "--node", "coin", "--steps", "0"}), kExitOk);
  EXPECT_EQ(lines(out_.str()), (std::vector<std::string>{"step,ess,log_evidence"}));
}

TEST_F(Cli, InferPf) {
  const std::string obs = file("obs.csv", "step,y\n0,0.5\n1,1.0\n2,0.2\n");
  ASSERT_EQ(run({"infer", model("linear_gaussian.muz"), "--node", "ssm", "--obs", obs, "--particles", "200"}),
            kExitOk);
  auto ls = lines(out_.str());
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[0], "step,mean_0,std_0,ess,log_evidence");
}

TEST_F(Cli, InferApfToFile) {
  const std::string obs = file("obs.csv", "step,y_obs\n0,0.1\n1,0.3\n");
  const std::string out = path("post.csv");
  ASSERT_EQ(run({"infer", model("drift_radar.muz"), "--node", "tracker", "--algo", "apf", "--obs", obs,
                 "--particles", "20", "--cloud", "5", "--out", out}),
            kExitOk);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "step,mean_0,std_0,mean_1,std_1,ess,log_evidence");
}

TEST_F(Cli, InferDegenerate) {
  const std::string src = file("zero.muz", "proba z(u) = factor(0.0)\n");
  const std::string obs = file("obs.csv", "step,u\n0,1.0\n");
  EXPECT_EQ(run({"infer", src, "--node", "z", "--obs", obs, "--particles", "10"}), kExitDegenerate);
}

TEST_F(Cli, ObsWithoutStepColumn) {
  const std::string obs = file("obs.csv", "y\n0.5\n");
  EXPECT_EQ(run({"infer", model("linear_gaussian.muz"), "--node", "ssm", "--obs", obs}), kExitIo);
}

TEST_F(Cli, InferMissingObs) {
  EXPECT_EQ(run({"infer", model("linear_gaussian.muz"), "--node", "ssm", "--obs", path("missing.csv")}), kExitIo);
}

TEST_F(Cli, InferZeroParticles) {
  EXPECT_EQ(run({"infer", model("bernoulli.muz"), "--node", "coin", "--steps", "1", "--particles", "0"}),
            kExitStatic);
}

TEST_F(Cli, EquivSelf) {
  ASSERT_EQ(run({"equiv", model("drift_radar.muz"), model("drift_radar.muz"), "--node", "tracker", "--steps", "10",
                 "--trials", "10"}),
            kExitOk);
  EXPECT_TRUE(nlohmann::json::parse(out_.str())["pass"].get<bool>());
}

TEST_F(Cli, EquivDifferent) {
  const std::string a = file("a.muz", "proba m(u) = sample(gaussian(u, 1.0))\n");
  const std::string b = file("b.muz", "proba m(u) = u + 0.0\n");
  ASSERT_EQ(run({"equiv", a, b, "--node", "m", "--steps", "5", "--trials", "5"}), kExitStatic);
  auto j = nlohmann::json::parse(out_.str());
  EXPECT_FALSE(j["pass"].get<bool>());
}

TEST_F(Cli, CompileThenEquiv) {
  const std::string out = path("radar_apf.muz");
  ASSERT_EQ(run({"compile-apf", model("drift_radar.muz"), "--out", out}), kExitOk);
  ASSERT_TRUE(fs::exists(path("radar_apf.perm.json")));
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NO_THROW(load_program(ss.str()));
  EXPECT_EQ(run({"equiv", model("drift_radar.muz"), out, "--node", "tracker", "--perm", path("radar_apf.perm.json"),
                 "--steps", "20", "--trials", "20"}),
            kExitOk)
      << out_.str();
}

TEST_F(Cli, CompileToStdout) {
  ASSERT_EQ(run({"compile-apf", model("drift_radar.muz")}), kExitOk);
  EXPECT_NE(out_.str().find(prior_name("tracker")), std::string::npos);
}

TEST_F(Cli, Oracle) {
  ASSERT_EQ(run({"oracle", model("linear_gaussian.muz"), "--node", "ssm", "--trials", "5"}), kExitOk);
  EXPECT_EQ(nlohmann::json::parse(out_.str())["trials"].get<int>(), 5);
}
