#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "gen.hpp"
#include "muz/infer.hpp"
#include "muz/oracle.hpp"
#include "muz/passes.hpp"

using namespace muz;

namespace {

std::string read_model(const std::string& f) {
  std::ifstream in(std::string(MUZ_MODELS_DIR) + "/" + f);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Io;
}

const char* kTracker = R"(
let x_init = 0.0
let sx = 0.1
let sy = 0.5
node f(x) = x
node g(x) = x
proba tracker(y_obs) = x where
  rec init x = x_init
  and x = sample(gaussian(f(last x), sx))
  and y = g(x)
  and () = observe(gaussian(y, sy), y_obs)
node counter(c) = reset (x where rec init x = 0.0 and x = last x + 1.0) every c
proba pick(c) = present c -> sample(gaussian(0.0, 1.0)) else sample(uniform(0.0, 1.0))
)";

std::vector<double> reals(const Trace& t) {
  std::vector<double> out;
  for (const auto& v : t.values) out.push_back(v.as_real());
  return out;
}

}  // namespace

TEST(RelEval, Constant) {
  Program p = load_program("let k = 5.0");
  Trace t = rel_eval(make_subject(p, "5.0", {}), {}, {}, 4);
  EXPECT_EQ(reals(t), (std::vector<double>{5.0, 5.0, 5.0, 5.0}));
  EXPECT_EQ(t.logw, (std::vector<double>{0.0, 0.0, 0.0, 0.0}));
}

TEST(RelEval, DelayCounter) {
  Program p = load_program("let k = 0.0");
  Trace t = rel_eval(make_subject(p, "(x where rec init x = 0.0 and x = last x + 1.0)", {}), {}, {}, 3);
  EXPECT_EQ(reals(t), (std::vector<double>{1.0, 2.0, 3.0}));
}

TEST(RelEval, ResetWithConditionAtFirstInstant) {
  Program p = load_program(kTracker);
  Streams h{{"c", {Value(true), Value(false), Value(true), Value(false), Value(false)}}};
  Trace t = rel_eval(make_subject(p, "counter(c)", {"c"}), h, {}, 5);
  EXPECT_EQ(reals(t), (std::vector<double>{1.0, 2.0, 1.0, 2.0, 3.0}));
}

TEST(RelEval, TrackerStreams) {
  Program p = load_program(kTracker);
  const std::vector<double> ys{0.2, -0.1, 0.4};
  const RandPrefix r{{0.3, 0.8, 0.55}};
  Streams h{{"y", {Value(ys[0]), Value(ys[1]), Value(ys[2])}}};
  Trace t = rel_eval(make_subject(p, "tracker(y)", {"y"}), h, r, 3);
  double x = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    x = icdf(make_gaussian(x, 0.1), r[0][k]).as_real();
    EXPECT_DOUBLE_EQ(t.values[k].as_real(), x);
    EXPECT_NEAR(t.logw[k], log_pdf(make_gaussian(x, 0.5), Value(ys[k])), 1e-12);
  }
}

TEST(RelEval, InferIsRejected) {
  Program p = load_program(kTracker);
  Subject s = make_subject(p, "infer(tracker(y))", {"y"});
  Streams h{{"y", {Value(0.0)}}};
  EXPECT_EQ(error_of([&] { rel_eval(s, h, {}, 1); }), ErrorKind::Config);
}

TEST(Equiv, SampleSwap) {
  Program p = load_program("let s = 2.0");
  Subject a = make_subject(p, "sample(gaussian(0.0, 1.0)) + sample(gaussian(1.0, s))", {});
  Subject b = make_subject(
      p, "(x1 + x2 where rec x2 = sample(gaussian(1.0, s)) and x1 = sample(gaussian(0.0, 1.0)))", {});
  EXPECT_TRUE(equiv_check(a, b, {1, 0}, {}, 10, 50).pass);
  EXPECT_FALSE(equiv_check(a, b, {0, 1}, {}, 10, 50).pass);
}

TEST(Equiv, Identity) {
  Program p = load_program(kTracker);
  Subject a = make_subject(p, "tracker(y)", {"y"});
  Streams h{{"y", muz::testing::random_inputs(1, 20)}};
  Report rep = equiv_check(a, a, {}, h, 20, 30);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.trials, 30);
  EXPECT_TRUE(rep.detail.empty());
}

TEST(Equiv, CounterexampleReport) {
  Program p = load_program("let k = 0.0");
  Report rep = equiv_check(make_subject(p, "sample(gaussian(0.0, 1.0))", {}), make_subject(p, "0.0", {}), {}, {}, 5, 10);
  EXPECT_FALSE(rep.pass);
  EXPECT_EQ(rep.failures, 10);
  auto j = nlohmann::json::parse(rep.detail);
  EXPECT_EQ(j["step"].get<int>(), 0);
  EXPECT_TRUE(j.contains("seeds"));
  EXPECT_FALSE(nlohmann::json::parse(rep.to_json())["pass"].get<bool>());
}

TEST(Agree, Tracker) {
  Program p = load_program(kTracker);
  Streams h{{"y", muz::testing::random_inputs(2, 20)}};
  Report rep = coit_rel_agree(make_subject(p, "tracker(y)", {"y"}), h, 20, 50);
  EXPECT_TRUE(rep.pass) << rep.detail;
}

TEST(Agree, PresentAndReset) {
  Program p = load_program(kTracker);
  Streams h{{"c", {Value(true), Value(false), Value(false), Value(true), Value(true), Value(false)}}};
  EXPECT_TRUE(coit_rel_agree(make_subject(p, "counter(c)", {"c"}), h, 6, 5).pass);
  EXPECT_TRUE(coit_rel_agree(make_subject(p, "pick(c)", {"c"}), h, 6, 20).pass);
  EXPECT_TRUE(coit_rel_agree(make_subject(p, "reset pick(c) every c", {"c"}), h, 6, 20).pass);
}

TEST(Agree, GeneratedPrograms) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Program p = load_program(muz::testing::generate_program(7000 + seed).source);
    Streams h{{"u", muz::testing::random_inputs(seed, 10)}};
    Report rep = coit_rel_agree(make_subject(p, "main(u)", {"u"}), h, 10, 5, seed);
    EXPECT_TRUE(rep.pass) << "seed " << seed << " " << rep.detail;
  }
}

TEST(Grid, CoinPosterior) {
  Program p = load_program(read_model("bernoulli.muz"));
  auto m = grid_infer(make_subject(p, "coin(u)", {"u"}), {{"u", {Value::unit()}}}, 1, 8);
  EXPECT_NEAR(measure_prob(m[0], Value(true)), 1.0 / 3.0, 1e-12);
}

TEST(Grid, UniformPushforward) {
  Program p = load_program("let k = 0.0");
  const int n = 64;
  auto m = grid_infer(make_subject(p, "sample(uniform(0.0, 1.0))", {}), {}, 1, n);
  double mean = 0.0, mass = 0.0;
  for (const auto& [v, w] : m[0]) {
    mean += w * v.as_real();
    mass += w;
  }
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_NEAR(mean, 0.5, 1.0 / n);
}

TEST(Grid, ChainFirstStep) {
  Program p = load_program(read_model("bernoulli.muz"));
  auto m = grid_infer(make_subject(p, "chain(obs)", {"obs"}), {{"obs", {Value(true)}}}, 1, 4);
  // Start from false, flip with 0.2, observe true with hit 0.9.
  const double t = 0.2 * 0.9, f = 0.8 * 0.1;
  Measure exact{{Value(false), f / (t + f)}, {Value(true), t / (t + f)}};
  EXPECT_LT(total_variation(m[0], exact), 1e-9);
}

TEST(Grid, AgreesWithParticleFilter) {
  Program p = load_program(read_model("bernoulli.muz"));
  auto grid = grid_infer(make_subject(p, "coin(u)", {"u"}), {{"u", {Value::unit()}}}, 1, 8);
  Machine m(p);
  InferOptions cfg;
  cfg.particles = 10000;
  cfg.seed = 77;
  PfState st = pf_init(m, m.func_index("coin"), cfg);
  const double pt = dist_mean(pf_step(st, Value::unit()))[0];
  Measure pf{{Value(false), 1.0 - pt}, {Value(true), pt}};
  EXPECT_LT(total_variation(grid[0], pf), 0.02);
}

TEST(Grid, BudgetExceeded) {
  Program p = load_program(read_model("linear_gaussian.muz"));
  Streams h{{"y", muz::testing::random_inputs(1, 10)}};
  EXPECT_EQ(error_of([&] { grid_infer(make_subject(p, "ssm(y)", {"y"}), h, 10, 64, 100000); }),
            ErrorKind::BudgetExceeded);
}

TEST(Grid, TotalVariation) {
  Measure a{{Value(1.0), 0.5}, {Value(2.0), 0.5}};
  Measure b{{Value(2.0), 1.0}};
  EXPECT_DOUBLE_EQ(total_variation(a, b), 0.5);
  EXPECT_DOUBLE_EQ(total_variation(a, a), 0.0);
}

TEST(Prefix, Permute) {
  RandPrefix r = random_prefix(3, 0, 3, 4);
  ASSERT_EQ(r.size(), 3u);
  RandPrefix q = permute(r, {2, 0, 1});
  EXPECT_EQ(q[2], r[0]);
  EXPECT_EQ(q[0], r[1]);
  EXPECT_EQ(q[1], r[2]);
  EXPECT_EQ(permute(r, {}), r);
}
