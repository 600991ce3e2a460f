#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "gen.hpp"
#include "muz/engine.hpp"
#include "muz/infer.hpp"
#include "muz/passes.hpp"

using namespace muz;

namespace {

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
)";

const char* kSwapped = R"(
let x_init = 0.0
let sx = 0.1
let sy = 0.5
node f(x) = x
node g(x) = x
proba tracker(y_obs) = x where
  rec () = observe(gaussian(y, sy), y_obs)
  and y = g(x)
  and x = sample(gaussian(f(last x), sx))
  and init x = x_init
)";

struct Stepper {
  explicit Stepper(const std::string& src, const std::string& fn = "main", EvalOptions o = {})
      : m(load_program(src)), f(m.func_index(fn)), s(d_init(m, f).first), opt(o) {}

  StepOut step(const Value& in, std::vector<double> r) {
    StepOut o = d_step(m, f, in, s, r, opt);
    s = o.state;
    return o;
  }

  Machine m;
  int f;
  State s;
  EvalOptions opt;
};

ErrorKind error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Io;
}

double normal_logpdf(double x, double mu, double s) {
  const double z = (x - mu) / s;
  return -0.5 * z * z - std::log(s) - 0.5 * std::log(2.0 * M_PI);
}

}  // namespace

TEST(Init, SampleAllocatesArgumentState) {
  Machine m(load_program("proba main(u) = sample(gaussian(0.0, 1.0))"));
  auto [s, rv] = d_init(m, m.func_index("main"));
  EXPECT_EQ(rv, 1);
  EXPECT_EQ(count_tag(s, State::Tag::InitSlot), 0);
}

TEST(Init, ConstHasNoState) {
  Machine m(load_program("node main(u) = 1.0"));
  auto [s, rv] = d_init(m, m.func_index("main"));
  EXPECT_EQ(rv, 0);
  EXPECT_EQ(count_tag(s, State::Tag::InitSlot), 0);
  EXPECT_EQ(count_tag(s, State::Tag::Leaf), 0);
}

TEST(Init, TrackerHasInitSlot) {
  Machine m(load_program(kTracker));
  auto [s, rv] = d_init(m, m.func_index("tracker"));
  EXPECT_EQ(rv, 1);
  EXPECT_EQ(count_tag(s, State::Tag::InitSlot), 1);
  std::vector<Value> prev;
  init_slot_values(s, prev);
  ASSERT_EQ(prev.size(), 1u);
  EXPECT_TRUE(prev[0].is_nil());
}

TEST(Step, SampleAtMedian) {
  Stepper st("proba main(u) = sample(gaussian(2.0, 1.0))");
  StepOut o = st.step(Value::unit(), {0.5});
  EXPECT_EQ(o.value, Value(2.0));
  EXPECT_EQ(o.logw, 0.0);
}

TEST(Step, Factor) {
  Stepper st("proba main(u) = factor(0.7)");
  StepOut o = st.step(Value::unit(), {});
  EXPECT_TRUE(o.value.is_unit());
  EXPECT_DOUBLE_EQ(o.logw, std::log(0.7));
}

TEST(Step, NegativeFactor) {
  Stepper st("proba main(u) = factor(0.0 - 1.0)");
  EXPECT_EQ(error_of([&] { st.step(Value::unit(), {}); }), ErrorKind::NegativeScore);
}

TEST(Step, WhereConstantBody) {
  Stepper st("node main(u) = (1.0 where rec z = 2.0)");
  StepOut o = st.step(Value::unit(), {});
  EXPECT_EQ(o.value, Value(1.0));
  EXPECT_EQ(o.logw, 0.0);
}

TEST(Step, ResetCounter) {
  Stepper st("node main(c) = reset (x where rec init x = 0.0 and x = last x + 1.0) every c");
  std::vector<double> got;
  for (bool c : {false, false, true, false, true, true})
    got.push_back(st.step(Value(c), {}).value.as_real());
  EXPECT_EQ(got, (std::vector<double>{1.0, 2.0, 1.0, 2.0, 1.0, 1.0}));
}

TEST(Step, InitSampleOnlyAtFirstInstant) {
  Stepper st("proba main(u) = x where rec init x = sample(gaussian(0.0, 1.0)) and x = last x");
  EXPECT_EQ(st.step(Value::unit(), {0.5}).value, Value(0.0));
  StepOut o = st.step(Value::unit(), {0.9});
  EXPECT_EQ(o.value, Value(0.0));
  EXPECT_EQ(o.logw, 0.0);
}

TEST(Step, InitKeepsPreviousValue) {
  Stepper st("node main(u) = x where rec init x = 0.0 and x = u");
  EXPECT_EQ(st.step(Value(0.7), {}).value, Value(0.7));
  std::vector<Value> prev;
  init_slot_values(st.s, prev);
  ASSERT_EQ(prev.size(), 1u);
  EXPECT_EQ(prev[0], Value(0.7));
}

TEST(Step, PresentTakesOneBranchWeight) {
  Stepper st("proba main(c) = present c -> factor(0.5) else factor(0.25)");
  EXPECT_DOUBLE_EQ(st.step(Value(true), {}).logw, std::log(0.5));
  EXPECT_DOUBLE_EQ(st.step(Value(false), {}).logw, std::log(0.25));
}

TEST(Step, TrackerFirstInstant) {
  Stepper st(kTracker, "tracker");
  const double y = 0.3;
  StepOut o = st.step(Value(y), {0.5});
  EXPECT_EQ(o.value, Value(0.0));
  EXPECT_NEAR(o.logw, normal_logpdf(y, 0.0, 0.5), 1e-12);
  StepOut o2 = st.step(Value(y), {0.975});
  EXPECT_NEAR(o2.value.as_real(), 0.1 * 1.959964, 1e-5);
}

TEST(Step, StateIsNotMutated) {
  Machine m(load_program(kTracker));
  const int fn = m.func_index("tracker");
  State s = d_init(m, fn).first;
  StepOut a = d_step(m, fn, Value(0.1), s, std::vector<double>{0.3});
  StepOut b = d_step(m, fn, Value(0.1), s, std::vector<double>{0.3});
  EXPECT_EQ(a.value, b.value);
  EXPECT_TRUE(same_state(a.state, b.state));
  std::vector<Value> prev;
  init_slot_values(s, prev);
  EXPECT_TRUE(prev[0].is_nil());
}

TEST(Step, EquationOrderDoesNotMatter) {
  for (EqMode mode : {EqMode::Fixpoint, EqMode::Scheduled}) {
    EvalOptions opt;
    opt.eqs = mode;
    Stepper a(kTracker, "tracker", opt), b(kSwapped, "tracker", opt);
    for (int t = 0; t < 20; ++t) {
      const double u = seeds_for(5, 0, static_cast<std::uint64_t>(t), 0);
      StepOut oa = a.step(Value(0.1 * t), {u}), ob = b.step(Value(0.1 * t), {u});
      ASSERT_EQ(oa.value, ob.value);
      ASSERT_EQ(oa.logw, ob.logw);
    }
  }
}

TEST(Step, DeterministicProgramsHaveZeroWeight) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    muz::testing::GenOptions opt;
    opt.proba = false;
    Stepper st(muz::testing::generate_program(seed, opt).source);
    ASSERT_EQ(st.m.func(st.f).rv, 0);
    auto in = muz::testing::random_inputs(seed, 20);
    for (const auto& u : in) ASSERT_EQ(st.step(u, {}).logw, 0.0) << "seed " << seed;
  }
}

TEST(Fixpoint, SingleConstant) {
  Machine m(load_program("node main(u) = x where rec x = 1.0"));
  const int fn = m.func_index("main");
  FixOut fo = fix_env(m, fn, Value::unit(), d_init(m, fn).first, {});
  EXPECT_EQ(fo.iterations, 2);
  EXPECT_EQ(fo.env.at("x"), Value(1.0));
}

TEST(Fixpoint, SwappedTrackerConvergesInThree) {
  Machine m(load_program(kSwapped));
  const int fn = m.func_index("tracker");
  State s = d_init(m, fn).first;
  for (int t = 0; t < 3; ++t) {
    const std::vector<double> r{seeds_for(1, 0, static_cast<std::uint64_t>(t), 0)};
    FixOut fo = fix_env(m, fn, Value(0.0), s, r);
    EXPECT_EQ(fo.iterations, 3);
    double w = 0.0;
    step_in_place(m, fn, Value(0.0), s, r, w);
  }
}

TEST(Fixpoint, IterationBound) {
  FixStats stats;
  EvalOptions opt;
  opt.stats = &stats;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Stepper st(muz::testing::generate_program(seed).source, "main", opt);
    const int rv = st.m.func(st.f).rv;
    for (int t = 0; t < 10; ++t) {
      std::vector<double> r(static_cast<std::size_t>(rv));
      fill_seeds(seed, 0, static_cast<std::uint64_t>(t), r);
      st.step(Value(0.1 * t), r);
    }
  }
  EXPECT_GT(stats.runs, 0u);
  EXPECT_TRUE(stats.bound_ok);
  for (auto [iters, n] : stats.log) EXPECT_LE(iters, n + 1);
}

TEST(Fixpoint, NonProductiveEquation) {
  Stepper st("node main(u) = x where rec x = x + 1.0");
  EXPECT_EQ(error_of([&] { st.step(Value::unit(), {}); }), ErrorKind::Causality);
}

TEST(Fixpoint, CycleIsUndefined) {
  Stepper st("node main(u) = x where rec x = y and y = x");
  EXPECT_EQ(error_of([&] { st.step(Value::unit(), {}); }), ErrorKind::Causality);
}

TEST(Scheduled, CycleIsRejected) {
  EvalOptions opt;
  opt.eqs = EqMode::Scheduled;
  Stepper st("node main(u) = x where rec x = y and y = x", "main", opt);
  EXPECT_EQ(error_of([&] { st.step(Value::unit(), {}); }), ErrorKind::Schedule);
}

TEST(Scheduled, AgreesWithFixpointOnGeneratedPrograms) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::string src = muz::testing::generate_program(seed).source;
    EvalOptions fix, sch;
    sch.eqs = EqMode::Scheduled;
    Stepper a(src, "main", fix), b(src, "main", sch);
    const int rv = a.m.func(a.f).rv;
    auto in = muz::testing::random_inputs(seed, 20);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> r(static_cast<std::size_t>(rv));
      fill_seeds(seed, 0, static_cast<std::uint64_t>(t), r);
      StepOut oa = a.step(in[static_cast<std::size_t>(t)], r), ob = b.step(in[static_cast<std::size_t>(t)], r);
      ASSERT_EQ(oa.value, ob.value) << "seed " << seed << " t " << t;
      ASSERT_EQ(oa.logw, ob.logw) << "seed " << seed << " t " << t;
    }
  }
}

TEST(Runner, DetNode) {
  Machine m(load_program("node main(u) = x where rec init x = 0.0 and x = last x + u"));
  Runner run(m, m.func_index("main"));
  EXPECT_EQ(run.step(Value(1.0)), Value(1.0));
  EXPECT_EQ(run.step(Value(2.0)), Value(3.0));
}

TEST(Ops, TypeErrors) {
  Stepper st("node main(u) = u + 1.0");
  EXPECT_EQ(error_of([&] { st.step(Value(true), {}); }), ErrorKind::Type);
}

TEST(Weights, EquationWeightsAdd) {
  Stepper st("proba main(u) = (u where rec () = factor(0.5) and () = factor(0.25) and v = u)");
  EXPECT_DOUBLE_EQ(st.step(Value(1.0), {}).logw, std::log(0.5) + std::log(0.25));
}

TEST(Seeds, ConsumptionMatchesRvCount) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Program p = load_program(muz::testing::generate_program(seed).source);
    Machine m(p);
    const int fn = m.func_index("main");
    auto [s, rv] = d_init(m, fn);
    ASSERT_EQ(rv, rv_count(p, *p.find("main")->body));
    for (int t = 0; t < 5; ++t) {
      std::vector<double> r(static_cast<std::size_t>(rv));
      fill_seeds(seed, 0, static_cast<std::uint64_t>(t), r);
      TraceRecord rec;
      EvalOptions opt;
      opt.record = &rec;
      StepOut o = d_step(m, fn, Value(0.5), s, r, opt);
      ASSERT_EQ(rec.size(), static_cast<std::size_t>(rv)) << "seed " << seed;
      s = o.state;
    }
  }
}
