#include <gtest/gtest.h>

#include <functional>
#include <json.hpp>

#include "gen.hpp"
#include "muz/passes.hpp"
#include "muz/syntax.hpp"

using namespace muz;

namespace {

const char* kTracker = R"(
let x_init = 0.0
let sx = 0.1
let sy = 0.5
node f(x) = x
node g(x) = x
node controller(d) = d

proba tracker(y_obs) = x where
  rec init x = x_init
  and x = sample(gaussian(f(last x), sx))
  and y = g(x)
  and () = observe(gaussian(y, sy), y_obs)

node main(y_obs) = msg where
  rec x_dist = infer(tracker(y_obs))
  and msg = controller(x_dist)
)";

ErrorKind error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Io;
}

void collect_apps(const Expr& e, std::vector<const Expr*>& out) {
  if (e.kind == ExprKind::App) out.push_back(&e);
  for (const auto& a : e.args) collect_apps(*a, out);
  for (const auto& q : e.eqs) collect_apps(*q.expr, out);
}

}  // namespace

TEST(Parse, Tracker) {
  Program p = parse(kTracker);
  const Decl* t = p.find("tracker");
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->kind, DeclKind::Proba);
  ASSERT_EQ(t->body->kind, ExprKind::Where);
  EXPECT_EQ(t->body->args[0]->kind, ExprKind::Var);
  EXPECT_EQ(t->body->args[0]->name, "x");
  ASSERT_EQ(t->body->eqs.size(), 4u);
  EXPECT_EQ(t->body->eqs[0].kind, EqKind::Init);
  EXPECT_EQ(t->body->eqs[3].name, "");
  EXPECT_EQ(p.find("main")->kind, DeclKind::Node);
}

TEST(Parse, GlobalLet) {
  Program p = parse("let c = 1.0");
  ASSERT_EQ(p.decls.size(), 1u);
  EXPECT_EQ(p.decls[0].kind, DeclKind::Let);
  EXPECT_EQ(p.decls[0].name, "c");
  ASSERT_EQ(p.decls[0].body->kind, ExprKind::Const);
  EXPECT_EQ(p.decls[0].body->constant, Value(1.0));
}

TEST(Parse, EmptyEquationSet) {
  EXPECT_EQ(error_of([] { parse("node f(x) = x where"); }), ErrorKind::Syntax);
}

TEST(Parse, CommentsAndLocations) {
  Program p = parse("-- a comment\nlet c = 2.0 -- trailing\n\nnode f(x) = x + c");
  ASSERT_EQ(p.decls.size(), 2u);
  EXPECT_EQ(p.decls[1].loc.line, 4);
}

TEST(Parse, ErrorCarriesLocation) {
  try {
    parse("let a = 1.0\nnode f(x) = x +");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Syntax);
    EXPECT_EQ(e.loc().line, 2);
  }
}

TEST(Print, GlobalLet) {
  Program p;
  p.decls.push_back(Decl{DeclKind::Let, "c", Pattern::unit(), mk::real(1.0), {}});
  EXPECT_EQ(print(p.decls[0]), "let c = 1.0");
}

TEST(Print, TrackerRoundTrip) {
  Program p = parse(kTracker);
  EXPECT_TRUE(same_program(parse(print(p)), p));
}

TEST(Print, NestedWhereRoundTrip) {
  Program p = parse("node f(u) = (x where rec x = (y where rec y = u + 1.0)) + (z where rec z = 2.0)");
  EXPECT_TRUE(same_program(parse(print(p)), p));
}

TEST(Print, GeneratedRoundTrip) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    muz::testing::GenOptions opt;
    opt.params = seed % 3 == 0;
    Program p = parse(muz::testing::generate_program(seed, opt).source);
    ASSERT_TRUE(same_program(parse(print(p)), p)) << "seed " << seed;
  }
}

TEST(DumpAst, IsJson) {
  auto j = nlohmann::json::parse(dump_ast(parse(kTracker)));
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j.size(), 8u);
}

TEST(Uniquify, DistinctInstances) {
  Program p = uniquify(parse("node f(x) = x\nnode main(u) = f(1.0) + f(2.0)"));
  std::vector<const Expr*> apps;
  collect_apps(*p.find("main")->body, apps);
  ASSERT_EQ(apps.size(), 2u);
  EXPECT_FALSE(apps[0]->inst.empty());
  EXPECT_NE(apps[0]->inst, apps[1]->inst);
}

TEST(Uniquify, NoAppsUnchanged) {
  Program p = parse("let k = 2.0\nnode main(u) = (x where rec x = u * k)");
  EXPECT_TRUE(same_program(uniquify(p), p));
}

TEST(Uniquify, ShadowedNamesBecomeDistinct) {
  Program p = uniquify(parse("node main(u) = (x where rec x = (x where rec x = u) + 1.0)"));
  const Expr& outer = *p.find("main")->body;
  ASSERT_EQ(outer.kind, ExprKind::Where);
  const Expr& rhs = *outer.eqs[0].expr;
  const Expr& inner = *rhs.args[0];
  ASSERT_EQ(inner.kind, ExprKind::Where);
  EXPECT_NE(inner.eqs[0].name, outer.eqs[0].name);
  EXPECT_EQ(inner.args[0]->name, inner.eqs[0].name);
  EXPECT_EQ(outer.args[0]->name, outer.eqs[0].name);
}

TEST(Uniquify, ProgramsStayRunnableAfterRename) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Program p = load_program(muz::testing::generate_program(seed).source);
    EXPECT_NO_THROW(kind_check(uniquify(p))) << "seed " << seed;
  }
}

TEST(Kinds, Tracker) {
  KindEnv k = kind_check(parse(kTracker));
  EXPECT_EQ(k.at("tracker"), Kind::Proba);
  EXPECT_EQ(k.at("main"), Kind::Det);
}

TEST(Kinds, SampleInNode) {
  EXPECT_EQ(error_of([] { load_program("node f(x) = sample(gaussian(x, 1.0))"); }), ErrorKind::Kind);
}

TEST(Kinds, ProbaCallInNode) {
  EXPECT_EQ(error_of([] { load_program("proba p(x) = sample(gaussian(x, 1.0))\nnode f(x) = p(x)"); }),
            ErrorKind::Kind);
}

TEST(Kinds, FactorOfSample) {
  EXPECT_EQ(error_of([] { load_program("proba f(x) = factor(sample(uniform(0.0, 1.0)))"); }), ErrorKind::Kind);
}

TEST(Kinds, InferOfDet) {
  EXPECT_NO_THROW(load_program("proba p(x) = sample(gaussian(x, 1.0))\nnode f(x) = infer(p(x))"));
}

TEST(Kinds, UnboundVariable) {
  EXPECT_EQ(error_of([] { load_program("node f(x) = y"); }), ErrorKind::UnboundVariable);
}

TEST(Kinds, GeneratedDetProgramsAreDet) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    muz::testing::GenOptions opt;
    opt.proba = false;
    KindEnv k = kind_check(load_program(muz::testing::generate_program(seed, opt).source));
    EXPECT_EQ(k.at("main"), Kind::Det);
  }
}

TEST(RvCount, Tracker) {
  Program p = load_program(kTracker);
  EXPECT_EQ(rv_count(p, *p.find("tracker")->body), 1);
}

TEST(RvCount, Deterministic) {
  Program p = load_program(kTracker);
  EXPECT_EQ(rv_count(p, *p.find("main")->body), 0);
  EXPECT_EQ(rv_count(p, *parse_expr("1.0 + 2.0")), 0);
}

TEST(RvCount, CallOfSample) {
  Program p = load_program(
      "proba f(x) = sample(gaussian(x, 1.0)) + sample(gaussian(x, 2.0))\n"
      "proba main(u) = f(sample(gaussian(u, 1.0)))");
  EXPECT_EQ(rv_count(p, *p.find("main")->body), 3);
}

TEST(RvCount, PresentCountsBothBranches) {
  Program p = load_program(
      "proba main(u) = present (u > 0.0) -> sample(gaussian(u, 1.0)) else sample(uniform(0.0, 1.0)) + "
      "sample(uniform(0.0, 1.0))");
  EXPECT_EQ(rv_count(p, *p.find("main")->body), 3);
}
