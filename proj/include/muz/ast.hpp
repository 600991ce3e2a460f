#pragma once

#include <memory>
#include <string>
#include <vector>

#include "muz/error.hpp"
#include "muz/value.hpp"

namespace muz {

enum class OpCode {
  Add, Sub, Mul, Div, Eq, Lt, Gt, Neg,
  If,
  Gaussian, Uniform, Bernoulli, Pdf,
  Fst, Snd, Exp, Log, Sqrt, Abs, Min, Max,
  MkVec,
};

const char* op_name(OpCode op);
int op_arity(OpCode op);  // -1 for variadic

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class EqKind { Def, Init };

struct Eq {
  EqKind kind;
  std::string name;  // empty for the unit pattern `() = e`
  ExprPtr expr;
  SrcLoc loc;
};

enum class ExprKind {
  Const, Var, Pair, Op, Last, App, Where, Present, Reset, Sample, Factor, Infer, ApfInfer,
};

// Children layout per kind:
//   Pair: a, b      Op: args       App: arg (name = callee, inst = instance id)
//   Where: body + eqs             Present: cond, then, else    Reset: body, cond
//   Sample/Factor/Infer: arg      ApfInfer: prior, arg (name = model)
struct Expr {
  ExprKind kind = ExprKind::Const;
  Value constant;
  std::string name;
  std::string inst;
  OpCode op = OpCode::Add;
  std::vector<ExprPtr> args;
  std::vector<Eq> eqs;
  SrcLoc loc;
};

struct Pattern {
  enum class Kind { Name, Unit, Pair } kind = Kind::Unit;
  std::string name;
  std::vector<Pattern> items;  // two items for Pair

  static Pattern var(std::string n) { return Pattern{Kind::Name, std::move(n), {}}; }
  static Pattern unit() { return Pattern{Kind::Unit, {}, {}}; }
  static Pattern pair(Pattern a, Pattern b) { return Pattern{Kind::Pair, {}, {std::move(a), std::move(b)}}; }
};

enum class DeclKind { Let, Node, Proba };

struct Decl {
  DeclKind kind;
  std::string name;
  Pattern param;  // unused for Let
  ExprPtr body;
  SrcLoc loc;
};

struct Program {
  std::vector<Decl> decls;

  const Decl* find(const std::string& name) const;
  int index_of(const std::string& name) const;
};

// Smart constructors.
namespace mk {
ExprPtr real(double d);
ExprPtr boolean(bool b);
ExprPtr unit();
ExprPtr var(std::string x);
ExprPtr last(std::string x);
ExprPtr pair(ExprPtr a, ExprPtr b);
ExprPtr op(OpCode op, std::vector<ExprPtr> args);
ExprPtr app(std::string f, ExprPtr arg, std::string inst = {});
ExprPtr where(ExprPtr body, std::vector<Eq> eqs);
ExprPtr present(ExprPtr c, ExprPtr a, ExprPtr b);
ExprPtr reset(ExprPtr body, ExprPtr c);
ExprPtr sample(ExprPtr d);
ExprPtr factor(ExprPtr w);
ExprPtr observe(ExprPtr d, ExprPtr x);
ExprPtr infer(ExprPtr app);
ExprPtr apf_infer(std::string model, ExprPtr prior, ExprPtr arg);
Eq def(std::string x, ExprPtr e);
Eq init(std::string x, ExprPtr e);
}  // namespace mk

// Structural equality. Instance ids and source locations are ignored.
bool same_expr(const Expr& a, const Expr& b);
bool same_pattern(const Pattern& a, const Pattern& b);
bool same_program(const Program& a, const Program& b);

std::vector<std::string> pattern_names(const Pattern& p);
Pattern pattern_of(const std::vector<std::string>& names);  // right-nested tuple, unit if empty

}  // namespace muz
