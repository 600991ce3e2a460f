#include "muz/ast.hpp"

namespace muz {

const char* op_name(OpCode op) {
  switch (op) {
    case OpCode::Add: return "+";
    case OpCode::Sub: return "-";
    case OpCode::Mul: return "*";
    case OpCode::Div: return "/";
    case OpCode::Eq: return "=";
    case OpCode::Lt: return "<";
    case OpCode::Gt: return ">";
    case OpCode::Neg: return "~-";
    case OpCode::If: return "if";
    case OpCode::Gaussian: return "gaussian";
    case OpCode::Uniform: return "uniform";
    case OpCode::Bernoulli: return "bernoulli";
    case OpCode::Pdf: return "pdf";
    case OpCode::Fst: return "fst";
    case OpCode::Snd: return "snd";
    case OpCode::Exp: return "exp";
    case OpCode::Log: return "log";
    case OpCode::Sqrt: return "sqrt";
    case OpCode::Abs: return "abs";
    case OpCode::Min: return "min";
    case OpCode::Max: return "max";
    case OpCode::MkVec: return "vec";
  }
  return "?";
}

int op_arity(OpCode op) {
  switch (op) {
    case OpCode::Neg:
    case OpCode::Bernoulli:
    case OpCode::Fst:
    case OpCode::Snd:
    case OpCode::Exp:
    case OpCode::Log:
    case OpCode::Sqrt:
    case OpCode::Abs: return 1;
    case OpCode::If: return 3;
    case OpCode::MkVec: return -1;
    default: return 2;
  }
}

const Decl* Program::find(const std::string& name) const {
  for (const auto& d : decls)
    if (d.name == name) return &d;
  return nullptr;
}

int Program::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < decls.size(); ++i)
    if (decls[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace mk {

static ExprPtr make(Expr e) { return std::make_shared<Expr>(std::move(e)); }

ExprPtr real(double d) {
  Expr e;
  e.kind = ExprKind::Const;
  e.constant = Value(d);
  return make(std::move(e));
}
ExprPtr boolean(bool b) {
  Expr e;
  e.kind = ExprKind::Const;
  e.constant = Value(b);
  return make(std::move(e));
}
ExprPtr unit() {
  Expr e;
  e.kind = ExprKind::Const;
  e.constant = Value::unit();
  return make(std::move(e));
}
ExprPtr var(std::string x) {
  Expr e;
  e.kind = ExprKind::Var;
  e.name = std::move(x);
  return make(std::move(e));
}
ExprPtr last(std::string x) {
  Expr e;
  e.kind = ExprKind::Last;
  e.name = std::move(x);
  return make(std::move(e));
}
ExprPtr pair(ExprPtr a, ExprPtr b) {
  Expr e;
  e.kind = ExprKind::Pair;
  e.args = {std::move(a), std::move(b)};
  return make(std::move(e));
}
ExprPtr op(OpCode o, std::vector<ExprPtr> args) {
  Expr e;
  e.kind = ExprKind::Op;
  e.op = o;
  e.args = std::move(args);
  return make(std::move(e));
}
ExprPtr app(std::string f, ExprPtr arg, std::string inst) {
  Expr e;
  e.kind = ExprKind::App;
  e.name = std::move(f);
  e.inst = std::move(inst);
  e.args = {std::move(arg)};
  return make(std::move(e));
}
ExprPtr where(ExprPtr body, std::vector<Eq> eqs) {
  Expr e;
  e.kind = ExprKind::Where;
  e.args = {std::move(body)};
  e.eqs = std::move(eqs);
  return make(std::move(e));
}
ExprPtr present(ExprPtr c, ExprPtr a, ExprPtr b) {
  Expr e;
  e.kind = ExprKind::Present;
  e.args = {std::move(c), std::move(a), std::move(b)};
  return make(std::move(e));
}
ExprPtr reset(ExprPtr body, ExprPtr c) {
  Expr e;
  e.kind = ExprKind::Reset;
  e.args = {std::move(body), std::move(c)};
  return make(std::move(e));
}
ExprPtr sample(ExprPtr d) {
  Expr e;
  e.kind = ExprKind::Sample;
  e.args = {std::move(d)};
  return make(std::move(e));
}
ExprPtr factor(ExprPtr w) {
  Expr e;
  e.kind = ExprKind::Factor;
  e.args = {std::move(w)};
  return make(std::move(e));
}
ExprPtr observe(ExprPtr d, ExprPtr x) { return factor(op(OpCode::Pdf, {std::move(d), std::move(x)})); }
ExprPtr infer(ExprPtr a) {
  Expr e;
  e.kind = ExprKind::Infer;
  e.args = {std::move(a)};
  return make(std::move(e));
}
ExprPtr apf_infer(std::string model, ExprPtr prior, ExprPtr arg) {
  Expr e;
  e.kind = ExprKind::ApfInfer;
  e.name = std::move(model);
  e.args = {std::move(prior), std::move(arg)};
  return make(std::move(e));
}
Eq def(std::string x, ExprPtr e) { return Eq{EqKind::Def, std::move(x), std::move(e), {}}; }
Eq init(std::string x, ExprPtr e) { return Eq{EqKind::Init, std::move(x), std::move(e), {}}; }

}  // namespace mk

bool same_pattern(const Pattern& a, const Pattern& b) {
  if (a.kind != b.kind || a.name != b.name || a.items.size() != b.items.size()) return false;
  for (std::size_t i = 0; i < a.items.size(); ++i)
    if (!same_pattern(a.items[i], b.items[i])) return false;
  return true;
}

bool same_expr(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.name != b.name || a.args.size() != b.args.size() ||
      a.eqs.size() != b.eqs.size())
    return false;
  if (a.kind == ExprKind::Const && !identical(a.constant, b.constant)) return false;
  if (a.kind == ExprKind::Op && a.op != b.op) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same_expr(*a.args[i], *b.args[i])) return false;
  for (std::size_t i = 0; i < a.eqs.size(); ++i) {
    const Eq& x = a.eqs[i];
    const Eq& y = b.eqs[i];
    if (x.kind != y.kind || x.name != y.name || !same_expr(*x.expr, *y.expr)) return false;
  }
  return true;
}

bool same_program(const Program& a, const Program& b) {
  if (a.decls.size() != b.decls.size()) return false;
  for (std::size_t i = 0; i < a.decls.size(); ++i) {
    const Decl& x = a.decls[i];
    const Decl& y = b.decls[i];
    if (x.kind != y.kind || x.name != y.name) return false;
    if (x.kind != DeclKind::Let && !same_pattern(x.param, y.param)) return false;
    if (!same_expr(*x.body, *y.body)) return false;
  }
  return true;
}

static void collect(const Pattern& p, std::vector<std::string>& out) {
  if (p.kind == Pattern::Kind::Name) out.push_back(p.name);
  for (const auto& q : p.items) collect(q, out);
}

std::vector<std::string> pattern_names(const Pattern& p) {
  std::vector<std::string> out;
  collect(p, out);
  return out;
}

Pattern pattern_of(const std::vector<std::string>& names) {
  if (names.empty()) return Pattern::unit();
  Pattern p = Pattern::var(names.back());
  for (std::size_t i = names.size() - 1; i-- > 0;) p = Pattern::pair(Pattern::var(names[i]), std::move(p));
  return p;
}

}  // namespace muz
