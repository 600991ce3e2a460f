#include <cmath>

#include "muz/syntax.hpp"

namespace muz {

namespace {

// Precedence of the printed form; a node needs parentheses when its
// precedence is below the context's.
enum Prec { kTop = 0, kDelim = 1, kCmp = 2, kAdd = 3, kMul = 4, kUnary = 5, kAtom = 6 };

int prec_of(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Where: return kTop;
    case ExprKind::Present:
    case ExprKind::Reset: return kDelim;
    case ExprKind::Op:
      switch (e.op) {
        case OpCode::If: return kDelim;
        case OpCode::Eq:
        case OpCode::Lt:
        case OpCode::Gt: return kCmp;
        case OpCode::Add:
        case OpCode::Sub: return kAdd;
        case OpCode::Mul:
        case OpCode::Div: return kMul;
        case OpCode::Neg: return kUnary;
        default: return kAtom;
      }
    case ExprKind::Const:
      if (e.constant.is_real() && std::signbit(e.constant.as_real())) return kUnary;
      return kAtom;
    default: return kAtom;
  }
}

class Printer {
 public:
  std::string expr(const Expr& e, int ctx, int indent) {
    std::string s = raw(e, indent);
    if (prec_of(e) < ctx) return "(" + s + ")";
    return s;
  }

  std::string pattern(const Pattern& p) {
    switch (p.kind) {
      case Pattern::Kind::Name: return p.name;
      case Pattern::Kind::Unit: return "()";
      case Pattern::Kind::Pair: {
        std::string s = "(" + pattern(p.items[0]);
        const Pattern* r = &p.items[1];
        while (r->kind == Pattern::Kind::Pair) {
          s += ", " + pattern(r->items[0]);
          r = &r->items[1];
        }
        return s + ", " + pattern(*r) + ")";
      }
    }
    return "()";
  }

  std::string param(const Pattern& p) {
    if (p.kind == Pattern::Kind::Name) return "(" + p.name + ")";
    return pattern(p);
  }

 private:
  std::string tuple_items(const Expr& e, int indent) {
    std::string s = expr(*e.args[0], kDelim, indent);
    const Expr* r = e.args[1].get();
    while (r->kind == ExprKind::Pair) {
      s += ", " + expr(*r->args[0], kDelim, indent);
      r = r->args[1].get();
    }
    return s + ", " + expr(*r, kDelim, indent);
  }

  std::string call(const std::string& f, const std::vector<ExprPtr>& args, int indent) {
    std::string s = f + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) s += ", ";
      s += expr(*args[i], kDelim, indent);
    }
    return s + ")";
  }

  std::string raw(const Expr& e, int indent) {
    switch (e.kind) {
      case ExprKind::Const: return e.constant.to_string();
      case ExprKind::Var: return e.name;
      case ExprKind::Last: return "last " + e.name;
      case ExprKind::Pair: return "(" + tuple_items(e, indent) + ")";
      case ExprKind::App: {
        const Expr& a = *e.args[0];
        if (a.kind == ExprKind::Pair) return e.name + "(" + tuple_items(a, indent) + ")";
        if (a.kind == ExprKind::Const && a.constant.is_unit()) return e.name + "()";
        return e.name + "(" + expr(a, kDelim, indent) + ")";
      }
      case ExprKind::Sample: return "sample(" + expr(*e.args[0], kDelim, indent) + ")";
      case ExprKind::Factor: {
        const Expr& a = *e.args[0];
        if (a.kind == ExprKind::Op && a.op == OpCode::Pdf) return call("observe", a.args, indent);
        return "factor(" + expr(a, kDelim, indent) + ")";
      }
      case ExprKind::Infer: return "infer(" + expr(*e.args[0], kDelim, indent) + ")";
      case ExprKind::ApfInfer:
        return "APF.infer(" + e.name + ", " + expr(*e.args[0], kDelim, indent) + ", " +
               expr(*e.args[1], kDelim, indent) + ")";
      case ExprKind::Present:
        return "present " + expr(*e.args[0], kDelim, indent) + " -> " + expr(*e.args[1], kDelim, indent) +
               " else " + expr(*e.args[2], kDelim, indent);
      case ExprKind::Reset:
        return "reset " + expr(*e.args[0], kDelim, indent) + " every " + expr(*e.args[1], kDelim, indent);
      case ExprKind::Where: {
        std::string pad(static_cast<std::size_t>(indent + 2), ' ');
        std::string s = expr(*e.args[0], kCmp, indent) + " where";
        for (std::size_t i = 0; i < e.eqs.size(); ++i) {
          const Eq& q = e.eqs[i];
          s += "\n" + pad + (i == 0 ? "rec " : "and ");
          if (q.kind == EqKind::Init) s += "init ";
          s += q.name.empty() ? "()" : q.name;
          s += " = " + expr(*q.expr, kDelim, indent + 2);
        }
        return s;
      }
      case ExprKind::Op: return op(e, indent);
    }
    return "?";
  }

  std::string op(const Expr& e, int indent) {
    switch (e.op) {
      case OpCode::Add:
      case OpCode::Sub:
      case OpCode::Mul:
      case OpCode::Div: {
        int p = prec_of(e);
        return expr(*e.args[0], p, indent) + " " + op_name(e.op) + " " + expr(*e.args[1], p + 1, indent);
      }
      case OpCode::Eq:
      case OpCode::Lt:
      case OpCode::Gt:
        return expr(*e.args[0], kCmp + 1, indent) + " " + op_name(e.op) + " " + expr(*e.args[1], kCmp + 1, indent);
      case OpCode::Neg: {
        const Expr& a = *e.args[0];
        std::string s = expr(a, kUnary, indent);
        if (s[0] == '-' || (a.kind == ExprKind::Const && a.constant.is_real())) s = "(" + s + ")";
        return "-" + s;
      }
      case OpCode::If:
        return "if " + expr(*e.args[0], kDelim, indent) + " then " + expr(*e.args[1], kDelim, indent) + " else " +
               expr(*e.args[2], kDelim, indent);
      case OpCode::MkVec: {
        std::string s = "[";
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          if (i) s += "; ";
          s += expr(*e.args[i], kDelim, indent);
        }
        return s + "]";
      }
      default: return call(op_name(e.op), e.args, indent);
    }
  }
};

}  // namespace

std::string print(const Expr& e) { return Printer().expr(e, kTop, 0); }

std::string print(const Pattern& p) { return Printer().pattern(p); }

std::string print(const Decl& d) {
  Printer pr;
  switch (d.kind) {
    case DeclKind::Let: return "let " + d.name + " = " + pr.expr(*d.body, kTop, 0);
    case DeclKind::Node: return "node " + d.name + pr.param(d.param) + " = " + pr.expr(*d.body, kTop, 0);
    case DeclKind::Proba: return "proba " + d.name + pr.param(d.param) + " = " + pr.expr(*d.body, kTop, 0);
  }
  return {};
}

std::string print(const Program& p) {
  std::string s;
  for (const auto& d : p.decls) s += print(d) + "\n";
  return s;
}

}  // namespace muz
