#include "muz/passes.hpp"

namespace muz {

namespace {

Kind join(Kind a, Kind b) { return (a == Kind::Proba || b == Kind::Proba) ? Kind::Proba : Kind::Det; }

class Checker {
 public:
  Checker(const Program& p, const KindEnv& kinds) : prog_(p), kinds_(kinds) {}

  Kind run(const Expr& e, const Decl* where) {
    decl_ = where;
    return kind(e);
  }

 private:
  [[noreturn]] void error(const std::string& what, const Expr& e) const {
    std::string in = decl_ ? " in '" + decl_->name + "'" : "";
    fail(ErrorKind::Kind, what + in, e.loc);
  }

  bool in_det() const { return decl_ && decl_->kind != DeclKind::Proba; }

  Kind callee(const std::string& f, const Expr& e) const {
    auto it = kinds_.find(f);
    if (it == kinds_.end()) error("unknown node '" + f + "'", e);
    return it->second;
  }

  Kind kind(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Const:
      case ExprKind::Var:
      case ExprKind::Last: return Kind::Det;
      case ExprKind::Sample:
      case ExprKind::Factor: {
        const char* what = e.kind == ExprKind::Sample ? "sample" : "factor";
        if (in_det()) error(std::string(what) + " in a deterministic declaration", e);
        if (kind(*e.args[0]) != Kind::Det) error(std::string("probabilistic argument of ") + what, e);
        return Kind::Proba;
      }
      case ExprKind::App: {
        Kind kf = callee(e.name, e);
        Kind ka = kind(*e.args[0]);
        if (kf == Kind::Proba && in_det()) error("call of probabilistic node '" + e.name + "'", e);
        return join(kf, ka);
      }
      case ExprKind::Infer: {
        if (!in_det()) error("infer outside a deterministic node", e);
        if (decl_->kind == DeclKind::Let) error("infer in a global definition", e);
        const Expr& a = *e.args[0];
        if (a.kind != ExprKind::App || callee(a.name, a) != Kind::Proba)
          error("infer expects a call of a probabilistic node", e);
        if (kind(*a.args[0]) != Kind::Det) error("probabilistic argument of infer", e);
        return Kind::Det;
      }
      case ExprKind::ApfInfer: {
        if (!in_det()) error("APF.infer outside a deterministic node", e);
        if (decl_->kind == DeclKind::Let) error("APF.infer in a global definition", e);
        if (callee(e.name, e) != Kind::Proba) error("APF.infer expects a probabilistic model", e);
        if (kind(*e.args[0]) != Kind::Det || kind(*e.args[1]) != Kind::Det)
          error("probabilistic argument of APF.infer", e);
        return Kind::Det;
      }
      case ExprKind::Present: {
        if (kind(*e.args[0]) != Kind::Det) error("probabilistic condition of present", e);
        return join(kind(*e.args[1]), kind(*e.args[2]));
      }
      case ExprKind::Reset: {
        if (kind(*e.args[1]) != Kind::Det) error("probabilistic condition of reset", e);
        return kind(*e.args[0]);
      }
      case ExprKind::Where: {
        Kind k = kind(*e.args[0]);
        for (const auto& q : e.eqs) k = join(k, kind(*q.expr));
        return k;
      }
      default: {
        Kind k = Kind::Det;
        for (const auto& a : e.args) k = join(k, kind(*a));
        return k;
      }
    }
  }

  const Program& prog_;
  const KindEnv& kinds_;
  const Decl* decl_ = nullptr;
};

int rv_rec(const Program& p, const Expr& e, std::map<std::string, int>& memo);

int body_rv(const Program& p, const std::string& f, std::map<std::string, int>& memo) {
  auto it = memo.find(f);
  if (it != memo.end()) return it->second;
  const Decl* d = p.find(f);
  if (!d) fail(ErrorKind::UnboundVariable, "unknown node '" + f + "'");
  int n = rv_rec(p, *d->body, memo);
  memo[f] = n;
  return n;
}

int rv_rec(const Program& p, const Expr& e, std::map<std::string, int>& memo) {
  int n = 0;
  switch (e.kind) {
    case ExprKind::Sample: n += sample_width(p, *e.args[0]); break;
    case ExprKind::App: n += body_rv(p, e.name, memo); break;
    case ExprKind::Infer:
    case ExprKind::ApfInfer: return 0;
    default: break;
  }
  for (const auto& a : e.args) n += rv_rec(p, *a, memo);
  for (const auto& q : e.eqs) n += rv_rec(p, *q.expr, memo);
  return n;
}

}  // namespace

KindEnv kind_check(const Program& p) {
  KindEnv kinds;
  for (const auto& d : p.decls) {
    Kind declared = d.kind == DeclKind::Proba ? Kind::Proba : Kind::Det;
    Checker c(p, kinds);
    Kind k = c.run(*d.body, &d);
    if (declared == Kind::Det && k != Kind::Det)
      fail(ErrorKind::Kind, "probabilistic body in deterministic declaration '" + d.name + "'", d.loc);
    kinds[d.name] = declared;
  }
  return kinds;
}

Kind expr_kind(const Program& p, const KindEnv& kinds, const Expr& e) {
  // A free-standing expression is checked as the body of a probabilistic node.
  Decl host{DeclKind::Proba, "<expr>", Pattern::unit(), nullptr, {}};
  Checker c(p, kinds);
  return c.run(e, &host);
}

int rv_count(const Program& p, const Expr& e) {
  std::map<std::string, int> memo;
  return rv_rec(p, e, memo);
}

int sample_width(const Program& p, const Expr& d) {
  if (d.kind == ExprKind::Pair) return sample_width(p, *d.args[0]) + sample_width(p, *d.args[1]);
  if (d.kind == ExprKind::Var) {
    const Decl* g = p.find(d.name);
    if (g && g->kind == DeclKind::Let) return sample_width(p, *g->body);
  }
  return 1;
}

}  // namespace muz
