#include <map>
#include <set>

#include "muz/passes.hpp"
#include "muz/syntax.hpp"

namespace muz {

namespace {

void names_in(const Expr& e, std::set<std::string>& out) {
  if (!e.name.empty()) out.insert(e.name);
  if (!e.inst.empty()) out.insert(e.inst);
  for (const auto& a : e.args) names_in(*a, out);
  for (const auto& q : e.eqs) {
    if (!q.name.empty()) out.insert(q.name);
    names_in(*q.expr, out);
  }
}

struct Binding {
  std::string unique;
  bool initialized = false;
};

class Renamer {
 public:
  Renamer(const Program& p, std::set<std::string> taken) : prog_(p), taken_(std::move(taken)) {}

  void set_visible(std::size_t n_decls) {
    globals_.clear();
    funcs_.clear();
    for (std::size_t i = 0; i < n_decls; ++i) {
      const Decl& d = prog_.decls[i];
      (d.kind == DeclKind::Let ? globals_ : funcs_).insert(d.name);
    }
  }

  void start_decl() { used_.clear(); }

  std::string bind_name(const std::string& x) {
    std::string u = x;
    if (used_.count(u) || globals_.count(u)) {
      for (int k = 1;; ++k) {
        u = x + "_" + std::to_string(k);
        if (!used_.count(u) && !globals_.count(u) && !taken_.count(u)) break;
      }
    }
    used_.insert(u);
    taken_.insert(u);
    return u;
  }

  Pattern bind_pattern(const Pattern& p, std::map<std::string, Binding>& scope) {
    switch (p.kind) {
      case Pattern::Kind::Unit: return p;
      case Pattern::Kind::Name: {
        if (scope.count(p.name)) fail(ErrorKind::Definition, "parameter '" + p.name + "' bound twice");
        std::string u = bind_name(p.name);
        scope[p.name] = Binding{u, false};
        return Pattern::var(u);
      }
      case Pattern::Kind::Pair: {
        Pattern a = bind_pattern(p.items[0], scope);
        Pattern b = bind_pattern(p.items[1], scope);
        return Pattern::pair(std::move(a), std::move(b));
      }
    }
    return p;
  }

  std::string fresh_instance(const std::string& f) {
    for (;;) {
      std::string id = f + "__" + std::to_string(++counter_);
      if (!taken_.count(id)) {
        taken_.insert(id);
        return id;
      }
    }
  }

  ExprPtr expr(const ExprPtr& ep, const std::map<std::string, Binding>& scope) {
    const Expr& e = *ep;
    Expr out = e;
    switch (e.kind) {
      case ExprKind::Var: {
        auto it = scope.find(e.name);
        if (it != scope.end()) {
          out.name = it->second.unique;
        } else if (!globals_.count(e.name)) {
          fail(ErrorKind::UnboundVariable, "unbound variable '" + e.name + "'", e.loc);
        }
        break;
      }
      case ExprKind::Last: {
        auto it = scope.find(e.name);
        if (it == scope.end()) fail(ErrorKind::UnboundVariable, "unbound variable '" + e.name + "'", e.loc);
        if (!it->second.initialized)
          fail(ErrorKind::UnboundVariable, "'last " + e.name + "' on a variable without init", e.loc);
        out.name = it->second.unique;
        break;
      }
      case ExprKind::App:
        if (!funcs_.count(e.name)) fail(ErrorKind::UnboundVariable, "unknown node '" + e.name + "'", e.loc);
        out.inst = fresh_instance(e.name);
        break;
      case ExprKind::ApfInfer:
        if (!funcs_.count(e.name)) fail(ErrorKind::UnboundVariable, "unknown model '" + e.name + "'", e.loc);
        break;
      case ExprKind::Where: {
        std::map<std::string, Binding> inner = scope;
        std::set<std::string> defined, inited;
        for (const Eq& q : e.eqs) {
          if (q.name.empty()) continue;
          if (q.kind == EqKind::Def) {
            if (!defined.insert(q.name).second)
              fail(ErrorKind::Definition, "variable '" + q.name + "' defined twice", q.loc);
          } else if (!inited.insert(q.name).second) {
            fail(ErrorKind::Definition, "variable '" + q.name + "' initialized twice", q.loc);
          }
        }
        for (const Eq& q : e.eqs)
          if (q.kind == EqKind::Init && (q.name.empty() || !defined.count(q.name)))
            fail(ErrorKind::Definition, "init of '" + q.name + "' without a defining equation", q.loc);
        for (const std::string& x : defined) inner[x] = Binding{bind_name(x), inited.count(x) > 0};
        for (Eq& q : out.eqs) {
          if (!q.name.empty()) q.name = inner.at(q.name).unique;
          q.expr = expr(q.expr, inner);
        }
        out.args[0] = expr(e.args[0], inner);
        return std::make_shared<Expr>(std::move(out));
      }
      default: break;
    }
    for (auto& a : out.args) a = expr(a, scope);
    return std::make_shared<Expr>(std::move(out));
  }

 private:
  const Program& prog_;
  std::set<std::string> taken_;
  std::set<std::string> used_;
  std::set<std::string> globals_;
  std::set<std::string> funcs_;
  int counter_ = 0;
};

}  // namespace

std::set<std::string> all_names(const Program& p) {
  std::set<std::string> out;
  for (const auto& d : p.decls) {
    out.insert(d.name);
    for (const auto& n : pattern_names(d.param)) out.insert(n);
    names_in(*d.body, out);
  }
  return out;
}

Program uniquify(const Program& p) {
  std::set<std::string> seen;
  for (const auto& d : p.decls) {
    if (!seen.insert(d.name).second) fail(ErrorKind::Definition, "duplicate declaration '" + d.name + "'", d.loc);
    if (is_intrinsic(d.name)) fail(ErrorKind::Definition, "'" + d.name + "' is reserved", d.loc);
  }
  Renamer r(p, all_names(p));
  Program out;
  for (std::size_t i = 0; i < p.decls.size(); ++i) {
    const Decl& d = p.decls[i];
    r.set_visible(i);
    r.start_decl();
    std::map<std::string, Binding> scope;
    Decl nd = d;
    if (d.kind != DeclKind::Let) nd.param = r.bind_pattern(d.param, scope);
    nd.body = r.expr(d.body, scope);
    out.decls.push_back(std::move(nd));
  }
  return out;
}

ExprPtr uniquify_expr(const Program& p, const ExprPtr& e, const std::vector<std::string>& inputs) {
  std::set<std::string> taken = all_names(p);
  names_in(*e, taken);
  Renamer r(p, taken);
  r.set_visible(p.decls.size());
  r.start_decl();
  std::map<std::string, Binding> scope;
  for (const auto& x : inputs) scope[x] = Binding{r.bind_name(x), false};
  for (const auto& x : inputs)
    if (scope[x].unique != x) fail(ErrorKind::Definition, "input '" + x + "' clashes with a global");
  return r.expr(e, scope);
}

Program load_program(std::string_view src) {
  Program p = uniquify(parse(src));
  kind_check(p);
  return p;
}

}  // namespace muz
