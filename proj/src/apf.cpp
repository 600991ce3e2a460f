#include "muz/apf.hpp"

#include <json.hpp>

#include "muz/passes.hpp"
#include "muz/syntax.hpp"

namespace muz {

namespace {

using json = nlohmann::ordered_json;

bool is_last_of(const Expr& e, const std::string& x) { return e.kind == ExprKind::Last && e.name == x; }

bool has_hold(const std::vector<Eq>& eqs, const std::string& x) {
  for (const auto& q : eqs)
    if (q.kind == EqKind::Def && q.name == x && is_last_of(*q.expr, x)) return true;
  return false;
}

const Eq* constant_sample_init(const std::vector<Eq>& eqs, const Eq& q, const ConstSet& d) {
  if (q.kind != EqKind::Init || q.expr->kind != ExprKind::Sample) return nullptr;
  if (!d.count(q.name) || !has_hold(eqs, q.name)) return nullptr;
  return &q;
}

class Analyzer {
 public:
  Analyzer(const Program& p, const ParamEnv& phi, const ConstSet& globals) : prog_(p), phi_(phi), globals_(globals) {}

  void collect(const Expr& e, const ConstSet& c, ParamMap& out) const {
    switch (e.kind) {
      case ExprKind::Const:
      case ExprKind::Var:
      case ExprKind::Last:
      case ExprKind::Infer:
      case ExprKind::ApfInfer: return;
      case ExprKind::Present: collect(*e.args[0], c, out); return;
      case ExprKind::Reset: collect(*e.args[1], c, out); return;
      case ExprKind::App: {
        collect(*e.args[0], c, out);
        if (has_params(e.name)) out.emplace_back(e.inst, mk::var(prior_name(e.name)));
        return;
      }
      case ExprKind::Where: {
        ConstSet inner = c;
        ConstSet d = const_eqs(c, e.eqs);
        inner.insert(d.begin(), d.end());
        collect(*e.args[0], inner, out);
        for (const auto& q : e.eqs) {
          if (constant_sample_init(e.eqs, q, d)) {
            const Expr& prior = *q.expr->args[0];
            if (!const_check(globals_, prior))
              fail(ErrorKind::NonConstantPrior, "prior of '" + q.name + "' is not constant: " + print(prior), q.loc);
            out.emplace_back(q.name, q.expr->args[0]);
            continue;
          }
          if (q.kind == EqKind::Def && is_last_of(*q.expr, q.name) && is_param(e.eqs, q.name, d)) continue;
          collect(*q.expr, inner, out);
        }
        return;
      }
      default:
        for (const auto& a : e.args) collect(*a, c, out);
        return;
    }
  }

  bool has_params(const std::string& f) const {
    const Decl* d = prog_.find(f);
    if (!d || d->kind != DeclKind::Proba) return false;
    auto it = phi_.find(f);
    return it != phi_.end() && !it->second.empty();
  }

 private:
  static bool is_param(const std::vector<Eq>& eqs, const std::string& x, const ConstSet& d) {
    for (const auto& q : eqs)
      if (q.name == x && constant_sample_init(eqs, q, d)) return true;
    return false;
  }

  const Program& prog_;
  const ParamEnv& phi_;
  const ConstSet& globals_;
};

bool in_dom(const ParamMap& phi, const std::string& x) {
  for (const auto& [k, v] : phi)
    if (k == x) return true;
  return false;
}

ExprPtr tuple_of(const std::vector<ExprPtr>& xs) {
  if (xs.empty()) return mk::unit();
  ExprPtr acc = xs.back();
  for (std::size_t i = xs.size() - 1; i-- > 0;) acc = mk::pair(xs[i], acc);
  return acc;
}

struct NodeSeeds {
  std::vector<int> model;  // compiled model seed -> source offset
  std::vector<int> prior;  // prior leaf -> source offset
};

class Compiler {
 public:
  Compiler(const Program& p, const ParamEnv& phi) : prog_(p), phi_(phi) {}

  ExprPtr run(const ExprPtr& e, const ParamMap& phi, int off, std::vector<int>& kept,
              std::map<std::string, std::vector<int>>& ext) {
    const Expr& x = *e;
    switch (x.kind) {
      case ExprKind::Const:
      case ExprKind::Var: return e;
      // A constant parameter equals its own previous value.
      case ExprKind::Last: return in_dom(phi, x.name) ? with_loc(mk::var(x.name), x.loc) : e;
      case ExprKind::Sample: {
        Expr out = x;
        out.args[0] = run(x.args[0], phi, off, kept, ext);
        int base = off + rv(*x.args[0]);
        int w = sample_width(prog_, *x.args[0]);
        for (int k = 0; k < w; ++k) kept.push_back(base + k);
        return std::make_shared<Expr>(std::move(out));
      }
      case ExprKind::App: return app(x, phi, off, kept, ext);
      case ExprKind::Where: {
        ExprPtr body = run(x.args[0], phi, off, kept, ext);
        int o = off + rv(*x.args[0]);
        std::vector<Eq> eqs;
        for (const auto& q : x.eqs) {
          int n = rv(*q.expr);
          if (!q.name.empty() && in_dom(phi, q.name)) {
            if (q.kind == EqKind::Init)
              for (int k = 0; k < n; ++k) ext[q.name].push_back(o + k);
          } else {
            Eq c = q;
            c.expr = run(q.expr, phi, o, kept, ext);
            eqs.push_back(std::move(c));
          }
          o += n;
        }
        if (eqs.empty()) return body;
        Expr out = x;
        out.args[0] = body;
        out.eqs = std::move(eqs);
        return std::make_shared<Expr>(std::move(out));
      }
      case ExprKind::Infer: {
        const Expr& call = *x.args[0];
        std::vector<int> k2;
        std::map<std::string, std::vector<int>> e2;
        ExprPtr arg = run(call.args[0], {}, 0, k2, e2);
        auto out = mk::apf_infer(model_name(call.name), mk::var(prior_name(call.name)), arg);
        return with_loc(out, x.loc);
      }
      default: {
        Expr out = x;
        int o = off;
        for (std::size_t i = 0; i < x.args.size(); ++i) {
          out.args[i] = run(x.args[i], phi, o, kept, ext);
          o += rv(*x.args[i]);
        }
        return std::make_shared<Expr>(std::move(out));
      }
    }
  }

  std::map<std::string, NodeSeeds> seeds;

 private:
  static ExprPtr with_loc(const ExprPtr& e, SrcLoc loc) {
    Expr out = *e;
    out.loc = loc;
    return std::make_shared<Expr>(std::move(out));
  }

  int rv(const Expr& e) const { return rv_count(prog_, e); }

  ExprPtr app(const Expr& x, const ParamMap& phi, int off, std::vector<int>& kept,
              std::map<std::string, std::vector<int>>& ext) {
    const Decl* d = prog_.find(x.name);
    const int rvf = rv(*d->body);
    if (d->kind != DeclKind::Proba) {
      Expr out = x;
      out.args[0] = run(x.args[0], phi, off + rvf, kept, ext);
      return std::make_shared<Expr>(std::move(out));
    }
    const NodeSeeds& ns = seeds.at(x.name);
    for (int k : ns.model) kept.push_back(off + k);
    ExprPtr arg = run(x.args[0], phi, off + rvf, kept, ext);
    const auto& callee_phi = phi_.at(x.name);
    if (callee_phi.empty()) return with_loc(mk::app(model_name(x.name), arg), x.loc);
    ExprPtr call = with_loc(mk::app(model_name(x.name), mk::pair(mk::var(x.inst), arg)), x.loc);
    if (in_dom(phi, x.inst)) {
      for (int k : ns.prior) ext[x.inst].push_back(off + k);
      return call;
    }
    for (int k : ns.prior) kept.push_back(off + k);
    return mk::where(call, {mk::init(x.inst, mk::sample(mk::var(prior_name(x.name)))),
                            mk::def(x.inst, mk::last(x.inst))});
  }

  const Program& prog_;
  const ParamEnv& phi_;
};

}  // namespace

bool const_check(const ConstSet& c, const Expr& e) {
  switch (e.kind) {
    case ExprKind::Const: return true;
    case ExprKind::Var: return c.count(e.name) > 0;
    case ExprKind::Pair:
    case ExprKind::Op:
      for (const auto& a : e.args)
        if (!const_check(c, *a)) return false;
      return true;
    case ExprKind::Where: {
      ConstSet d = const_eqs(c, e.eqs);
      for (const auto& q : e.eqs)
        if (q.kind == EqKind::Def && !q.name.empty() && !d.count(q.name)) return false;
      ConstSet inner = c;
      inner.insert(d.begin(), d.end());
      for (const auto& q : e.eqs)
        if (q.kind == EqKind::Def && q.name.empty() && !const_check(inner, *q.expr)) return false;
      return const_check(inner, *e.args[0]);
    }
    default: return false;
  }
}

ConstSet const_eqs(const ConstSet& c, const std::vector<Eq>& eqs) {
  ConstSet d;
  for (bool changed = true; changed;) {
    changed = false;
    ConstSet known = c;
    known.insert(d.begin(), d.end());
    for (const auto& q : eqs) {
      if (q.kind != EqKind::Def || q.name.empty() || d.count(q.name)) continue;
      if (is_last_of(*q.expr, q.name) || const_check(known, *q.expr)) {
        d.insert(q.name);
        changed = true;
      }
    }
  }
  return d;
}

ConstSet global_consts(const Program& p) {
  ConstSet c;
  for (const auto& d : p.decls)
    if (d.kind == DeclKind::Let && const_check(c, *d.body)) c.insert(d.name);
  return c;
}

std::string prior_name(const std::string& f) { return f + "__prior"; }
std::string model_name(const std::string& f) { return f + "__model"; }

ParamEnv apf_analyze(const Program& p) {
  ParamEnv phi;
  ConstSet globals;
  for (const auto& d : p.decls) {
    if (d.kind == DeclKind::Let) {
      if (const_check(globals, *d.body)) globals.insert(d.name);
    } else if (d.kind == DeclKind::Proba) {
      Analyzer a(p, phi, globals);
      ParamMap m;
      a.collect(*d.body, globals, m);
      phi[d.name] = std::move(m);
    }
  }
  return phi;
}

ApfOutput apf_compile(const Program& p) { return apf_compile(p, apf_analyze(p)); }

ApfOutput apf_compile(const Program& p, const ParamEnv& phi) {
  ApfOutput out;
  out.phi = phi;
  Compiler comp(p, phi);
  Program res;
  for (const auto& d : p.decls) {
    if (d.kind == DeclKind::Let) {
      res.decls.push_back(d);
      continue;
    }
    std::vector<int> kept;
    std::map<std::string, std::vector<int>> ext;
    if (d.kind == DeclKind::Node) {
      Decl n = d;
      n.body = comp.run(d.body, {}, 0, kept, ext);
      res.decls.push_back(std::move(n));
      continue;
    }
    const ParamMap& m = phi.at(d.name);
    ExprPtr body = comp.run(d.body, m, 0, kept, ext);
    std::vector<ExprPtr> priors;
    std::vector<std::string> params;
    NodeSeeds ns;
    ns.model = kept;
    for (const auto& [x, e] : m) {
      params.push_back(x);
      priors.push_back(e);
      auto it = ext.find(x);
      if (it == ext.end()) fail(ErrorKind::NonConstantPrior, "parameter '" + x + "' of '" + d.name + "' has no prior site");
      ns.prior.insert(ns.prior.end(), it->second.begin(), it->second.end());
    }
    res.decls.push_back(Decl{DeclKind::Let, prior_name(d.name), Pattern::unit(), tuple_of(priors), d.loc});
    Pattern param = m.empty() ? d.param : Pattern::pair(pattern_of(params), d.param);
    res.decls.push_back(Decl{DeclKind::Proba, model_name(d.name), param, body, d.loc});

    SeedPerm sp;
    sp.node = d.name;
    sp.model = model_name(d.name);
    sp.prior = prior_name(d.name);
    sp.source_rv = rv_count(p, *d.body);
    sp.model_rv = static_cast<int>(ns.model.size());
    sp.prior_width = static_cast<int>(ns.prior.size());
    sp.perm.assign(static_cast<std::size_t>(sp.source_rv), -1);
    int k = 0;
    for (int s : ns.model) sp.perm.at(static_cast<std::size_t>(s)) = k++;
    for (int s : ns.prior) sp.perm.at(static_cast<std::size_t>(s)) = k++;
    for (int t : sp.perm)
      if (t < 0) fail(ErrorKind::Definition, "seed routing of '" + d.name + "' is not a permutation");
    out.perms.push_back(std::move(sp));
    comp.seeds[d.name] = std::move(ns);
  }
  out.program = uniquify(res);
  kind_check(out.program);
  return out;
}

const SeedPerm* find_perm(const ApfOutput& out, const std::string& node) {
  for (const auto& sp : out.perms)
    if (sp.node == node) return &sp;
  return nullptr;
}

ExprPtr definition_expansion(const ApfOutput& out, const std::string& f, ExprPtr input) {
  return definition_expansion(out.program, f, !out.phi.at(f).empty(), std::move(input));
}

ExprPtr definition_expansion(const Program& compiled, const std::string& f, bool has_params, ExprPtr input) {
  if (!has_params) return mk::app(model_name(f), std::move(input));
  std::set<std::string> taken = all_names(compiled);
  std::string t = f + "__params";
  for (int k = 1; taken.count(t); ++k) t = f + "__params_" + std::to_string(k);
  return mk::where(mk::app(model_name(f), mk::pair(mk::var(t), std::move(input))),
                   {mk::init(t, mk::sample(mk::var(prior_name(f)))), mk::def(t, mk::last(t))});
}

std::string phi_json(const ParamEnv& phi, int indent) {
  json j = json::object();
  for (const auto& [node, m] : phi) {
    json o = json::object();
    for (const auto& [x, e] : m) o[x] = print(*e);
    j[node] = o;
  }
  return j.dump(indent);
}

std::string perm_json(const std::vector<SeedPerm>& perms, int indent) {
  json j = json::array();
  for (const auto& sp : perms)
    j.push_back({{"node", sp.node},
                 {"model", sp.model},
                 {"prior", sp.prior},
                 {"source_rv", sp.source_rv},
                 {"model_rv", sp.model_rv},
                 {"prior_width", sp.prior_width},
                 {"perm", sp.perm}});
  return j.dump(indent);
}

std::vector<SeedPerm> perms_from_json(const std::string& text) {
  std::vector<SeedPerm> out;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, std::string("malformed permutation file: ") + e.what());
  }
  try {
    for (const auto& o : j) {
      SeedPerm sp;
      sp.node = o.at("node").get<std::string>();
      sp.model = o.at("model").get<std::string>();
      sp.prior = o.at("prior").get<std::string>();
      sp.source_rv = o.at("source_rv").get<int>();
      sp.model_rv = o.at("model_rv").get<int>();
      sp.prior_width = o.value("prior_width", sp.source_rv - sp.model_rv);
      sp.perm = o.at("perm").get<std::vector<int>>();
      out.push_back(std::move(sp));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, std::string("malformed permutation file: ") + e.what());
  }
  return out;
}

}  // namespace muz
