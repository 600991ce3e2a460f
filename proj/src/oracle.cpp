#include "muz/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <json.hpp>
#include <memory>
#include <tuple>
#include <unordered_map>

#include "muz/infer.hpp"
#include "muz/passes.hpp"
#include "muz/syntax.hpp"

namespace muz {

namespace {

using json = nlohmann::ordered_json;

// Static seed offsets of every node relative to the start of its enclosing
// declaration body (or subject expression).
class Layout {
 public:
  explicit Layout(const Program& p) : prog_(p) {
    for (const auto& d : p.decls) place(*d.body, 0);
  }

  void add(const Expr& e) { place(e, 0); }

  int offset(const Expr& e) const { return offsets_.at(&e); }

  int rv(const Expr& e) {
    int n = 0;
    switch (e.kind) {
      case ExprKind::Infer:
      case ExprKind::ApfInfer: return 0;
      case ExprKind::Sample: n = sample_width(prog_, *e.args[0]); break;
      case ExprKind::App: n = body_rv(e.name); break;
      default: break;
    }
    for (const auto& a : e.args) n += rv(*a);
    for (const auto& q : e.eqs) n += rv(*q.expr);
    return n;
  }

 private:
  int body_rv(const std::string& f) {
    auto it = fn_rv_.find(f);
    if (it != fn_rv_.end()) return it->second;
    int n = rv(*prog_.find(f)->body);
    fn_rv_[f] = n;
    return n;
  }

  void place(const Expr& e, int off) {
    offsets_[&e] = off;
    switch (e.kind) {
      case ExprKind::App: place(*e.args[0], off + body_rv(e.name)); return;
      case ExprKind::Where: {
        place(*e.args[0], off);
        int o = off + rv(*e.args[0]);
        for (const auto& q : e.eqs) {
          place(*q.expr, o);
          o += rv(*q.expr);
        }
        return;
      }
      case ExprKind::Infer: {
        const Expr& call = *e.args[0];
        offsets_[&call] = off;
        place(*call.args[0], off);
        return;
      }
      default: {
        int o = off;
        for (const auto& a : e.args) {
          place(*a, o);
          o += rv(*a);
        }
      }
    }
  }

  const Program& prog_;
  std::unordered_map<const Expr*, int> offsets_;
  std::map<std::string, int> fn_rv_;
};

struct Ctx {
  enum class Kind { Root, Global, Call, Branch, Copy } kind = Kind::Root;
  Ctx* parent = nullptr;
  const Decl* fn = nullptr;    // Call: callee
  const Expr* site = nullptr;  // Call: App node; Branch: Present node
  bool branch = true;
  int start = 0;               // Copy: parent instant of the restart
  int base = 0;
  int id = 0;
  std::map<std::string, const Eq*> defs;
  std::map<std::string, const Eq*> inits;
  std::vector<int> positions;  // Branch: parent instants where the branch is active
  int scanned = 0;
};

struct Key {
  int ctx;
  const Expr* e;
  int j;
  bool operator==(const Key& o) const { return ctx == o.ctx && e == o.e && j == o.j; }
};

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::size_t h = std::hash<const void*>()(k.e);
    h ^= static_cast<std::size_t>(k.ctx) * 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::size_t>(k.j) * 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
    return h;
  }
};

struct Cell {
  bool done = false;
  Value v;
  double w = 0.0;
};

using Path = std::vector<bool>;  // false: fst, true: snd

void pattern_paths(const Pattern& p, Path& cur, std::map<std::string, Path>& out) {
  switch (p.kind) {
    case Pattern::Kind::Name: out[p.name] = cur; return;
    case Pattern::Kind::Unit: return;
    case Pattern::Kind::Pair:
      cur.push_back(false);
      pattern_paths(p.items[0], cur, out);
      cur.back() = true;
      pattern_paths(p.items[1], cur, out);
      cur.pop_back();
      return;
  }
}

Value follow(Value v, const Path& path) {
  for (bool right : path) {
    if (!v.is_pair()) fail(ErrorKind::Type, "expected a pair argument, got " + v.type_name());
    v = right ? v.snd() : v.fst();
  }
  return v;
}

class Rel {
 public:
  Rel(const Subject& s, const Streams& h, const RandPrefix& r, int T)
      : prog_(*s.program), layout_(*s.program), h_(h), r_(r), T_(T) {
    layout_.add(*s.expr);
    root_ = make_ctx(Ctx::Kind::Root, nullptr);
    Path cur;
    pattern_paths(pattern_of(s.inputs), cur, input_paths_);
    for (const auto& name : s.inputs)
      if (!h.count(name)) fail(ErrorKind::UnboundVariable, "no input stream for '" + name + "'");
  }

  std::pair<Value, double> at(const Expr& e, int j) { return eval(*root_, e, j); }

 private:
  Ctx* make_ctx(Ctx::Kind k, Ctx* parent) {
    ctxs_.push_back(std::make_unique<Ctx>());
    Ctx* c = ctxs_.back().get();
    c->kind = k;
    c->parent = parent;
    c->id = static_cast<int>(ctxs_.size());
    if (parent) c->base = parent->base;
    return c;
  }

  Ctx& call_ctx(Ctx& k, const Expr& app) {
    auto key = std::make_tuple(k.id, &app, 0);
    auto it = children_.find(key);
    if (it != children_.end()) return *it->second;
    Ctx* c = make_ctx(Ctx::Kind::Call, &k);
    c->fn = prog_.find(app.name);
    c->site = &app;
    c->base = k.base + layout_.offset(app);
    children_[key] = c;
    return *c;
  }

  Ctx& branch_ctx(Ctx& k, const Expr& present, bool which) {
    auto key = std::make_tuple(k.id, &present, which ? 1 : 2);
    auto it = children_.find(key);
    if (it != children_.end()) return *it->second;
    Ctx* c = make_ctx(Ctx::Kind::Branch, &k);
    c->site = &present;
    c->branch = which;
    children_[key] = c;
    return *c;
  }

  Ctx& copy_ctx(Ctx& k, const Expr& reset, int start) {
    auto key = std::make_tuple(k.id, &reset, 3 + start);
    auto it = children_.find(key);
    if (it != children_.end()) return *it->second;
    Ctx* c = make_ctx(Ctx::Kind::Copy, &k);
    c->site = &reset;
    c->start = start;
    children_[key] = c;
    return *c;
  }

  // Global instant of local instant j of context k.
  int global_instant(const Ctx& k, int j) const {
    const Ctx* c = &k;
    while (c->parent) {
      if (c->kind == Ctx::Kind::Branch) j = c->positions.at(static_cast<std::size_t>(j));
      if (c->kind == Ctx::Kind::Copy) j = c->start + j;
      c = c->parent;
    }
    return j;
  }

  // Local instant of the branch context at parent instant j (the branch must
  // be active at j).
  int branch_local(Ctx& b, int j) {
    Ctx& p = *b.parent;
    const Expr& cond = *b.site->args[0];
    while (b.scanned <= j) {
      Value c = eval(p, cond, b.scanned).first;
      if (c.as_bool() == b.branch) b.positions.push_back(b.scanned);
      ++b.scanned;
    }
    return static_cast<int>(std::lower_bound(b.positions.begin(), b.positions.end(), j) - b.positions.begin());
  }

  void enter_where(Ctx& k, const Expr& e) {
    for (const auto& q : e.eqs) {
      if (q.name.empty()) continue;
      (q.kind == EqKind::Init ? k.inits : k.defs)[q.name] = &q;
    }
  }

  Value global(const std::string& name) {
    auto it = globals_.find(name);
    if (it != globals_.end()) return it->second;
    const Decl* d = prog_.find(name);
    if (!d || d->kind != DeclKind::Let) fail(ErrorKind::UnboundVariable, "unbound variable '" + name + "'");
    Ctx* g = make_ctx(Ctx::Kind::Global, nullptr);
    Value v = eval(*g, *d->body, 0).first;
    globals_[name] = v;
    return v;
  }

  Value lookup(Ctx* k, const std::string& x, int j) {
    for (;;) {
      auto it = k->defs.find(x);
      if (it != k->defs.end()) return eval(*k, *it->second->expr, j).first;
      switch (k->kind) {
        case Ctx::Kind::Root: {
          auto p = input_paths_.find(x);
          if (p == input_paths_.end()) return global(x);
          const auto& s = h_.at(x);
          if (j >= static_cast<int>(s.size())) fail(ErrorKind::Io, "input stream '" + x + "' is too short");
          return s[static_cast<std::size_t>(j)];
        }
        case Ctx::Kind::Global: return global(x);
        case Ctx::Kind::Call: {
          std::map<std::string, Path> paths;
          Path cur;
          pattern_paths(k->fn->param, cur, paths);
          auto p = paths.find(x);
          if (p == paths.end()) return global(x);
          Value arg = eval(*k->parent, *k->site->args[0], j).first;
          return follow(arg, p->second);
        }
        case Ctx::Kind::Branch: j = k->positions.at(static_cast<std::size_t>(j)); break;
        case Ctx::Kind::Copy: j = k->start + j; break;
      }
      k = k->parent;
    }
  }

  Value last(Ctx* k, const std::string& x, int j) {
    for (;;) {
      auto it = k->inits.find(x);
      if (it != k->inits.end()) {
        if (j == 0) return eval(*k, *it->second->expr, 0).first;
        return eval(*k, *k->defs.at(x)->expr, j - 1).first;
      }
      switch (k->kind) {
        case Ctx::Kind::Branch: j = k->positions.at(static_cast<std::size_t>(j)); break;
        case Ctx::Kind::Copy: j = k->start + j; break;
        default: fail(ErrorKind::InconsistentEnv, "no initialization for 'last " + x + "'");
      }
      k = k->parent;
    }
  }

  std::pair<Value, double> eval(Ctx& k, const Expr& e, int j) {
    Key key{k.id, &e, j};
    auto it = memo_.find(key);
    if (it != memo_.end()) {
      if (!it->second.done)
        fail(ErrorKind::InconsistentEnv, "instantaneous cycle through '" + print(e) + "'", e.loc);
      return {it->second.v, it->second.w};
    }
    memo_[key] = Cell{};
    auto [v, w] = compute(k, e, j);
    Cell& c = memo_[key];
    c.done = true;
    c.v = v;
    c.w = w;
    return {v, w};
  }

  std::pair<Value, double> compute(Ctx& k, const Expr& e, int j) {
    switch (e.kind) {
      case ExprKind::Const: return {e.constant, 0.0};
      case ExprKind::Var: return {lookup(&k, e.name, j), 0.0};
      case ExprKind::Last: return {last(&k, e.name, j), 0.0};
      case ExprKind::Pair: {
        auto [a, wa] = eval(k, *e.args[0], j);
        auto [b, wb] = eval(k, *e.args[1], j);
        return {Value::pair(a, b), (0.0 + wa) + wb};
      }
      case ExprKind::Op: {
        std::vector<Value> args;
        double acc = 0.0;
        for (const auto& a : e.args) {
          auto [v, w] = eval(k, *a, j);
          args.push_back(v);
          acc += w;
        }
        return {apply_op(e.op, args), acc};
      }
      case ExprKind::App: {
        auto [a, we] = eval(k, *e.args[0], j);
        (void)a;
        Ctx& c = call_ctx(k, e);
        auto [v, wf] = eval(c, *c.fn->body, j);
        return {v, we + wf};
      }
      case ExprKind::Where: {
        enter_where(k, e);
        std::vector<double> ws;
        for (const auto& q : e.eqs) {
          if (q.kind == EqKind::Init)
            ws.push_back(j == 0 ? eval(k, *q.expr, 0).second : 0.0);
          else
            ws.push_back(eval(k, *q.expr, j).second);
        }
        auto [v, wb] = eval(k, *e.args[0], j);
        return {v, wb + fsum(ws)};
      }
      case ExprKind::Present: {
        bool c = eval(k, *e.args[0], j).first.as_bool();
        Ctx& b = branch_ctx(k, e, c);
        int local = branch_local(b, j);
        return eval(b, *e.args[c ? 1 : 2], local);
      }
      case ExprKind::Reset: {
        int start = 0;
        for (int i = j; i > 0; --i)
          if (eval(k, *e.args[1], i).first.as_bool()) {
            start = i;
            break;
          }
        if (start == 0) eval(k, *e.args[1], 0);
        Ctx& c = copy_ctx(k, e, start);
        return eval(c, *e.args[0], j - start);
      }
      case ExprKind::Sample: {
        auto [d, wd] = eval(k, *e.args[0], j);
        const int first = k.base + layout_.offset(e) + layout_.rv(*e.args[0]);
        const int width = sample_width(prog_, *e.args[0]);
        const int g = global_instant(k, j);
        std::vector<double> u(static_cast<std::size_t>(width));
        for (int l = 0; l < width; ++l) u[static_cast<std::size_t>(l)] = r_.at(static_cast<std::size_t>(first + l)).at(static_cast<std::size_t>(g));
        return {sample_value(d, u), wd};
      }
      case ExprKind::Factor: {
        auto [a, wa] = eval(k, *e.args[0], j);
        double s = a.as_real();
        if (s < 0.0) fail(ErrorKind::NegativeScore, "negative score " + a.to_string(), e.loc);
        return {Value::unit(), wa + std::log(s)};
      }
      case ExprKind::Infer:
      case ExprKind::ApfInfer: fail(ErrorKind::Config, "inference sites are not supported by the relational oracle");
    }
    return {Value::bottom(), 0.0};
  }

  const Program& prog_;
  Layout layout_;
  const Streams& h_;
  const RandPrefix& r_;
  int T_;
  std::vector<std::unique_ptr<Ctx>> ctxs_;
  std::map<std::tuple<int, const Expr*, int>, Ctx*> children_;
  std::unordered_map<Key, Cell, KeyHash> memo_;
  std::map<std::string, Value> globals_;
  std::map<std::string, Path> input_paths_;
  Ctx* root_ = nullptr;
};

Value input_at(const Subject& s, const Streams& h, int t) {
  std::vector<Value> xs;
  for (const auto& name : s.inputs) {
    const auto& st = h.at(name);
    if (t >= static_cast<int>(st.size())) fail(ErrorKind::Io, "input stream '" + name + "' is too short");
    xs.push_back(st[static_cast<std::size_t>(t)]);
  }
  return make_input(xs);
}

bool same_trace_at(const Trace& a, const Trace& b, std::size_t t) {
  return identical(a.values[t], b.values[t]) && identical(Value(a.logw[t]), Value(b.logw[t]));
}

json trace_json(const Trace& tr, std::size_t upto) {
  json out = json::array();
  for (std::size_t t = 0; t <= upto && t < tr.values.size(); ++t)
    out.push_back({{"value", tr.values[t].to_string()}, {"logw", tr.logw[t]}});
  return out;
}

json prefix_json(const RandPrefix& r, std::size_t upto) {
  json out = json::array();
  for (const auto& row : r) {
    json xs = json::array();
    for (std::size_t t = 0; t <= upto && t < row.size(); ++t) xs.push_back(row[t]);
    out.push_back(xs);
  }
  return out;
}

struct Outcome {
  Trace trace;
  std::string error;
};

template <class F>
Outcome guarded(F f) {
  Outcome o;
  try {
    o.trace = f();
  } catch (const Error& e) {
    o.error = std::string(kind_name(e.kind())) + ": " + e.what();
  }
  return o;
}

// First instant where the outcomes differ, or -1.
int first_difference(const Outcome& a, const Outcome& b, int T) {
  if (!a.error.empty() || !b.error.empty()) return a.error == b.error ? -1 : 0;
  for (int t = 0; t < T; ++t)
    if (!same_trace_at(a.trace, b.trace, static_cast<std::size_t>(t))) return t;
  return -1;
}

}  // namespace

Subject make_subject(const Program& p, const std::string& source, const std::vector<std::string>& inputs) {
  return make_subject(p, parse_expr(source), inputs);
}

Subject make_subject(const Program& p, const ExprPtr& e, const std::vector<std::string>& inputs) {
  Subject s;
  s.program = &p;
  s.inputs = inputs;
  s.expr = uniquify_expr(p, e, inputs);
  return s;
}

int subject_rv(const Subject& s) { return rv_count(*s.program, *s.expr); }

Trace rel_eval(const Subject& s, const Streams& h, const RandPrefix& r, int T) {
  Rel rel(s, h, r, T);
  Trace out;
  for (int t = 0; t < T; ++t) {
    auto [v, w] = rel.at(*s.expr, t);
    out.values.push_back(v);
    out.logw.push_back(w);
  }
  return out;
}

Trace coit_trace(const Subject& s, const Streams& h, const RandPrefix& r, int T, const EvalOptions& opt) {
  Machine m(*s.program);
  int fn = m.add_subject(s.expr, s.inputs);
  State st = d_init(m, fn).first;
  const std::size_t rv = static_cast<std::size_t>(m.func(fn).rv);
  std::vector<double> seeds(rv);
  Trace out;
  for (int t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < rv; ++k) seeds[k] = r.at(k).at(static_cast<std::size_t>(t));
    double w = 0.0;
    out.values.push_back(step_in_place(m, fn, input_at(s, h, t), st, seeds, w, opt));
    out.logw.push_back(w);
  }
  return out;
}

RandPrefix random_prefix(std::uint64_t master, std::uint64_t trial, int rv, int T) {
  RandPrefix r(static_cast<std::size_t>(rv), std::vector<double>(static_cast<std::size_t>(T)));
  for (int k = 0; k < rv; ++k)
    for (int t = 0; t < T; ++t)
      r[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)] =
          seeds_for(master, trial, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k));
  return r;
}

RandPrefix permute(const RandPrefix& r, const std::vector<int>& perm) {
  if (perm.empty()) return r;
  if (perm.size() != r.size()) fail(ErrorKind::Config, "permutation size does not match the number of seeds");
  RandPrefix out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out.at(static_cast<std::size_t>(perm[i])) = r[i];
  return out;
}

std::string Report::to_json(int indent) const {
  json j = {{"pass", pass}, {"trials", trials}, {"failures", failures}};
  j["counterexample"] = detail.empty() ? json(nullptr) : json::parse(detail);
  return j.dump(indent);
}

Report equiv_check(const Subject& a, const Subject& b, const std::vector<int>& perm, const Streams& h, int T,
                   int trials, std::uint64_t seed) {
  const int rva = subject_rv(a), rvb = subject_rv(b);
  if (!perm.empty() && rva != rvb)
    fail(ErrorKind::Config, "subjects consume " + std::to_string(rva) + " and " + std::to_string(rvb) + " seeds");
  Report rep;
  for (int i = 0; i < trials; ++i) {
    RandPrefix r1 = random_prefix(seed, static_cast<std::uint64_t>(i), std::max(rva, rvb), T);
    RandPrefix r2 = permute(r1, perm);
    Outcome oa = guarded([&] { return rel_eval(a, h, r1, T); });
    Outcome ob = guarded([&] { return rel_eval(b, h, r2, T); });
    ++rep.trials;
    int t = first_difference(oa, ob, T);
    if (t < 0) continue;
    ++rep.failures;
    if (rep.pass) {
      json c = {{"trial", i}, {"step", t}, {"seeds", prefix_json(r1, static_cast<std::size_t>(t))}};
      c["left"] = oa.error.empty() ? trace_json(oa.trace, static_cast<std::size_t>(t)) : json(oa.error);
      c["right"] = ob.error.empty() ? trace_json(ob.trace, static_cast<std::size_t>(t)) : json(ob.error);
      rep.detail = c.dump();
    }
    rep.pass = false;
  }
  return rep;
}

Report coit_rel_agree(const Subject& s, const Streams& h, int T, int trials, std::uint64_t seed,
                      const EvalOptions& opt) {
  const int rv = subject_rv(s);
  Report rep;
  for (int i = 0; i < trials; ++i) {
    RandPrefix r = random_prefix(seed, static_cast<std::uint64_t>(i), rv, T);
    Outcome oc = guarded([&] { return coit_trace(s, h, r, T, opt); });
    Outcome orel = guarded([&] { return rel_eval(s, h, r, T); });
    ++rep.trials;
    int t = first_difference(oc, orel, T);
    if (t < 0) continue;
    ++rep.failures;
    if (rep.pass) {
      json c = {{"trial", i}, {"step", t}, {"seeds", prefix_json(r, static_cast<std::size_t>(t))}};
      c["coiterative"] = oc.error.empty() ? trace_json(oc.trace, static_cast<std::size_t>(t)) : json(oc.error);
      c["relational"] = orel.error.empty() ? trace_json(orel.trace, static_cast<std::size_t>(t)) : json(orel.error);
      rep.detail = c.dump();
    }
    rep.pass = false;
  }
  return rep;
}

namespace {

struct GridRun {
  const Machine& m;
  int fn;
  const Subject& s;
  const Streams& h;
  int T;
  int grid_n;
  std::size_t budget;
  std::size_t leaves = 0;
  std::vector<std::vector<std::pair<Value, double>>> atoms;

  void count() {
    if (++leaves > budget) fail(ErrorKind::BudgetExceeded, "grid exceeds " + std::to_string(budget) + " points");
  }

  // Sample sites of one instant are refined in seed order; a site's
  // distribution is read from a probe run with the remaining seeds at 0.5.
  void step(int t, const State& st, double mass, double logw) {
    if (t == T) return;
    const std::size_t rv = static_cast<std::size_t>(m.func(fn).rv);
    std::vector<double> r(rv, 0.5);
    std::vector<Value> seen(rv);
    cells(t, st, mass, logw, r, seen, 0);
  }

  void cells(int t, const State& st, double mass, double logw, std::vector<double>& r, std::vector<Value>& seen,
             std::size_t j) {
    const Value in = input_at(s, h, t);
    if (j == r.size()) {
      count();
      TraceRecord dists;
      EvalOptions opt;
      opt.site_dists = &dists;
      StepOut o = d_step(m, fn, in, st, r, opt);
      for (std::size_t k = 0; k < r.size(); ++k)
        if (!identical(dists[k], seen[k]))
          fail(ErrorKind::Config, "grid: a sample site depends on a later seed");
      double lw = logw + o.logw;
      atoms[static_cast<std::size_t>(t)].emplace_back(o.value, mass * std::exp(lw));
      step(t + 1, o.state, mass, lw);
      return;
    }
    TraceRecord dists;
    EvalOptions opt;
    opt.site_dists = &dists;
    d_step(m, fn, in, st, r, opt);
    const Value d = dists[j];
    seen[j] = d;
    if (d.is_bottom()) {
      r[j] = 0.5;
      cells(t, st, mass, logw, r, seen, j + 1);
      return;
    }
    if (d.is_dist()) {
      if (const auto* b = std::get_if<Bernoulli>(&d.as_dist().rep)) {
        const double p = b->p;
        if (1.0 - p > 0.0) {
          r[j] = 0.5 * (1.0 - p);
          cells(t, st, mass * (1.0 - p), logw, r, seen, j + 1);
        }
        if (p > 0.0) {
          r[j] = 1.0 - 0.5 * p;
          cells(t, st, mass * p, logw, r, seen, j + 1);
        }
        r[j] = 0.5;
        return;
      }
    }
    const double cell = 1.0 / grid_n;
    for (int c = 0; c < grid_n; ++c) {
      r[j] = (c + 0.5) * cell;
      cells(t, st, mass * cell, logw, r, seen, j + 1);
    }
    r[j] = 0.5;
  }
};

Measure normalize_atoms(std::vector<std::pair<Value, double>> atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return value_less(a.first, b.first); });
  Measure out;
  for (auto& [v, w] : atoms) {
    if (!out.empty() && identical(out.back().first, v))
      out.back().second += w;
    else
      out.emplace_back(v, w);
  }
  double z = 0.0;
  for (const auto& a : out) z += a.second;
  if (!(z > 0.0)) fail(ErrorKind::Degenerate, "grid: zero total mass");
  for (auto& a : out) a.second /= z;
  return out;
}

}  // namespace

std::vector<Measure> grid_infer(const Subject& s, const Streams& h, int T, int grid_n, std::size_t budget) {
  if (grid_n <= 0) fail(ErrorKind::Config, "grid size must be positive");
  Machine m(*s.program);
  int fn = m.add_subject(s.expr, s.inputs);
  GridRun g{m, fn, s, h, T, grid_n, budget, 0, {}};
  g.atoms.resize(static_cast<std::size_t>(T));
  g.step(0, d_init(m, fn).first, 1.0, 0.0);
  std::vector<Measure> out;
  for (auto& a : g.atoms) out.push_back(normalize_atoms(std::move(a)));
  return out;
}

double total_variation(const Measure& a, const Measure& b) {
  std::vector<std::pair<Value, double>> all;
  for (const auto& x : a) all.push_back(x);
  for (const auto& x : b) all.emplace_back(x.first, -x.second);
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return value_less(x.first, y.first); });
  double tv = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    acc += all[i].second;
    if (i + 1 == all.size() || !identical(all[i].first, all[i + 1].first)) {
      tv += std::fabs(acc);
      acc = 0.0;
    }
  }
  return 0.5 * tv;
}

double measure_prob(const Measure& m, const Value& v) {
  double p = 0.0;
  for (const auto& [x, w] : m)
    if (identical(x, v)) p += w;
  return p;
}

}  // namespace muz
