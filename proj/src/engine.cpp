#include <array>
#include <cmath>

#include "detail.hpp"
#include "muz/dists.hpp"
#include "muz/engine.hpp"

namespace muz {

using ir::NK;
using ir::Node;

State State::tuple(std::vector<State> items) {
  State s;
  s.tag = Tag::Tuple;
  s.kids = std::move(items);
  return s;
}

State State::init_slot(Value prev, State sub) {
  State s;
  s.tag = Tag::InitSlot;
  s.v = std::move(prev);
  s.kids.push_back(std::move(sub));
  return s;
}

State State::reset_slot(State initial, State current, State cond) {
  State s;
  s.tag = Tag::ResetSlot;
  s.kids.push_back(std::move(initial));
  s.kids.push_back(std::move(current));
  s.kids.push_back(std::move(cond));
  return s;
}

bool same_state(const State& a, const State& b) {
  if (a.tag != b.tag || !identical(a.v, b.v) || a.cell != b.cell || a.kids.size() != b.kids.size()) return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!same_state(a.kids[i], b.kids[i])) return false;
  return true;
}

void init_slot_values(const State& s, std::vector<Value>& out) {
  if (s.tag == State::Tag::InitSlot) out.push_back(s.v);
  for (const auto& k : s.kids) init_slot_values(k, out);
}

int count_tag(const State& s, State::Tag t) {
  int n = s.tag == t ? 1 : 0;
  for (const auto& k : s.kids) n += count_tag(k, t);
  return n;
}

Value make_input(const std::vector<Value>& xs) {
  if (xs.empty()) return Value::unit();
  Value acc = xs.back();
  for (std::size_t i = xs.size() - 1; i-- > 0;) acc = Value::pair(xs[i], std::move(acc));
  return acc;
}

namespace {

enum class Mode { Tentative, Commit };

struct Memo {
  int uid;
  std::uint64_t path;
  const InferCell* cell;
  Value input;
  Value prior;
  std::shared_ptr<const InferCell> next;
  Value out;
};

struct Exec {
  const Machine& M;
  const EvalOptions& opt;
  const double* root;
  InferOptions iopt;
  std::uint64_t path = 0;
  std::vector<Memo> memo;

  Exec(const Machine& m, const EvalOptions& o, const double* r) : M(m), opt(o), root(r) {
    if (o.infer) iopt = *o.infer;
  }
};

thread_local State t_empty;

// Sub-state i of a stateful node; stateless subtrees never touch their state.
State& sub(State& m, std::size_t i) { return m.tag == State::Tag::Empty ? t_empty : m.kids[i]; }

void bind(const Pattern& p, const Value& v, Value* fr, int& s) {
  switch (p.kind) {
    case Pattern::Kind::Name: fr[s++] = v; return;
    case Pattern::Kind::Unit: return;
    case Pattern::Kind::Pair:
      if (v.is_bottom()) {
        bind(p.items[0], v, fr, s);
        bind(p.items[1], v, fr, s);
        return;
      }
      if (!v.is_pair()) fail(ErrorKind::Type, "expected a pair argument, got " + v.type_name());
      bind(p.items[0], v.fst(), fr, s);
      bind(p.items[1], v.snd(), fr, s);
      return;
  }
}

bool use_schedule(const Exec& x, const Node& n) {
  switch (x.opt.eqs) {
    case EqMode::Fixpoint: return false;
    case EqMode::Auto: return n.schedulable;
    case EqMode::Scheduled:
      if (!n.schedulable) fail(ErrorKind::Schedule, n.schedule_error, n.src->loc);
      return true;
  }
  return false;
}

Value eval(Exec& x, const Node& n, Value* fr, State& m, const double* r, double& w, Mode mode);

Value init_value(Exec& x, const ir::EqNode& q, Value* fr, State& st, const double* r, double& w, Mode mode) {
  if (!st.v.is_nil()) {
    w = 0.0;
    return st.v;
  }
  if (mode == Mode::Commit) {
    State m0 = st.kids[0];
    return eval(x, *q.expr, fr, m0, r, w, mode);
  }
  return eval(x, *q.expr, fr, st.kids[0], r, w, mode);
}

// Bounded Kleene iteration over the defined variables of a where. Each
// application first refreshes the x.last bindings, then every definition,
// both from the previous iterate. An equation none of whose inputs moved
// keeps its value, so only dirty equations are re-evaluated.
int fixpoint(Exec& x, const Node& n, Value* fr, State& m, const double* r) {
  for (const auto& q : n.eqs)
    if (q.slot >= 0) fr[q.slot] = Value::bottom();
  const int bound = n.n_defined + 1;
  const std::size_t k = n.eqs.size();
  std::vector<Value> tmp(k);
  std::vector<char> dirty(k, 1), next(k, 0);
  int iters = 0;
  for (;;) {
    ++iters;
    bool changed = false;
    for (int phase = 0; phase < 2; ++phase) {
      const bool inits = phase == 0;
      for (std::size_t i = 0; i < k; ++i) {
        const auto& q = n.eqs[i];
        if (q.init != inits || q.slot < 0 || !dirty[i]) continue;
        double w = 0.0;
        tmp[i] = q.init ? init_value(x, q, fr, sub(m, 1 + i), r + q.seed_off, w, Mode::Tentative)
                        : eval(x, *q.expr, fr, sub(m, 1 + i), r + q.seed_off, w, Mode::Tentative);
      }
      for (std::size_t i = 0; i < k; ++i) {
        const auto& q = n.eqs[i];
        if (q.init != inits || q.slot < 0 || !dirty[i]) continue;
        dirty[i] = 0;
        if (!identical(fr[q.slot], tmp[i])) {
          fr[q.slot] = std::move(tmp[i]);
          changed = true;
          // Definitions read refreshed x.last bindings in this same iteration.
          for (int j : q.readers) {
            const auto u = static_cast<std::size_t>(j);
            (inits && !n.eqs[u].init ? dirty : next)[u] = 1;
          }
        }
      }
    }
    for (std::size_t i = 0; i < k; ++i)
      if (next[i]) {
        dirty[i] = 1;
        next[i] = 0;
      }
    if (!changed) break;
    if (iters >= bound) {
      if (x.opt.stats) x.opt.stats->bound_ok = false;
      fail(ErrorKind::Causality, "equations do not converge within " + std::to_string(bound) + " iterations",
           n.src->loc);
    }
  }
  if (FixStats* st = x.opt.stats) {
    ++st->runs;
    st->max_iterations = std::max(st->max_iterations, iters);
    if (iters > bound) st->bound_ok = false;
    if (st->log.size() < 100000) st->log.emplace_back(iters, n.n_defined);
  }
  return iters;
}

void check_defined(const Node& n, const Value* fr) {
  for (std::size_t i = 0; i < n.eqs.size(); ++i) {
    const auto& q = n.eqs[i];
    if (q.slot >= 0 && fr[q.slot].is_bottom()) {
      const auto& src = n.src->eqs[i];
      std::string what = q.init ? "last " + src.name : src.name;
      fail(ErrorKind::Causality, "'" + what + "' is undefined at the fixpoint", src.loc);
    }
  }
}

Value eval_where(Exec& x, const Node& n, Value* fr, State& m, const double* r, double& w, Mode mode) {
  std::array<double, 16> wbuf{};
  std::vector<double> wvec;
  std::span<double> ws;
  if (n.eqs.size() <= wbuf.size()) {
    ws = std::span<double>(wbuf.data(), n.eqs.size());
  } else {
    wvec.assign(n.eqs.size(), 0.0);
    ws = wvec;
  }
  if (use_schedule(x, n)) {
    for (int idx : n.schedule) {
      const auto& q = n.eqs[static_cast<std::size_t>(idx)];
      State& st = sub(m, 1 + static_cast<std::size_t>(idx));
      double wq = 0.0;
      Value v = q.init ? init_value(x, q, fr, st, r + q.seed_off, wq, mode)
                       : eval(x, *q.expr, fr, st, r + q.seed_off, wq, mode);
      if (q.slot >= 0) fr[q.slot] = std::move(v);
      ws[static_cast<std::size_t>(idx)] = wq;
    }
  } else {
    fixpoint(x, n, fr, m, r);
    if (mode == Mode::Tentative) {
      double wb = 0.0;
      w = 0.0;
      return eval(x, *n.kids[0], fr, sub(m, 0), r, wb, mode);
    }
    check_defined(n, fr);
    for (std::size_t i = 0; i < n.eqs.size(); ++i) {
      const auto& q = n.eqs[i];
      double wq = 0.0;
      if (q.init)
        init_value(x, q, fr, sub(m, 1 + i), r + q.seed_off, wq, mode);
      else
        eval(x, *q.expr, fr, sub(m, 1 + i), r + q.seed_off, wq, mode);
      ws[i] = wq;
    }
  }
  double wb = 0.0;
  Value v = eval(x, *n.kids[0], fr, sub(m, 0), r, wb, mode);
  if (mode == Mode::Commit) {
    for (std::size_t i = 0; i < n.eqs.size(); ++i) {
      const auto& q = n.eqs[i];
      if (!q.init) continue;
      if (fr[q.var_slot].is_bottom())
        fail(ErrorKind::BottomEscape, "'" + n.src->eqs[i].name + "' is undefined", n.src->eqs[i].loc);
      m.kids[1 + i].v = fr[q.var_slot];
    }
  }
  w = wb + fsum(ws);
  return v;
}

Value eval_infer(Exec& x, const Node& n, Value* fr, State& m, const double* r, Mode mode) {
  const std::size_t na = n.kids.size();
  double wa = 0.0;
  Value prior = Value::unit();
  if (n.kind == NK::ApfInfer) prior = eval(x, *n.kids[0], fr, m.kids[0], r, wa, mode);
  Value in = eval(x, *n.kids[na - 1], fr, m.kids[na - 1], r, wa, mode);
  if (in.is_bottom() || prior.is_bottom()) {
    if (mode == Mode::Commit) fail(ErrorKind::BottomEscape, "undefined input of infer", n.src->loc);
    return Value::bottom();
  }
  const InferCell* cell = m.cell.get();
  const Memo* hit = nullptr;
  for (const auto& e : x.memo)
    if (e.uid == n.uid && e.path == x.path && e.cell == cell && identical(e.input, in) && identical(e.prior, prior))
      hit = &e;
  if (!hit) {
    std::uint64_t stream = detail::mix64(x.iopt.seed ^ detail::mix64(x.path ^ static_cast<std::uint64_t>(n.uid)));
    Memo e{n.uid, x.path, cell, in, prior, nullptr, Value()};
    e.next = detail::infer_site_step(x.M, n, stream, cell, in, prior, x.iopt, e.out);
    x.memo.push_back(std::move(e));
    hit = &x.memo.back();
  }
  Value out = hit->out;
  if (mode == Mode::Commit) m.cell = hit->next;
  return out;
}

Value eval(Exec& x, const Node& n, Value* fr, State& m, const double* r, double& w, Mode mode) {
  w = 0.0;
  switch (n.kind) {
    case NK::Const: return n.konst;
    case NK::Local:
    case NK::Last: return fr[n.slot];
    case NK::Global: return x.M.global(n.global);
    case NK::Pair: {
      double wa = 0.0, wb = 0.0;
      Value a = eval(x, *n.kids[0], fr, sub(m, 0), r, wa, mode);
      Value b = eval(x, *n.kids[1], fr, sub(m, 1), r + n.kids[0]->rv, wb, mode);
      w = (0.0 + wa) + wb;
      if (a.is_bottom() || b.is_bottom()) return Value::bottom();
      return Value::pair(std::move(a), std::move(b));
    }
    case NK::Op: {
      const std::size_t k = n.kids.size();
      std::array<Value, 3> small;
      std::vector<Value> big;
      std::span<Value> args;
      if (k <= small.size()) {
        args = std::span<Value>(small.data(), k);
      } else {
        big.resize(k);
        args = big;
      }
      const double* rk = r;
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        double wk = 0.0;
        args[i] = eval(x, *n.kids[i], fr, sub(m, i), rk, wk, mode);
        acc += wk;
        rk += n.kids[i]->rv;
      }
      w = acc;
      return apply_op(n.op, args);
    }
    case NK::App: {
      const ir::Func& f = x.M.func(n.func);
      double we = 0.0, wf = 0.0;
      Value a = eval(x, *n.kids[0], fr, sub(m, 1), r + f.rv, we, mode);
      std::array<Value, 8> small;
      std::vector<Value> big;
      Value* frame = small.data();
      if (static_cast<std::size_t>(f.frame_size) > small.size()) {
        big.resize(static_cast<std::size_t>(f.frame_size));
        frame = big.data();
      }
      int s = 0;
      bind(f.param, a, frame, s);
      const std::uint64_t saved = x.path;
      x.path = detail::mix64(x.path ^ static_cast<std::uint64_t>(n.uid));
      Value v = eval(x, *f.body, frame, sub(m, 0), r, wf, mode);
      x.path = saved;
      w = we + wf;
      return v;
    }
    case NK::Where: return eval_where(x, n, fr, m, r, w, mode);
    case NK::Present: {
      double wc = 0.0;
      Value c = eval(x, *n.kids[0], fr, sub(m, 0), r, wc, mode);
      if (c.is_bottom()) {
        if (mode == Mode::Commit) fail(ErrorKind::BottomEscape, "undefined condition of present", n.src->loc);
        return c;
      }
      const double* r1 = r + n.kids[0]->rv;
      if (c.as_bool()) return eval(x, *n.kids[1], fr, sub(m, 1), r1, w, mode);
      return eval(x, *n.kids[2], fr, sub(m, 2), r1 + n.kids[1]->rv, w, mode);
    }
    case NK::Reset: {
      const Node& body = *n.kids[0];
      double wc = 0.0;
      Value c = eval(x, *n.kids[1], fr, sub(m, 2), r + body.rv, wc, mode);
      if (c.is_bottom()) {
        if (mode == Mode::Commit) fail(ErrorKind::BottomEscape, "undefined condition of reset", n.src->loc);
        return c;
      }
      if (!n.stateful) return eval(x, body, fr, m, r, w, mode);
      if (c.as_bool()) {
        if (mode == Mode::Tentative) return eval(x, body, fr, m.kids[0], r, w, mode);
        m.kids[1] = m.kids[0];
      }
      return eval(x, body, fr, m.kids[1], r, w, mode);
    }
    case NK::Sample: {
      double wd = 0.0;
      Value d = eval(x, *n.kids[0], fr, sub(m, 0), r, wd, mode);
      if (d.is_bottom()) return d;
      const double* site = r + n.kids[0]->rv;
      const auto idx = static_cast<std::size_t>(site - x.root);
      Value v;
      if (x.opt.replay) {
        v = (*x.opt.replay)[idx];
        if (v.is_bottom()) throw detail::ReplayMiss{};
        wd += log_pdf_value(d, v);
      } else {
        v = sample_value(d, std::span<const double>(site, static_cast<std::size_t>(n.width)));
      }
      if (x.opt.record && mode == Mode::Commit) (*x.opt.record)[idx] = v;
      if (x.opt.site_dists && mode == Mode::Commit) (*x.opt.site_dists)[idx] = d;
      w = wd;
      return v;
    }
    case NK::Factor: {
      double wa = 0.0;
      Value a = eval(x, *n.kids[0], fr, sub(m, 0), r, wa, mode);
      if (a.is_bottom()) return a;
      double s = a.as_real();
      if (s < 0.0) fail(ErrorKind::NegativeScore, "negative score " + a.to_string(), n.src->loc);
      w = wa + std::log(s);
      return Value::unit();
    }
    case NK::Infer:
    case NK::ApfInfer: return eval_infer(x, n, fr, m, r, mode);
  }
  return Value::bottom();
}

State init_state(const Machine& M, const Node& n) {
  if (!n.stateful) return State::empty();
  std::vector<State> kids;
  switch (n.kind) {
    case NK::App:
      kids.push_back(init_state(M, *M.func(n.func).body));
      kids.push_back(init_state(M, *n.kids[0]));
      return State::tuple(std::move(kids));
    case NK::Where:
      kids.push_back(init_state(M, *n.kids[0]));
      for (const auto& q : n.eqs) {
        State s = init_state(M, *q.expr);
        kids.push_back(q.init ? State::init_slot(Value::nil(), std::move(s)) : std::move(s));
      }
      return State::tuple(std::move(kids));
    case NK::Reset: {
      State b = init_state(M, *n.kids[0]);
      State c = init_state(M, *n.kids[1]);
      return State::reset_slot(b, b, std::move(c));
    }
    case NK::Infer:
    case NK::ApfInfer: {
      State s;
      s.tag = State::Tag::InferSlot;
      for (const auto* k : n.kids) s.kids.push_back(init_state(M, *k));
      return s;
    }
    default:
      for (const auto* k : n.kids) kids.push_back(init_state(M, *k));
      return State::tuple(std::move(kids));
  }
}

void check_seeds(const ir::Func& f, std::span<const double> r) {
  if (r.size() != static_cast<std::size_t>(f.rv))
    fail(ErrorKind::Domain, "'" + f.name + "' expects " + std::to_string(f.rv) + " seeds, got " +
                                std::to_string(r.size()));
}

std::vector<Value> bind_input(const ir::Func& f, const Value& input) {
  std::vector<Value> frame(static_cast<std::size_t>(f.frame_size));
  int s = 0;
  bind(f.param, input, frame.data(), s);
  return frame;
}

const Node& where_body(const ir::Func& f) {
  if (f.body->kind != NK::Where) fail(ErrorKind::Type, "'" + f.name + "' is not an equation set");
  return *f.body;
}

Env env_of(const ir::Func& f, const Node& n, const Value* fr) {
  Env env;
  for (std::size_t i = 0; i < n.eqs.size(); ++i) {
    const auto& q = n.eqs[i];
    if (q.slot < 0) continue;
    const auto& name = n.src->eqs[i].name;
    env[q.init ? name + ".last" : name] = fr[q.slot];
  }
  (void)f;
  return env;
}

}  // namespace

std::pair<State, int> d_init(const Machine& m, int fn) {
  const ir::Func& f = m.func(fn);
  return {init_state(m, *f.body), f.rv};
}

Value step_in_place(const Machine& m, int fn, const Value& input, State& s, std::span<const double> r, double& logw,
                    const EvalOptions& opt) {
  const ir::Func& f = m.func(fn);
  check_seeds(f, r);
  if (opt.record) opt.record->assign(static_cast<std::size_t>(f.rv), Value::bottom());
  if (opt.site_dists) opt.site_dists->assign(static_cast<std::size_t>(f.rv), Value::bottom());
  Exec x(m, opt, r.data());
  std::array<Value, 16> small;
  std::vector<Value> big;
  Value* frame = small.data();
  if (static_cast<std::size_t>(f.frame_size) > small.size()) {
    big.resize(static_cast<std::size_t>(f.frame_size));
    frame = big.data();
  }
  int k = 0;
  bind(f.param, input, frame, k);
  Value v = eval(x, *f.body, frame, s, r.data(), logw, Mode::Commit);
  if (v.is_bottom()) fail(ErrorKind::BottomEscape, "'" + f.name + "' produced an undefined value");
  return v;
}

StepOut d_step(const Machine& m, int fn, const Value& input, const State& s, std::span<const double> r,
               const EvalOptions& opt) {
  StepOut out;
  out.state = s;
  out.value = step_in_place(m, fn, input, out.state, r, out.logw, opt);
  return out;
}

EqsOut d_step_eqs(const Machine& m, int fn, const Value& input, const Env& gamma, const State& s,
                  std::span<const double> r, const EvalOptions& opt) {
  const ir::Func& f = m.func(fn);
  const Node& n = where_body(f);
  check_seeds(f, r);
  Exec x(m, opt, r.data());
  std::vector<Value> frame = bind_input(f, input);
  for (const auto& [name, v] : gamma) {
    auto it = f.slots.find(name);
    if (it == f.slots.end()) fail(ErrorKind::UnboundVariable, "unknown variable '" + name + "'");
    frame[static_cast<std::size_t>(it->second)] = v;
  }
  EqsOut out;
  out.state = s;
  std::vector<double> ws(n.eqs.size(), 0.0);
  Env rho;
  for (std::size_t i = 0; i < n.eqs.size(); ++i) {
    const auto& q = n.eqs[i];
    double wq = 0.0;
    Value v = q.init ? init_value(x, q, frame.data(), out.state.kids[1 + i], r.data() + q.seed_off, wq, Mode::Commit)
                     : eval(x, *q.expr, frame.data(), sub(out.state, 1 + i), r.data() + q.seed_off, wq,
                            Mode::Commit);
    ws[i] = wq;
    if (q.slot < 0) continue;
    const auto& name = n.src->eqs[i].name;
    rho[q.init ? name + ".last" : name] = v;
  }
  for (std::size_t i = 0; i < n.eqs.size(); ++i)
    if (n.eqs[i].init) out.state.kids[1 + i].v = frame[static_cast<std::size_t>(n.eqs[i].var_slot)];
  out.env = std::move(rho);
  out.logw = fsum(ws);
  return out;
}

FixOut fix_env(const Machine& m, int fn, const Value& input, const State& s, std::span<const double> r,
               const EvalOptions& opt) {
  const ir::Func& f = m.func(fn);
  const Node& n = where_body(f);
  check_seeds(f, r);
  Exec x(m, opt, r.data());
  std::vector<Value> frame = bind_input(f, input);
  State copy = s;
  FixOut out;
  out.iterations = fixpoint(x, n, frame.data(), copy, r.data());
  out.n_vars = n.n_defined;
  out.env = env_of(f, n, frame.data());
  return out;
}

Runner::Runner(const Machine& m, int fn, EvalOptions opt) : m_(m), fn_(fn), opt_(opt) {
  state_ = d_init(m, fn).first;
  seeds_.assign(static_cast<std::size_t>(m.func(fn).rv), 0.5);
}

Value Runner::step(const Value& input) {
  double w = 0.0;
  return step_in_place(m_, fn_, input, state_, seeds_, w, opt_);
}

}  // namespace muz
