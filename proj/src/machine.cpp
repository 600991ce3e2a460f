#include <set>

#include "muz/engine.hpp"

namespace muz {

using ir::NK;

namespace {

void collect_reads(const ir::Node& n, std::set<int>& out) {
  if (n.kind == NK::Local || n.kind == NK::Last) out.insert(n.slot);
  for (const auto* k : n.kids) collect_reads(*k, out);
  for (const auto& q : n.eqs) collect_reads(*q.expr, out);
}

bool any_stateful(const std::vector<const ir::Node*>& kids) {
  for (const auto* k : kids)
    if (k->stateful) return true;
  return false;
}

int sum_rv(const std::vector<const ir::Node*>& kids) {
  int n = 0;
  for (const auto* k : kids) n += k->rv;
  return n;
}

}  // namespace

Machine::Machine(Program p) : prog_(std::move(p)) {
  kinds_ = kind_check(prog_);
  for (const auto& d : prog_.decls) {
    if (d.kind == DeclKind::Let) {
      int fi = make_func(d.name, Kind::Det, Pattern::unit(), *d.body);
      Runner run(*this, fi);
      global_index_[d.name] = static_cast<int>(globals_.size());
      globals_.push_back(run.step(Value::unit()));
    } else {
      int fi = make_func(d.name, d.kind == DeclKind::Proba ? Kind::Proba : Kind::Det, d.param, *d.body);
      func_index_[d.name] = fi;
    }
  }
}

int Machine::func_index(const std::string& name) const {
  auto it = func_index_.find(name);
  if (it == func_index_.end()) fail(ErrorKind::UnboundVariable, "unknown node '" + name + "'");
  return it->second;
}

const Value* Machine::global(const std::string& name) const {
  auto it = global_index_.find(name);
  return it == global_index_.end() ? nullptr : &globals_[static_cast<std::size_t>(it->second)];
}

int Machine::add_subject(const ExprPtr& e, const std::vector<std::string>& inputs) {
  Kind k = expr_kind(prog_, kinds_, *e);
  int fi = make_func("<subject>", k, pattern_of(inputs), *e);
  funcs_[static_cast<std::size_t>(fi)].source = e;
  return fi;
}

ir::Node* Machine::node() {
  arena_.emplace_back();
  ir::Node* n = &arena_.back();
  n->uid = ++uid_;
  return n;
}

int Machine::make_func(const std::string& name, Kind kind, const Pattern& param, const Expr& body) {
  ir::Func f;
  f.name = name;
  f.kind = kind;
  f.param = param;
  for (const auto& x : pattern_names(param)) f.slots.emplace(x, static_cast<int>(f.slots.size()));
  assign_slots(body, f);
  f.frame_size = static_cast<int>(f.slots.size());
  f.body = build(body, f);
  f.rv = f.body->rv;
  funcs_.push_back(std::move(f));
  return static_cast<int>(funcs_.size()) - 1;
}

void Machine::assign_slots(const Expr& e, ir::Func& f) {
  for (const auto& q : e.eqs) {
    if (q.name.empty()) continue;
    std::string key = q.kind == EqKind::Init ? q.name + ".last" : q.name;
    f.slots.emplace(key, static_cast<int>(f.slots.size()));
  }
  for (const auto& a : e.args) assign_slots(*a, f);
  for (const auto& q : e.eqs) assign_slots(*q.expr, f);
}

const ir::Node* Machine::build(const Expr& e, ir::Func& f) {
  ir::Node* n = node();
  n->src = &e;
  auto kids = [&](std::size_t from = 0) {
    for (std::size_t i = from; i < e.args.size(); ++i) n->kids.push_back(build(*e.args[i], f));
    n->stateful = any_stateful(n->kids);
    n->rv = sum_rv(n->kids);
  };
  switch (e.kind) {
    case ExprKind::Const:
      n->kind = NK::Const;
      n->konst = e.constant;
      break;
    case ExprKind::Var: {
      auto it = f.slots.find(e.name);
      if (it != f.slots.end()) {
        n->kind = NK::Local;
        n->slot = it->second;
      } else {
        auto g = global_index_.find(e.name);
        if (g == global_index_.end()) fail(ErrorKind::UnboundVariable, "unbound variable '" + e.name + "'", e.loc);
        n->kind = NK::Global;
        n->global = g->second;
      }
      break;
    }
    case ExprKind::Last: {
      auto it = f.slots.find(e.name + ".last");
      if (it == f.slots.end()) fail(ErrorKind::UnboundVariable, "last of uninitialized '" + e.name + "'", e.loc);
      n->kind = NK::Last;
      n->slot = it->second;
      break;
    }
    case ExprKind::Pair:
      n->kind = NK::Pair;
      kids();
      break;
    case ExprKind::Op:
      n->kind = NK::Op;
      n->op = e.op;
      kids();
      break;
    case ExprKind::App: {
      n->kind = NK::App;
      n->func = func_index(e.name);
      kids();
      const ir::Func& callee = funcs_[static_cast<std::size_t>(n->func)];
      n->stateful = n->stateful || callee.body->stateful;
      n->rv += callee.rv;
      break;
    }
    case ExprKind::Where: {
      n->kind = NK::Where;
      n->kids.push_back(build(*e.args[0], f));
      n->stateful = n->kids[0]->stateful;
      int off = n->kids[0]->rv;
      for (const auto& q : e.eqs) {
        ir::EqNode eq;
        eq.init = q.kind == EqKind::Init;
        if (eq.init) {
          eq.slot = f.slots.at(q.name + ".last");
          eq.var_slot = f.slots.at(q.name);
          n->stateful = true;
        } else if (!q.name.empty()) {
          eq.slot = f.slots.at(q.name);
        }
        if (eq.slot >= 0) ++n->n_defined;
        eq.expr = build(*q.expr, f);
        eq.rv = eq.expr->rv;
        eq.seed_off = off;
        off += eq.rv;
        n->stateful = n->stateful || eq.expr->stateful;
        n->eqs.push_back(eq);
      }
      n->rv = off;
      finish_where(*n);
      break;
    }
    case ExprKind::Present:
      n->kind = NK::Present;
      kids();
      break;
    case ExprKind::Reset:
      n->kind = NK::Reset;
      kids();
      break;
    case ExprKind::Sample:
      n->kind = NK::Sample;
      kids();
      n->width = sample_width(prog_, *e.args[0]);
      n->rv += n->width;
      break;
    case ExprKind::Factor:
      n->kind = NK::Factor;
      kids();
      break;
    case ExprKind::Infer: {
      const Expr& call = *e.args[0];
      n->kind = NK::Infer;
      n->func = func_index(call.name);
      n->kids.push_back(build(*call.args[0], f));
      n->stateful = true;
      n->rv = 0;
      break;
    }
    case ExprKind::ApfInfer:
      n->kind = NK::ApfInfer;
      n->func = func_index(e.name);
      kids();
      n->stateful = true;
      n->rv = 0;
      break;
  }
  return n;
}

// Stable topological order of the equations by instantaneous dependencies:
// a Def produces x, an Init produces x.last.
void Machine::finish_where(ir::Node& n) {
  const std::size_t k = n.eqs.size();
  std::map<int, std::size_t> producer;
  for (std::size_t i = 0; i < k; ++i)
    if (n.eqs[i].slot >= 0) producer[n.eqs[i].slot] = i;
  std::vector<std::set<std::size_t>> deps(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::set<int> reads;
    collect_reads(*n.eqs[i].expr, reads);
    for (int s : reads) {
      auto it = producer.find(s);
      if (it != producer.end()) deps[i].insert(it->second);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    n.eqs[i].readers.clear();
    for (std::size_t j = 0; j < k; ++j)
      if (deps[j].count(i)) n.eqs[i].readers.push_back(static_cast<int>(j));
  }
  std::vector<bool> done(k, false);
  n.schedule.clear();
  while (n.schedule.size() < k) {
    bool progress = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (done[i]) continue;
      bool ready = true;
      for (std::size_t d : deps[i])
        if (!done[d]) ready = false;
      if (!ready) continue;
      done[i] = true;
      n.schedule.push_back(static_cast<int>(i));
      progress = true;
      break;
    }
    if (!progress) {
      n.schedulable = false;
      std::string names;
      for (std::size_t i = 0; i < k; ++i)
        if (!done[i]) {
          const auto& q = n.src->eqs[i];
          names += (names.empty() ? "" : ", ") + (q.name.empty() ? std::string("()") : q.name);
        }
      n.schedule_error = "cyclic instantaneous dependency between " + names;
      n.schedule.clear();
      return;
    }
  }
}

}  // namespace muz
