#include <json.hpp>

#include "muz/syntax.hpp"

namespace muz {

namespace {

using nlohmann::ordered_json;

const char* tag(ExprKind k) {
  switch (k) {
    case ExprKind::Const: return "Const";
    case ExprKind::Var: return "Var";
    case ExprKind::Pair: return "Pair";
    case ExprKind::Op: return "Op";
    case ExprKind::Last: return "Last";
    case ExprKind::App: return "App";
    case ExprKind::Where: return "Where";
    case ExprKind::Present: return "Present";
    case ExprKind::Reset: return "Reset";
    case ExprKind::Sample: return "Sample";
    case ExprKind::Factor: return "Factor";
    case ExprKind::Infer: return "Infer";
    case ExprKind::ApfInfer: return "ApfInfer";
  }
  return "?";
}

ordered_json pattern_json(const Pattern& p) {
  switch (p.kind) {
    case Pattern::Kind::Name: return p.name;
    case Pattern::Kind::Unit: return ordered_json::array();
    case Pattern::Kind::Pair: return ordered_json::array({pattern_json(p.items[0]), pattern_json(p.items[1])});
  }
  return nullptr;
}

ordered_json expr_json(const Expr& e) {
  ordered_json j;
  j["tag"] = tag(e.kind);
  switch (e.kind) {
    case ExprKind::Const:
      if (e.constant.is_real())
        j["value"] = e.constant.as_real();
      else if (e.constant.is_bool())
        j["value"] = e.constant.as_bool();
      else
        j["value"] = e.constant.to_string();
      break;
    case ExprKind::Var:
    case ExprKind::Last: j["name"] = e.name; break;
    case ExprKind::Op: j["op"] = op_name(e.op); break;
    case ExprKind::App:
      j["callee"] = e.name;
      if (!e.inst.empty()) j["instance"] = e.inst;
      break;
    case ExprKind::ApfInfer: j["model"] = e.name; break;
    default: break;
  }
  if (!e.args.empty()) {
    ordered_json kids = ordered_json::array();
    for (const auto& a : e.args) kids.push_back(expr_json(*a));
    j["args"] = kids;
  }
  if (e.kind == ExprKind::Where) {
    ordered_json eqs = ordered_json::array();
    for (const auto& q : e.eqs) {
      ordered_json x;
      x["tag"] = q.kind == EqKind::Init ? "Init" : "Def";
      x["name"] = q.name;
      x["expr"] = expr_json(*q.expr);
      eqs.push_back(x);
    }
    j["eqs"] = eqs;
  }
  return j;
}

}  // namespace

std::string dump_ast(const Program& p, int indent) {
  ordered_json out = ordered_json::array();
  for (const auto& d : p.decls) {
    ordered_json j;
    j["tag"] = d.kind == DeclKind::Let ? "GlobalLet" : d.kind == DeclKind::Node ? "Node" : "Proba";
    j["name"] = d.name;
    if (d.kind != DeclKind::Let) j["param"] = pattern_json(d.param);
    j["body"] = expr_json(*d.body);
    out.push_back(j);
  }
  return out.dump(indent);
}

}  // namespace muz
