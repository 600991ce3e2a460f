#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "muz/ast.hpp"

namespace muz {

using ConstSet = std::set<std::string>;

bool const_check(const ConstSet& c, const Expr& e);
// Least set D of variables defined by `eqs` that are constant given C + D.
ConstSet const_eqs(const ConstSet& c, const std::vector<Eq>& eqs);
// Global declarations with constant bodies.
ConstSet global_consts(const Program& p);

// Constant parameters of one node in order of first appearance.
using ParamMap = std::vector<std::pair<std::string, ExprPtr>>;
using ParamEnv = std::map<std::string, ParamMap>;

std::string prior_name(const std::string& f);
std::string model_name(const std::string& f);

ParamEnv apf_analyze(const Program& p);

// Seed routing of one compiled node: perm[i] is the position of source seed i
// in the layout [model seeds : prior seeds] of the definition expansion.
struct SeedPerm {
  std::string node;
  std::string model;
  std::string prior;
  int source_rv = 0;
  int model_rv = 0;
  int prior_width = 0;
  std::vector<int> perm;
};

struct ApfOutput {
  Program program;
  ParamEnv phi;
  std::vector<SeedPerm> perms;
};

// `p` must be uniquified and kind-checked. The result is uniquified again.
ApfOutput apf_compile(const Program& p);
ApfOutput apf_compile(const Program& p, const ParamEnv& phi);

const SeedPerm* find_perm(const ApfOutput& out, const std::string& node);

// `f__model((t, input)) where rec init t = sample(f__prior) and t = last t`,
// or `f__model(input)` when f has no constant parameters.
ExprPtr definition_expansion(const ApfOutput& out, const std::string& f, ExprPtr input);
ExprPtr definition_expansion(const Program& compiled, const std::string& f, bool has_params, ExprPtr input);

std::string phi_json(const ParamEnv& phi, int indent = -1);
std::string perm_json(const std::vector<SeedPerm>& perms, int indent = 2);
std::vector<SeedPerm> perms_from_json(const std::string& text);

}  // namespace muz
