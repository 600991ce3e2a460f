#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "muz/ast.hpp"

namespace muz {

enum class Kind { Det, Proba };
using KindEnv = std::map<std::string, Kind>;

// Gives every call a fresh instance id and renames locally bound variables
// that shadow another name of the same declaration (or a global).
Program uniquify(const Program& p);

// Same treatment for a free-standing expression over a uniquified program;
// `inputs` are the names bound by the caller.
ExprPtr uniquify_expr(const Program& p, const ExprPtr& e, const std::vector<std::string>& inputs);

KindEnv kind_check(const Program& p);
Kind expr_kind(const Program& p, const KindEnv& kinds, const Expr& e);

// Number of seeds consumed by one step of e.
int rv_count(const Program& p, const Expr& e);

// Static number of leaves of a distribution expression (product priors are
// pairs of distributions).
int sample_width(const Program& p, const Expr& dist);

// parse + uniquify + kind_check.
Program load_program(std::string_view src);

std::set<std::string> all_names(const Program& p);

}  // namespace muz
