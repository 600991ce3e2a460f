#pragma once

#include <string>
#include <string_view>

#include "muz/ast.hpp"

namespace muz {

Program parse(std::string_view src);
ExprPtr parse_expr(std::string_view src);

std::string print(const Program& p);
std::string print(const Decl& d);
std::string print(const Expr& e);
std::string print(const Pattern& p);

// JSON rendering, one object per declaration tagged by node kind.
std::string dump_ast(const Program& p, int indent = 2);

bool is_intrinsic(std::string_view name);

}  // namespace muz
