#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "muz/ast.hpp"
#include "muz/value.hpp"

namespace muz {

enum ExitCode { kExitOk = 0, kExitStatic = 1, kExitDegenerate = 2, kExitIo = 3 };

int exit_code_for(ErrorKind k);

// Observation table: one column per flattened input, one row per instant.
struct ObsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

ObsTable read_obs_csv(const std::string& text);
// Builds the input of instant t for a node parameter. A name maps to column
// `name`, or to columns name_0, name_1, ... read as a vector.
Value obs_input(const ObsTable& obs, const Pattern& param, std::size_t t);

// Reals of a step output; distributions contribute their mean.
void flatten_output(const Value& v, std::vector<double>& out);

std::string fmt_real(double x);

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace muz
