#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "muz/ast.hpp"
#include "muz/dists.hpp"
#include "muz/engine.hpp"

namespace muz {

// Finite prefix of a weighted stream.
struct Trace {
  std::vector<Value> values;
  std::vector<double> logw;
};

using Streams = std::map<std::string, std::vector<Value>>;
// rand[k][t]: seed k at instant t.
using RandPrefix = std::vector<std::vector<double>>;

// A free-standing expression over a program. `expr` must already be
// uniquified against `program` with `inputs` as its free variables.
struct Subject {
  const Program* program = nullptr;
  ExprPtr expr;
  std::vector<std::string> inputs;
};

Subject make_subject(const Program& p, const std::string& source, const std::vector<std::string>& inputs);
Subject make_subject(const Program& p, const ExprPtr& e, const std::vector<std::string>& inputs);

int subject_rv(const Subject& s);

// Relational evaluation of the first T instants.
Trace rel_eval(const Subject& s, const Streams& h, const RandPrefix& r, int T);

// The same prefix computed by stepping the co-iterative engine.
Trace coit_trace(const Subject& s, const Streams& h, const RandPrefix& r, int T, const EvalOptions& opt = {});

RandPrefix random_prefix(std::uint64_t master, std::uint64_t trial, int rv, int T);
// Seed i of `r` becomes seed perm[i] of the result (identity when empty).
RandPrefix permute(const RandPrefix& r, const std::vector<int>& perm);

struct Report {
  bool pass = true;
  int trials = 0;
  int failures = 0;
  std::string detail;  // JSON counterexample of the first failure, empty on success

  std::string to_json(int indent = 2) const;
};

// Without a permutation both sides read the same seed prefix, sized for the
// hungrier one.
Report equiv_check(const Subject& a, const Subject& b, const std::vector<int>& perm, const Streams& h, int T,
                   int trials, std::uint64_t seed = 1);

Report coit_rel_agree(const Subject& s, const Streams& h, int T, int trials, std::uint64_t seed = 1,
                      const EvalOptions& opt = {});

// Normalized measure of the step values at every instant, computed by
// enumerating the seed cube: Bernoulli sites split at the threshold into two
// cells, other sites use grid_n midpoint cells.
using Measure = std::vector<std::pair<Value, double>>;
std::vector<Measure> grid_infer(const Subject& s, const Streams& h, int T, int grid_n,
                                std::size_t budget = 10'000'000);

double total_variation(const Measure& a, const Measure& b);
double measure_prob(const Measure& m, const Value& v);

}  // namespace muz
