#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "muz/ast.hpp"
#include "muz/passes.hpp"
#include "muz/value.hpp"

namespace muz {

// Opaque per-site inference state (particle sets) kept inside a state tree.
struct InferCell {
  virtual ~InferCell() = default;
};

struct State {
  enum class Tag : std::uint8_t { Empty, Leaf, Tuple, InitSlot, ResetSlot, InferSlot };

  Tag tag = Tag::Empty;
  Value v;                  // Leaf value or InitSlot.prev (Nil before the first step)
  std::vector<State> kids;  // Tuple items | InitSlot {sub} | ResetSlot {initial, current, cond} | InferSlot {args}
  std::shared_ptr<const InferCell> cell;

  static State empty() { return State{}; }
  static State tuple(std::vector<State> items);
  static State init_slot(Value prev, State sub);
  static State reset_slot(State initial, State current, State cond);

  bool is_empty() const { return tag == Tag::Empty; }
};

bool same_state(const State& a, const State& b);
// Collect InitSlot.prev values in tree order.
void init_slot_values(const State& s, std::vector<Value>& out);
int count_tag(const State& s, State::Tag t);

enum class Resampling { Multinomial, Systematic };

// How equation sets are solved: the bounded fixpoint, the static schedule,
// or the schedule when one exists and the fixpoint otherwise.
enum class EqMode { Fixpoint, Scheduled, Auto };

struct InferOptions {
  std::size_t particles = 1000;
  std::size_t cloud = 100;
  std::uint64_t seed = 0;
  double ess_threshold = 0.5;
  Resampling resampling = Resampling::Multinomial;
  unsigned threads = 0;  // 0: MUZ_THREADS or hardware concurrency
  EqMode eqs = EqMode::Auto;
};

struct FixStats {
  std::size_t runs = 0;
  int max_iterations = 0;
  bool bound_ok = true;  // iterations <= |X| + 1 on every run
  std::vector<std::pair<int, int>> log;  // (iterations, |X|) per run, capped
};

// Sampled values per seed index; Bottom marks sites that did not sample.
using TraceRecord = std::vector<Value>;

struct EvalOptions {
  EqMode eqs = EqMode::Fixpoint;
  FixStats* stats = nullptr;
  const InferOptions* infer = nullptr;
  TraceRecord* record = nullptr;
  const TraceRecord* replay = nullptr;
  TraceRecord* site_dists = nullptr;  // distribution seen at each sample site
};

namespace ir {

enum class NK : std::uint8_t {
  Const, Local, Global, Last, Pair, Op, App, Where, Present, Reset, Sample, Factor, Infer, ApfInfer,
};

struct Node;

struct EqNode {
  bool init = false;
  int slot = -1;      // Def: x (-1 for the unit pattern); Init: x.last
  int var_slot = -1;  // Init: slot of x
  const Node* expr = nullptr;
  int rv = 0;
  int seed_off = 0;   // offset within the Where's seed block
  std::vector<int> readers;  // equations of the same where reading `slot`
};

struct Node {
  NK kind = NK::Const;
  OpCode op = OpCode::Add;
  bool stateful = false;
  int slot = -1;
  int global = -1;
  int func = -1;
  int rv = 0;
  int width = 1;
  int uid = 0;
  Value konst;
  std::vector<const Node*> kids;
  std::vector<EqNode> eqs;
  std::vector<int> schedule;
  bool schedulable = true;
  std::string schedule_error;
  int n_defined = 0;
  const Expr* src = nullptr;
};

struct Func {
  std::string name;
  Kind kind = Kind::Det;
  Pattern param;
  const Node* body = nullptr;
  int frame_size = 0;
  int rv = 0;
  std::map<std::string, int> slots;
  ExprPtr source;  // keeps subject expressions alive
};

}  // namespace ir

// Executable form of a uniquified, kind-checked program.
class Machine {
 public:
  explicit Machine(Program p);
  Machine(const Machine&) = delete;
  Machine& operator=(const Machine&) = delete;

  const Program& program() const { return prog_; }
  const KindEnv& kinds() const { return kinds_; }

  int func_index(const std::string& name) const;
  const ir::Func& func(int i) const { return funcs_[static_cast<std::size_t>(i)]; }
  int num_funcs() const { return static_cast<int>(funcs_.size()); }

  // Compile a free-standing expression (already uniquified against the
  // program) whose free variables are `inputs`. Not thread-safe.
  int add_subject(const ExprPtr& e, const std::vector<std::string>& inputs);

  const Value& global(int i) const { return globals_[static_cast<std::size_t>(i)]; }
  const Value* global(const std::string& name) const;

 private:
  const ir::Node* build(const Expr& e, ir::Func& f);
  ir::Node* node();
  void assign_slots(const Expr& e, ir::Func& f);
  void finish_where(ir::Node& n);
  int make_func(const std::string& name, Kind kind, const Pattern& param, const Expr& body);

  Program prog_;
  KindEnv kinds_;
  std::deque<ir::Node> arena_;
  std::vector<ir::Func> funcs_;
  std::vector<Value> globals_;
  std::map<std::string, int> global_index_;
  std::map<std::string, int> func_index_;
  int uid_ = 0;
};

struct StepOut {
  State state;
  Value value;
  double logw = 0.0;
};

struct EqsOut {
  State state;
  Env env;
  double logw = 0.0;
};

struct FixOut {
  Env env;
  int iterations = 0;
  int n_vars = 0;
};

// Right-nested tuple of input values (unit when empty).
Value make_input(const std::vector<Value>& xs);

std::pair<State, int> d_init(const Machine& m, int fn);

StepOut d_step(const Machine& m, int fn, const Value& input, const State& s, std::span<const double> r,
               const EvalOptions& opt = {});

// In-place variant used by the inference runtime.
Value step_in_place(const Machine& m, int fn, const Value& input, State& s, std::span<const double> r,
                    double& logw, const EvalOptions& opt = {});

// The body of `fn` must be a where; gamma gives the values of the where's
// variables (and x.last entries) as seen by the equations.
EqsOut d_step_eqs(const Machine& m, int fn, const Value& input, const Env& gamma, const State& s,
                  std::span<const double> r, const EvalOptions& opt = {});

FixOut fix_env(const Machine& m, int fn, const Value& input, const State& s, std::span<const double> r,
               const EvalOptions& opt = {});

// Drives a node step by step with a zero-length seed vector (det nodes).
class Runner {
 public:
  Runner(const Machine& m, int fn, EvalOptions opt = {});
  Value step(const Value& input);
  const State& state() const { return state_; }

 private:
  const Machine& m_;
  int fn_;
  EvalOptions opt_;
  State state_;
  std::vector<double> seeds_;
};

Value apply_op(OpCode op, std::span<const Value> args);

}  // namespace muz
