#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace muz {

struct Dist;
class Value;

struct Bottom {};
struct Nil {};
struct Unit {};

using VecPtr = std::shared_ptr<const std::vector<double>>;
using PairPtr = std::shared_ptr<const std::pair<Value, Value>>;
using DistPtr = std::shared_ptr<const Dist>;

// Runtime value of the flat domain. Bottom is the undefined value used by the
// fixpoint; Nil only appears as the "no previous value" marker of init slots.
class Value {
 public:
  using Rep = std::variant<Bottom, Nil, Unit, bool, double, VecPtr, PairPtr, DistPtr>;

  Value() : rep_(Bottom{}) {}
  Value(double d) : rep_(d) {}  // NOLINT
  Value(bool b) : rep_(b) {}    // NOLINT
  Value(int) = delete;

  static Value bottom() { return Value(Rep(Bottom{})); }
  static Value nil() { return Value(Rep(Nil{})); }
  static Value unit() { return Value(Rep(Unit{})); }
  static Value real(double d) { return Value(d); }
  static Value boolean(bool b) { return Value(b); }
  static Value vec(std::vector<double> xs);
  static Value pair(Value a, Value b);
  static Value dist(Dist d);
  static Value dist(DistPtr d) { return Value(Rep(std::move(d))); }

  bool is_bottom() const { return rep_.index() == 0; }
  bool is_nil() const { return rep_.index() == 1; }
  bool is_unit() const { return rep_.index() == 2; }
  bool is_bool() const { return rep_.index() == 3; }
  bool is_real() const { return rep_.index() == 4; }
  bool is_vec() const { return rep_.index() == 5; }
  bool is_pair() const { return rep_.index() == 6; }
  bool is_dist() const { return rep_.index() == 7; }
  bool defined() const { return !is_bottom(); }

  double as_real() const;
  bool as_bool() const;
  const std::vector<double>& as_vec() const;
  const Value& fst() const;
  const Value& snd() const;
  const Dist& as_dist() const;
  const DistPtr& dist_ptr() const;

  const Rep& rep() const { return rep_; }

  std::string to_string() const;
  std::string type_name() const;

 private:
  explicit Value(Rep r) : rep_(std::move(r)) {}
  Rep rep_;
};

// Exact structural equality; reals are compared bit for bit.
bool identical(const Value& a, const Value& b);
inline bool operator==(const Value& a, const Value& b) { return identical(a, b); }
inline bool operator!=(const Value& a, const Value& b) { return !identical(a, b); }

// Total order used to aggregate atoms of discrete measures.
bool value_less(const Value& a, const Value& b);

// Flatten a value into reals (bool -> 0/1, pairs depth first, unit -> none).
void flatten_reals(const Value& v, std::vector<double>& out);

using Env = std::map<std::string, Value>;

// Exactly rounded sum of log-weights; the result does not depend on the order
// of the terms. -inf terms dominate.
double fsum(std::span<const double> xs);

}  // namespace muz
