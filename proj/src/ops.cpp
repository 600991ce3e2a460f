#include <algorithm>
#include <cmath>

#include "muz/dists.hpp"
#include "muz/engine.hpp"

namespace muz {

namespace {

[[noreturn]] void type_error(OpCode op, const std::string& what) {
  fail(ErrorKind::Type, std::string(op_name(op)) + ": " + what);
}

template <class F>
Value arith(OpCode op, const Value& a, const Value& b, F f) {
  if (a.is_real() && b.is_real()) return Value(f(a.as_real(), b.as_real()));
  if (a.is_vec() || b.is_vec()) {
    if (a.is_vec() && b.is_vec()) {
      const auto& x = a.as_vec();
      const auto& y = b.as_vec();
      if (x.size() != y.size()) type_error(op, "vector length mismatch");
      std::vector<double> out(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i], y[i]);
      return Value::vec(std::move(out));
    }
    if (a.is_vec() && b.is_real()) {
      const auto& x = a.as_vec();
      double s = b.as_real();
      std::vector<double> out(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i], s);
      return Value::vec(std::move(out));
    }
    if (a.is_real() && b.is_vec()) {
      double s = a.as_real();
      const auto& y = b.as_vec();
      std::vector<double> out(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) out[i] = f(s, y[i]);
      return Value::vec(std::move(out));
    }
  }
  type_error(op, "unsupported operands " + a.type_name() + " and " + b.type_name());
}

template <class F>
Value unary(OpCode op, const Value& a, F f) {
  if (a.is_real()) return Value(f(a.as_real()));
  if (a.is_vec()) {
    std::vector<double> out = a.as_vec();
    for (auto& x : out) x = f(x);
    return Value::vec(std::move(out));
  }
  type_error(op, "unsupported operand " + a.type_name());
}

std::vector<double> as_reals(const Value& v, std::size_t n) {
  if (v.is_vec()) return v.as_vec();
  return std::vector<double>(n, v.as_real());
}

Value gaussian(const Value& mu, const Value& sigma) {
  if (mu.is_real() && sigma.is_real()) return Value::dist(make_gaussian(mu.as_real(), sigma.as_real()));
  std::size_t n = mu.is_vec() ? mu.as_vec().size() : sigma.as_vec().size();
  return Value::dist(make_mv_gaussian(as_reals(mu, n), as_reals(sigma, n)));
}

Value density(const Value& d, const Value& x) {
  if (d.is_dist()) return Value(pdf(d.as_dist(), x));
  return Value(std::exp(log_pdf_value(d, x)));
}

}  // namespace

Value apply_op(OpCode op, std::span<const Value> a) {
  for (const auto& v : a)
    if (v.is_bottom()) return Value::bottom();
  switch (op) {
    case OpCode::Add: return arith(op, a[0], a[1], [](double x, double y) { return x + y; });
    case OpCode::Sub: return arith(op, a[0], a[1], [](double x, double y) { return x - y; });
    case OpCode::Mul: return arith(op, a[0], a[1], [](double x, double y) { return x * y; });
    case OpCode::Div: return arith(op, a[0], a[1], [](double x, double y) { return x / y; });
    case OpCode::Neg: return unary(op, a[0], [](double x) { return -x; });
    case OpCode::Eq:
      if (a[0].is_real() && a[1].is_real()) return Value(a[0].as_real() == a[1].as_real());
      if (a[0].is_bool() && a[1].is_bool()) return Value(a[0].as_bool() == a[1].as_bool());
      return Value(identical(a[0], a[1]));
    case OpCode::Lt: return Value(a[0].as_real() < a[1].as_real());
    case OpCode::Gt: return Value(a[0].as_real() > a[1].as_real());
    case OpCode::If: return a[0].as_bool() ? a[1] : a[2];
    case OpCode::Gaussian: return gaussian(a[0], a[1]);
    case OpCode::Uniform: return Value::dist(make_uniform(a[0].as_real(), a[1].as_real()));
    case OpCode::Bernoulli: return Value::dist(make_bernoulli(a[0].as_real()));
    case OpCode::Pdf: return density(a[0], a[1]);
    case OpCode::Fst: return a[0].fst();
    case OpCode::Snd: return a[0].snd();
    case OpCode::Exp: return unary(op, a[0], [](double x) { return std::exp(x); });
    case OpCode::Log: return unary(op, a[0], [](double x) { return std::log(x); });
    case OpCode::Sqrt: return unary(op, a[0], [](double x) { return std::sqrt(x); });
    case OpCode::Abs: return unary(op, a[0], [](double x) { return std::fabs(x); });
    case OpCode::Min: return arith(op, a[0], a[1], [](double x, double y) { return std::min(x, y); });
    case OpCode::Max: return arith(op, a[0], a[1], [](double x, double y) { return std::max(x, y); });
    case OpCode::MkVec: {
      std::vector<double> xs;
      xs.reserve(a.size());
      for (const auto& v : a) xs.push_back(v.as_real());
      return Value::vec(std::move(xs));
    }
  }
  type_error(op, "unknown operator");
}

}  // namespace muz
