#include "muz/value.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>

#include "muz/dists.hpp"
#include "muz/error.hpp"

namespace muz {

Value Value::vec(std::vector<double> xs) {
  return Value(Rep(std::make_shared<const std::vector<double>>(std::move(xs))));
}

Value Value::pair(Value a, Value b) {
  return Value(Rep(std::make_shared<const std::pair<Value, Value>>(std::move(a), std::move(b))));
}

Value Value::dist(Dist d) { return Value(Rep(std::make_shared<const Dist>(std::move(d)))); }

double Value::as_real() const {
  if (const double* d = std::get_if<double>(&rep_)) return *d;
  fail(ErrorKind::Type, "expected a real, got " + type_name());
}

bool Value::as_bool() const {
  if (const bool* b = std::get_if<bool>(&rep_)) return *b;
  fail(ErrorKind::Type, "expected a bool, got " + type_name());
}

const std::vector<double>& Value::as_vec() const {
  if (const VecPtr* v = std::get_if<VecPtr>(&rep_)) return **v;
  fail(ErrorKind::Type, "expected a vector, got " + type_name());
}

const Value& Value::fst() const {
  if (const PairPtr* p = std::get_if<PairPtr>(&rep_)) return (*p)->first;
  fail(ErrorKind::Type, "expected a pair, got " + type_name());
}

const Value& Value::snd() const {
  if (const PairPtr* p = std::get_if<PairPtr>(&rep_)) return (*p)->second;
  fail(ErrorKind::Type, "expected a pair, got " + type_name());
}

const Dist& Value::as_dist() const { return *dist_ptr(); }

const DistPtr& Value::dist_ptr() const {
  if (const DistPtr* d = std::get_if<DistPtr>(&rep_)) return *d;
  fail(ErrorKind::Type, "expected a distribution, got " + type_name());
}

std::string Value::type_name() const {
  switch (rep_.index()) {
    case 0: return "bottom";
    case 1: return "nil";
    case 2: return "unit";
    case 3: return "bool";
    case 4: return "real";
    case 5: return "vector";
    case 6: return "pair";
    default: return "distribution";
  }
}

static std::string real_text(double d) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

static std::string dist_text(const Dist& d) {
  struct V {
    std::string operator()(const Gaussian& g) const {
      return "gaussian(" + real_text(g.mu) + ", " + real_text(g.sigma) + ")";
    }
    std::string operator()(const Uniform& u) const {
      return "uniform(" + real_text(u.a) + ", " + real_text(u.b) + ")";
    }
    std::string operator()(const Bernoulli& b) const { return "bernoulli(" + real_text(b.p) + ")"; }
    std::string operator()(const MvDiagGaussian& g) const {
      return "gaussian(" + Value::vec(g.mu).to_string() + ", " + Value::vec(g.sigma).to_string() + ")";
    }
    std::string operator()(const Empirical& e) const {
      return "empirical(" + std::to_string(e.support.size()) + " atoms)";
    }
  };
  return std::visit(V{}, d.rep);
}

std::string Value::to_string() const {
  switch (rep_.index()) {
    case 0: return "_|_";
    case 1: return "nil";
    case 2: return "()";
    case 3: return std::get<bool>(rep_) ? "true" : "false";
    case 4: return real_text(std::get<double>(rep_));
    case 5: {
      std::string s = "[";
      const auto& v = as_vec();
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += "; ";
        s += real_text(v[i]);
      }
      return s + "]";
    }
    case 6: return "(" + fst().to_string() + ", " + snd().to_string() + ")";
    default: return dist_text(as_dist());
  }
}

static bool same_bits(double a, double b) {
  std::uint64_t x, y;
  std::memcpy(&x, &a, sizeof x);
  std::memcpy(&y, &b, sizeof y);
  return x == y;
}

static bool same_reals(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_bits(a[i], b[i])) return false;
  return true;
}

static bool same_dist(const Dist& a, const Dist& b) {
  if (a.rep.index() != b.rep.index()) return false;
  if (auto* g = std::get_if<Gaussian>(&a.rep)) {
    auto& h = std::get<Gaussian>(b.rep);
    return same_bits(g->mu, h.mu) && same_bits(g->sigma, h.sigma);
  }
  if (auto* u = std::get_if<Uniform>(&a.rep)) {
    auto& v = std::get<Uniform>(b.rep);
    return same_bits(u->a, v.a) && same_bits(u->b, v.b);
  }
  if (auto* p = std::get_if<Bernoulli>(&a.rep)) return same_bits(p->p, std::get<Bernoulli>(b.rep).p);
  if (auto* m = std::get_if<MvDiagGaussian>(&a.rep)) {
    auto& n = std::get<MvDiagGaussian>(b.rep);
    return same_reals(m->mu, n.mu) && same_reals(m->sigma, n.sigma);
  }
  auto& e = std::get<Empirical>(a.rep);
  auto& f = std::get<Empirical>(b.rep);
  if (e.support.size() != f.support.size() || !same_reals(e.weights, f.weights)) return false;
  for (std::size_t i = 0; i < e.support.size(); ++i)
    if (!identical(e.support[i], f.support[i])) return false;
  return true;
}

bool identical(const Value& a, const Value& b) {
  if (a.rep().index() != b.rep().index()) return false;
  switch (a.rep().index()) {
    case 0:
    case 1:
    case 2: return true;
    case 3: return a.as_bool() == b.as_bool();
    case 4: return same_bits(a.as_real(), b.as_real());
    case 5: return same_reals(a.as_vec(), b.as_vec());
    case 6: return identical(a.fst(), b.fst()) && identical(a.snd(), b.snd());
    default:
      return a.dist_ptr() == b.dist_ptr() || same_dist(a.as_dist(), b.as_dist());
  }
}

bool value_less(const Value& a, const Value& b) {
  if (a.rep().index() != b.rep().index()) return a.rep().index() < b.rep().index();
  switch (a.rep().index()) {
    case 3: return a.as_bool() < b.as_bool();
    case 4: return a.as_real() < b.as_real();
    case 5: return a.as_vec() < b.as_vec();
    case 6:
      if (value_less(a.fst(), b.fst())) return true;
      if (value_less(b.fst(), a.fst())) return false;
      return value_less(a.snd(), b.snd());
    case 7: return a.dist_ptr().get() < b.dist_ptr().get();
    default: return false;
  }
}

void flatten_reals(const Value& v, std::vector<double>& out) {
  switch (v.rep().index()) {
    case 3: out.push_back(v.as_bool() ? 1.0 : 0.0); break;
    case 4: out.push_back(v.as_real()); break;
    case 5: out.insert(out.end(), v.as_vec().begin(), v.as_vec().end()); break;
    case 6:
      flatten_reals(v.fst(), out);
      flatten_reals(v.snd(), out);
      break;
    case 7: {
      const Dist& d = v.as_dist();
      if (auto* e = std::get_if<Empirical>(&d.rep)) {
        Summary s = summarize(*e);
        out.insert(out.end(), s.mean.begin(), s.mean.end());
      } else {
        auto m = dist_mean(d);
        out.insert(out.end(), m.begin(), m.end());
      }
      break;
    }
    default: break;
  }
}

// Shewchuk's exactly rounded summation (the msum algorithm).
double fsum(std::span<const double> xs) {
  std::vector<double> partials;
  bool neg_inf = false, pos_inf = false, nan = false;
  for (double x : xs) {
    if (std::isnan(x)) {
      nan = true;
      continue;
    }
    if (std::isinf(x)) {
      (x < 0 ? neg_inf : pos_inf) = true;
      continue;
    }
    std::size_t i = 0;
    for (double y : partials) {
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      double hi = x + y;
      double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  if (nan || (neg_inf && pos_inf)) return std::numeric_limits<double>::quiet_NaN();
  if (neg_inf) return -std::numeric_limits<double>::infinity();
  if (pos_inf) return std::numeric_limits<double>::infinity();
  if (partials.empty()) return 0.0;
  // Round the partials (non-overlapping, increasing magnitude) to nearest.
  std::size_t n = partials.size();
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    double x = hi;
    double y = partials[--n];
    hi = x + y;
    double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0 && partials[n - 1] < 0) || (lo > 0 && partials[n - 1] > 0))) {
    double y = lo * 2;
    double x = hi + y;
    double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

}  // namespace muz
