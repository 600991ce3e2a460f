#include "muz/dists.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "muz/error.hpp"

namespace muz {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void check_seed(double u) {
  if (!(u >= 0.0 && u < 1.0)) fail(ErrorKind::Domain, "seed outside [0,1): " + std::to_string(u));
}

// Acklam's rational approximation of the lower-tail quantile, p in (0, 0.5].
double acklam(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

double lower_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  double x = acklam(p);
  double err = normal_cdf(x) - p;
  double dens = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  if (dens > 0.0) x -= err / dens;
  return x;
}

std::vector<double> cumulative(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  std::partial_sum(w.begin(), w.end(), c.begin());
  return c;
}

}  // namespace

Dist make_gaussian(double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    fail(ErrorKind::Domain, "gaussian: sigma must be positive, got " + std::to_string(sigma));
  return Dist{Gaussian{mu, sigma}};
}

Dist make_uniform(double a, double b) {
  if (!(a < b)) fail(ErrorKind::Domain, "uniform: requires a < b");
  return Dist{Uniform{a, b}};
}

Dist make_bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Domain, "bernoulli: p outside [0,1]");
  return Dist{Bernoulli{p}};
}

Dist make_mv_gaussian(std::vector<double> mu, std::vector<double> sigma) {
  if (mu.size() != sigma.size()) fail(ErrorKind::Domain, "gaussian: dimension mismatch");
  for (double s : sigma)
    if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorKind::Domain, "gaussian: sigma must be positive");
  return Dist{MvDiagGaussian{std::move(mu), std::move(sigma)}};
}

Dist make_empirical(std::vector<Value> support, std::vector<double> weights) {
  if (support.empty()) fail(ErrorKind::EmptySupport, "empirical distribution with no atoms");
  if (support.size() != weights.size()) fail(ErrorKind::Domain, "empirical: size mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) fail(ErrorKind::Domain, "empirical: negative weight");
    total += w;
  }
  if (!(total > 0.0)) fail(ErrorKind::Degenerate, "empirical: total weight is zero");
  if (!std::isfinite(total)) fail(ErrorKind::NonFinite, "empirical: infinite total weight");
  for (double& w : weights) w /= total;
  return Dist{Empirical{std::move(support), std::move(weights)}};
}

Dist make_empirical_log(std::vector<Value> support, std::span<const double> logw) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double l : logw) {
    if (std::isnan(l) || l == std::numeric_limits<double>::infinity())
      fail(ErrorKind::NonFinite, "non-finite log-weight");
    mx = std::max(mx, l);
  }
  if (mx == -std::numeric_limits<double>::infinity())
    fail(ErrorKind::Degenerate, "all weights are zero");
  std::vector<double> w(logw.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(logw[i] - mx);
  return make_empirical(std::move(support), std::move(w));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (p > 0.5) return -lower_quantile(1.0 - p);
  return lower_quantile(p);
}

void split_seed(double u, std::span<double> out) {
  const std::size_t n = out.size();
  if (n == 0) return;
  if (n == 1) {
    out[0] = u;
    return;
  }
  const auto m = static_cast<std::uint64_t>(std::ldexp(u, 53));
  std::vector<std::uint64_t> bits(n, 0);
  std::vector<int> count(n, 0);
  for (int i = 0; i < 53; ++i) {
    std::size_t c = static_cast<std::size_t>(i) % n;
    bits[c] = (bits[c] << 1) | ((m >> (52 - i)) & 1u);
    ++count[c];
  }
  for (std::size_t c = 0; c < n; ++c)
    out[c] = std::ldexp(static_cast<double>(bits[c]) + 0.5, -count[c]);
}

Value icdf(const Dist& d, double u) {
  check_seed(u);
  if (auto* g = std::get_if<Gaussian>(&d.rep)) return Value(g->mu + g->sigma * normal_quantile(u));
  if (auto* un = std::get_if<Uniform>(&d.rep)) return Value(un->a + u * (un->b - un->a));
  if (auto* b = std::get_if<Bernoulli>(&d.rep)) return Value(u >= 1.0 - b->p);
  if (auto* m = std::get_if<MvDiagGaussian>(&d.rep)) {
    std::vector<double> us(m->mu.size());
    split_seed(u, us);
    return icdf(d, std::span<const double>(us));
  }
  const auto& e = std::get<Empirical>(d.rep);
  auto cum = cumulative(e.weights);
  double target = u * cum.back();
  auto it = std::upper_bound(cum.begin(), cum.end(), target);
  std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
  while (e.weights[i] == 0.0 && i > 0) --i;
  return e.support[i];
}

Value icdf(const Dist& d, std::span<const double> us) {
  if (auto* m = std::get_if<MvDiagGaussian>(&d.rep)) {
    if (us.size() != m->mu.size()) fail(ErrorKind::Domain, "gaussian: one seed per coordinate expected");
    std::vector<double> x(us.size());
    for (std::size_t k = 0; k < us.size(); ++k) {
      check_seed(us[k]);
      x[k] = m->mu[k] + m->sigma[k] * normal_quantile(us[k]);
    }
    return Value::vec(std::move(x));
  }
  if (us.size() != 1) fail(ErrorKind::Domain, "scalar distribution expects one seed");
  return icdf(d, us[0]);
}

double log_pdf(const Dist& d, const Value& v) {
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  if (auto* g = std::get_if<Gaussian>(&d.rep)) {
    double z = (v.as_real() - g->mu) / g->sigma;
    return -0.5 * z * z - std::log(g->sigma) - kLogSqrt2Pi;
  }
  if (auto* u = std::get_if<Uniform>(&d.rep)) {
    double x = v.as_real();
    if (x < u->a || x > u->b) return ninf;
    return -std::log(u->b - u->a);
  }
  if (auto* b = std::get_if<Bernoulli>(&d.rep)) {
    double p = v.as_bool() ? b->p : 1.0 - b->p;
    return std::log(p);
  }
  if (auto* m = std::get_if<MvDiagGaussian>(&d.rep)) {
    const auto& x = v.as_vec();
    if (x.size() != m->mu.size()) fail(ErrorKind::Type, "gaussian: dimension mismatch in pdf");
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      double z = (x[k] - m->mu[k]) / m->sigma[k];
      acc += -0.5 * z * z - std::log(m->sigma[k]) - kLogSqrt2Pi;
    }
    return acc;
  }
  const auto& e = std::get<Empirical>(d.rep);
  double mass = 0.0;
  for (std::size_t i = 0; i < e.support.size(); ++i)
    if (identical(e.support[i], v)) mass += e.weights[i];
  return std::log(mass);
}

double pdf(const Dist& d, const Value& v) {
  if (auto* g = std::get_if<Gaussian>(&d.rep)) {
    double z = (v.as_real() - g->mu) / g->sigma;
    return kInvSqrt2Pi / g->sigma * std::exp(-0.5 * z * z);
  }
  if (auto* u = std::get_if<Uniform>(&d.rep)) {
    double x = v.as_real();
    return (x < u->a || x > u->b) ? 0.0 : 1.0 / (u->b - u->a);
  }
  if (auto* b = std::get_if<Bernoulli>(&d.rep)) return v.as_bool() ? b->p : 1.0 - b->p;
  return std::exp(log_pdf(d, v));
}

int dist_leaves(const Value& d) {
  if (d.is_pair()) return dist_leaves(d.fst()) + dist_leaves(d.snd());
  if (d.is_dist()) return 1;
  fail(ErrorKind::Type, "sample: expected a distribution, got " + d.type_name());
}

static Value sample_rec(const Value& d, std::span<const double> us, std::size_t& k) {
  if (d.is_pair()) {
    Value a = sample_rec(d.fst(), us, k);
    Value b = sample_rec(d.snd(), us, k);
    return Value::pair(std::move(a), std::move(b));
  }
  return icdf(d.as_dist(), us[k++]);
}

Value sample_value(const Value& d, std::span<const double> us) {
  if (d.is_dist() && us.size() == 1) return icdf(d.as_dist(), us[0]);
  if (static_cast<std::size_t>(dist_leaves(d)) != us.size())
    fail(ErrorKind::Type, "sample: seed count does not match the product distribution");
  std::size_t k = 0;
  return sample_rec(d, us, k);
}

double log_pdf_value(const Value& d, const Value& v) {
  if (d.is_pair()) return log_pdf_value(d.fst(), v.fst()) + log_pdf_value(d.snd(), v.snd());
  return log_pdf(d.as_dist(), v);
}

Summary summarize(const Empirical& e) {
  if (e.support.empty()) fail(ErrorKind::EmptySupport, "summary of an empty distribution");
  Summary s;
  std::vector<double> flat;
  std::vector<std::vector<double>> rows;
  rows.reserve(e.support.size());
  for (const auto& v : e.support) {
    flat.clear();
    flatten_reals(v, flat);
    rows.push_back(flat);
  }
  const std::size_t dim = rows.front().size();
  s.mean.assign(dim, 0.0);
  s.variance.assign(dim, 0.0);
  double sq = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) fail(ErrorKind::Type, "summary: atoms of different shapes");
    for (std::size_t k = 0; k < dim; ++k) s.mean[k] += e.weights[i] * rows[i][k];
    sq += e.weights[i] * e.weights[i];
  }
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < dim; ++k) {
      double dlt = rows[i][k] - s.mean[k];
      s.variance[k] += e.weights[i] * dlt * dlt;
    }
  s.ess = 1.0 / sq;
  return s;
}

std::vector<double> dist_mean(const Dist& d) {
  if (auto* g = std::get_if<Gaussian>(&d.rep)) return {g->mu};
  if (auto* u = std::get_if<Uniform>(&d.rep)) return {0.5 * (u->a + u->b)};
  if (auto* b = std::get_if<Bernoulli>(&d.rep)) return {b->p};
  if (auto* m = std::get_if<MvDiagGaussian>(&d.rep)) return m->mu;
  return summarize(std::get<Empirical>(d.rep)).mean;
}

}  // namespace muz
