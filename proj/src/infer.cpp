#include "muz/infer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

#include "detail.hpp"

namespace muz {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kResampleTag = 0x7265'7361'6d70'6c65ULL;
constexpr std::uint64_t kCloudTag = 0x636c'6f75'6400'0001ULL;
constexpr std::uint64_t kThetaTag = 0x7468'6574'6100'0002ULL;

thread_local bool t_in_worker = false;

double to_unit(std::uint64_t h) { return (static_cast<double>(h >> 12) + 0.5) * 0x1p-52; }

std::uint64_t prefix(std::uint64_t master, std::uint64_t i, std::uint64_t t) {
  std::uint64_t h = detail::mix64(master ^ 0x6d75'7a00'0000'0000ULL);
  h = detail::mix64(h ^ (i * 0x9e37'79b9'7f4a'7c15ULL + 1));
  return detail::mix64(h ^ (t * 0xc2b2'ae3d'27d4'eb4fULL + 2));
}

std::uint64_t tagged(std::uint64_t master, std::uint64_t tag) { return detail::mix64(master ^ tag); }

void check_weights(std::span<const double> logw) {
  bool any = false;
  for (double w : logw) {
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity())
      fail(ErrorKind::NonFinite, "non-finite particle weight");
    if (w != kNegInf) any = true;
  }
  if (!any) fail(ErrorKind::Degenerate, "all particle weights are zero");
}

bool should_resample(std::span<const double> logw, double threshold) {
  if (threshold >= 1.0) return true;
  return ess_of(logw) < threshold * static_cast<double>(logw.size());
}

Dist posterior(std::vector<Value> values, std::span<const double> logw) {
  return make_empirical_log(std::move(values), logw);
}

std::size_t draw_index(const std::vector<CloudMember>& cloud, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    acc += std::exp(cloud[k].logq);
    if (u < acc) return k;
  }
  for (std::size_t k = cloud.size(); k-- > 0;)
    if (cloud[k].logq != kNegInf) return k;
  return 0;
}

void normalize(std::vector<CloudMember>& cloud) {
  std::vector<double> lq(cloud.size());
  for (std::size_t k = 0; k < cloud.size(); ++k) lq[k] = cloud[k].logq;
  double z = logsumexp(lq);
  if (!std::isfinite(z)) return;
  for (auto& c : cloud) c.logq -= z;
}

struct PfCell : InferCell {
  PfState pf;
};

struct ApfCell : InferCell {
  ApfState apf;
};

}  // namespace

namespace detail {

std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9e37'79b9'7f4a'7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58'476d'1ce4'e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d0'49bb'1331'11ebULL;
  return z ^ (z >> 31);
}

std::shared_ptr<const InferCell> infer_site_step(const Machine& m, const ir::Node& n, std::uint64_t stream,
                                                 const InferCell* cell, const Value& input, const Value& prior,
                                                 const InferOptions& opt, Value& out) {
  if (n.kind == ir::NK::Infer) {
    auto next = std::make_shared<PfCell>();
    if (cell)
      next->pf = static_cast<const PfCell*>(cell)->pf;
    else
      next->pf = pf_init(m, n.func, opt, stream);
    out = Value::dist(pf_step(next->pf, input));
    return next;
  }
  auto next = std::make_shared<ApfCell>();
  if (cell)
    next->apf = static_cast<const ApfCell*>(cell)->apf;
  else
    next->apf = apf_init(m, n.func, prior, opt, stream);
  out = Value::dist(apf_step(next->apf, input));
  return next;
}

}  // namespace detail

double seeds_for(std::uint64_t master, std::uint64_t i, std::uint64_t t, std::uint64_t j) {
  return to_unit(detail::mix64(prefix(master, i, t) ^ (j * 0xd6e8'feb8'6659'fd93ULL + 3)));
}

void fill_seeds(std::uint64_t master, std::uint64_t i, std::uint64_t t, std::span<double> out) {
  const std::uint64_t h = prefix(master, i, t);
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = to_unit(detail::mix64(h ^ (static_cast<std::uint64_t>(j) * 0xd6e8'feb8'6659'fd93ULL + 3)));
}

double logsumexp(std::span<const double> xs) {
  double mx = kNegInf;
  for (double x : xs) mx = std::max(mx, x);
  if (mx == kNegInf || !std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

double ess_of(std::span<const double> logw) {
  double mx = kNegInf;
  for (double x : logw) mx = std::max(mx, x);
  if (mx == kNegInf) return 0.0;
  double s = 0.0, s2 = 0.0;
  for (double x : logw) {
    double w = std::exp(x - mx);
    s += w;
    s2 += w * w;
  }
  return s * s / s2;
}

std::vector<std::size_t> resample(std::span<const double> logw, std::size_t n, Resampling mode, std::uint64_t master,
                                  std::uint64_t t) {
  check_weights(logw);
  double mx = kNegInf;
  for (double x : logw) mx = std::max(mx, x);
  std::vector<double> cum(logw.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    acc += std::exp(logw[i] - mx);
    cum[i] = acc;
  }
  for (auto& c : cum) c /= acc;
  const std::uint64_t rs = tagged(master, kResampleTag);
  std::vector<std::size_t> idx(n);
  auto find = [&](double u) {
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cum.begin());
    if (k >= cum.size()) k = cum.size() - 1;
    while (k > 0 && logw[k] == kNegInf) --k;
    return k;
  };
  if (mode == Resampling::Systematic) {
    double u0 = seeds_for(rs, 0, t, 0);
    for (std::size_t k = 0; k < n; ++k) idx[k] = find((static_cast<double>(k) + u0) / static_cast<double>(n));
  } else {
    for (std::size_t k = 0; k < n; ++k) idx[k] = find(seeds_for(rs, k, t, 0));
  }
  return idx;
}

unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MUZ_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  unsigned k = worker_count(threads);
  if (t_in_worker || k <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  k = static_cast<unsigned>(std::min<std::size_t>(k, n));
  std::vector<std::exception_ptr> errors(k);
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (unsigned c = 0; c < k; ++c) {
    std::size_t lo = n * c / k, hi = n * (c + 1) / k;
    pool.emplace_back([&, c, lo, hi] {
      t_in_worker = true;
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[c] = std::current_exception();
      }
      t_in_worker = false;
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

PfState pf_init(const Machine& m, int fn, const InferOptions& cfg) { return pf_init(m, fn, cfg, cfg.seed); }

PfState pf_init(const Machine& m, int fn, const InferOptions& cfg, std::uint64_t stream) {
  if (cfg.particles == 0) fail(ErrorKind::Config, "the number of particles must be positive");
  if (!(cfg.ess_threshold > 0.0)) fail(ErrorKind::Config, "the ESS threshold must be positive");
  if (m.func(fn).kind != Kind::Proba) fail(ErrorKind::Kind, "infer expects a probabilistic node");
  PfState st;
  st.machine = &m;
  st.fn = fn;
  st.cfg = cfg;
  st.stream = stream;
  State s0 = d_init(m, fn).first;
  st.particles.assign(cfg.particles, Particle{s0, 0.0});
  return st;
}

Dist pf_step(PfState& st, const Value& input) {
  const Machine& m = *st.machine;
  const std::size_t n = st.particles.size();
  std::vector<double> before(n);
  for (std::size_t i = 0; i < n; ++i) before[i] = st.particles[i].logw;
  if (st.t > 0 && should_resample(before, st.cfg.ess_threshold)) {
    auto idx = resample(before, n, st.cfg.resampling, st.stream, st.t);
    std::vector<Particle> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i].state = st.particles[idx[i]].state;
    st.particles = std::move(next);
    std::fill(before.begin(), before.end(), 0.0);
  }
  const std::size_t rv = static_cast<std::size_t>(m.func(st.fn).rv);
  EvalOptions opt;
  opt.eqs = st.cfg.eqs;
  opt.infer = &st.cfg;
  st.values.resize(n);
  parallel_for(n, st.cfg.threads, [&](std::size_t i) {
    std::vector<double> r(rv);
    fill_seeds(st.stream, i, st.t, r);
    double w = 0.0;
    st.values[i] = step_in_place(m, st.fn, input, st.particles[i].state, r, w, opt);
    st.particles[i].logw += w;
  });
  std::vector<double> after(n);
  for (std::size_t i = 0; i < n; ++i) after[i] = st.particles[i].logw;
  check_weights(after);
  st.log_evidence += logsumexp(after) - logsumexp(before);
  ++st.t;
  return posterior(st.values, after);
}

StepOut score_step(const Machine& m, int fn, const Value& input, const State& s, const TraceRecord& trace,
                   const EvalOptions& opt) {
  const std::size_t rv = static_cast<std::size_t>(m.func(fn).rv);
  if (trace.size() != rv) fail(ErrorKind::Config, "trace length does not match the number of sample sites");
  EvalOptions o = opt;
  o.replay = &trace;
  o.record = nullptr;
  std::vector<double> r(rv, 0.5);
  StepOut out;
  out.state = s;
  try {
    out.value = step_in_place(m, fn, input, out.state, r, out.logw, o);
  } catch (const detail::ReplayMiss&) {
    out.state = s;
    out.value = Value::unit();
    out.logw = kNegInf;
  }
  return out;
}

Value theta_mean(const std::vector<CloudMember>& cloud) {
  std::vector<double> mean;
  std::vector<double> flat;
  bool scalar = !cloud.empty() && cloud[0].theta.is_real();
  for (const auto& c : cloud) {
    flat.clear();
    flatten_reals(c.theta, flat);
    if (mean.empty()) mean.assign(flat.size(), 0.0);
    double q = std::exp(c.logq);
    for (std::size_t k = 0; k < flat.size() && k < mean.size(); ++k) mean[k] += q * flat[k];
  }
  if (scalar) return Value(mean.empty() ? 0.0 : mean[0]);
  return Value::vec(std::move(mean));
}

ApfState apf_init(const Machine& m, int model_fn, const Value& prior, const InferOptions& cfg) {
  return apf_init(m, model_fn, prior, cfg, cfg.seed);
}

ApfState apf_init(const Machine& m, int model_fn, const Value& prior, const InferOptions& cfg, std::uint64_t stream) {
  if (cfg.particles == 0 || cfg.cloud == 0) fail(ErrorKind::Config, "particle and cloud sizes must be positive");
  if (!(cfg.ess_threshold > 0.0)) fail(ErrorKind::Config, "the ESS threshold must be positive");
  if (m.func(model_fn).kind != Kind::Proba) fail(ErrorKind::Kind, "APF expects a probabilistic model");
  ApfState st;
  st.machine = &m;
  st.fn = model_fn;
  st.prior = prior;
  st.cfg = cfg;
  st.stream = stream;
  State s0 = d_init(m, model_fn).first;
  const bool unit = prior.is_unit();
  const std::size_t width = unit ? 0 : static_cast<std::size_t>(dist_leaves(prior));
  const std::uint64_t rv = static_cast<std::uint64_t>(m.func(model_fn).rv);
  const std::uint64_t cs = tagged(stream, kCloudTag);
  const double logk = -std::log(static_cast<double>(cfg.cloud));
  st.particles.resize(cfg.particles);
  std::vector<double> u(width);
  for (std::size_t i = 0; i < cfg.particles; ++i) {
    auto& p = st.particles[i];
    p.state = s0;
    p.cloud.resize(cfg.cloud);
    for (std::size_t k = 0; k < cfg.cloud; ++k) {
      for (std::size_t l = 0; l < width; ++l)
        u[l] = k == 0 ? seeds_for(stream, i, 0, rv + l) : seeds_for(cs, i, k, l);
      p.cloud[k].theta = unit ? Value::unit() : sample_value(prior, u);
      p.cloud[k].logq = logk;
    }
  }
  return st;
}

Dist apf_step(ApfState& st, const Value& input) {
  const Machine& m = *st.machine;
  const std::size_t n = st.particles.size();
  std::vector<double> before(n);
  for (std::size_t i = 0; i < n; ++i) before[i] = st.particles[i].logw;
  if (st.t > 0 && should_resample(before, st.cfg.ess_threshold)) {
    auto idx = resample(before, n, st.cfg.resampling, st.stream, st.t);
    std::vector<ApfParticle> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = st.particles[idx[i]];
      next[i].logw = 0.0;
    }
    st.particles = std::move(next);
    std::fill(before.begin(), before.end(), 0.0);
  }
  const std::size_t rv = static_cast<std::size_t>(m.func(st.fn).rv);
  const bool unit = st.prior.is_unit();
  const std::uint64_t ts = tagged(st.stream, kThetaTag);
  EvalOptions opt;
  opt.eqs = st.cfg.eqs;
  opt.infer = &st.cfg;
  st.values.resize(n);
  st.theta_means.resize(n);
  parallel_for(n, st.cfg.threads, [&](std::size_t i) {
    auto& p = st.particles[i];
    std::vector<double> r(rv);
    fill_seeds(st.stream, i, st.t, r);
    const State pre = p.state;
    const std::size_t pick = draw_index(p.cloud, seeds_for(ts, i, st.t, 0));
    auto arg = [&](const Value& theta) { return unit ? input : Value::pair(theta, input); };
    TraceRecord trace;
    EvalOptions rec = opt;
    rec.record = &trace;
    double w = 0.0;
    st.values[i] = step_in_place(m, st.fn, arg(p.cloud[pick].theta), p.state, r, w, rec);
    p.logw += w;
    if (!unit) {
      for (auto& c : p.cloud) {
        if (c.logq == kNegInf) continue;
        c.logq += score_step(m, st.fn, arg(c.theta), pre, trace, opt).logw;
      }
      normalize(p.cloud);
    }
    st.theta_means[i] = unit ? Value::unit() : theta_mean(p.cloud);
  });
  std::vector<double> after(n);
  for (std::size_t i = 0; i < n; ++i) after[i] = st.particles[i].logw;
  check_weights(after);
  st.log_evidence += logsumexp(after) - logsumexp(before);
  ++st.t;
  std::vector<Value> support(n);
  for (std::size_t i = 0; i < n; ++i)
    support[i] = unit ? st.values[i] : Value::pair(st.values[i], st.theta_means[i]);
  return posterior(std::move(support), after);
}

}  // namespace muz
