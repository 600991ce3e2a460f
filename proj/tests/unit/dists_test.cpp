#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "muz/dists.hpp"
#include "muz/error.hpp"

using namespace muz;

namespace {

// Independent normal quantile: bisection on the erfc-based CDF.
double quantile_oracle(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double cdf_oracle(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double real_of(const Value& v) { return v.as_real(); }

}  // namespace

TEST(Icdf, Uniform) { EXPECT_DOUBLE_EQ(real_of(icdf(make_uniform(0.0, 1.0), 0.25)), 0.25); }

TEST(Icdf, GaussianMedian) { EXPECT_EQ(real_of(icdf(make_gaussian(0.0, 1.0), 0.5)), 0.0); }

TEST(Icdf, GaussianUpperTail) {
  EXPECT_NEAR(real_of(icdf(make_gaussian(0.0, 1.0), 0.975)), 1.959964, 1e-5);
  EXPECT_NEAR(real_of(icdf(make_gaussian(2.0, 3.0), 0.975)), 2.0 + 3.0 * 1.959964, 3e-5);
}

TEST(Icdf, QuantileMatchesBisection) {
  for (double p : {1e-12, 1e-8, 1e-4, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1 - 1e-4, 1 - 1e-8}) {
    const double x = normal_quantile(p);
    EXPECT_NEAR(x, quantile_oracle(p), 1e-9 * std::max(1.0, std::abs(x))) << p;
  }
}

TEST(Icdf, CdfMatchesErfc) {
  for (double x = -8.0; x <= 8.0; x += 0.25) EXPECT_NEAR(normal_cdf(x), cdf_oracle(x), 1e-15);
}

TEST(Icdf, Monotone) {
  const Dist g = make_gaussian(1.0, 2.0);
  double prev = -INFINITY;
  for (int k = 1; k < 10000; ++k) {
    const double x = real_of(icdf(g, k / 10000.0));
    ASSERT_GT(x, prev);
    prev = x;
  }
}

TEST(Icdf, BernoulliThreshold) {
  const Dist b = make_bernoulli(0.3);
  EXPECT_FALSE(icdf(b, 0.5).as_bool());
  EXPECT_FALSE(icdf(b, std::nextafter(0.7, 0.0)).as_bool());
  EXPECT_TRUE(icdf(b, 0.7).as_bool());
  EXPECT_TRUE(icdf(b, 0.99).as_bool());
}

TEST(Icdf, GaussianKolmogorovSmirnov) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 20000;
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) {
    double s = u(rng);
    if (s == 0.0) s = 0.5;
    xs.push_back(real_of(icdf(make_gaussian(0.0, 1.0), s)));
  }
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = cdf_oracle(xs[static_cast<std::size_t>(i)]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(d, 1.95 / std::sqrt(static_cast<double>(n)));  // alpha = 0.001
}

TEST(Icdf, SeedOutsideUnitInterval) {
  EXPECT_THROW(icdf(make_gaussian(0.0, 1.0), 1.0), Error);
  EXPECT_THROW(icdf(make_uniform(0.0, 1.0), -0.1), Error);
  EXPECT_EQ(real_of(icdf(make_uniform(0.0, 1.0), 0.0)), 0.0);
}

TEST(Icdf, MvGaussianOneSeedPerCoordinate) {
  const Dist m = make_mv_gaussian({1.0, -1.0}, {1.0, 2.0});
  const double us[] = {0.5, 0.975};
  const Value v = icdf(m, std::span<const double>(us));
  const auto& x = v.as_vec();
  ASSERT_EQ(x.size(), 2u);
  EXPECT_EQ(x[0], 1.0);
  EXPECT_NEAR(x[1], -1.0 + 2.0 * 1.959964, 1e-4);
}

TEST(SplitSeed, StaysInUnitInterval) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(3);
  for (int i = 0; i < 1000; ++i) {
    split_seed(u(rng), out);
    for (double v : out) {
      EXPECT_GE(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(Pdf, Examples) {
  EXPECT_DOUBLE_EQ(pdf(make_bernoulli(0.3), Value(true)), 0.3);
  EXPECT_DOUBLE_EQ(pdf(make_bernoulli(0.3), Value(false)), 0.7);
  EXPECT_EQ(pdf(make_uniform(0.0, 2.0), Value(3.0)), 0.0);
  EXPECT_DOUBLE_EQ(pdf(make_uniform(0.0, 2.0), Value(1.0)), 0.5);
  EXPECT_NEAR(pdf(make_gaussian(0.0, 1.0), Value(0.0)), 1.0 / std::sqrt(2.0 * M_PI), 1e-12);
  EXPECT_NEAR(pdf(make_gaussian(0.0, 1.0), Value(0.0)), 0.3989423, 1e-6);
}

TEST(Pdf, LogPdfAgrees) {
  const Dist g = make_gaussian(0.5, 1.5);
  for (double x : {-3.0, 0.0, 0.5, 2.0}) EXPECT_NEAR(std::log(pdf(g, Value(x))), log_pdf(g, Value(x)), 1e-12);
  EXPECT_EQ(log_pdf(make_uniform(0.0, 1.0), Value(2.0)), -INFINITY);
}

TEST(Pdf, IntegratesToOne) {
  const Dist g = make_gaussian(1.0, 0.7);
  const Dist un = make_uniform(-1.0, 3.0);
  double sg = 0.0, su = 0.0;
  const double h = 1e-3;
  for (double x = -10.0; x < 10.0; x += h) {
    sg += pdf(g, Value(x + 0.5 * h)) * h;
    su += pdf(un, Value(x + 0.5 * h)) * h;
  }
  EXPECT_NEAR(sg, 1.0, 1e-6);
  EXPECT_NEAR(su, 1.0, 1e-6);
}

TEST(Pdf, DomainErrors) {
  EXPECT_THROW(make_gaussian(0.0, 0.0), Error);
  EXPECT_THROW(make_uniform(1.0, 1.0), Error);
  EXPECT_THROW(make_bernoulli(1.5), Error);
}

TEST(Summary, TwoAtoms) {
  Dist d = make_empirical({Value(1.0), Value(3.0)}, {0.5, 0.5});
  Summary s = summarize(std::get<Empirical>(d.rep));
  EXPECT_DOUBLE_EQ(s.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(s.variance[0], 1.0);
  EXPECT_DOUBLE_EQ(s.ess, 2.0);
}

TEST(Summary, SingleAtom) {
  Dist d = make_empirical({Value(5.0)}, {1.0});
  Summary s = summarize(std::get<Empirical>(d.rep));
  EXPECT_EQ(s.mean[0], 5.0);
  EXPECT_EQ(s.variance[0], 0.0);
  EXPECT_EQ(s.ess, 1.0);
}

TEST(Summary, NormalDraws) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Value> xs;
  for (int i = 0; i < 1000; ++i) xs.emplace_back(n(rng));
  Dist d = make_empirical(xs, std::vector<double>(1000, 1.0));
  Summary s = summarize(std::get<Empirical>(d.rep));
  EXPECT_NEAR(s.mean[0], 0.0, 0.1);
  EXPECT_NEAR(s.ess, 1000.0, 1e-6);
}

TEST(Summary, UnnormalizedLogWeights) {
  const double lw[] = {std::log(3.0) + 700.0, 700.0};
  Dist d = make_empirical_log({Value(0.0), Value(1.0)}, lw);
  const auto& e = std::get<Empirical>(d.rep);
  EXPECT_NEAR(e.weights[0], 0.75, 1e-12);
  EXPECT_NEAR(dist_mean(d)[0], 0.25, 1e-12);
}

TEST(Summary, EmptySupport) { EXPECT_THROW(make_empirical({}, {}), Error); }

TEST(Product, PairOfDistributions) {
  Value d = Value::pair(Value::dist(make_gaussian(0.0, 1.0)), Value::dist(make_bernoulli(0.5)));
  EXPECT_EQ(dist_leaves(d), 2);
  const double us[] = {0.5, 0.9};
  Value v = sample_value(d, us);
  EXPECT_EQ(v.fst(), Value(0.0));
  EXPECT_EQ(v.snd(), Value(true));
  EXPECT_NEAR(log_pdf_value(d, v), std::log(0.3989422804014327 * 0.5), 1e-12);
}

TEST(Icdf, FineGridKolmogorovSmirnov) {
  const int n = 10000;
  for (const Dist& d : {make_gaussian(-1.0, 0.5), make_uniform(2.0, 5.0)}) {
    std::vector<double> xs;
    for (int k = 0; k < n; ++k) xs.push_back(real_of(icdf(d, (2.0 * k + 1.0) / (2.0 * n))));
    double stat = 0.0;
    for (int k = 0; k < n; ++k) {
      const double x = xs[static_cast<std::size_t>(k)];
      const double f = std::holds_alternative<Gaussian>(d.rep) ? cdf_oracle((x + 1.0) / 0.5) : (x - 2.0) / 3.0;
      stat = std::max({stat, std::abs(f - static_cast<double>(k) / n), std::abs(f - static_cast<double>(k + 1) / n)});
    }
    EXPECT_LT(stat, 0.02);
  }
}
