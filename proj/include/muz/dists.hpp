#pragma once

#include <span>
#include <variant>
#include <vector>

#include "muz/value.hpp"

namespace muz {

struct Gaussian {
  double mu;
  double sigma;
};

struct Uniform {
  double a;
  double b;
};

struct Bernoulli {
  double p;
};

struct MvDiagGaussian {
  std::vector<double> mu;
  std::vector<double> sigma;
};

struct Empirical {
  std::vector<Value> support;
  std::vector<double> weights;  // normalized
};

struct Dist {
  std::variant<Gaussian, Uniform, Bernoulli, MvDiagGaussian, Empirical> rep;
};

Dist make_gaussian(double mu, double sigma);
Dist make_uniform(double a, double b);
Dist make_bernoulli(double p);
Dist make_mv_gaussian(std::vector<double> mu, std::vector<double> sigma);
// Weights may be unnormalized; atoms with equal values are not merged.
Dist make_empirical(std::vector<Value> support, std::vector<double> weights);
Dist make_empirical_log(std::vector<Value> support, std::span<const double> logw);

double normal_cdf(double x);
double normal_quantile(double p);

// Inverse-CDF sampling. The single-seed form of MvDiagGaussian spreads the
// bits of u across coordinates; the span form uses one seed per coordinate.
Value icdf(const Dist& d, double u);
Value icdf(const Dist& d, std::span<const double> us);

double pdf(const Dist& d, const Value& v);
double log_pdf(const Dist& d, const Value& v);

// Split one uniform into n uniforms by de-interleaving its 53 mantissa bits.
void split_seed(double u, std::span<double> out);

// Distribution values also cover products: a pair of distributions is the
// product distribution, sampled leaf by leaf (one seed per leaf).
int dist_leaves(const Value& d);
Value sample_value(const Value& d, std::span<const double> us);
double log_pdf_value(const Value& d, const Value& v);

struct Summary {
  std::vector<double> mean;
  std::vector<double> variance;
  double ess = 0.0;
};

Summary summarize(const Empirical& e);

std::vector<double> dist_mean(const Dist& d);

}  // namespace muz
