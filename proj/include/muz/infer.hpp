#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "muz/dists.hpp"
#include "muz/engine.hpp"

namespace muz {

// Counter-based uniform in (0,1) for particle i, step t, seed index j.
double seeds_for(std::uint64_t master, std::uint64_t i, std::uint64_t t, std::uint64_t j);
void fill_seeds(std::uint64_t master, std::uint64_t i, std::uint64_t t, std::span<double> out);

double logsumexp(std::span<const double> xs);
double ess_of(std::span<const double> logw);

// Ancestor indices drawn proportionally to exp(logw).
std::vector<std::size_t> resample(std::span<const double> logw, std::size_t n, Resampling mode, std::uint64_t master,
                                  std::uint64_t t);

struct Particle {
  State state;
  double logw = 0.0;
};

struct PfState {
  const Machine* machine = nullptr;
  int fn = -1;
  InferOptions cfg;
  std::uint64_t stream = 0;
  std::size_t t = 0;
  double log_evidence = 0.0;
  std::vector<Particle> particles;
  std::vector<Value> values;
};

PfState pf_init(const Machine& m, int fn, const InferOptions& cfg);
PfState pf_init(const Machine& m, int fn, const InferOptions& cfg, std::uint64_t stream);
// Resample when needed, step every particle and return the normalized
// empirical posterior of the step values.
Dist pf_step(PfState& st, const Value& input);

// Replays a recorded trace: Sample sites return the recorded values and add
// their log-density to the weight. A site without a recorded value yields a
// weight of -inf.
StepOut score_step(const Machine& m, int fn, const Value& input, const State& s, const TraceRecord& trace,
                   const EvalOptions& opt = {});

struct CloudMember {
  Value theta;
  double logq = 0.0;
};

struct ApfParticle {
  State state;
  double logw = 0.0;
  std::vector<CloudMember> cloud;
};

struct ApfState {
  const Machine* machine = nullptr;
  int fn = -1;
  Value prior;
  InferOptions cfg;
  std::uint64_t stream = 0;
  std::size_t t = 0;
  double log_evidence = 0.0;
  std::vector<ApfParticle> particles;
  std::vector<Value> values;
  std::vector<Value> theta_means;
};

// The model takes (theta, input), or input alone when the prior is unit.
// Member 0 of each cloud is drawn with the seeds that a particle filter on
// the definition-expanded source would use, so K = 1 reproduces it.
ApfState apf_init(const Machine& m, int model_fn, const Value& prior, const InferOptions& cfg);
ApfState apf_init(const Machine& m, int model_fn, const Value& prior, const InferOptions& cfg, std::uint64_t stream);
// Returns the empirical posterior over (value, cloud mean of theta).
Dist apf_step(ApfState& st, const Value& input);

Value theta_mean(const std::vector<CloudMember>& cloud);

// Worker count from cfg.threads, MUZ_THREADS, or the hardware.
unsigned worker_count(unsigned requested);
// Runs body(i) for i in [0, n) over contiguous chunks; nested calls run
// inline. The exception of the lowest failing chunk is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace muz
