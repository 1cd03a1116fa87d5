#pragma once

#include <cstdint>
#include <limits>

namespace hgc {

// Counter-based stream keyed by (seed, stream, substream). Two streams with
// different keys are statistically independent; the draws of a stream depend
// only on its key and position, so trials can be evaluated in any order.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next(); }

  std::uint64_t next();
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound);
  // Exponential with the given rate; an infinite rate yields 0.
  double exponential(double rate);
  // Number of transmissions until the first success when each attempt fails
  // with probability `failure`; support {1, 2, ...}.
  std::int64_t geometric(double failure);
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace hgc
