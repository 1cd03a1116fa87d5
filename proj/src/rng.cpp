#include "hgc/rng.hpp"

#include <cmath>

namespace hgc {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream)
    : key_(mix64(mix64(mix64(seed + kGolden) ^ (stream + 0x632be59bd9b4e019ULL)) ^
                 (substream + 0x8cb92ba72f3d8dd7ULL))) {}

std::uint64_t RandomStream::next() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RandomStream::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t RandomStream::below(std::uint64_t bound) {
  // Rejection keeps the result exactly uniform.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % bound;
}

double RandomStream::exponential(double rate) {
  const double e = -std::log1p(-uniform());
  return std::isinf(rate) ? 0.0 : e / rate;
}

std::int64_t RandomStream::geometric(double failure) {
  if (failure <= 0.0) return 1;
  // Inverse CDF: P(N > x) = failure^x.
  const double u = 1.0 - uniform();  // (0, 1]
  return 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log(failure)));
}

double RandomStream::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace hgc
