#include "geobeam/random.hpp"

#include <cmath>
#include <numbers>

namespace geobeam {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(splitmix64(splitmix64(seed) ^ (stream_id * 0xd1b54a32d192ed03ULL))) {}

std::uint64_t Stream::next_u64() { return splitmix64(key_ + 0x632be59bd9b4e019ULL * ++counter_); }

double Stream::uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

double Stream::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Stream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  spare_ = rad * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return rad * std::cos(2.0 * std::numbers::pi * u2);
}

std::complex<double> Stream::complex_normal() {
  const double a = normal();
  const double b = normal();
  return {a * std::numbers::sqrt2 / 2.0, b * std::numbers::sqrt2 / 2.0};
}

Stream Stream::split(std::uint64_t child) const { return Stream(key_, child + 1); }

}  // namespace geobeam
