#pragma once

#include <complex>
#include <cstdint>

namespace geobeam {

// Counter-based stream splitter. Stream(seed, id) gives the same numbers no
// matter which worker draws them, so parallel sweeps stay reproducible.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  double uniform();                 // [0,1)
  double uniform(double a, double b);
  double normal();                  // standard normal, Box-Muller
  std::complex<double> complex_normal();  // E|z|^2 = 1

  Stream split(std::uint64_t child) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace geobeam
