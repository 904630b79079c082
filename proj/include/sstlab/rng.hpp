#pragma once

#include <cstdint>
#include <cmath>
#include <limits>

namespace sstlab {

struct SeedSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based generator: output k is a fixed mix of (key, k), so a stream
// is fully determined by (seed, stream) and never shares state with others.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(SeedSpec spec);
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : CounterRng(SeedSpec{seed, stream}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Exp(1) variate.
  double exponential() { return -std::log(uniform()); }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sstlab
