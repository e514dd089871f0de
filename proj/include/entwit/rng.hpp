#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace entwit {

/// Counter-based SplitMix64 stream.
///
/// Output k of a stream is mix(key + (k + 1) * gamma), so a stream is fully
/// determined by (seed, stream id) and independent workers can be handed
/// disjoint stream ids without sharing state. Satisfies
/// std::uniform_random_bit_generator, so it plugs into <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(mix(mix(seed) ^ mix(stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return mix(key_ + counter_ * kGamma);
  }

  std::uint64_t counter() const noexcept { return counter_; }

  /// A child stream derived from this stream's key; does not advance *this.
  Rng split(std::uint64_t child) const noexcept { return Rng(key_, child); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(*this); }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(*this); }

  /// Standard complex normal: real and imaginary parts each N(0, 1).
  std::complex<double> complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re, im};
  }

  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(*this); }

  /// Flat Dirichlet(1, ..., 1) weights.
  std::vector<double> dirichlet(std::size_t k) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& v : w) {
      v = expo(*this);
      total += v;
    }
    for (auto& v : w) v /= total;
    return w;
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace entwit
