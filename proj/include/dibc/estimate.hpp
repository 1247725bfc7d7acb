#pragma once

#include <cmath>
#include <cstdint>

namespace dibc {

/// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

/// Bernoulli mean with its standard error and 99% normal-approximation interval.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  double ci99_lo = 0.0;
  double ci99_hi = 0.0;

  /// |mean - reference| <= sigmas * std_error.
  bool within(double reference, double sigmas = 3.0) const {
    return std::abs(mean - reference) <= sigmas * std_error;
  }
};

inline Estimate bernoulli_estimate(std::uint64_t successes, std::uint64_t trials) {
  Estimate e;
  e.trials = trials;
  if (trials == 0) return e;
  e.mean = static_cast<double>(successes) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(trials));
  e.ci99_lo = e.mean - kZ99 * e.std_error;
  e.ci99_hi = e.mean + kZ99 * e.std_error;
  return e;
}

/// Success counter; merge is associative and commutative.
struct Tally {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;

  void add(bool success) {
    ++trials;
    successes += success ? 1 : 0;
  }
  Tally& merge(const Tally& other) {
    successes += other.successes;
    trials += other.trials;
    return *this;
  }
  Estimate estimate() const { return bernoulli_estimate(successes, trials); }
  friend bool operator==(const Tally&, const Tally&) = default;
};

}  // namespace dibc
