#pragma once

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dibc/devices.hpp"
#include "dibc/estimate.hpp"
#include "dibc/protocol.hpp"
#include "dibc/rng.hpp"

namespace dibc::mc {

struct ExperimentSpec {
  std::string scenario;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  protocol::Variant variant = protocol::Variant::main;
  double theta = std::numbers::pi / 4.0;
  double noise = 1.0;
  std::uint64_t n = 10;
  double i_threshold = 2.0;
  double epsilon = 1.0;
  std::uint64_t k = 100;
  /// Device family for azuma_empirical: "honest" (Werner, visibility `noise`) or "pr".
  std::string device = "honest";
};

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) { return derive_seed(master, index); }

/// Runs `trial(acc, trial_seed(seed, i))` for i in [0, trials), split into
/// contiguous blocks across `jobs` threads. Partial accumulators are merged in
/// block order, so the result does not depend on `jobs`.
template <typename Acc, typename Fn>
Acc run_trials(std::uint64_t trials, std::uint64_t seed, unsigned jobs, Fn&& trial) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::uint64_t>(trials, 1))));
  std::vector<Acc> partial(jobs);
  auto block = [&](unsigned j) {
    const std::uint64_t lo = trials * j / jobs;
    const std::uint64_t hi = trials * (j + 1) / jobs;
    for (std::uint64_t i = lo; i < hi; ++i) trial(partial[j], trial_seed(seed, i));
  };
  if (jobs == 1) {
    block(0);
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (unsigned j = 0; j < jobs; ++j) workers.emplace_back(block, j);
  }
  Acc total{};
  for (const auto& p : partial) total.merge(p);
  return total;
}

/// Mean of the CHSH indicator over uniformly chosen inputs in {0, 1}.
struct ChshEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t rounds = 0;
  bool within(double reference, double sigmas = 3.0) const {
    return std::abs(mean - reference) <= sigmas * std_error;
  }
};

/// Measures `rounds` consecutive rounds starting at `first_round`.
ChshEstimate empirical_chsh(devices::DevicePair& pair, std::uint64_t rounds, std::uint64_t seed,
                            std::uint64_t first_round = 1);

/// Scenarios: gain-deterministic, gain-device-dependent (main protocol),
/// gain-pr (PR protocol, Bob inputs s1 = 1), gain-honest (uniform guess).
Estimate estimate_gain(const ExperimentSpec& spec);

struct ControlResult {
  /// Reveal success given the run got past Bob's CHSH test.
  Estimate conditional;
  Estimate unconditional;
  /// Conditional success split by the bit Alice tried to reveal.
  std::array<Estimate, 2> by_target;
};

/// Scenarios: control (alice_cheat_pair(theta) under spec.variant, which may
/// be main, free_reveal or large_office), control-pr-classical (PR protocol
/// with Bob's box fixed to output 0).
ControlResult estimate_control(const ExperimentSpec& spec);

struct CompletenessResult {
  Estimate abort_rate;
  Estimate conditional_correctness;
};

/// Honest parties, honest_pair(spec.noise) devices, uniform committed bit.
CompletenessResult honest_completeness(const ExperimentSpec& spec);

struct AzumaResult {
  std::uint64_t k = 0;
  double epsilon = 0.0;
  Estimate tail;
  double bound = 1.0;
};

/// Fraction of k-round histories with Delta_k >= epsilon, next to the
/// Azuma-Hoeffding bound. Throws UsageError for a device without a known
/// per-round conditional CHSH expectation.
AzumaResult azuma_empirical(const ExperimentSpec& spec);

/// One batch of histories per k, shared across the epsilon values.
std::vector<AzumaResult> azuma_grid(const ExperimentSpec& spec, std::span<const std::uint64_t> ks,
                                    std::span<const double> epsilons);

struct CounterCheatResult {
  Estimate overall;
  /// Fraction of runs where Bob drew n = N.
  Estimate last_round_drawn;
  /// Success given n = N.
  Estimate conditional_success;
};

CounterCheatResult counter_cheat_demo(std::uint64_t n, std::uint64_t trials, std::uint64_t seed, unsigned jobs = 1);

}  // namespace dibc::mc
