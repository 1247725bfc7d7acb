#include "dibc/montecarlo.hpp"

#include <cmath>
#include <string>

#include "dibc/analysis.hpp"
#include "dibc/errors.hpp"

namespace dibc::mc {
namespace {

using protocol::AliceStrategy;
using protocol::BobStrategy;
using protocol::ProtocolConfig;
using protocol::Transcript;
using protocol::Variant;
using protocol::VerdictKind;

// Per-trial sub-streams.
constexpr std::uint64_t kSetupStream = 0;
constexpr std::uint64_t kDeviceStream = 1;
constexpr std::uint64_t kProtocolStream = 2;

struct ControlTally {
  Tally conditional;
  Tally unconditional;
  std::array<Tally, 2> by_target;
  void merge(const ControlTally& o) {
    conditional.merge(o.conditional);
    unconditional.merge(o.unconditional);
    by_target[0].merge(o.by_target[0]);
    by_target[1].merge(o.by_target[1]);
  }
};

struct CompletenessTally {
  Tally aborts;
  Tally correct;
  void merge(const CompletenessTally& o) {
    aborts.merge(o.aborts);
    correct.merge(o.correct);
  }
};

struct AzumaTally {
  std::vector<Tally> cells;
  void merge(const AzumaTally& o) {
    if (cells.size() < o.cells.size()) cells.resize(o.cells.size());
    for (std::size_t i = 0; i < o.cells.size(); ++i) cells[i].merge(o.cells[i]);
  }
};

struct CounterTally {
  Tally overall;
  Tally last_round;
  Tally conditional;
  void merge(const CounterTally& o) {
    overall.merge(o.overall);
    last_round.merge(o.last_round);
    conditional.merge(o.conditional);
  }
};

// Runs one honest-Bob protocol instance of `variant` on pairs built by `make`.
template <typename MakePair>
Transcript run_variant(Variant variant, const ProtocolConfig& config, MakePair&& make, const AliceStrategy& alice,
                       BobStrategy bob) {
  switch (variant) {
    case Variant::main: {
      auto pair = make(0);
      return protocol::run_main(config, *pair, alice, bob);
    }
    case Variant::free_reveal: {
      auto pair = make(0);
      return protocol::run_free_reveal(config, *pair, alice, bob);
    }
    case Variant::large_office: {
      std::vector<std::unique_ptr<devices::DevicePair>> owned;
      std::vector<devices::DevicePair*> pairs;
      for (std::uint64_t i = 0; i <= config.n; ++i) {
        owned.push_back(make(i));
        pairs.push_back(owned.back().get());
      }
      return protocol::run_large_office(config, pairs, alice, bob);
    }
    case Variant::pr: {
      auto pair = make(0);
      return protocol::run_pr(config, *pair, alice, bob);
    }
  }
  throw UsageError("unknown variant");
}

bool passed_selection(const Transcript& t) {
  if (t.verdict.kind == VerdictKind::abort_low_violation) return false;
  return !t.observed_violation || *t.observed_violation >= t.config.i_threshold;
}

}  // namespace

ChshEstimate empirical_chsh(devices::DevicePair& pair, std::uint64_t rounds, std::uint64_t seed,
                            std::uint64_t first_round) {
  Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (std::uint64_t i = 0; i < rounds; ++i) {
    RoundRecord rec;
    rec.s0 = rng.bit();
    rec.s1 = rng.bit();
    rec.r0 = pair.measure({0, *rec.s0, first_round + i});
    rec.r1 = pair.measure({1, *rec.s1, first_round + i});
    const double v = analysis::chsh_indicator(rec);
    sum += v;
    sum_sq += v * v;
  }
  ChshEstimate out;
  out.rounds = rounds;
  if (rounds == 0) return out;
  const double nd = static_cast<double>(rounds);
  out.mean = sum / nd;
  const double var = std::max(0.0, sum_sq / nd - out.mean * out.mean);
  out.std_error = std::sqrt(var / nd);
  return out;
}

Estimate estimate_gain(const ExperimentSpec& spec) {
  const std::uint64_t n = std::max<std::uint64_t>(spec.n, 2);
  if (spec.scenario == "gain-honest") {
    return run_trials<Tally>(spec.trials, spec.seed, spec.jobs, [](Tally& t, std::uint64_t seed) {
             Rng rng(seed);
             const Bit b = rng.bit();
             t.add(rng.bit() == b);
           })
        .estimate();
  }
  BobStrategy bob;
  Variant variant = Variant::main;
  if (spec.scenario == "gain-deterministic")
    bob = BobStrategy::gain_cheat_deterministic;
  else if (spec.scenario == "gain-device-dependent")
    bob = BobStrategy::gain_cheat_device_dependent;
  else if (spec.scenario == "gain-pr") {
    bob = BobStrategy::gain_cheat_device_dependent;
    variant = Variant::pr;
  } else
    throw UsageError("unknown gain scenario '" + spec.scenario + "'");

  const auto model = devices::honest_model(spec.noise);
  return run_trials<Tally>(spec.trials, spec.seed, spec.jobs,
                           [&](Tally& tally, std::uint64_t seed) {
                             Rng setup(derive_seed(seed, kSetupStream));
                             const Bit b = setup.bit();
                             const ProtocolConfig config{n, -4.0, variant, derive_seed(seed, kProtocolStream)};
                             auto make = [&](std::uint64_t) -> std::unique_ptr<devices::DevicePair> {
                               const std::uint64_t device_seed = derive_seed(seed, kDeviceStream);
                               if (variant == Variant::pr) return devices::pr_pair(device_seed);
                               if (bob == BobStrategy::gain_cheat_deterministic) return devices::bob_cheat_pair();
                               return devices::honest_pair(model, device_seed);
                             };
                             const Transcript t = run_variant(variant, config, make, AliceStrategy::honest(b), bob);
                             tally.add(t.bob_private.guess == b);
                           })
      .estimate();
}

ControlResult estimate_control(const ExperimentSpec& spec) {
  const bool pr_classical = spec.scenario == "control-pr-classical";
  if (!pr_classical && spec.scenario != "control")
    throw UsageError("unknown control scenario '" + spec.scenario + "'");
  const Variant variant = pr_classical ? Variant::pr : spec.variant;
  if (!pr_classical && variant == Variant::pr)
    throw UsageError("scenario control needs variant main, free_reveal or large_office");
  const auto model = pr_classical ? nullptr : devices::alice_cheat_model(spec.theta);

  const ControlTally tally = run_trials<ControlTally>(
      spec.trials, spec.seed, spec.jobs, [&](ControlTally& acc, std::uint64_t seed) {
        Rng setup(derive_seed(seed, kSetupStream));
        const Bit target = setup.bit();
        const ProtocolConfig config{spec.n, spec.i_threshold, variant, derive_seed(seed, kProtocolStream)};
        auto make = [&](std::uint64_t index) -> std::unique_ptr<devices::DevicePair> {
          if (pr_classical) return devices::classical_pair({0, 0, 0, 0}, {0, 0, 0, 0});
          return devices::alice_cheat_pair(model, derive_seed(derive_seed(seed, kDeviceStream), index));
        };
        const AliceStrategy alice = pr_classical ? AliceStrategy::custom(0, target)
                                                 : AliceStrategy::optimal_cheat(target);
        const Transcript t = run_variant(variant, config, make, alice, BobStrategy::honest);
        const bool success = t.verdict.accepted() && t.verdict.bit == target;
        acc.unconditional.add(success);
        if (passed_selection(t)) {
          acc.conditional.add(success);
          acc.by_target[target].add(success);
        }
      });
  return {tally.conditional.estimate(),
          tally.unconditional.estimate(),
          {tally.by_target[0].estimate(), tally.by_target[1].estimate()}};
}

CompletenessResult honest_completeness(const ExperimentSpec& spec) {
  const auto model = spec.variant == Variant::pr ? nullptr : devices::honest_model(spec.noise);
  const CompletenessTally tally = run_trials<CompletenessTally>(
      spec.trials, spec.seed, spec.jobs, [&](CompletenessTally& acc, std::uint64_t seed) {
        Rng setup(derive_seed(seed, kSetupStream));
        const Bit b = setup.bit();
        const ProtocolConfig config{spec.n, spec.i_threshold, spec.variant, derive_seed(seed, kProtocolStream)};
        auto make = [&](std::uint64_t index) -> std::unique_ptr<devices::DevicePair> {
          const std::uint64_t device_seed = derive_seed(derive_seed(seed, kDeviceStream), index);
          if (spec.variant == Variant::pr) return devices::pr_pair(device_seed);
          return devices::honest_pair(model, device_seed);
        };
        const Transcript t = run_variant(spec.variant, config, make, AliceStrategy::honest(b), BobStrategy::honest);
        const bool aborted = !passed_selection(t);
        acc.aborts.add(aborted);
        if (!aborted) acc.correct.add(t.accepted_correct());
      });
  return {tally.aborts.estimate(), tally.correct.estimate()};
}

std::vector<AzumaResult> azuma_grid(const ExperimentSpec& spec, std::span<const std::uint64_t> ks,
                                    std::span<const double> epsilons) {
  double expected;
  std::shared_ptr<const devices::QuantumModel> model;
  if (spec.device == "honest") {
    model = devices::honest_model(spec.noise);
    expected = analysis::kTsirelson * spec.noise;
  } else if (spec.device == "pr") {
    expected = 4.0;
  } else {
    throw UsageError("device '" + spec.device + "' has no known conditional CHSH expectation");
  }
  for (double e : epsilons)
    if (!(e >= 0.0)) throw UsageError("epsilon must be nonnegative");

  std::vector<AzumaResult> out;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    const std::uint64_t k = ks[ki];
    if (k < 1) throw UsageError("azuma needs k >= 1");
    const AzumaTally tally = run_trials<AzumaTally>(
        spec.trials, derive_seed(spec.seed, k), spec.jobs, [&](AzumaTally& acc, std::uint64_t seed) {
          std::unique_ptr<devices::DevicePair> pair;
          if (model)
            pair = devices::honest_pair(model, derive_seed(seed, kDeviceStream));
          else
            pair = devices::pr_pair(derive_seed(seed, kDeviceStream));
          const ChshEstimate history = empirical_chsh(*pair, k, derive_seed(seed, kSetupStream));
          // The devices are memoryless, so E(I(W_n) | w_{n-1}) is the same every round.
          const double delta = history.mean - expected;
          acc.cells.resize(epsilons.size());
          for (std::size_t e = 0; e < epsilons.size(); ++e) acc.cells[e].add(delta >= epsilons[e]);
        });
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      const Tally cell = e < tally.cells.size() ? tally.cells[e] : Tally{};
      out.push_back({k, epsilons[e], cell.estimate(), analysis::azuma_tail(k, epsilons[e])});
    }
  }
  return out;
}

AzumaResult azuma_empirical(const ExperimentSpec& spec) {
  const std::uint64_t ks[] = {spec.k};
  const double eps[] = {spec.epsilon};
  return azuma_grid(spec, ks, eps).front();
}

CounterCheatResult counter_cheat_demo(std::uint64_t n, std::uint64_t trials, std::uint64_t seed, unsigned jobs) {
  if (n < 2) throw UsageError("counter-cheat demo needs N > 1");
  const CounterTally tally =
      run_trials<CounterTally>(trials, seed, jobs, [&](CounterTally& acc, std::uint64_t trial) {
        Rng setup(derive_seed(trial, kSetupStream));
        const Bit target = setup.bit();
        auto pair = devices::counter_cheat_pair(n + 1, derive_seed(trial, kDeviceStream));
        const ProtocolConfig config{n, 2.0, Variant::main, derive_seed(trial, kProtocolStream)};
        const Transcript t = protocol::run_main(config, *pair, AliceStrategy::custom(2, target), BobStrategy::honest);
        const bool success = t.verdict.accepted() && t.verdict.bit == target;
        const bool last = t.bob_private.n == n;
        acc.overall.add(success);
        acc.last_round.add(last);
        if (last && passed_selection(t)) acc.conditional.add(success);
      });
  return {tally.overall.estimate(), tally.last_round.estimate(), tally.conditional.estimate()};
}

}  // namespace dibc::mc
