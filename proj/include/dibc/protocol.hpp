#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dibc/devices.hpp"
#include "dibc/estimate.hpp"
#include "dibc/round_record.hpp"
#include "dibc/rng.hpp"

namespace dibc::protocol {

enum class Variant { main, free_reveal, large_office, pr };

std::string_view to_string(Variant v);
/// Throws UsageError for an unknown name.
Variant parse_variant(std::string_view name);

struct ProtocolConfig {
  /// Candidate test rounds (main, free_reveal); number of test pairs (large_office).
  std::uint64_t n = 10;
  double i_threshold = 2.0;
  Variant variant = Variant::main;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const ProtocolConfig&, const ProtocolConfig&) = default;
};

struct AliceStrategy {
  enum class Kind { honest, cheat };

  Kind kind = Kind::honest;
  /// Committed bit (honest only).
  Bit bit = 0;
  /// Input fed to Alice's box at commit time (cheat only). On alice_cheat_pair
  /// inputs 2 and 3 select the midpoint axis.
  int box_input = 2;
  /// Bit a cheating Alice reveals; drawn uniformly after commit when empty.
  std::optional<Bit> reveal_target;
  /// Rounds after the commit round at which the reveal arrives.
  std::uint64_t reveal_delay = 0;
  /// Never send the reveal message.
  bool withhold = false;
  /// Reveal the complement of the box output actually obtained.
  bool flip_reveal = false;

  static AliceStrategy honest(Bit b);
  /// Send q = r, reveal (target, r) with r from the midpoint measurement.
  static AliceStrategy optimal_cheat(std::optional<Bit> target = std::nullopt);
  /// Same message rule with an arbitrary commit-time box input.
  static AliceStrategy custom(int box_input, std::optional<Bit> target = std::nullopt);
};

enum class BobStrategy { honest, gain_cheat_deterministic, gain_cheat_device_dependent };

std::string_view to_string(BobStrategy s);
BobStrategy parse_bob_strategy(std::string_view name);

enum class VerdictKind {
  accepted,
  abort_low_violation,
  abort_token_mismatch,
  abort_correlation_mismatch,
  abort_timeout
};

std::string_view to_string(VerdictKind v);

struct Verdict {
  VerdictKind kind = VerdictKind::abort_timeout;
  std::optional<Bit> bit;

  bool accepted() const { return kind == VerdictKind::accepted; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct BobPrivate {
  std::optional<std::uint64_t> n;
  std::optional<Bit> c;
  std::optional<Bit> d;
  /// Cheating Bob's guess of the committed bit, made before the reveal.
  std::optional<Bit> guess;
  friend bool operator==(const BobPrivate&, const BobPrivate&) = default;
};

struct CommitRecord {
  /// Unknown (empty) for a cheating Alice, who commits to nothing.
  std::optional<Bit> b_committed;
  std::optional<Bit> a;
  Bit q = 0;
  friend bool operator==(const CommitRecord&, const CommitRecord&) = default;
};

struct RevealRecord {
  Bit b_revealed = 0;
  Bit r_c = 0;
  std::uint64_t round = 0;
  friend bool operator==(const RevealRecord&, const RevealRecord&) = default;
};

/// Full history of one run. `rounds` holds the test rounds followed by the
/// commit/reveal round (main, free_reveal), one record per pair (large_office),
/// or the single PR use.
struct Transcript {
  Variant variant = Variant::main;
  ProtocolConfig config;
  std::vector<RoundRecord> rounds;
  BobPrivate bob_private;
  std::optional<CommitRecord> commit;
  std::optional<RevealRecord> reveal;
  Verdict verdict;
  std::optional<double> observed_violation;

  /// Rounds that enter Bob's CHSH estimate.
  std::vector<RoundRecord> test_rounds() const;
  /// Accepted with the bit Alice committed (honest runs only).
  bool accepted_correct() const;
  friend bool operator==(const Transcript&, const Transcript&) = default;
};

/// Sequential protocol. Throws UsageError if config.variant is not main.
Transcript run_main(const ProtocolConfig& config, devices::DevicePair& pair, const AliceStrategy& alice,
                    BobStrategy bob);

/// Bob feeds a private coin d to his box; the correlation check runs only when d = b.
Transcript run_free_reveal(const ProtocolConfig& config, devices::DevicePair& pair, const AliceStrategy& alice,
                           BobStrategy bob);

/// N + 1 isolated pairs, each used once. Throws UsageError on a wrong pair count.
Transcript run_large_office(const ProtocolConfig& config, std::span<devices::DevicePair* const> pairs,
                            const AliceStrategy& alice, BobStrategy bob);

/// Single-shot PR-box protocol; Alice holds box 0.
Transcript run_pr(const ProtocolConfig& config, devices::DevicePair& pair, const AliceStrategy& alice,
                  BobStrategy bob);

/// Bob's guessing accuracy in the main protocol against an honest Alice with
/// uniform b and a. `bob` = honest means a uniformly random guess.
Estimate bob_gain_cheat_main(BobStrategy bob, std::uint64_t trials, std::uint64_t seed, std::uint64_t n = 2);

}  // namespace dibc::protocol
