#include "dibc/protocol.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "dibc/analysis.hpp"
#include "dibc/errors.hpp"

namespace dibc::protocol {
namespace {

using devices::DevicePair;

constexpr std::uint64_t kBobStream = 1;
constexpr std::uint64_t kAliceStream = 2;

struct Parties {
  explicit Parties(std::uint64_t seed) : bob(derive_seed(seed, kBobStream)), alice(derive_seed(seed, kAliceStream)) {}
  Rng bob;
  Rng alice;
};

Bit measure(DevicePair& pair, int box, int input, std::uint64_t round) {
  return pair.measure({box, input, round});
}

void set_side(RoundRecord& rec, int box, int input, Bit output) {
  (box == 0 ? rec.s0 : rec.s1) = input;
  (box == 0 ? rec.r0 : rec.r1) = output;
}

std::optional<int> output_of(const RoundRecord& rec, int box) { return box == 0 ? rec.r0 : rec.r1; }

// Bob's random-selection tests on rounds 1..n; returns the observed violation.
double run_tests(Transcript& t, DevicePair& pair, Rng& bob, std::uint64_t n) {
  t.rounds.reserve(n + 1);
  for (std::uint64_t k = 1; k <= n; ++k) {
    RoundRecord rec;
    const int s0 = bob.bit();
    const int s1 = bob.bit();
    set_side(rec, 0, s0, measure(pair, 0, s0, k));
    set_side(rec, 1, s1, measure(pair, 1, s1, k));
    t.rounds.push_back(rec);
  }
  return analysis::running_violation(t.rounds);
}

struct AliceCommit {
  Bit r = 0;
  CommitRecord record;
};

// Alice's action on her box at commit time. Honest: input b + offset, token
// r xor a b. Cheat: input box_input, token r.
AliceCommit alice_commit(const AliceStrategy& alice, DevicePair& pair, int box, std::uint64_t round,
                         RoundRecord& rec, Rng& rng, int honest_offset) {
  AliceCommit out;
  if (alice.kind == AliceStrategy::Kind::honest) {
    const int input = alice.bit + honest_offset;
    out.r = measure(pair, box, input, round);
    set_side(rec, box, input, out.r);
    const Bit a = rng.bit();
    out.record = {alice.bit, a, static_cast<Bit>(out.r ^ (a & alice.bit))};
  } else {
    out.r = measure(pair, box, alice.box_input, round);
    set_side(rec, box, alice.box_input, out.r);
    out.record = {std::nullopt, std::nullopt, out.r};
  }
  return out;
}

Bit revealed_bit(const AliceStrategy& alice, Rng& rng) {
  if (alice.kind == AliceStrategy::Kind::honest) return alice.bit;
  return alice.reveal_target ? *alice.reveal_target : rng.bit();
}

Bit claimed_output(const AliceStrategy& alice, Bit r) { return alice.flip_reveal ? static_cast<Bit>(r ^ 1) : r; }

bool token_ok(Bit q, Bit r, Bit b) { return q == r || q == (r ^ b); }

Verdict abort(VerdictKind k) { return {k, std::nullopt}; }

void check_variant(const ProtocolConfig& config, Variant expected) {
  if (config.variant != expected)
    throw UsageError("config variant " + std::string(to_string(config.variant)) + " used with the " +
                     std::string(to_string(expected)) + " engine");
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::main: return "main";
    case Variant::free_reveal: return "free_reveal";
    case Variant::large_office: return "large_office";
    case Variant::pr: return "pr";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::main, Variant::free_reveal, Variant::large_office, Variant::pr})
    if (name == to_string(v)) return v;
  throw UsageError("unknown variant '" + std::string(name) + "'");
}

std::string_view to_string(BobStrategy s) {
  switch (s) {
    case BobStrategy::honest: return "honest";
    case BobStrategy::gain_cheat_deterministic: return "gain_cheat_deterministic";
    case BobStrategy::gain_cheat_device_dependent: return "gain_cheat_device_dependent";
  }
  return "?";
}

BobStrategy parse_bob_strategy(std::string_view name) {
  for (BobStrategy s : {BobStrategy::honest, BobStrategy::gain_cheat_deterministic,
                        BobStrategy::gain_cheat_device_dependent})
    if (name == to_string(s)) return s;
  throw UsageError("unknown Bob strategy '" + std::string(name) + "'");
}

std::string_view to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::accepted: return "Accepted";
    case VerdictKind::abort_low_violation: return "AbortLowViolation";
    case VerdictKind::abort_token_mismatch: return "AbortTokenMismatch";
    case VerdictKind::abort_correlation_mismatch: return "AbortCorrelationMismatch";
    case VerdictKind::abort_timeout: return "AbortTimeout";
  }
  return "?";
}

AliceStrategy AliceStrategy::honest(Bit b) {
  AliceStrategy s;
  s.kind = Kind::honest;
  s.bit = b & 1;
  return s;
}

AliceStrategy AliceStrategy::optimal_cheat(std::optional<Bit> target) { return custom(2, target); }

AliceStrategy AliceStrategy::custom(int box_input, std::optional<Bit> target) {
  AliceStrategy s;
  s.kind = Kind::cheat;
  s.box_input = box_input;
  s.reveal_target = target;
  return s;
}

std::vector<RoundRecord> Transcript::test_rounds() const {
  std::vector<RoundRecord> out;
  switch (variant) {
    case Variant::main:
    case Variant::free_reveal:
      if (bob_private.n) {
        const auto n = std::min<std::size_t>(*bob_private.n, rounds.size());
        out.assign(rounds.begin(), rounds.begin() + static_cast<std::ptrdiff_t>(n));
      }
      break;
    case Variant::large_office:
      for (std::size_t i = 0; i < rounds.size(); ++i)
        if (bob_private.n && i + 1 != *bob_private.n && rounds[i].complete()) out.push_back(rounds[i]);
      break;
    case Variant::pr:
      break;
  }
  return out;
}

bool Transcript::accepted_correct() const {
  return verdict.accepted() && commit && commit->b_committed && verdict.bit == commit->b_committed;
}

Transcript run_main(const ProtocolConfig& config, DevicePair& pair, const AliceStrategy& alice, BobStrategy bob) {
  check_variant(config, Variant::main);
  if (config.n < 2) throw UsageError("main protocol needs N > 1");
  Parties rng(config.rng_seed);
  Transcript t;
  t.variant = Variant::main;
  t.config = config;

  // Random selection.
  const std::uint64_t n = rng.bob.between(1, config.n);
  t.bob_private.n = n;
  t.observed_violation = run_tests(t, pair, rng.bob, n);
  if (bob == BobStrategy::honest && *t.observed_violation < config.i_threshold) {
    t.verdict = abort(VerdictKind::abort_low_violation);
    return t;
  }
  const Bit c = rng.bob.bit();
  const int c_bar = 1 - c;
  t.bob_private.c = c;

  // Commit.
  const std::uint64_t round = n + 1;
  RoundRecord rec;
  const AliceCommit commit = alice_commit(alice, pair, c, round, rec, rng.alice, 2);
  t.commit = commit.record;
  const Bit q = commit.record.q;
  bool bob_box_used = false;
  if (bob == BobStrategy::gain_cheat_deterministic) {
    t.bob_private.guess = q;
  } else if (bob == BobStrategy::gain_cheat_device_dependent) {
    // Bob's input 0 matches Alice's input 2 on the honest devices.
    const Bit mine = measure(pair, c_bar, 0, round);
    set_side(rec, c_bar, 0, mine);
    bob_box_used = true;
    t.bob_private.guess = mine == q ? 0 : 1;
  }

  // Reveal: must arrive before t_{n+1}.
  if (alice.withhold || alice.reveal_delay > 0) {
    t.rounds.push_back(rec);
    t.verdict = abort(VerdictKind::abort_timeout);
    return t;
  }
  const Bit b = revealed_bit(alice, rng.alice);
  const Bit r_claim = claimed_output(alice, commit.r);
  t.reveal = RevealRecord{b, r_claim, round};
  if (!token_ok(q, r_claim, b)) {
    t.rounds.push_back(rec);
    t.verdict = abort(VerdictKind::abort_token_mismatch);
    return t;
  }
  bool checked = true;
  if (!bob_box_used)
    set_side(rec, c_bar, b, measure(pair, c_bar, b, round));
  else
    checked = b == 0;
  t.rounds.push_back(rec);
  if (checked && output_of(rec, c_bar) != static_cast<int>(r_claim)) {
    t.verdict = abort(VerdictKind::abort_correlation_mismatch);
    return t;
  }
  t.verdict = {VerdictKind::accepted, b};
  return t;
}

Transcript run_free_reveal(const ProtocolConfig& config, DevicePair& pair, const AliceStrategy& alice,
                           BobStrategy bob) {
  check_variant(config, Variant::free_reveal);
  if (config.n < 2) throw UsageError("free-reveal protocol needs N > 1");
  Parties rng(config.rng_seed);
  Transcript t;
  t.variant = Variant::free_reveal;
  t.config = config;

  const std::uint64_t n = rng.bob.between(1, config.n);
  t.bob_private.n = n;
  t.observed_violation = run_tests(t, pair, rng.bob, n);
  if (bob == BobStrategy::honest && *t.observed_violation < config.i_threshold) {
    t.verdict = abort(VerdictKind::abort_low_violation);
    return t;
  }
  const Bit c = rng.bob.bit();
  Bit d = rng.bob.bit();
  const int c_bar = 1 - c;
  t.bob_private.c = c;

  const std::uint64_t round = n + 1;
  RoundRecord rec;
  const AliceCommit commit = alice_commit(alice, pair, c, round, rec, rng.alice, 2);
  t.commit = commit.record;
  const Bit q = commit.record.q;

  // At t_{n+1} Bob feeds d into his box regardless of when Alice reveals.
  if (bob == BobStrategy::gain_cheat_device_dependent) d = 0;
  t.bob_private.d = d;
  const Bit mine = measure(pair, c_bar, d, round);
  set_side(rec, c_bar, d, mine);
  t.rounds.push_back(rec);
  if (bob == BobStrategy::gain_cheat_deterministic)
    t.bob_private.guess = q;
  else if (bob == BobStrategy::gain_cheat_device_dependent)
    t.bob_private.guess = mine == q ? 0 : 1;

  if (alice.withhold) {
    t.verdict = abort(VerdictKind::abort_timeout);
    return t;
  }
  const Bit b = revealed_bit(alice, rng.alice);
  const Bit r_claim = claimed_output(alice, commit.r);
  t.reveal = RevealRecord{b, r_claim, round + alice.reveal_delay};
  if (!token_ok(q, r_claim, b)) {
    t.verdict = abort(VerdictKind::abort_token_mismatch);
    return t;
  }
  if (d == b && mine != r_claim) {
    t.verdict = abort(VerdictKind::abort_correlation_mismatch);
    return t;
  }
  t.verdict = {VerdictKind::accepted, b};
  return t;
}

Transcript run_large_office(const ProtocolConfig& config, std::span<DevicePair* const> pairs,
                            const AliceStrategy& alice, BobStrategy bob) {
  check_variant(config, Variant::large_office);
  if (config.n < 1) throw UsageError("large-office protocol needs N >= 1");
  if (pairs.size() != config.n + 1)
    throw UsageError("large-office protocol needs N+1 = " + std::to_string(config.n + 1) + " pairs, got " +
                     std::to_string(pairs.size()));
  if (std::set<DevicePair*>(pairs.begin(), pairs.end()).size() != pairs.size() ||
      std::find(pairs.begin(), pairs.end(), nullptr) != pairs.end())
    throw UsageError("large-office pairs must be distinct");

  Parties rng(config.rng_seed);
  Transcript t;
  t.variant = Variant::large_office;
  t.config = config;
  t.rounds.assign(pairs.size(), RoundRecord{});

  const std::uint64_t n = rng.bob.between(1, config.n + 1);
  const Bit c = rng.bob.bit();
  const int c_bar = 1 - c;
  t.bob_private.n = n;
  t.bob_private.c = c;
  DevicePair& chosen = *pairs[n - 1];
  RoundRecord& rec = t.rounds[n - 1];

  const AliceCommit commit = alice_commit(alice, chosen, c, 1, rec, rng.alice, 2);
  t.commit = commit.record;
  const Bit q = commit.record.q;
  bool bob_box_used = false;
  if (bob == BobStrategy::gain_cheat_deterministic) {
    t.bob_private.guess = q;
  } else if (bob == BobStrategy::gain_cheat_device_dependent) {
    const Bit mine = measure(chosen, c_bar, 0, 1);
    set_side(rec, c_bar, 0, mine);
    bob_box_used = true;
    t.bob_private.guess = mine == q ? 0 : 1;
  }

  if (alice.withhold) {
    t.verdict = abort(VerdictKind::abort_timeout);
    return t;
  }
  const Bit b = revealed_bit(alice, rng.alice);
  const Bit r_claim = claimed_output(alice, commit.r);
  t.reveal = RevealRecord{b, r_claim, 1 + alice.reveal_delay};
  if (!token_ok(q, r_claim, b)) {
    t.verdict = abort(VerdictKind::abort_token_mismatch);
    return t;
  }

  // One simultaneous measurement event over every pair.
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (k + 1 == n) continue;
    const int s0 = rng.bob.bit();
    const int s1 = rng.bob.bit();
    set_side(t.rounds[k], 0, s0, measure(*pairs[k], 0, s0, 1));
    set_side(t.rounds[k], 1, s1, measure(*pairs[k], 1, s1, 1));
  }
  bool checked = true;
  if (!bob_box_used)
    set_side(rec, c_bar, b, measure(chosen, c_bar, b, 1));
  else
    checked = b == 0;
  t.observed_violation = analysis::running_violation(t.test_rounds());

  if (checked && output_of(rec, c_bar) != static_cast<int>(r_claim)) {
    t.verdict = abort(VerdictKind::abort_correlation_mismatch);
    return t;
  }
  if (*t.observed_violation < config.i_threshold) {
    t.verdict = abort(VerdictKind::abort_low_violation);
    return t;
  }
  t.verdict = {VerdictKind::accepted, b};
  return t;
}

Transcript run_pr(const ProtocolConfig& config, DevicePair& pair, const AliceStrategy& alice, BobStrategy bob) {
  check_variant(config, Variant::pr);
  Parties rng(config.rng_seed);
  Transcript t;
  t.variant = Variant::pr;
  t.config = config;
  RoundRecord rec;

  const AliceCommit commit = alice_commit(alice, pair, 0, 1, rec, rng.alice, 0);
  t.commit = commit.record;
  const Bit q = commit.record.q;
  if (bob == BobStrategy::gain_cheat_deterministic) {
    t.bob_private.guess = q;
  } else if (bob == BobStrategy::gain_cheat_device_dependent) {
    // Treat q as r0 and read s0 off the PR constraint with s1 = 1.
    const Bit mine = measure(pair, 1, 1, 1);
    set_side(rec, 1, 1, mine);
    t.bob_private.guess = q ^ mine;
  }

  if (alice.withhold) {
    t.rounds.push_back(rec);
    t.verdict = abort(VerdictKind::abort_timeout);
    return t;
  }
  const Bit s0 = revealed_bit(alice, rng.alice);
  const Bit r_claim = claimed_output(alice, commit.r);
  t.reveal = RevealRecord{s0, r_claim, 1 + alice.reveal_delay};
  if (!token_ok(q, r_claim, s0)) {
    t.rounds.push_back(rec);
    t.verdict = abort(VerdictKind::abort_token_mismatch);
    return t;
  }
  if (!rec.r1) {
    const int s1 = rng.bob.bit();
    set_side(rec, 1, s1, measure(pair, 1, s1, 1));
  }
  t.rounds.push_back(rec);
  if ((r_claim ^ *rec.r1) != (s0 & *rec.s1)) {
    t.verdict = abort(VerdictKind::abort_correlation_mismatch);
    return t;
  }
  t.verdict = {VerdictKind::accepted, s0};
  return t;
}

Estimate bob_gain_cheat_main(BobStrategy bob, std::uint64_t trials, std::uint64_t seed, std::uint64_t n) {
  Tally tally;
  const auto model = devices::honest_model(1.0);
  for (std::uint64_t i = 0; i < trials; ++i) {
    const std::uint64_t trial_seed = derive_seed(seed, i);
    Rng setup(derive_seed(trial_seed, 0));
    const Bit b = setup.bit();
    std::unique_ptr<DevicePair> pair;
    if (bob == BobStrategy::gain_cheat_deterministic)
      pair = devices::bob_cheat_pair();
    else
      pair = devices::honest_pair(model, derive_seed(trial_seed, 1));
    const ProtocolConfig config{n, -4.0, Variant::main, derive_seed(trial_seed, 2)};
    const Transcript t = run_main(config, *pair, AliceStrategy::honest(b), bob);
    const Bit guess = t.bob_private.guess ? *t.bob_private.guess : setup.bit();
    tally.add(guess == b);
  }
  return tally.estimate();
}

}  // namespace dibc::protocol
