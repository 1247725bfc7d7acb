#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <string_view>
#include <vector>

#include "dibc/quantum.hpp"
#include "dibc/rng.hpp"

namespace dibc::devices {

struct MeasureRequest {
  int box = 0;
  int input = 0;
  std::uint64_t round = 1;
};

/// A pair of untrusted black boxes. Each box sees only its own input stream
/// and use counter; the only shared data is whatever was fixed at preparation
/// (the per-round shared state and the pair's seeded generator).
///
/// Rounds are abstract use indices and must strictly increase per box.
class DevicePair {
 public:
  virtual ~DevicePair() = default;

  /// Throws UsageError on an out-of-range box/input or a round regression.
  Bit measure(const MeasureRequest& req);

  std::uint64_t uses(int box) const { return uses_.at(box); }
  virtual bool accepts_input(int box, int input) const;
  virtual std::string_view kind() const = 0;

 protected:
  /// `use` is the 1-based use count of `box` including this call.
  virtual Bit respond(int box, int input, std::uint64_t round, std::uint64_t use) = 0;

 private:
  std::array<std::uint64_t, 2> uses_{};
  std::array<std::uint64_t, 2> last_round_{};
};

using Observables = std::array<quantum::ZxObservable, 4>;

/// Immutable preparation shared by every round of a quantum-backed pair: the
/// per-round state, the observable behind each input, and the resulting
/// joint distributions for all 16 input combinations.
struct QuantumModel {
  QuantumModel(const quantum::TwoQubitState& state, const Observables& box0, const Observables& box1);

  const quantum::JointDistribution& distribution(int s0, int s1) const { return joint[s0][s1]; }

  quantum::TwoQubitState state;
  std::array<Observables, 2> observables;
  std::array<std::array<quantum::JointDistribution, 4>, 4> joint{};
};

std::shared_ptr<const QuantumModel> honest_model(double noise_v);
std::shared_ptr<const QuantumModel> alice_cheat_model(double theta);

/// Fresh copy of the model's state per round. The first box queried in a
/// round samples its local marginal; the second samples conditioned on the
/// first result (state collapse).
class QuantumPair : public DevicePair {
 public:
  QuantumPair(std::shared_ptr<const QuantumModel> model, std::uint64_t seed, std::string_view kind);

  std::string_view kind() const override { return kind_; }
  const QuantumModel& model() const { return *model_; }

 protected:
  Bit respond(int box, int input, std::uint64_t round, std::uint64_t use) override;

 private:
  struct Pending {
    std::uint64_t round;
    int input;
    Bit output;
  };

  std::shared_ptr<const QuantumModel> model_;
  std::array<std::deque<Pending>, 2> pending_;
  Rng rng_;
  std::string_view kind_;
};

/// Honest boxes until `trigger_round`, then a fixed output table at that use.
class CounterCheatPair : public QuantumPair {
 public:
  CounterCheatPair(std::uint64_t trigger_round, std::array<std::array<Bit, 4>, 2> table, std::uint64_t seed);
  std::uint64_t trigger_round() const { return trigger_; }

 protected:
  Bit respond(int box, int input, std::uint64_t round, std::uint64_t use) override;

 private:
  std::uint64_t trigger_;
  std::array<std::array<Bit, 4>, 2> table_;
};

/// One fresh PR box per round: r0 xor r1 = s0 * s1, uniform marginals.
class PrPair : public DevicePair {
 public:
  explicit PrPair(std::uint64_t seed) : rng_(seed) {}
  bool accepts_input(int box, int input) const override;
  std::string_view kind() const override { return "pr"; }

 protected:
  Bit respond(int box, int input, std::uint64_t round, std::uint64_t use) override;

 private:
  struct Pending {
    std::uint64_t round;
    int input;
    Bit output;
  };
  std::array<std::deque<Pending>, 2> pending_;
  Rng rng_;
};

/// Deterministic, memoryless local boxes.
class ClassicalPair : public DevicePair {
 public:
  using Table = std::array<Bit, 4>;
  ClassicalPair(Table box0, Table box1, std::string_view kind = "classical")
      : tables_{box0, box1}, kind_(kind) {}
  std::string_view kind() const override { return kind_; }
  const Table& table(int box) const { return tables_.at(box); }

 protected:
  Bit respond(int box, int input, std::uint64_t, std::uint64_t) override { return tables_[box][input]; }

 private:
  std::array<Table, 2> tables_;
  std::string_view kind_;
};

/// Observables of the honest devices: inputs 0..3 of box 0 are
/// sigma_x, sigma_z, sigma_{pi/4}, sigma_{3pi/4}; box 1 is shifted by two.
Observables honest_observables(int box);

std::unique_ptr<QuantumPair> honest_pair(double noise_v, std::uint64_t seed);
std::unique_ptr<QuantumPair> honest_pair(std::shared_ptr<const QuantumModel> model, std::uint64_t seed);

/// Alice's optimal cheat at angle theta in [0, pi/4]. Inputs 0 and 1 are the
/// settings Bob tests; inputs 2 and 3 both select Alice's midpoint axis.
std::unique_ptr<QuantumPair> alice_cheat_pair(double theta, std::uint64_t seed);
std::unique_ptr<QuantumPair> alice_cheat_pair(std::shared_ptr<const QuantumModel> model, std::uint64_t seed);

/// Both boxes answer r = s - 2 for s in {2, 3} and 0 otherwise.
std::unique_ptr<ClassicalPair> bob_cheat_pair();

std::unique_ptr<CounterCheatPair> counter_cheat_pair(std::uint64_t trigger_round, std::uint64_t seed);
std::unique_ptr<CounterCheatPair> counter_cheat_pair(std::uint64_t trigger_round, std::uint64_t seed,
                                                     const std::array<std::array<Bit, 4>, 2>& table);

std::unique_ptr<PrPair> pr_pair(std::uint64_t seed);

/// Each table must have four 0/1 entries; throws UsageError otherwise.
std::unique_ptr<ClassicalPair> classical_pair(const std::vector<int>& box0, const std::vector<int>& box1);

}  // namespace dibc::devices
