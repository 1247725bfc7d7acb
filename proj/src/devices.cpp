#include "dibc/devices.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "dibc/analysis.hpp"
#include "dibc/errors.hpp"

namespace dibc::devices {
namespace {

constexpr double kPi = std::numbers::pi;

Observables angles(double a, double b, double c, double d) { return {{{a}, {b}, {c}, {d}}}; }

// Pending first-queries of `box`'s partner, oldest first. Rounds increase per
// box, so entries older than `round` can never be matched and are dropped.
template <typename Pending>
std::optional<Pending> take_partner(std::array<std::deque<Pending>, 2>& pending, std::uint64_t round, int box) {
  auto& other = pending[1 - box];
  while (!other.empty() && other.front().round < round) other.pop_front();
  if (other.empty() || other.front().round != round) return std::nullopt;
  Pending p = other.front();
  other.pop_front();
  return p;
}

const std::shared_ptr<const QuantumModel>& shared_epr_model() {
  static const auto model = honest_model(1.0);
  return model;
}

}  // namespace

Bit DevicePair::measure(const MeasureRequest& req) {
  if (req.box != 0 && req.box != 1) throw UsageError("box must be 0 or 1, got " + std::to_string(req.box));
  if (!accepts_input(req.box, req.input))
    throw UsageError("input " + std::to_string(req.input) + " not accepted by " + std::string(kind()) + " box " +
                     std::to_string(req.box));
  if (req.round == 0 || req.round <= last_round_[req.box])
    throw UsageError("round " + std::to_string(req.round) + " does not advance box " + std::to_string(req.box));
  last_round_[req.box] = req.round;
  const std::uint64_t use = ++uses_[req.box];
  return respond(req.box, req.input, req.round, use);
}

bool DevicePair::accepts_input(int, int input) const { return input >= 0 && input <= 3; }

QuantumModel::QuantumModel(const quantum::TwoQubitState& state_, const Observables& box0, const Observables& box1)
    : state(state_), observables{box0, box1} {
  for (int s0 = 0; s0 < 4; ++s0)
    for (int s1 = 0; s1 < 4; ++s1) joint[s0][s1] = quantum::joint_distribution(state, box0[s0], box1[s1]);
}

QuantumPair::QuantumPair(std::shared_ptr<const QuantumModel> model, std::uint64_t seed, std::string_view kind)
    : model_(std::move(model)), rng_(seed), kind_(kind) {
  if (!model_) throw UsageError("quantum pair needs a model");
}

Bit QuantumPair::respond(int box, int input, std::uint64_t round, std::uint64_t) {
  const double u = rng_.uniform();
  const auto partner = take_partner(pending_, round, box);
  if (!partner) {
    // Marginals do not depend on the other box's setting; use its input 0 column.
    const auto& d = box == 0 ? model_->joint[input][0] : model_->joint[0][input];
    const double p0 = box == 0 ? d.marginal0(0) : d.marginal1(0);
    const Bit out = u < p0 ? 0 : 1;
    pending_[box].push_back({round, input, out});
    return out;
  }
  const Pending& first = *partner;
  const int s0 = box == 0 ? input : first.input;
  const int s1 = box == 0 ? first.input : input;
  const auto& d = model_->joint[s0][s1];
  double p0;
  if (box == 1)
    p0 = d(first.output, 0) / d.marginal0(first.output);
  else
    p0 = d(0, first.output) / d.marginal1(first.output);
  return u < p0 ? 0 : 1;
}

CounterCheatPair::CounterCheatPair(std::uint64_t trigger_round, std::array<std::array<Bit, 4>, 2> table,
                                   std::uint64_t seed)
    : QuantumPair(shared_epr_model(), seed, "counter_cheat"),
      trigger_(trigger_round),
      table_(table) {
  if (trigger_round < 1) throw std::domain_error("trigger round must be >= 1");
}

Bit CounterCheatPair::respond(int box, int input, std::uint64_t round, std::uint64_t use) {
  if (use == trigger_) return table_[box][input];
  return QuantumPair::respond(box, input, round, use);
}

bool PrPair::accepts_input(int, int input) const { return input == 0 || input == 1; }

Bit PrPair::respond(int box, int input, std::uint64_t round, std::uint64_t) {
  const auto partner = take_partner(pending_, round, box);
  if (!partner) {
    const Bit out = rng_.bit();
    pending_[box].push_back({round, input, out});
    return out;
  }
  return static_cast<Bit>(partner->output ^ (partner->input & input));
}

Observables honest_observables(int box) {
  if (box == 0) return angles(kPi / 2, 0.0, kPi / 4, 3 * kPi / 4);
  if (box == 1) return angles(kPi / 4, 3 * kPi / 4, kPi / 2, 0.0);
  throw UsageError("box must be 0 or 1");
}

std::shared_ptr<const QuantumModel> honest_model(double noise_v) {
  return std::make_shared<const QuantumModel>(quantum::werner_state(noise_v), honest_observables(0),
                                              honest_observables(1));
}

std::shared_ptr<const QuantumModel> alice_cheat_model(double theta) {
  const double phi = analysis::phi_opt(theta);
  const double mid0 = 3 * theta - phi;
  const double mid1 = theta;
  return std::make_shared<const QuantumModel>(quantum::epr_state(), angles(2 * theta, 0.0, mid0, mid0),
                                              angles(2 * theta - phi, 4 * theta - phi, mid1, mid1));
}

std::unique_ptr<QuantumPair> honest_pair(double noise_v, std::uint64_t seed) {
  return honest_pair(honest_model(noise_v), seed);
}

std::unique_ptr<QuantumPair> honest_pair(std::shared_ptr<const QuantumModel> model, std::uint64_t seed) {
  return std::make_unique<QuantumPair>(std::move(model), seed, "honest");
}

std::unique_ptr<QuantumPair> alice_cheat_pair(double theta, std::uint64_t seed) {
  return alice_cheat_pair(alice_cheat_model(theta), seed);
}

std::unique_ptr<QuantumPair> alice_cheat_pair(std::shared_ptr<const QuantumModel> model, std::uint64_t seed) {
  return std::make_unique<QuantumPair>(std::move(model), seed, "alice_cheat");
}

std::unique_ptr<ClassicalPair> bob_cheat_pair() {
  const ClassicalPair::Table t{0, 0, 0, 1};
  return std::make_unique<ClassicalPair>(t, t, "bob_cheat");
}

std::unique_ptr<CounterCheatPair> counter_cheat_pair(std::uint64_t trigger_round, std::uint64_t seed) {
  return counter_cheat_pair(trigger_round, seed, {});
}

std::unique_ptr<CounterCheatPair> counter_cheat_pair(std::uint64_t trigger_round, std::uint64_t seed,
                                                     const std::array<std::array<Bit, 4>, 2>& table) {
  return std::make_unique<CounterCheatPair>(trigger_round, table, seed);
}

std::unique_ptr<PrPair> pr_pair(std::uint64_t seed) { return std::make_unique<PrPair>(seed); }

std::unique_ptr<ClassicalPair> classical_pair(const std::vector<int>& box0, const std::vector<int>& box1) {
  auto convert = [](const std::vector<int>& v, int box) {
    if (v.size() != 4)
      throw UsageError("classical table for box " + std::to_string(box) + " needs 4 entries, got " +
                       std::to_string(v.size()));
    ClassicalPair::Table t{};
    for (std::size_t i = 0; i < 4; ++i) {
      if (v[i] != 0 && v[i] != 1) throw UsageError("classical table entries must be 0 or 1");
      t[i] = static_cast<Bit>(v[i]);
    }
    return t;
  };
  return std::make_unique<ClassicalPair>(convert(box0, 0), convert(box1, 1));
}

}  // namespace dibc::devices
