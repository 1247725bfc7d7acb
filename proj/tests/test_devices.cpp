#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dibc/analysis.hpp"
#include "dibc/devices.hpp"
#include "dibc/errors.hpp"
#include "dibc/rng.hpp"

using namespace dibc;
using namespace dibc::devices;
using std::numbers::pi;

namespace {

struct Counts {
  std::array<std::array<std::array<double, 4>, 4>, 4> n{};  // [s0][s1][2 r0 + r1]
};

// Uniform inputs in {0..3} on both boxes, random query order per round.
Counts sample(DevicePair& pair, int rounds, std::uint64_t seed, int inputs = 4) {
  Rng rng(seed);
  Counts c;
  for (int t = 1; t <= rounds; ++t) {
    const int s0 = static_cast<int>(rng.below(inputs));
    const int s1 = static_cast<int>(rng.below(inputs));
    int r0, r1;
    if (rng.bit()) {
      r0 = pair.measure({0, s0, std::uint64_t(t)});
      r1 = pair.measure({1, s1, std::uint64_t(t)});
    } else {
      r1 = pair.measure({1, s1, std::uint64_t(t)});
      r0 = pair.measure({0, s0, std::uint64_t(t)});
    }
    c.n[s0][s1][2 * r0 + r1] += 1;
  }
  return c;
}

double chi_square(const std::array<double, 4>& observed, const quantum::JointDistribution& model) {
  double total = 0;
  for (double o : observed) total += o;
  double chi = 0;
  for (int k = 0; k < 4; ++k) {
    const double e = total * model.p[k];
    if (e < 1e-9) {
      CHECK(observed[k] == 0);
      continue;
    }
    chi += (observed[k] - e) * (observed[k] - e) / e;
  }
  return chi;
}

double exact_chsh(const QuantumModel& m) {
  double s = 0;
  for (int s0 = 0; s0 < 2; ++s0)
    for (int s1 = 0; s1 < 2; ++s1) {
      const auto& d = m.distribution(s0, s1);
      const double e = d(0, 0) + d(1, 1) - d(0, 1) - d(1, 0);
      s += (s0 & s1) ? -e : e;
    }
  return s;
}

}  // namespace

TEST_CASE("measure validates box, input and round order") {
  auto pair = honest_pair(1.0, 1);
  CHECK_THROWS_AS(pair->measure({2, 0, 1}), UsageError);
  CHECK_THROWS_AS(pair->measure({0, 4, 1}), UsageError);
  CHECK_THROWS_AS(pair->measure({0, -1, 1}), UsageError);
  CHECK_THROWS_AS(pair->measure({0, 0, 0}), UsageError);
  pair->measure({0, 0, 5});
  CHECK_THROWS_AS(pair->measure({0, 0, 5}), UsageError);
  CHECK_THROWS_AS(pair->measure({0, 0, 4}), UsageError);
  CHECK_NOTHROW(pair->measure({1, 0, 1}));  // boxes keep separate clocks
  CHECK(pair->uses(0) == 1);
  CHECK(pair->uses(1) == 1);
  auto pr = pr_pair(1);
  CHECK_THROWS_AS(pr->measure({0, 2, 1}), UsageError);
}

TEST_CASE("honest devices fit the quantum joint distribution (chi-square)") {
  for (double v : {1.0, 0.9}) {
    auto model = honest_model(v);
    auto pair = honest_pair(model, 42);
    const auto c = sample(*pair, 160000, 7);
    for (int s0 = 0; s0 < 4; ++s0)
      for (int s1 = 0; s1 < 4; ++s1) {
        // 3 degrees of freedom; 21.1 is the 1e-4 upper quantile.
        CHECK(chi_square(c.n[s0][s1], model->distribution(s0, s1)) < 21.1);
      }
  }
}

TEST_CASE("cheat devices fit their joint distribution (chi-square)") {
  for (double theta : {0.0, pi / 8, pi / 4}) {
    auto model = alice_cheat_model(theta);
    auto pair = alice_cheat_pair(model, 3);
    const auto c = sample(*pair, 80000, 9);
    for (int s0 = 0; s0 < 4; ++s0)
      for (int s1 = 0; s1 < 4; ++s1) CHECK(chi_square(c.n[s0][s1], model->distribution(s0, s1)) < 21.1);
  }
}

TEST_CASE("no signaling: a box's output frequency ignores the other box's input") {
  auto pair = alice_cheat_pair(pi / 5, 5);
  const auto c = sample(*pair, 200000, 13);
  for (int s0 = 0; s0 < 4; ++s0) {
    std::array<double, 4> freq{};
    double n_min = 1e300;
    for (int s1 = 0; s1 < 4; ++s1) {
      const auto& row = c.n[s0][s1];
      const double n = row[0] + row[1] + row[2] + row[3];
      freq[s1] = (row[0] + row[1]) / n;
      n_min = std::min(n_min, n);
    }
    const double tol = 4.5 * std::sqrt(2 * 0.25 / n_min);
    for (int s1 = 1; s1 < 4; ++s1) CHECK(std::abs(freq[s1] - freq[0]) < tol);
  }
  for (int s1 = 0; s1 < 4; ++s1) {
    std::array<double, 4> freq{};
    double n_min = 1e300;
    for (int s0 = 0; s0 < 4; ++s0) {
      const auto& row = c.n[s0][s1];
      const double n = row[0] + row[1] + row[2] + row[3];
      freq[s0] = (row[0] + row[2]) / n;
      n_min = std::min(n_min, n);
    }
    const double tol = 4.5 * std::sqrt(2 * 0.25 / n_min);
    for (int s0 = 1; s0 < 4; ++s0) CHECK(std::abs(freq[s0] - freq[0]) < tol);
  }
}

TEST_CASE("a box queried alone sees its marginal") {
  auto pair = honest_pair(1.0, 17);
  int ones = 0;
  const int n = 100000;
  for (int t = 1; t <= n; ++t) ones += pair->measure({1, 1, std::uint64_t(t)});
  CHECK(std::abs(ones / double(n) - 0.5) < 4 * std::sqrt(0.25 / n));
}

TEST_CASE("model CHSH: honest 2 sqrt 2 v, cheat follows the strategy curve") {
  CHECK(exact_chsh(*honest_model(1.0)) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(exact_chsh(*honest_model(0.9)) == doctest::Approx(0.9 * 2 * std::sqrt(2.0)).epsilon(1e-12));
  for (int i = 0; i <= 32; ++i) {
    const double theta = analysis::kMaxCheatAngle * i / 32;
    const double expected = analysis::cheat_violation(theta, analysis::phi_opt(theta));
    CHECK(exact_chsh(*alice_cheat_model(theta)) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("cheat midpoint agrees with either of the other box's tested settings w.p. cos^2(theta/2)") {
  for (double theta : {0.0, pi / 16, pi / 8, 3 * pi / 16, pi / 4}) {
    auto m = alice_cheat_model(theta);
    const double want = std::pow(std::cos(theta / 2), 2);
    for (int b = 0; b < 2; ++b) {
      const auto& alice_box0 = m->distribution(2, b);
      const auto& alice_box1 = m->distribution(b, 2);
      CHECK(alice_box0(0, 0) + alice_box0(1, 1) == doctest::Approx(want).epsilon(1e-12));
      CHECK(alice_box1(0, 0) + alice_box1(1, 1) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("counter-cheat pair is bit-identical to an honest pair before the trigger") {
  const std::uint64_t trigger = 30;
  const std::array<std::array<Bit, 4>, 2> table{{{1, 0, 1, 0}, {0, 1, 1, 1}}};
  auto counter = counter_cheat_pair(trigger, 99, table);
  auto honest = honest_pair(1.0, 99);
  Rng rng(5);
  for (std::uint64_t t = 1; t < trigger; ++t) {
    const int s0 = int(rng.below(4)), s1 = int(rng.below(4));
    CHECK(counter->measure({0, s0, t}) == honest->measure({0, s0, t}));
    CHECK(counter->measure({1, s1, t}) == honest->measure({1, s1, t}));
  }
  for (int s = 0; s < 2; ++s) {
    auto c = counter_cheat_pair(1, 1, table);
    CHECK(c->measure({0, s + 2, 1}) == table[0][s + 2]);
    CHECK(c->measure({1, s, 1}) == table[1][s]);
  }
  CHECK_THROWS(counter_cheat_pair(0, 1));
}

TEST_CASE("PR pair satisfies r0 xor r1 = s0 s1 with uniform marginals") {
  auto pair = pr_pair(8);
  Rng rng(4);
  int ones = 0;
  const int n = 50000;
  for (int t = 1; t <= n; ++t) {
    const int s0 = rng.bit(), s1 = rng.bit();
    const bool first0 = rng.bit();
    int r0, r1;
    if (first0) {
      r0 = pair->measure({0, s0, std::uint64_t(t)});
      r1 = pair->measure({1, s1, std::uint64_t(t)});
    } else {
      r1 = pair->measure({1, s1, std::uint64_t(t)});
      r0 = pair->measure({0, s0, std::uint64_t(t)});
    }
    REQUIRE((r0 ^ r1) == (s0 & s1));
    ones += r0;
  }
  CHECK(std::abs(ones / double(n) - 0.5) < 4 * std::sqrt(0.25 / n));
}

TEST_CASE("no classical pair beats CHSH 2") {
  double best = -5;
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) {
      auto pair = classical_pair({a & 1, a >> 1 & 1, a >> 2 & 1, a >> 3 & 1}, {b & 1, b >> 1 & 1, b >> 2 & 1, b >> 3 & 1});
      double s = 0;
      std::uint64_t t = 1;
      for (int s0 = 0; s0 < 2; ++s0)
        for (int s1 = 0; s1 < 2; ++s1, ++t)
          s += analysis::chsh_indicator({s0, s1, pair->measure({0, s0, t}), pair->measure({1, s1, t})}) / 4;
      best = std::max(best, s);
    }
  CHECK(best == 2.0);
}

TEST_CASE("fixed tables") {
  auto bob = bob_cheat_pair();
  for (int box = 0; box < 2; ++box) {
    CHECK(bob->table(box) == ClassicalPair::Table{0, 0, 0, 1});
  }
  CHECK_THROWS_AS(classical_pair({0, 1, 0}, {0, 0, 0, 0}), UsageError);
  CHECK_THROWS_AS(classical_pair({0, 1, 0, 2}, {0, 0, 0, 0}), UsageError);
  CHECK(honest_observables(0)[0].theta == doctest::Approx(pi / 2));
  CHECK(honest_observables(1)[1].theta == doctest::Approx(3 * pi / 4));
  CHECK_THROWS_AS(honest_observables(2), UsageError);
}

TEST_CASE("same seed, same outputs") {
  auto a = honest_pair(0.9, 123);
  auto b = honest_pair(0.9, 123);
  for (std::uint64_t t = 1; t <= 1000; ++t) {
    CHECK(a->measure({0, int(t % 4), t}) == b->measure({0, int(t % 4), t}));
    CHECK(a->measure({1, int(t / 3 % 4), t}) == b->measure({1, int(t / 3 % 4), t}));
  }
}
