// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>

#include "dibc/analysis.hpp"
#include "dibc/cli.hpp"
#include "dibc/devices.hpp"
#include "dibc/montecarlo.hpp"
#include "dibc/protocol.hpp"

using namespace dibc;
using std::numbers::pi;

namespace {

const double kCos2Pi8 = std::pow(std::cos(pi / 8), 2);
const unsigned kJobs = std::max(1u, std::thread::hardware_concurrency());

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string describe(const Estimate& e) {
  std::ostringstream s;
  s.precision(6);
  s << e.mean << " +- " << e.std_error << " (n=" << e.trials << ")";
  return s.str();
}

// Independent inverse of the strategy curve: bisection on theta.
double theta_of_violation(double violation) {
  double lo = 0, hi = analysis::kMaxCheatAngle;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    (analysis::strategy_point(mid).violation < violation ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

mc::ExperimentSpec spec(const std::string& scenario, std::uint64_t trials, std::uint64_t seed) {
  mc::ExperimentSpec s;
  s.scenario = scenario;
  s.trials = trials;
  s.seed = seed;
  s.jobs = kJobs;
  return s;
}

void criterion1(Outcome& o) {
  const double c = analysis::control_of_violation(analysis::kTsirelson);
  o.detail.precision(12);
  o.detail << "C(2 sqrt 2) = " << c << ", |diff| = " << std::abs(c - kCos2Pi8);
  o.require(std::abs(c - kCos2Pi8) <= 1e-9, "within 1e-9 of cos^2(pi/8)");
}

void criterion2(Outcome& o) {
  std::ostringstream out, err;
  o.require(cli::run({"curve"}, out, err) == 0, "curve exits 0");
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  o.require(line == "I,control", "header");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  o.require(rows.size() == 200, "200 rows");
  if (rows.empty()) return;
  bool monotone = true;
  double worst = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].second > rows[i - 1].second) monotone = false;
    const double theta = theta_of_violation(rows[i].first);
    worst = std::max(worst, std::abs(rows[i].second - std::pow(std::cos(theta / 2), 2)));
  }
  o.require(monotone, "monotone nonincreasing");
  o.require(std::abs(rows.front().first - 2) <= 1e-8 && std::abs(rows.front().second - 1) <= 1e-8, "first row (2, 1)");
  o.require(std::abs(rows.back().first - analysis::kTsirelson) <= 1e-8 &&
                std::abs(rows.back().second - kCos2Pi8) <= 1e-8,
            "last row (2 sqrt 2, cos^2(pi/8))");
  o.require(worst <= 1e-8, "round trip within 1e-8");
  o.detail << rows.size() << " rows, max round-trip error " << worst;
}

void criterion3(Outcome& o) {
  const auto g = analysis::max_gain_objective();
  o.require(g.value == 0.75, "max gain objective exactly 0.75");
  o.require(analysis::ns_vertices().size() == 24, "24 vertices");
  const auto det = mc::estimate_gain(spec("gain-deterministic", 1000000, 31));
  const auto dev = mc::estimate_gain(spec("gain-device-dependent", 1000000, 32));
  o.require(det.within(0.75), "deterministic strategy within 3 sigma");
  o.require(dev.within(0.75), "device-dependent strategy within 3 sigma");
  o.detail << "max " << g.value << ", deterministic " << describe(det) << ", device-dependent " << describe(dev);
}

void criterion4(Outcome& o) {
  const auto c = analysis::max_pr_control_objective();
  o.require(c.value == 0.75, "max PR control objective exactly 0.75");
  std::uint64_t accepted = 0;
  const std::uint64_t runs = 100000;
  for (std::uint64_t i = 0; i < runs; ++i) {
    const std::uint64_t seed = derive_seed(41, i);
    auto pair = devices::pr_pair(derive_seed(seed, 1));
    const auto t = protocol::run_pr({1, 2.0, protocol::Variant::pr, seed}, *pair,
                                    protocol::AliceStrategy::honest(static_cast<Bit>(i & 1)),
                                    protocol::BobStrategy::honest);
    accepted += t.accepted_correct();
  }
  const auto gain = mc::estimate_gain(spec("gain-pr", 100000, 42));
  const auto ctrl = mc::estimate_control(spec("control-pr-classical", 100000, 43)).conditional;
  o.require(accepted == runs, "honest PR runs all accepted");
  o.require(gain.within(0.75), "Bob's PR gain within 3 sigma");
  o.require(ctrl.within(0.75), "Alice's classical-box control within 3 sigma");
  o.detail << "max " << c.value << ", honest accepted " << accepted << "/" << runs << ", gain " << describe(gain)
           << ", control " << describe(ctrl);
}

void criterion5(Outcome& o) {
  int k = 0;
  for (double theta : {0.0, pi / 16, pi / 8, 3 * pi / 16, pi / 4}) {
    auto s = spec("control", 100000, 50 + k);
    s.theta = theta;
    const auto r = mc::estimate_control(s).conditional;
    const double want = std::pow(std::cos(theta / 2), 2);
    auto pair = devices::alice_cheat_pair(theta, derive_seed(60, k));
    const auto chsh = mc::empirical_chsh(*pair, 100000, derive_seed(61, k));
    const double i_want = analysis::cheat_violation(theta, analysis::phi_opt(theta));
    o.require(r.within(want), "control at theta index " + std::to_string(k));
    o.require(chsh.within(i_want), "CHSH at theta index " + std::to_string(k));
    o.detail.precision(5);
    o.detail << (k ? "; " : "") << "theta=" << theta << ": control " << r.mean << " vs " << want << ", CHSH "
             << chsh.mean << " vs " << i_want;
    ++k;
  }
}

void criterion6(Outcome& o) {
  double prev = 1.0;
  bool monotone = true, above = true;
  double last = 1.0;
  for (std::uint64_t n = 1000; n <= 100000000; n *= 10) {
    const double ith = analysis::schedule_threshold(n, analysis::ThresholdSchedule::caption);
    const double b = analysis::pcont_bound({n, ith}).bound;
    if (b > prev) monotone = false;
    if (b < kCos2Pi8) above = false;
    o.detail.precision(6);
    o.detail << (n == 1000 ? "" : ", ") << "N=" << n << ": " << b;
    prev = last = b;
  }
  o.require(monotone, "nonincreasing in N");
  o.require(above, ">= cos^2(pi/8)");
  o.require(last - kCos2Pi8 < 0.05, "bound(1e8) - cos^2(pi/8) < 0.05");
}

void criterion7(Outcome& o) {
  const std::uint64_t ks[] = {10, 100, 1000};
  const double eps[] = {0.5, 1.0, 2.0};
  int cells = 0;
  double worst_margin = 1.0;
  for (double v : {1.0, 0.9}) {
    auto s = spec("azuma", 100000, v == 1.0 ? 71 : 72);
    s.noise = v;
    for (const auto& cell : mc::azuma_grid(s, ks, eps)) {
      const double margin = cell.bound + 3 * cell.tail.std_error - cell.tail.mean;
      worst_margin = std::min(worst_margin, margin);
      o.require(margin >= 0, "v=" + std::to_string(v) + " k=" + std::to_string(cell.k) +
                                 " eps=" + std::to_string(cell.epsilon));
      ++cells;
    }
  }
  o.detail << cells << " cells, smallest margin bound + 3 stderr - tail = " << worst_margin;
}

void criterion8(Outcome& o) {
  double worst = 0;
  std::uint64_t checked = 0;
  for (std::uint64_t n = 2; n <= 200; ++n)
    for (std::uint64_t k0 = 1; k0 <= n - 1; ++k0)
      for (double e : {0.0, 1e-6, 1e-3, 0.1, 0.5, 1.0, 2.0, 4.0}) {
        double direct = 0;
        for (std::uint64_t k = k0; k <= n - 1; ++k) direct += analysis::azuma_tail(k, e);
        worst = std::max(worst, std::abs(analysis::q_epsilon(n, k0, e) - direct));
        if (e == 0.0) o.require(analysis::q_epsilon(n, k0, 0.0) == double(n - k0), "Q(0) = N - K0");
        ++checked;
      }
  o.require(worst <= 1e-12, "within 1e-12");
  o.detail << checked << " cases, max |closed - direct| = " << worst;
}

void criterion9(Outcome& o) {
  int k = 0;
  for (auto v : {protocol::Variant::main, protocol::Variant::free_reveal, protocol::Variant::large_office}) {
    auto s = spec("completeness", 100000, 90 + k++);
    s.variant = v;
    const auto r = mc::honest_completeness(s);
    const auto& c = r.conditional_correctness;
    o.require(c.trials > 0 && c.mean == 1.0, std::string(protocol::to_string(v)));
    o.detail << (k > 1 ? "; " : "") << protocol::to_string(v) << ": " << c.mean * c.trials << "/" << c.trials
             << " correct (abort rate " << r.abort_rate.mean << ")";
  }
}

void criterion10(Outcome& o) {
  const auto r = mc::counter_cheat_demo(20, 100000, 101, kJobs);
  o.require(r.overall.mean >= 1.0 / 20 - 3 * r.overall.std_error, "success >= 1/N - 3 sigma");
  o.require(r.conditional_success.trials > 0 && r.conditional_success.mean == 1.0, "success 1 given n = N");
  o.detail << "overall " << describe(r.overall) << ", given n=N " << describe(r.conditional_success);
}

void criterion11(Outcome& o) {
  auto s = spec("control", 100000, 111);
  s.variant = protocol::Variant::free_reveal;
  s.theta = pi / 4;
  const auto r = mc::estimate_control(s).conditional;
  const double want = (kCos2Pi8 + 1) / 2;
  o.require(r.within(want), "within 3 sigma");
  o.detail << describe(r) << " vs " << want;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"asymptotic control C(2 sqrt 2) = cos^2(pi/8)", criterion1},
      {"control curve table", criterion2},
      {"information-gain bound 3/4", criterion3},
      {"PR-protocol bounds", criterion4},
      {"optimal cheat consistency", criterion5},
      {"finite-N bound along the caption schedule", criterion6},
      {"Azuma-Hoeffding tails", criterion7},
      {"closed-form Q(eps)", criterion8},
      {"completeness", criterion9},
      {"counter-cheat demonstration", criterion10},
      {"free-reveal control (p + 1) / 2", criterion11},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("%s criterion %zu: %s | %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failures;
}
