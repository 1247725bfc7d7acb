#include "dibc/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <json.hpp>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dibc/analysis.hpp"
#include "dibc/devices.hpp"
#include "dibc/errors.hpp"
#include "dibc/montecarlo.hpp"
#include "dibc/protocol.hpp"
#include "dibc/transcript_json.hpp"

namespace dibc::cli {
namespace {

using nlohmann::json;

struct Options {
  // common
  std::uint64_t seed = 1;
  std::uint64_t trials = 100000;
  std::string out;
  std::string format;
  unsigned jobs = 1;
  // scenario
  std::string variant = "main";
  std::vector<std::string> n_args;
  std::vector<std::uint64_t> n_values;
  std::optional<double> ith;
  std::string ith_schedule = "caption";
  double noise = 1.0;
  double theta = std::numbers::pi / 4.0;
  double epsilon = 1.0;
  std::uint64_t k = 100;
  std::size_t points = 200;
  double grid_step = 1e-3;
  std::string scenario;
  std::string alice = "honest";
  std::string bob = "honest";
  std::string device;
  int bit = 0;
  std::optional<int> target;
  int box_input = 2;
  std::uint64_t reveal_delay = 0;
  bool flip_reveal = false;
  std::uint64_t trigger = 0;
  std::vector<int> table0{0, 0, 0, 0};
  std::vector<int> table1{0, 0, 0, 0};
};

std::uint64_t parse_count(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v >= 2.0) || v > 1e18 || v != std::floor(v))
    throw UsageError("--N expects integers >= 2, got '" + text + "'");
  return static_cast<std::uint64_t>(v);
}

/// "a..b" expands to a, 10a, 100a, ... up to b.
std::vector<std::uint64_t> parse_n_list(const std::vector<std::string>& args) {
  std::vector<std::uint64_t> ns;
  for (const auto& a : args) {
    const auto dots = a.find("..");
    if (dots == std::string::npos) {
      ns.push_back(parse_count(a));
      continue;
    }
    const std::uint64_t lo = parse_count(a.substr(0, dots));
    const std::uint64_t hi = parse_count(a.substr(dots + 2));
    if (hi < lo) throw UsageError("empty --N range '" + a + "'");
    for (std::uint64_t n = lo; n <= hi; n *= 10) {
      ns.push_back(n);
      if (n > hi / 10) break;
    }
  }
  return ns;
}

double cos2_half(double theta) {
  const double c = std::cos(theta / 2.0);
  return c * c;
}

std::uint64_t single_n(const Options& o, std::uint64_t fallback) {
  if (o.n_values.empty()) return fallback;
  if (o.n_values.size() != 1) throw UsageError("this subcommand takes a single --N");
  return o.n_values.front();
}

json estimate_json(const Estimate& e) {
  return {{"mean", e.mean}, {"stderr", e.std_error}, {"trials", e.trials}, {"ci99", {e.ci99_lo, e.ci99_hi}}};
}

json result_json(const std::string& scenario, json params, const Estimate& e, json reference) {
  json j = {{"scenario", scenario}, {"params", std::move(params)}};
  j.update(estimate_json(e));
  j["analytic_reference"] = std::move(reference);
  return j;
}

void require_format(const Options& o, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (o.format == a) return;
  throw UsageError("--format " + o.format + " is not supported by this subcommand");
}

// Buffers everything so a failing command leaves no partial output behind.
class Output {
 public:
  Output(std::string path, std::ostream& fallback) : path_(std::move(path)), fallback_(fallback) {}
  std::ostream& stream() { return buffer_; }
  void commit() {
    if (path_.empty()) {
      fallback_ << buffer_.str();
      fallback_.flush();
      return;
    }
    std::ofstream file(path_);
    file << buffer_.str();
    file.close();
    if (!file) throw std::runtime_error("cannot write --out " + path_);
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ostringstream buffer_;
};

void cmd_curve(const Options& o, std::ostream& os) {
  require_format(o, {"csv", "json"});
  const auto curve = analysis::ControlCurve::sample(o.points);
  if (o.format == "json") {
    json rows = json::array();
    for (const auto& [i, c] : curve.samples()) rows.push_back({{"I", i}, {"control", c}});
    os << rows.dump(2) << '\n';
    return;
  }
  os << "I,control\n";
  for (const auto& [i, c] : curve.samples()) os << format_number(i) << ',' << format_number(c) << '\n';
}

void cmd_bound(const Options& o, std::ostream& os) {
  require_format(o, {"csv", "json"});
  std::vector<std::uint64_t> ns = o.n_values;
  if (ns.empty())
    for (std::uint64_t n = 1000; n <= 100000000; n *= 10) ns.push_back(n);
  const auto schedule = o.ith_schedule == "body" ? analysis::ThresholdSchedule::body
                                                 : analysis::ThresholdSchedule::caption;
  json rows = json::array();
  if (o.format == "csv") os << "N,I_th,bound,epsilon_star\n";
  for (std::uint64_t n : ns) {
    const double ith = o.ith ? *o.ith : analysis::schedule_threshold(n, schedule);
    const auto r = analysis::pcont_bound({n, ith, o.grid_step, 1e-6});
    if (o.format == "csv")
      os << n << ',' << format_number(ith) << ',' << format_number(r.bound) << ',' << format_number(r.epsilon_star)
         << '\n';
    else
      rows.push_back({{"N", n}, {"I_th", ith}, {"bound", r.bound}, {"epsilon_star", r.epsilon_star}, {"K0", r.k0}});
  }
  if (o.format == "json") os << rows.dump(2) << '\n';
}

std::unique_ptr<devices::DevicePair> make_device(const Options& o, const std::string& kind, std::uint64_t seed,
                                                 std::uint64_t n) {
  if (kind == "honest") return devices::honest_pair(o.noise, seed);
  if (kind == "alice_cheat") return devices::alice_cheat_pair(o.theta, seed);
  if (kind == "bob_cheat") return devices::bob_cheat_pair();
  if (kind == "counter_cheat") return devices::counter_cheat_pair(o.trigger ? o.trigger : n + 1, seed);
  if (kind == "pr") return devices::pr_pair(seed);
  if (kind == "classical") return devices::classical_pair(o.table0, o.table1);
  throw UsageError("unknown device '" + kind + "'");
}

void cmd_simulate(const Options& o, std::ostream& os) {
  require_format(o, {"json"});
  const auto variant = protocol::parse_variant(o.variant);
  const auto bob = protocol::parse_bob_strategy(o.bob);
  protocol::AliceStrategy alice;
  std::optional<Bit> target;
  if (o.target) target = static_cast<Bit>(*o.target);
  if (o.alice == "honest")
    alice = protocol::AliceStrategy::honest(static_cast<Bit>(o.bit));
  else if (o.alice == "cheat")
    alice = protocol::AliceStrategy::custom(variant == protocol::Variant::pr && o.box_input > 1 ? 0 : o.box_input,
                                            target);
  else if (o.alice == "withhold") {
    alice = protocol::AliceStrategy::honest(static_cast<Bit>(o.bit));
    alice.withhold = true;
  } else
    throw UsageError("unknown Alice strategy '" + o.alice + "'");
  alice.reveal_delay = o.reveal_delay;
  alice.flip_reveal = o.flip_reveal;

  std::string device = o.device;
  if (device.empty()) {
    if (variant == protocol::Variant::pr)
      device = "pr";
    else if (o.alice == "cheat")
      device = "alice_cheat";
    else if (bob == protocol::BobStrategy::gain_cheat_deterministic)
      device = "bob_cheat";
    else
      device = "honest";
  }

  const std::uint64_t n = single_n(o, 10);
  const protocol::ProtocolConfig config{n, o.ith.value_or(2.0), variant, o.seed};
  const std::uint64_t device_seed = derive_seed(o.seed, 0xD0);
  protocol::Transcript t;
  if (variant == protocol::Variant::large_office) {
    std::vector<std::unique_ptr<devices::DevicePair>> owned;
    std::vector<devices::DevicePair*> pairs;
    for (std::uint64_t i = 0; i <= n; ++i) {
      owned.push_back(make_device(o, device, derive_seed(device_seed, i), n));
      pairs.push_back(owned.back().get());
    }
    t = protocol::run_large_office(config, pairs, alice, bob);
  } else {
    auto pair = make_device(o, device, device_seed, n);
    switch (variant) {
      case protocol::Variant::main: t = protocol::run_main(config, *pair, alice, bob); break;
      case protocol::Variant::free_reveal: t = protocol::run_free_reveal(config, *pair, alice, bob); break;
      case protocol::Variant::pr: t = protocol::run_pr(config, *pair, alice, bob); break;
      case protocol::Variant::large_office: break;
    }
  }
  json j = protocol::to_json(t);
  if (protocol::transcript_from_json(j) != t) throw std::runtime_error("transcript failed JSON round trip");
  os << j.dump(2) << '\n';
}

mc::ExperimentSpec experiment(const Options& o) {
  mc::ExperimentSpec spec;
  spec.scenario = o.scenario;
  spec.trials = o.trials;
  spec.seed = o.seed;
  spec.jobs = o.jobs;
  spec.variant = protocol::parse_variant(o.variant);
  spec.theta = o.theta;
  spec.noise = o.noise;
  spec.n = single_n(o, 10);
  spec.i_threshold = o.ith.value_or(2.0);
  spec.epsilon = o.epsilon;
  spec.k = o.k;
  spec.device = o.device.empty() ? "honest" : o.device;
  return spec;
}

json params_json(const mc::ExperimentSpec& s) {
  return {{"variant", std::string(protocol::to_string(s.variant))},
          {"theta", s.theta},
          {"noise", s.noise},
          {"N", s.n},
          {"i_threshold", s.i_threshold},
          {"seed", s.seed},
          {"jobs", s.jobs}};
}

void cmd_montecarlo(const Options& o, std::ostream& os) {
  require_format(o, {"json"});
  const mc::ExperimentSpec spec = experiment(o);
  json params = params_json(spec);
  json result;
  const std::string& s = spec.scenario;
  if (s.rfind("gain-", 0) == 0) {
    const Estimate e = mc::estimate_gain(spec);
    result = result_json(s, params, e, s == "gain-honest" ? 0.5 : 0.75);
  } else if (s == "control" || s == "control-pr-classical") {
    const mc::ControlResult r = mc::estimate_control(spec);
    double reference = 0.75;
    if (s == "control") {
      reference = cos2_half(spec.theta);
      if (spec.variant == protocol::Variant::free_reveal) reference = analysis::free_reveal_control(reference);
    }
    result = result_json(s, params, r.conditional, reference);
    result["unconditional"] = estimate_json(r.unconditional);
    result["by_target"] = {estimate_json(r.by_target[0]), estimate_json(r.by_target[1])};
  } else if (s == "completeness") {
    const mc::CompletenessResult r = mc::honest_completeness(spec);
    result = result_json(s, params, r.conditional_correctness, spec.noise == 1.0 ? json(1.0) : json(nullptr));
    result["abort_rate"] = estimate_json(r.abort_rate);
  } else if (s == "counter-cheat") {
    const mc::CounterCheatResult r = mc::counter_cheat_demo(spec.n, spec.trials, spec.seed, spec.jobs);
    result = result_json(s, params, r.overall, 1.0 / static_cast<double>(spec.n));
    result["last_round_drawn"] = estimate_json(r.last_round_drawn);
    result["conditional_success"] = estimate_json(r.conditional_success);
  } else {
    throw UsageError("unknown scenario '" + s + "'");
  }
  os << result.dump(2) << '\n';
}

void cmd_azuma(const Options& o, std::ostream& os) {
  require_format(o, {"json"});
  const mc::ExperimentSpec spec = experiment(o);
  const mc::AzumaResult r = mc::azuma_empirical(spec);
  json params = {{"device", spec.device}, {"noise", spec.noise}, {"k", r.k}, {"epsilon", r.epsilon},
                 {"seed", spec.seed}};
  json j = result_json("azuma", params, r.tail, r.bound);
  j["bound"] = r.bound;
  j["tail_within_bound"] = r.tail.mean <= r.bound + 3.0 * r.tail.std_error;
  os << j.dump(2) << '\n';
}

json box_json(const analysis::NsBox& b) { return b.p; }

void cmd_polytope(const Options& o, std::ostream& os) {
  require_format(o, {"json"});
  const auto vertices = analysis::ns_vertices();
  const auto gain = analysis::max_gain_objective();
  const auto pr = analysis::max_pr_control_objective();
  json j = {{"gain_max", gain.value},
            {"pr_control_max", pr.value},
            {"vertices", vertices.size()},
            {"gain_argmax", box_json(gain.argmax)},
            {"pr_control_argmax", box_json(pr.argmax)},
            {"gain_maximizers", gain.maximizers.size()},
            {"pr_control_maximizers", pr.maximizers.size()}};
  os << j.dump(2) << '\n';
}

}  // namespace

std::string format_number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Device-independent bit commitment: simulator and security bounds", "dibc"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--seed", o.seed, "master RNG seed");
  app.add_option("--trials", o.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "output file (default: standard output)");
  app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--variant", o.variant, "main, free_reveal, large_office or pr")
      ->check(CLI::IsMember({"main", "free_reveal", "large_office", "pr"}));
  app.add_option("--N", o.n_args, "test rounds N; bound takes a list (1000,1e5) or decade range 1e3..1e8")
      ->delimiter(',');
  app.add_option("--ith", o.ith, "CHSH threshold I_th");
  app.add_option("--ith-schedule", o.ith_schedule, "threshold schedule for bound")
      ->check(CLI::IsMember({"caption", "body"}));
  app.add_option("--noise", o.noise, "Werner visibility v")->check(CLI::Range(0.0, 1.0));
  app.add_option("--theta", o.theta, "cheat angle in [0, pi/4]");
  app.add_option("--epsilon", o.epsilon, "deviation epsilon")->check(CLI::NonNegativeNumber);
  app.add_option("--k", o.k, "history length")->check(CLI::PositiveNumber);

  auto* curve = app.add_subcommand("curve", "C(I) table over I in [2, 2 sqrt 2]");
  curve->add_option("--points", o.points, "number of rows")->check(CLI::Range(2, 1000000));
  auto* bound = app.add_subcommand("bound", "finite-N upper bound on Alice's control");
  bound->add_option("--grid-step", o.grid_step, "coarse eps grid step")->check(CLI::PositiveNumber);
  auto* simulate = app.add_subcommand("simulate", "one protocol run, transcript as JSON");
  simulate->add_option("--alice", o.alice, "honest, cheat or withhold")
      ->check(CLI::IsMember({"honest", "cheat", "withhold"}));
  simulate->add_option("--bob", o.bob, "honest, gain_cheat_deterministic or gain_cheat_device_dependent");
  simulate->add_option("--device", o.device, "honest, alice_cheat, bob_cheat, counter_cheat, pr or classical");
  simulate->add_option("--bit", o.bit, "honest Alice's committed bit")->check(CLI::Range(0, 1));
  simulate->add_option("--target", o.target, "bit a cheating Alice reveals")->check(CLI::Range(0, 1));
  simulate->add_option("--box-input", o.box_input, "cheating Alice's box input")->check(CLI::Range(0, 3));
  simulate->add_option("--reveal-delay", o.reveal_delay, "rounds between commit and reveal");
  simulate->add_flag("--flip-reveal", o.flip_reveal, "Alice reveals the complement of her box output");
  simulate->add_option("--trigger", o.trigger, "counter_cheat trigger use (default N+1)");
  simulate->add_option("--table0", o.table0, "classical box 0 outputs for inputs 0..3")->delimiter(',');
  simulate->add_option("--table1", o.table1, "classical box 1 outputs for inputs 0..3")->delimiter(',');
  auto* montecarlo = app.add_subcommand("montecarlo", "Monte Carlo estimate with 99% interval");
  montecarlo->add_option("--scenario", o.scenario, "scenario id")
      ->required()
      ->check(CLI::IsMember({"gain-deterministic", "gain-device-dependent", "gain-pr", "gain-honest", "control",
                             "control-pr-classical", "completeness", "counter-cheat"}));
  auto* azuma = app.add_subcommand("azuma", "empirical martingale tail vs Azuma-Hoeffding");
  azuma->add_option("--device", o.device, "honest or pr")->check(CLI::IsMember({"honest", "pr"}));
  auto* polytope = app.add_subcommand("polytope", "no-signaling polytope maximizations");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    o.n_values = parse_n_list(o.n_args);
    const bool tabular = curve->parsed() || bound->parsed();
    if (o.format.empty()) o.format = tabular ? "csv" : "json";
    Output output(o.out, out);
    if (curve->parsed())
      cmd_curve(o, output.stream());
    else if (bound->parsed())
      cmd_bound(o, output.stream());
    else if (simulate->parsed())
      cmd_simulate(o, output.stream());
    else if (montecarlo->parsed())
      cmd_montecarlo(o, output.stream());
    else if (azuma->parsed())
      cmd_azuma(o, output.stream());
    else if (polytope->parsed())
      cmd_polytope(o, output.stream());
    output.commit();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace dibc::cli
