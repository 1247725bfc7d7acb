#include "dibc/transcript_json.hpp"

#include <string>

#include "dibc/errors.hpp"

namespace dibc::protocol {
namespace {

using nlohmann::json;

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> read_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::optional<Bit> read_bit(const json& j, const char* key) {
  auto v = read_opt<int>(j, key);
  if (!v) return std::nullopt;
  if (*v != 0 && *v != 1) throw UsageError(std::string("field ") + key + " must be a bit");
  return static_cast<Bit>(*v);
}

Bit required_bit(const json& j, const char* key) {
  auto v = read_bit(j, key);
  if (!v) throw UsageError(std::string("missing field ") + key);
  return *v;
}

std::optional<int> read_input(const json& j, const char* key) {
  auto v = read_opt<int>(j, key);
  if (v && (*v < 0 || *v > 3)) throw UsageError(std::string("field ") + key + " must be an input in 0..3");
  return v;
}

std::optional<int> read_output(const json& j, const char* key) {
  auto v = read_bit(j, key);
  return v ? std::optional<int>(*v) : std::nullopt;
}

json opt_bit(const std::optional<Bit>& v) { return v ? json(static_cast<int>(*v)) : json(nullptr); }

VerdictKind parse_verdict(const std::string& s) {
  for (VerdictKind k : {VerdictKind::accepted, VerdictKind::abort_low_violation, VerdictKind::abort_token_mismatch,
                        VerdictKind::abort_correlation_mismatch, VerdictKind::abort_timeout})
    if (s == to_string(k)) return k;
  throw UsageError("unknown verdict '" + s + "'");
}

}  // namespace

json to_json(const Transcript& t) {
  json rounds = json::array();
  for (const auto& r : t.rounds)
    rounds.push_back({{"s0", opt(r.s0)}, {"s1", opt(r.s1)}, {"r0", opt(r.r0)}, {"r1", opt(r.r1)}});

  json commit = nullptr;
  if (t.commit)
    commit = {{"b_committed", opt_bit(t.commit->b_committed)},
              {"a", opt_bit(t.commit->a)},
              {"q", static_cast<int>(t.commit->q)}};
  json reveal = nullptr;
  if (t.reveal)
    reveal = {{"b_revealed", static_cast<int>(t.reveal->b_revealed)},
              {"r_c", static_cast<int>(t.reveal->r_c)},
              {"round", t.reveal->round}};

  return {
      {"variant", std::string(to_string(t.variant))},
      {"config",
       {{"N", t.config.n},
        {"i_threshold", t.config.i_threshold},
        {"variant", std::string(to_string(t.config.variant))},
        {"rng_seed", t.config.rng_seed}}},
      {"rounds", rounds},
      {"bob_private",
       {{"n", opt(t.bob_private.n)},
        {"c", opt_bit(t.bob_private.c)},
        {"d", opt_bit(t.bob_private.d)},
        {"guess", opt_bit(t.bob_private.guess)}}},
      {"commit", commit},
      {"reveal", reveal},
      {"verdict", {{"kind", std::string(to_string(t.verdict.kind))}, {"bit", opt_bit(t.verdict.bit)}}},
      {"observed_violation", opt(t.observed_violation)},
  };
}

Transcript transcript_from_json(const json& j) {
  try {
    Transcript t;
    t.variant = parse_variant(j.at("variant").get<std::string>());
    const json& cfg = j.at("config");
    t.config.n = cfg.at("N").get<std::uint64_t>();
    t.config.i_threshold = cfg.at("i_threshold").get<double>();
    t.config.variant = parse_variant(cfg.at("variant").get<std::string>());
    t.config.rng_seed = cfg.at("rng_seed").get<std::uint64_t>();
    for (const json& r : j.at("rounds"))
      t.rounds.push_back({read_input(r, "s0"), read_input(r, "s1"), read_output(r, "r0"), read_output(r, "r1")});
    const json& bp = j.at("bob_private");
    t.bob_private = {read_opt<std::uint64_t>(bp, "n"), read_bit(bp, "c"), read_bit(bp, "d"), read_bit(bp, "guess")};
    if (!j.at("commit").is_null()) {
      const json& c = j.at("commit");
      t.commit = CommitRecord{read_bit(c, "b_committed"), read_bit(c, "a"), required_bit(c, "q")};
    }
    if (!j.at("reveal").is_null()) {
      const json& r = j.at("reveal");
      t.reveal = RevealRecord{required_bit(r, "b_revealed"), required_bit(r, "r_c"), r.at("round").get<std::uint64_t>()};
    }
    t.verdict = {parse_verdict(j.at("verdict").at("kind").get<std::string>()), read_bit(j.at("verdict"), "bit")};
    t.observed_violation = read_opt<double>(j, "observed_violation");
    return t;
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed transcript JSON: ") + e.what());
  }
}

}  // namespace dibc::protocol
