#pragma once

#include <json.hpp>

#include "dibc/protocol.hpp"

namespace dibc::protocol {

// Shape: {variant, config, rounds:[{s0,s1,r0,r1}], bob_private, commit,
// reveal, verdict, observed_violation}. Absent values are null.
nlohmann::json to_json(const Transcript& t);

/// Throws UsageError on a malformed document.
Transcript transcript_from_json(const nlohmann::json& j);

}  // namespace dibc::protocol
