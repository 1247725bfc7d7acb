#pragma once

#include <optional>

namespace dibc {

/// Inputs and outputs of both boxes for one use index. A field is empty when
/// that box was not queried in the round.
struct RoundRecord {
  std::optional<int> s0;
  std::optional<int> s1;
  std::optional<int> r0;
  std::optional<int> r1;

  bool complete() const { return s0 && s1 && r0 && r1; }
  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

}  // namespace dibc
