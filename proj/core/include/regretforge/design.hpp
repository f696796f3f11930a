#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "regretforge/catalog.hpp"

namespace regretforge {

/// Sentinel primitive index for the adversary's SKIP action (one past the last catalog id).
inline constexpr PrimitiveId kSkip = static_cast<PrimitiveId>(Catalog::kSize);
/// Width of every design-action head: the catalog plus SKIP.
inline constexpr std::size_t kDesignActionCount = Catalog::kSize + 1;

enum class Provenance { adversary, dr, cl, benchmark };

std::string_view to_string(Provenance p);

struct DesignAction {
  PrimitiveId primitive = kSkip;
  int page = 0;

  bool is_skip() const { return primitive == kSkip; }
  friend bool operator==(const DesignAction&, const DesignAction&) = default;
};

/// Adversary output: a page count k plus an ordered list of (primitive, page) placements.
struct DesignSpec {
  int k = 1;
  std::vector<DesignAction> actions;
  Provenance provenance = Provenance::adversary;

  /// Non-SKIP primitive ids in action order.
  std::vector<PrimitiveId> placed() const;
  friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

/// Canonical design text ("GMDS/1" header). Stable across runs.
std::string to_text(const DesignSpec& spec);

/// Parses one GMDS/1 document; throws ParseError with line/column on malformed input.
DesignSpec design_from_text(std::string_view text);

std::string digest(const DesignSpec& spec);

}  // namespace regretforge
