#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace regretforge::text {

/// Lowercase alphanumeric split: "Address Line 1" -> {"address", "line", "1"}.
std::vector<std::string> tokenize(std::string_view s);

/// 64-bit FNV-1a, used for digests of canonical text and shipped data.
std::uint64_t fnv1a64(std::string_view s);

std::string hex64(std::uint64_t v);

/// Quotes a string for the canonical text formats (backslash escapes for \ " and newlines).
std::string quote(std::string_view s);

std::string html_escape(std::string_view s);

}  // namespace regretforge::text
