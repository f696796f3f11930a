#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "regretforge/catalog.hpp"
#include "regretforge/design.hpp"

namespace regretforge {

enum class Tag { text_input, option, checkbox, button, link, text, image, group };
inline constexpr std::size_t kTagCount = 8;

std::string_view to_string(Tag t);
Tag tag_from_string(std::string_view s);
constexpr bool is_focusable(Tag t) {
  return t == Tag::text_input || t == Tag::option || t == Tag::checkbox || t == Tag::button || t == Tag::link;
}

using ElemId = int;

struct DomElement {
  ElemId id = 0;
  Tag tag = Tag::text;
  std::string text;
  std::string value;
  bool focusable = false;
  /// Ground-truth field key. Never exposed in observations.
  std::optional<std::string> hidden_key;
  NavEffect nav_effect = NavEffect::none;
  std::optional<ElemId> parent;
  int page = 0;

  friend bool operator==(const DomElement&, const DomElement&) = default;
};

struct Website {
  /// Elements of each page in document order.
  std::vector<std::vector<DomElement>> pages;
  /// Distinct field keys realized on the site (duplicate placements share a key).
  int n_fields = 0;
  /// Placed (non-SKIP) primitive ids in action order, duplicates kept.
  std::vector<PrimitiveId> primitive_ids;

  int page_count() const { return static_cast<int>(pages.size()); }
  std::size_t element_count() const;
  /// Distinct field keys in first-placement order.
  std::vector<std::string> field_keys() const;
  friend bool operator==(const Website&, const Website&) = default;
};

struct RenderReport {
  int advance_repairs = 0;
  bool submit_repaired = false;
};

/// Instantiates each non-SKIP action's template on its page in action order, then repairs
/// connectivity: every non-final page gets an advance button if it has none, the final page
/// a submit button if it has none. Pure function of the spec.
/// Throws RenderError when a page index is >= k or k < 1.
Website render(const DesignSpec& spec, RenderReport* report = nullptr);

/// One static HTML document per page.
std::vector<std::string> export_html(const Website& site);

/// Writes page_<i>.html files into `dir` (created if missing).
void write_html(const Website& site, const std::filesystem::path& dir);

/// Canonical "GMWB/1" text form.
std::string serialize(const Website& site);

/// Inverse of serialize. Throws ParseError with the offending position.
Website deserialize(std::string_view text);

}  // namespace regretforge
