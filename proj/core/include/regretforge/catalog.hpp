#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace regretforge {

/// The twelve underspecified DOM templates primitives are instantiated from.
enum class TemplateKind {
  input,
  multi_selection,
  selection,
  button,
  link,
  label,
  carousel,
  cart,
  media,
  deck,
  footer,
  navigation_bar,
};
inline constexpr std::size_t kTemplateKindCount = 12;

enum class Activity { active, passive };

/// What pressing an element does to the page cursor.
enum class NavEffect { none, advance, terminate };

std::string_view to_string(TemplateKind k);
std::string_view to_string(Activity a);
std::string_view to_string(NavEffect e);
TemplateKind template_kind_from_string(std::string_view s);
NavEffect nav_effect_from_string(std::string_view s);

using PrimitiveId = int;

struct Primitive {
  PrimitiveId id = 0;
  std::string name;
  TemplateKind tmpl = TemplateKind::label;
  Activity activity = Activity::passive;
  std::optional<std::string> field_key;  // present iff active
  std::string label_text;
  /// Values an instruction may ask for (lexicon entries or selectable options); empty for passives.
  std::vector<std::string> value_domain;
  /// Child texts for grouped passive templates (carousel, deck, cart, media, footer, navbar).
  std::vector<std::string> items;
  NavEffect nav_effect = NavEffect::none;

  bool is_active() const { return activity == Activity::active; }
};

/// Fixed library of design primitives, ordered alphabetically by name with ids 0..39.
/// Immutable once built; the shared instance is safe to read from any thread.
class Catalog {
 public:
  static constexpr std::size_t kSize = 40;

  /// Parses the structured catalog document (see core/data/catalog.json). Throws ConfigError.
  static Catalog from_json(std::string_view json_text);

  std::span<const Primitive> primitives() const { return primitives_; }
  std::size_t size() const { return primitives_.size(); }
  const Primitive& at(PrimitiveId id) const;
  const Primitive& lookup(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t active_count() const;

  /// (# active ids) / (# ids); 0 for an empty list. Throws DomainError on an id outside 0..39.
  double active_fraction(std::span<const PrimitiveId> ids) const;

  /// Every distinct token appearing in labels, keys, values and item texts (sorted).
  std::vector<std::string> token_inventory() const;

 private:
  static Catalog from_json_document(std::string_view json_text);

  std::vector<Primitive> primitives_;
  std::unordered_map<std::string, PrimitiveId> by_name_;
};

/// The catalog compiled from the shipped data file.
const Catalog& catalog();

/// Raw text of the shipped catalog data file.
std::string_view catalog_source();

}  // namespace regretforge
