#include "regretforge/catalog.hpp"

#include <algorithm>
#include <array>
#include <set>

#include <json.hpp>

#include "regretforge/errors.hpp"
#include "regretforge/text.hpp"

namespace regretforge {

namespace data {
extern const std::string_view catalog_json;
}

namespace {

constexpr std::array<std::string_view, kTemplateKindCount> kTemplateNames = {
    "input", "multi-selection", "selection", "button", "link",   "label",
    "carousel", "cart",        "media",     "deck",   "footer", "navigation-bar",
};

}  // namespace

std::string_view to_string(TemplateKind k) { return kTemplateNames[static_cast<std::size_t>(k)]; }

std::string_view to_string(Activity a) { return a == Activity::active ? "active" : "passive"; }

std::string_view to_string(NavEffect e) {
  switch (e) {
    case NavEffect::advance: return "advance";
    case NavEffect::terminate: return "terminate";
    case NavEffect::none: break;
  }
  return "none";
}

TemplateKind template_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kTemplateNames.size(); ++i) {
    if (kTemplateNames[i] == s) return static_cast<TemplateKind>(i);
  }
  throw LookupError("unknown template kind '" + std::string(s) + "'");
}

NavEffect nav_effect_from_string(std::string_view s) {
  if (s == "none") return NavEffect::none;
  if (s == "advance") return NavEffect::advance;
  if (s == "terminate") return NavEffect::terminate;
  throw LookupError("unknown nav effect '" + std::string(s) + "'");
}

Catalog Catalog::from_json(std::string_view json_text) {
  try {
    return from_json_document(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("catalog: ") + e.what());
  }
}

Catalog Catalog::from_json_document(std::string_view json_text) {
  const auto doc = nlohmann::json::parse(json_text);
  const auto& lexicons = doc.at("lexicons");

  Catalog cat;
  for (const auto& entry : doc.at("primitives")) {
    Primitive p;
    p.id = static_cast<PrimitiveId>(cat.primitives_.size());
    p.name = entry.at("name").get<std::string>();
    p.tmpl = template_kind_from_string(entry.at("template").get<std::string>());
    const auto activity = entry.at("activity").get<std::string>();
    if (activity != "active" && activity != "passive") {
      throw ConfigError("primitive " + p.name + ": bad activity '" + activity + "'");
    }
    p.activity = activity == "active" ? Activity::active : Activity::passive;
    p.label_text = entry.at("label").get<std::string>();
    if (entry.contains("lexicon")) {
      p.value_domain = lexicons.at(entry.at("lexicon").get<std::string>()).get<std::vector<std::string>>();
    } else if (entry.contains("options")) {
      p.value_domain = entry.at("options").get<std::vector<std::string>>();
    }
    if (entry.contains("items")) p.items = entry.at("items").get<std::vector<std::string>>();
    if (entry.contains("nav")) p.nav_effect = nav_effect_from_string(entry.at("nav").get<std::string>());

    if (p.is_active()) {
      p.field_key = p.name;
      if (p.value_domain.empty()) throw ConfigError("active primitive " + p.name + " has no value domain");
    }
    if (p.nav_effect != NavEffect::none && p.tmpl != TemplateKind::button && p.tmpl != TemplateKind::link) {
      throw ConfigError("primitive " + p.name + ": nav effect on a non-button/link template");
    }
    if (!cat.by_name_.emplace(p.name, p.id).second) throw ConfigError("duplicate primitive " + p.name);
    cat.primitives_.push_back(std::move(p));
  }
  if (!std::is_sorted(cat.primitives_.begin(), cat.primitives_.end(),
                      [](const Primitive& a, const Primitive& b) { return a.name < b.name; })) {
    throw ConfigError("catalog entries must be sorted by name");
  }
  return cat;
}

const Primitive& Catalog::at(PrimitiveId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= primitives_.size()) {
    throw DomainError("primitive id " + std::to_string(id) + " out of range");
  }
  return primitives_[static_cast<std::size_t>(id)];
}

const Primitive& Catalog::lookup(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) throw LookupError("unknown primitive '" + std::string(name) + "'");
  return primitives_[static_cast<std::size_t>(it->second)];
}

bool Catalog::contains(std::string_view name) const { return by_name_.count(std::string(name)) != 0; }

std::size_t Catalog::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(primitives_.begin(), primitives_.end(), [](const Primitive& p) { return p.is_active(); }));
}

double Catalog::active_fraction(std::span<const PrimitiveId> ids) const {
  if (ids.empty()) return 0.0;
  std::size_t active = 0;
  for (PrimitiveId id : ids) active += at(id).is_active() ? 1 : 0;
  return static_cast<double>(active) / static_cast<double>(ids.size());
}

std::vector<std::string> Catalog::token_inventory() const {
  std::set<std::string> tokens;
  auto add = [&](std::string_view s) {
    for (auto& t : text::tokenize(s)) tokens.insert(std::move(t));
  };
  for (const auto& p : primitives_) {
    add(p.name);
    add(p.label_text);
    for (const auto& v : p.value_domain) add(v);
    for (const auto& v : p.items) add(v);
  }
  return {tokens.begin(), tokens.end()};
}

const Catalog& catalog() {
  static const Catalog instance = Catalog::from_json(data::catalog_json);
  return instance;
}

std::string_view catalog_source() { return data::catalog_json; }

}  // namespace regretforge
