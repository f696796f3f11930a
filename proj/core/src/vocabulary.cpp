#include "regretforge/vocabulary.hpp"

#include <algorithm>

#include "regretforge/text.hpp"

namespace regretforge {

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  tokens_.push_back("<unk>");
  for (auto& t : tokens) {
    if (t == "<unk>" || index_.count(t)) continue;
    index_.emplace(t, tokens_.size());
    tokens_.push_back(std::move(t));
  }
}

Vocabulary Vocabulary::from_catalog(const Catalog& cat) {
  auto tokens = cat.token_inventory();
  // Texts the renderer and environment introduce beyond the catalog.
  for (const char* extra : {"next", "submit", "selected", "on", "off"}) {
    for (auto& t : text::tokenize(extra)) tokens.push_back(std::move(t));
  }
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return Vocabulary(std::move(tokens));
}

std::size_t Vocabulary::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocabulary::ids(const std::vector<std::string>& tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

}  // namespace regretforge
