#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "regretforge/catalog.hpp"

namespace regretforge {

/// Closed token vocabulary. Id 0 is the UNK row; everything outside the vocabulary maps to it.
class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;

  explicit Vocabulary(std::vector<std::string> tokens);
  /// Tokens from every catalog label, key, value and item text plus structural tokens.
  static Vocabulary from_catalog(const Catalog& cat);

  std::size_t size() const { return tokens_.size(); }
  std::size_t id(std::string_view token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::vector<std::size_t> ids(const std::vector<std::string>& tokens) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace regretforge
