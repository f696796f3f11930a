#include <doctest.h>

#include <algorithm>
#include <set>

#include "regretforge/catalog.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/vocabulary.hpp"

using namespace regretforge;

TEST_CASE("catalog has 40 primitives, 24 active") {
  const auto& cat = catalog();
  CHECK(cat.size() == 40);
  CHECK(cat.active_count() == 24);
  std::vector<PrimitiveId> all;
  for (const auto& p : cat.primitives()) all.push_back(p.id);
  CHECK(cat.active_fraction(all) == 0.6);
}

TEST_CASE("ids follow alphabetical order") {
  const auto& cat = catalog();
  for (std::size_t i = 0; i < cat.size(); ++i) {
    CHECK(cat.at(static_cast<PrimitiveId>(i)).id == static_cast<PrimitiveId>(i));
    if (i > 0) CHECK(cat.at(static_cast<PrimitiveId>(i - 1)).name < cat.at(static_cast<PrimitiveId>(i)).name);
  }
  CHECK(cat.lookup("addressline1").id == 0);
  CHECK(cat.lookup("zipcode").id == 39);
}

TEST_CASE("active primitives carry a key and a value domain") {
  for (const auto& p : catalog().primitives()) {
    if (p.is_active()) {
      REQUIRE(p.field_key.has_value());
      CHECK(*p.field_key == p.name);
      CHECK(!p.value_domain.empty());
    } else {
      CHECK(!p.field_key.has_value());
    }
  }
}

TEST_CASE("navigation buttons") {
  const auto& cat = catalog();
  CHECK(cat.lookup("submit").nav_effect == NavEffect::terminate);
  CHECK(cat.lookup("next_login").nav_effect == NavEffect::advance);
  CHECK(cat.lookup("next_checkout").nav_effect == NavEffect::advance);
  CHECK(cat.lookup("next_login_page").nav_effect == NavEffect::advance);
  CHECK(cat.lookup("username").nav_effect == NavEffect::none);
}

TEST_CASE("lookups fail loudly") {
  const auto& cat = catalog();
  CHECK_THROWS_AS(cat.at(40), DomainError);
  CHECK_THROWS_AS(cat.at(-1), DomainError);
  CHECK_THROWS_AS(cat.lookup("nope"), LookupError);
  const PrimitiveId bad[] = {3, 41};
  CHECK_THROWS_AS(cat.active_fraction(bad), DomainError);
  CHECK(cat.active_fraction({}) == 0.0);
}

TEST_CASE("catalog validation rejects malformed documents") {
  CHECK_THROWS_AS(Catalog::from_json("{}"), ConfigError);
  CHECK_THROWS(Catalog::from_json("not json"));
}

TEST_CASE("vocabulary is closed with an UNK row") {
  const auto vocab = Vocabulary::from_catalog(catalog());
  CHECK(vocab.token(Vocabulary::kUnk) == "<unk>");
  CHECK(vocab.id("username") != Vocabulary::kUnk);
  CHECK(vocab.id("submit") != Vocabulary::kUnk);
  CHECK(vocab.id("zzzz-not-a-token") == Vocabulary::kUnk);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < vocab.size(); ++i) CHECK(seen.insert(vocab.token(i)).second);
}
