#include <doctest.h>

#include <random>

#include "regretforge/catalog.hpp"
#include "regretforge/design.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/generators.hpp"
#include "regretforge/site.hpp"

using namespace regretforge;

namespace {

DesignSpec spec_of(int k, std::initializer_list<std::pair<const char*, int>> placements) {
  DesignSpec s;
  s.k = k;
  s.provenance = Provenance::benchmark;
  for (const auto& [name, page] : placements) {
    if (std::string_view(name) == "SKIP") {
      s.actions.push_back({kSkip, 0});
    } else {
      s.actions.push_back({catalog().lookup(name).id, page});
    }
  }
  return s;
}

template <class F>
ParseError parse_error_of(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected ParseError");
  return ParseError("", 0, 0);
}

}  // namespace

TEST_CASE("design text roundtrip") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto s = dr_sample(3, 8, rng);
    const auto text = to_text(s);
    CHECK(design_from_text(text) == s);
    CHECK(to_text(design_from_text(text)) == text);
  }
}

TEST_CASE("design parse errors carry position") {
  auto e = parse_error_of([] { design_from_text("GMDS/1\nk 2\nprovenance dr\nplace nosuch 0\nend\n"); });
  CHECK(e.line() == 4);
  CHECK(e.column() == 7);

  e = parse_error_of([] { design_from_text("GMDS/1\nk 2\nprovenance dr\nplace username 2\nend\n"); });
  CHECK(e.line() == 4);
  CHECK(e.column() == 16);

  e = parse_error_of([] { design_from_text("GMDS/1\nk 0\n"); });
  CHECK(e.line() == 2);

  e = parse_error_of([] { design_from_text("GMDS/1\nk 1\nprovenance dr\nskip\n"); });
  CHECK(e.message().find("end") != std::string::npos);

  e = parse_error_of([] { design_from_text("GMDX\n"); });
  CHECK(e.line() == 1);
  CHECK_THROWS_AS(design_from_text(""), ParseError);
}

TEST_CASE("comments and blank lines are ignored") {
  const auto s = design_from_text("# hi\nGMDS/1\n\nk 1\nprovenance cl\n# c\nplace submit 0\nskip\nend\n");
  CHECK(s.k == 1);
  CHECK(s.provenance == Provenance::cl);
  REQUIRE(s.actions.size() == 2);
  CHECK(s.actions[1].is_skip());
  CHECK(s.placed().size() == 1);
}

TEST_CASE("digest is stable and content-sensitive") {
  const auto a = spec_of(1, {{"username", 0}, {"submit", 0}});
  auto b = a;
  CHECK(digest(a) == digest(b));
  b.actions[0].primitive = catalog().lookup("password").id;
  CHECK(digest(a) != digest(b));
  CHECK(digest(a).size() == 16);
}

TEST_CASE("render instantiates templates in action order") {
  const auto site = render(spec_of(1, {{"username", 0}, {"password", 0}, {"submit", 0}}));
  REQUIRE(site.page_count() == 1);
  CHECK(site.n_fields == 2);
  CHECK(site.field_keys() == std::vector<std::string>{"username", "password"});
  int inputs = 0;
  int terminates = 0;
  for (const auto& e : site.pages[0]) {
    if (e.tag == Tag::text_input) ++inputs;
    if (e.nav_effect == NavEffect::terminate) ++terminates;
    CHECK(e.focusable == is_focusable(e.tag));
  }
  CHECK(inputs == 2);
  CHECK(terminates == 1);
}

TEST_CASE("render repairs connectivity") {
  RenderReport rep;
  const auto site = render(spec_of(3, {{"username", 0}, {"password", 2}}), &rep);
  CHECK(rep.advance_repairs == 2);
  CHECK(rep.submit_repaired);
  for (int p = 0; p < 2; ++p) {
    const auto& page = site.pages[static_cast<std::size_t>(p)];
    CHECK(std::count_if(page.begin(), page.end(),
                        [](const DomElement& e) { return e.nav_effect == NavEffect::advance; }) == 1);
  }
  CHECK(site.pages[2].back().nav_effect == NavEffect::terminate);

  const auto clean = render(spec_of(2, {{"next_login_page", 0}, {"submit", 1}}), &rep);
  CHECK(rep.advance_repairs == 0);
  CHECK_FALSE(rep.submit_repaired);
  CHECK(clean.element_count() == 2);
}

TEST_CASE("all-SKIP design renders one submit button per final page") {
  RenderReport rep;
  const auto site = render(spec_of(1, {{"SKIP", 0}, {"SKIP", 0}}), &rep);
  CHECK(site.element_count() == 1);
  CHECK(site.n_fields == 0);
  CHECK(rep.submit_repaired);
}

TEST_CASE("duplicate placements share a field key") {
  const auto site = render(spec_of(2, {{"username", 0}, {"username", 1}}));
  CHECK(site.n_fields == 1);
  CHECK(site.primitive_ids.size() == 2);
}

TEST_CASE("element ids are global and parents precede children") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto site = render(dr_sample(3, 8, rng));
    ElemId expect = 0;
    for (std::size_t p = 0; p < site.pages.size(); ++p) {
      for (const auto& e : site.pages[p]) {
        CHECK(e.id == expect++);
        CHECK(e.page == static_cast<int>(p));
        if (e.parent) CHECK(*e.parent < e.id);
      }
    }
  }
}

TEST_CASE("render rejects bad specs") {
  auto s = spec_of(1, {{"username", 0}});
  s.actions[0].page = 1;
  CHECK_THROWS_AS(render(s), RenderError);
  s.k = 0;
  CHECK_THROWS_AS(render(s), RenderError);
}

TEST_CASE("render is a pure function of the spec") {
  std::mt19937_64 rng(2);
  const auto s = dr_sample(3, 8, rng);
  CHECK(serialize(render(s)) == serialize(render(s)));
}

TEST_CASE("website serialization roundtrip") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto site = render(dr_sample(3, 8, rng));
    const auto text = serialize(site);
    CHECK(deserialize(text) == site);
  }
}

TEST_CASE("website parse errors") {
  const auto good = serialize(render(spec_of(1, {{"username", 0}})));
  CHECK_THROWS_AS(deserialize(""), ParseError);
  CHECK_THROWS_AS(deserialize("GMWB/1\npages 0\n"), ParseError);
  auto bad = good;
  bad.replace(bad.find("text-input"), 10, "textinputx");
  auto e = parse_error_of([&] { deserialize(bad); });
  CHECK(e.message() == "unknown tag");
  CHECK(e.line() >= 5);
  CHECK_THROWS_AS(deserialize(good.substr(0, good.size() - 4)), ParseError);
}

TEST_CASE("html export escapes text and keeps hidden keys out") {
  const auto site = render(spec_of(2, {{"username", 0}, {"submit", 1}}));
  const auto docs = export_html(site);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].find("<input") != std::string::npos);
  CHECK(docs[0].find("data-nav=\"advance\"") != std::string::npos);
  CHECK(docs[1].find("data-nav=\"terminate\"") != std::string::npos);
  CHECK(docs[0].find("hidden") == std::string::npos);
}

TEST_CASE("tag names roundtrip") {
  for (std::size_t i = 0; i < kTagCount; ++i) {
    const auto t = static_cast<Tag>(i);
    CHECK(tag_from_string(to_string(t)) == t);
  }
  CHECK_THROWS_AS(tag_from_string("div"), LookupError);
}
