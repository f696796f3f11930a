#include "regretforge/site.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>

#include "line_reader.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/text.hpp"

namespace regretforge {

namespace {

constexpr std::array<std::string_view, kTagCount> kTagNames = {
    "text-input", "option", "checkbox", "button", "link", "text", "image", "group",
};

constexpr std::string_view kRepairAdvanceText = "Next";
constexpr std::string_view kRepairSubmitText = "Submit";

// Page under construction; parents are page-local indices until ids are assigned.
struct PageBuilder {
  std::vector<DomElement> elems;

  std::size_t add(Tag tag, std::string text, std::optional<std::size_t> parent = std::nullopt) {
    DomElement e;
    e.tag = tag;
    e.text = std::move(text);
    e.focusable = is_focusable(tag);
    if (parent) e.parent = static_cast<ElemId>(*parent);
    elems.push_back(std::move(e));
    return elems.size() - 1;
  }
};

void instantiate(const Primitive& p, PageBuilder& page) {
  const auto& items = p.items;
  auto item = [&](std::size_t i) { return i < items.size() ? items[i] : p.label_text; };
  switch (p.tmpl) {
    case TemplateKind::input: {
      const auto g = page.add(Tag::group, "");
      page.add(Tag::text, p.label_text, g);
      const auto box = page.add(Tag::text_input, p.label_text, g);
      page.elems[box].hidden_key = p.field_key;
      break;
    }
    case TemplateKind::multi_selection: {
      const auto g = page.add(Tag::group, "");
      page.add(Tag::text, p.label_text, g);
      for (const auto& option : p.value_domain) {
        const auto o = page.add(Tag::option, option, g);
        page.elems[o].hidden_key = p.field_key;
      }
      break;
    }
    case TemplateKind::selection: {
      const auto g = page.add(Tag::group, "");
      const auto box = page.add(Tag::checkbox, p.label_text, g);
      page.elems[box].hidden_key = p.field_key;
      break;
    }
    case TemplateKind::button:
    case TemplateKind::link: {
      const auto e = page.add(p.tmpl == TemplateKind::button ? Tag::button : Tag::link, p.label_text);
      page.elems[e].nav_effect = p.nav_effect;
      break;
    }
    case TemplateKind::label:
      page.add(Tag::text, p.label_text);
      break;
    case TemplateKind::carousel: {
      const auto g = page.add(Tag::group, "");
      page.add(Tag::image, p.label_text, g);
      for (std::size_t i = 0; i < 3; ++i) page.add(Tag::link, item(i), g);
      break;
    }
    case TemplateKind::cart: {
      const auto g = page.add(Tag::group, "");
      page.add(Tag::text, item(0), g);
      page.add(Tag::text_input, item(1), g);
      page.add(Tag::button, item(2), g);
      break;
    }
    case TemplateKind::media: {
      const auto g = page.add(Tag::group, "");
      page.add(Tag::image, item(0), g);
      page.add(Tag::text, item(1), g);
      page.add(Tag::link, item(2), g);
      break;
    }
    case TemplateKind::deck:
    case TemplateKind::footer:
    case TemplateKind::navigation_bar: {
      const auto g = page.add(Tag::group, "");
      for (std::size_t i = 0; i < 3; ++i) page.add(Tag::link, item(i), g);
      break;
    }
  }
}

bool has_effect(const PageBuilder& page, NavEffect effect) {
  return std::any_of(page.elems.begin(), page.elems.end(),
                     [&](const DomElement& e) { return e.nav_effect == effect; });
}

}  // namespace

std::string_view to_string(Tag t) { return kTagNames[static_cast<std::size_t>(t)]; }

Tag tag_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kTagNames.size(); ++i) {
    if (kTagNames[i] == s) return static_cast<Tag>(i);
  }
  throw LookupError("unknown tag '" + std::string(s) + "'");
}

std::size_t Website::element_count() const {
  std::size_t n = 0;
  for (const auto& p : pages) n += p.size();
  return n;
}

std::vector<std::string> Website::field_keys() const {
  std::vector<std::string> keys;
  const auto& cat = catalog();
  for (PrimitiveId id : primitive_ids) {
    const auto& p = cat.at(id);
    if (p.field_key && std::find(keys.begin(), keys.end(), *p.field_key) == keys.end()) {
      keys.push_back(*p.field_key);
    }
  }
  return keys;
}

Website render(const DesignSpec& spec, RenderReport* report) {
  if (spec.k < 1) throw RenderError("page count must be >= 1, got " + std::to_string(spec.k));
  const auto& cat = catalog();
  std::vector<PageBuilder> pages(static_cast<std::size_t>(spec.k));
  Website site;

  for (std::size_t i = 0; i < spec.actions.size(); ++i) {
    const auto& a = spec.actions[i];
    if (a.is_skip()) continue;
    if (a.page < 0 || a.page >= spec.k) {
      throw RenderError("action " + std::to_string(i) + " targets page " + std::to_string(a.page) +
                        " but k = " + std::to_string(spec.k));
    }
    instantiate(cat.at(a.primitive), pages[static_cast<std::size_t>(a.page)]);
    site.primitive_ids.push_back(a.primitive);
  }

  RenderReport rep;
  for (std::size_t p = 0; p + 1 < pages.size(); ++p) {
    if (!has_effect(pages[p], NavEffect::advance)) {
      const auto e = pages[p].add(Tag::button, std::string(kRepairAdvanceText));
      pages[p].elems[e].nav_effect = NavEffect::advance;
      ++rep.advance_repairs;
    }
  }
  if (!has_effect(pages.back(), NavEffect::terminate)) {
    const auto e = pages.back().add(Tag::button, std::string(kRepairSubmitText));
    pages.back().elems[e].nav_effect = NavEffect::terminate;
    rep.submit_repaired = true;
  }

  ElemId next_id = 0;
  for (std::size_t p = 0; p < pages.size(); ++p) {
    const ElemId base = next_id;
    auto& elems = pages[p].elems;
    for (auto& e : elems) {
      e.id = next_id++;
      e.page = static_cast<int>(p);
      if (e.parent) e.parent = base + *e.parent;
    }
    site.pages.push_back(std::move(elems));
  }
  site.n_fields = static_cast<int>(site.field_keys().size());
  if (report) *report = rep;
  return site;
}

std::vector<std::string> export_html(const Website& site) {
  std::vector<std::string> docs;
  for (std::size_t p = 0; p < site.pages.size(); ++p) {
    const auto& elems = site.pages[p];
    std::string out = "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>page " + std::to_string(p) +
                      "</title></head>\n<body>\n";
    // Children always follow their parent, so a stack of open groups reproduces the tree.
    std::vector<ElemId> open;
    auto close_until = [&](std::optional<ElemId> parent) {
      while (!open.empty() && (!parent || open.back() != *parent)) {
        open.pop_back();
        out += std::string(open.size() * 2, ' ') + "</div>\n";
      }
    };
    for (const auto& e : elems) {
      close_until(e.parent);
      const std::string indent(open.size() * 2, ' ');
      const std::string id = "e" + std::to_string(e.id);
      const auto txt = text::html_escape(e.text);
      switch (e.tag) {
        case Tag::group:
          out += indent + "<div id=\"" + id + "\" class=\"group\">\n";
          open.push_back(e.id);
          continue;
        case Tag::text:
          out += indent + "<label id=\"" + id + "\">" + txt + "</label>\n";
          break;
        case Tag::text_input:
          out += indent + "<input id=\"" + id + "\" type=\"text\" aria-label=\"" + txt + "\" value=\"" +
                 text::html_escape(e.value) + "\">\n";
          break;
        case Tag::option:
          out += indent + "<label><input id=\"" + id + "\" type=\"radio\">" + txt + "</label>\n";
          break;
        case Tag::checkbox:
          out += indent + "<label><input id=\"" + id + "\" type=\"checkbox\">" + txt + "</label>\n";
          break;
        case Tag::button:
          out += indent + "<button id=\"" + id + "\" data-nav=\"" + std::string(to_string(e.nav_effect)) + "\">" +
                 txt + "</button>\n";
          break;
        case Tag::link:
          out += indent + "<a id=\"" + id + "\" href=\"#\" data-nav=\"" + std::string(to_string(e.nav_effect)) +
                 "\">" + txt + "</a>\n";
          break;
        case Tag::image:
          out += indent + "<img id=\"" + id + "\" alt=\"" + txt + "\">\n";
          break;
      }
    }
    close_until(std::nullopt);
    out += "</body>\n</html>\n";
    docs.push_back(std::move(out));
  }
  return docs;
}

void write_html(const Website& site, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto docs = export_html(site);
  for (std::size_t p = 0; p < docs.size(); ++p) {
    std::ofstream f(dir / ("page_" + std::to_string(p) + ".html"), std::ios::binary);
    f << docs[p];
  }
}

std::string serialize(const Website& site) {
  std::string out = "GMWB/1\n";
  out += "pages " + std::to_string(site.pages.size()) + "\n";
  out += "fields " + std::to_string(site.n_fields) + "\n";
  out += "primitives " + std::to_string(site.primitive_ids.size());
  for (PrimitiveId id : site.primitive_ids) out += " " + std::to_string(id);
  out += "\n";
  for (std::size_t p = 0; p < site.pages.size(); ++p) {
    out += "page " + std::to_string(p) + " " + std::to_string(site.pages[p].size()) + "\n";
    for (const auto& e : site.pages[p]) {
      out += "el " + std::to_string(e.id) + " " + std::string(to_string(e.tag)) + " " +
             std::string(to_string(e.nav_effect)) + " " + (e.focusable ? "1" : "0") + " " +
             (e.parent ? std::to_string(*e.parent) : "-") + " " + (e.hidden_key ? *e.hidden_key : "-") + " " +
             text::quote(e.text) + " " + text::quote(e.value) + "\n";
    }
  }
  out += "end\n";
  return out;
}

Website deserialize(std::string_view src) {
  detail::LineReader in(src);
  if (!in.next()) in.fail_eof("empty website text");
  in.expect_keyword("GMWB/1");
  in.expect_count(1);

  Website site;
  if (!in.next()) in.fail_eof("missing 'pages' line");
  in.expect_keyword("pages");
  in.expect_count(2);
  const auto n_pages = in.integer(1);
  if (n_pages < 1) in.fail("page count must be >= 1", in.word(1).column);

  if (!in.next()) in.fail_eof("missing 'fields' line");
  in.expect_keyword("fields");
  in.expect_count(2);
  site.n_fields = static_cast<int>(in.integer(1));

  if (!in.next()) in.fail_eof("missing 'primitives' line");
  in.expect_keyword("primitives");
  const auto n_prims = in.integer(1);
  if (n_prims < 0) in.fail("negative primitive count", in.word(1).column);
  in.expect_count(static_cast<std::size_t>(n_prims) + 2);
  for (long long i = 0; i < n_prims; ++i) {
    const auto id = in.integer(static_cast<std::size_t>(i) + 2);
    if (id < 0 || id >= static_cast<long long>(Catalog::kSize)) {
      in.fail("primitive id out of range", in.word(static_cast<std::size_t>(i) + 2).column);
    }
    site.primitive_ids.push_back(static_cast<PrimitiveId>(id));
  }

  for (long long p = 0; p < n_pages; ++p) {
    if (!in.next()) in.fail_eof("missing page " + std::to_string(p));
    in.expect_keyword("page");
    in.expect_count(3);
    if (in.integer(1) != p) in.fail("pages out of order", in.word(1).column);
    const auto n_elems = in.integer(2);
    if (n_elems < 0) in.fail("negative element count", in.word(2).column);
    std::vector<DomElement> elems;
    for (long long i = 0; i < n_elems; ++i) {
      if (!in.next()) in.fail_eof("truncated page " + std::to_string(p));
      in.expect_keyword("el");
      in.expect_count(9);
      DomElement e;
      e.id = static_cast<ElemId>(in.integer(1));
      try {
        e.tag = tag_from_string(in.word(2).text);
      } catch (const LookupError&) {
        in.fail("unknown tag", in.word(2).column);
      }
      try {
        e.nav_effect = nav_effect_from_string(in.word(3).text);
      } catch (const LookupError&) {
        in.fail("unknown nav effect", in.word(3).column);
      }
      const auto& focus = in.word(4).text;
      if (focus != "0" && focus != "1") in.fail("expected 0 or 1", in.word(4).column);
      e.focusable = focus == "1";
      if (in.word(5).text != "-" || in.word(5).quoted) e.parent = static_cast<ElemId>(in.integer(5));
      if (in.word(6).text != "-" || in.word(6).quoted) e.hidden_key = in.word(6).text;
      if (!in.word(7).quoted) in.fail("expected quoted text", in.word(7).column);
      if (!in.word(8).quoted) in.fail("expected quoted value", in.word(8).column);
      e.text = in.word(7).text;
      e.value = in.word(8).text;
      e.page = static_cast<int>(p);
      elems.push_back(std::move(e));
    }
    site.pages.push_back(std::move(elems));
  }
  if (!in.next()) in.fail_eof("missing 'end'");
  in.expect_keyword("end");
  in.expect_count(1);
  if (in.next()) in.fail("trailing content after 'end'", in.word(0).column);
  return site;
}

}  // namespace regretforge
