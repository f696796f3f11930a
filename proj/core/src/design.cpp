#include "regretforge/design.hpp"

#include "line_reader.hpp"
#include "regretforge/errors.hpp"
#include "regretforge/text.hpp"

namespace regretforge {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::dr: return "dr";
    case Provenance::cl: return "cl";
    case Provenance::benchmark: return "benchmark";
    case Provenance::adversary: break;
  }
  return "adversary";
}

std::vector<PrimitiveId> DesignSpec::placed() const {
  std::vector<PrimitiveId> out;
  out.reserve(actions.size());
  for (const auto& a : actions) {
    if (!a.is_skip()) out.push_back(a.primitive);
  }
  return out;
}

std::string to_text(const DesignSpec& spec) {
  const auto& cat = catalog();
  std::string out = "GMDS/1\n";
  out += "k " + std::to_string(spec.k) + "\n";
  out += "provenance " + std::string(to_string(spec.provenance)) + "\n";
  for (const auto& a : spec.actions) {
    if (a.is_skip()) {
      out += "skip\n";
    } else {
      out += "place " + cat.at(a.primitive).name + " " + std::to_string(a.page) + "\n";
    }
  }
  out += "end\n";
  return out;
}

DesignSpec design_from_text(std::string_view text) {
  const auto& cat = catalog();
  detail::LineReader in(text);
  if (!in.next()) in.fail_eof("empty design text");
  in.expect_keyword("GMDS/1");
  in.expect_count(1);

  DesignSpec spec;
  if (!in.next()) in.fail_eof("missing 'k' line");
  in.expect_keyword("k");
  in.expect_count(2);
  spec.k = static_cast<int>(in.integer(1));
  if (spec.k < 1) in.fail("page count must be >= 1", in.word(1).column);

  if (!in.next()) in.fail_eof("missing 'provenance' line");
  in.expect_keyword("provenance");
  in.expect_count(2);
  const auto& prov = in.word(1).text;
  if (prov == "adversary") {
    spec.provenance = Provenance::adversary;
  } else if (prov == "dr") {
    spec.provenance = Provenance::dr;
  } else if (prov == "cl") {
    spec.provenance = Provenance::cl;
  } else if (prov == "benchmark") {
    spec.provenance = Provenance::benchmark;
  } else {
    in.fail("unknown provenance '" + prov + "'", in.word(1).column);
  }

  while (true) {
    if (!in.next()) in.fail_eof("missing 'end'");
    const auto& kw = in.word(0);
    if (kw.text == "end") {
      in.expect_count(1);
      break;
    }
    if (kw.text == "skip") {
      in.expect_count(1);
      spec.actions.push_back({kSkip, 0});
    } else if (kw.text == "place") {
      in.expect_count(3);
      const auto& name = in.word(1);
      if (!cat.contains(name.text)) in.fail("unknown primitive '" + name.text + "'", name.column);
      const auto page = in.integer(2);
      if (page < 0 || page >= spec.k) in.fail("page index out of range", in.word(2).column);
      spec.actions.push_back({cat.lookup(name.text).id, static_cast<int>(page)});
    } else {
      in.fail("unexpected '" + kw.text + "'", kw.column);
    }
  }
  return spec;
}

std::string digest(const DesignSpec& spec) { return text::hex64(text::fnv1a64(to_text(spec))); }

}  // namespace regretforge
