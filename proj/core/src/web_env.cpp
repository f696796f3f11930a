#include "regretforge/web_env.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "regretforge/errors.hpp"
#include "regretforge/text.hpp"

namespace regretforge {

namespace {

constexpr std::string_view kCheckboxOff = "off";
constexpr std::string_view kCheckboxOn = "on";
constexpr std::string_view kOptionSelected = "selected";

DomElement* find_on_page(EpisodeState& s, ElemId id) {
  for (auto& e : s.site.pages[static_cast<std::size_t>(s.current_page)]) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

void record(EpisodeState& s, const DomElement& e) {
  if (e.hidden_key) s.filled[*e.hidden_key] = e.value;
}

}  // namespace

std::string_view to_string(TerminalKind k) {
  switch (k) {
    case TerminalKind::success: return "success";
    case TerminalKind::fail_submit: return "fail_submit";
    case TerminalKind::timeout: return "timeout";
    case TerminalKind::none: break;
  }
  return "none";
}

int horizon_for(int n_fields, int page_count) { return 3 * n_fields + 2 * page_count + 4; }

Episode reset(const Website& site, std::uint64_t seed, const EnvConfig& config) {
  if (site.pages.empty()) throw ContractViolation("website has no pages");
  const auto& cat = catalog();
  EpisodeState s;
  s.site = site;
  s.gamma = config.gamma;
  s.horizon = horizon_for(site.n_fields, site.page_count());
  s.step_penalty = -2.0 / static_cast<double>(s.horizon);

  std::mt19937_64 rng(seed);
  for (const auto& key : site.field_keys()) {
    const auto& domain = cat.lookup(key).value_domain;
    std::uniform_int_distribution<std::size_t> pick(0, domain.size() - 1);
    s.instruction.fields.push_back({key, domain[pick(rng)]});
  }
  for (auto& page : s.site.pages) {
    for (auto& e : page) {
      e.value = e.tag == Tag::checkbox ? std::string(kCheckboxOff) : std::string();
    }
  }
  Episode ep{std::move(s), {}};
  ep.observation = observe(ep.state);
  return ep;
}

int correct_count(const EpisodeState& s) {
  int n = 0;
  for (const auto& f : s.instruction.fields) {
    const auto it = s.filled.find(f.key);
    if (it != s.filled.end() && it->second == f.value) ++n;
  }
  return n;
}

double potential(const EpisodeState& s) {
  if (s.instruction.fields.empty()) return 1.0;
  return static_cast<double>(correct_count(s)) / static_cast<double>(s.instruction.fields.size());
}

StepOutcome step(EpisodeState& s, const NavAction& action) {
  if (s.done) throw ContractViolation("step on a finished episode");
  DomElement* target = find_on_page(s, action.element);
  if (!target) throw ContractViolation("element " + std::to_string(action.element) + " is not on the current page");
  if (!target->focusable) throw ContractViolation("element " + std::to_string(action.element) + " is not focusable");
  const auto n_slots = std::max<std::size_t>(1, s.instruction.fields.size());
  if (action.field < 0 || static_cast<std::size_t>(action.field) >= n_slots) {
    throw ContractViolation("field index " + std::to_string(action.field) + " out of range");
  }

  StepOutcome out;
  out.info.potential_before = potential(s);
  double terminal_reward = 0.0;

  switch (target->tag) {
    case Tag::text_input:
      // With an empty instruction the only slot is the null field, which types nothing.
      target->value = s.instruction.fields.empty()
                          ? std::string()
                          : s.instruction.fields[static_cast<std::size_t>(action.field)].value;
      record(s, *target);
      break;
    case Tag::option: {
      auto& page = s.site.pages[static_cast<std::size_t>(s.current_page)];
      for (auto& e : page) {
        if (e.tag == Tag::option && e.parent == target->parent) e.value.clear();
        if (target->parent && e.id == *target->parent) e.value = target->text;
      }
      target->value = std::string(kOptionSelected);
      if (target->hidden_key) s.filled[*target->hidden_key] = target->text;
      break;
    }
    case Tag::checkbox:
      target->value = std::string(target->value == kCheckboxOn ? kCheckboxOff : kCheckboxOn);
      record(s, *target);
      break;
    case Tag::button:
    case Tag::link:
      if (target->nav_effect == NavEffect::advance) {
        if (!s.is_final_page()) ++s.current_page;
      } else if (target->nav_effect == NavEffect::terminate) {
        s.done = true;
        const bool ok = correct_count(s) == static_cast<int>(s.instruction.fields.size());
        s.terminal = ok ? TerminalKind::success : TerminalKind::fail_submit;
        terminal_reward = ok ? 1.0 : -1.0;
      }
      break;
    default:
      break;
  }

  ++s.t;
  if (!s.done && s.t >= s.horizon) {
    s.done = true;
    s.terminal = TerminalKind::timeout;
    terminal_reward = -1.0;
  }

  out.info.potential_after = potential(s);
  out.info.shaping = s.gamma * out.info.potential_after - out.info.potential_before;
  out.info.n_correct = correct_count(s);
  out.info.terminal = s.terminal;
  out.reward = out.info.shaping + s.step_penalty + terminal_reward;
  out.done = s.done;
  out.observation = observe(s);
  return out;
}

Observation observe(const EpisodeState& s) {
  Observation obs;
  obs.page = s.current_page;
  const auto& page = s.page();
  obs.elements.reserve(page.size());
  // Depth and sibling index come from the parent links; parents precede children.
  std::map<ElemId, int> depth_of;
  std::map<std::optional<ElemId>, int> child_counter;
  for (const auto& e : page) {
    ObsElement o;
    o.id = e.id;
    o.tag = e.tag;
    o.text_tokens = text::tokenize(e.text);
    o.value_tokens = text::tokenize(e.value);
    o.focusable = e.focusable;
    o.depth = e.parent ? depth_of[*e.parent] + 1 : 0;
    o.sibling_index = child_counter[e.parent]++;
    depth_of[e.id] = o.depth;
    obs.elements.push_back(std::move(o));
  }
  for (const auto& f : s.instruction.fields) {
    obs.fields.push_back({text::tokenize(f.key), text::tokenize(f.value)});
  }
  return obs;
}

std::string serialize(const Observation& obs) {
  auto join = [](const std::vector<std::string>& toks) {
    std::string out;
    for (const auto& t : toks) {
      if (!out.empty()) out.push_back(' ');
      out += t;
    }
    return text::quote(out);
  };
  std::string out = "page " + std::to_string(obs.page) + "\n";
  for (const auto& e : obs.elements) {
    out += "el " + std::to_string(e.id) + " " + std::string(to_string(e.tag)) + " " + (e.focusable ? "1" : "0") +
           " " + std::to_string(e.depth) + " " + std::to_string(e.sibling_index) + " " + join(e.text_tokens) + " " +
           join(e.value_tokens) + "\n";
  }
  for (const auto& f : obs.fields) out += "field " + join(f.key_tokens) + " " + join(f.value_tokens) + "\n";
  return out;
}

NavAction oracle_policy(const EpisodeState& s) {
  if (s.done) throw ContractViolation("oracle queried on a finished episode");
  for (std::size_t fi = 0; fi < s.instruction.fields.size(); ++fi) {
    const auto& f = s.instruction.fields[fi];
    const auto it = s.filled.find(f.key);
    if (it != s.filled.end() && it->second == f.value) continue;
    for (const auto& e : s.page()) {
      if (e.hidden_key != f.key) continue;
      if (e.tag == Tag::option && e.text != f.value) continue;
      return {e.id, static_cast<int>(fi)};
    }
  }
  const auto find_effect = [&](NavEffect effect) -> const DomElement* {
    for (const auto& e : s.page()) {
      if (e.focusable && e.nav_effect == effect) return &e;
    }
    return nullptr;
  };
  if (!s.is_final_page()) {
    if (const auto* adv = find_effect(NavEffect::advance)) return {adv->id, 0};
  }
  if (const auto* term = find_effect(NavEffect::terminate)) return {term->id, 0};
  throw ContractViolation("oracle found no advance or terminate element on page " + std::to_string(s.current_page));
}

double episode_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

std::string trace_record(int t, const Observation& before, const NavAction& action, const StepOutcome& outcome) {
  nlohmann::ordered_json j;
  j["t"] = t;
  j["obs_digest"] = text::hex64(text::fnv1a64(serialize(before)));
  j["action"] = {{"element", action.element}, {"field", action.field}};
  j["reward"] = outcome.reward;
  j["done"] = outcome.done;
  j["info"] = {{"potential_before", outcome.info.potential_before},
               {"potential_after", outcome.info.potential_after},
               {"shaping", outcome.info.shaping},
               {"n_correct", outcome.info.n_correct},
               {"terminal_kind", std::string(to_string(outcome.info.terminal))}};
  return j.dump();
}

}  // namespace regretforge
