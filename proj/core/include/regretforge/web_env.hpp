#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "regretforge/site.hpp"

namespace regretforge {

struct InstructionField {
  std::string key;
  std::string value;
  friend bool operator==(const InstructionField&, const InstructionField&) = default;
};

/// The user profile for one episode: one field per distinct active key, in first-placement order.
struct Instruction {
  std::vector<InstructionField> fields;
  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Act on `element` (an id on the current page) using instruction field `field`.
struct NavAction {
  ElemId element = 0;
  int field = 0;
  friend bool operator==(const NavAction&, const NavAction&) = default;
};

enum class TerminalKind { none, success, fail_submit, timeout };
std::string_view to_string(TerminalKind k);

struct EnvConfig {
  double gamma = 0.99;
};

/// Episode horizon: 3 * n_fields + 2 * k + 4.
int horizon_for(int n_fields, int page_count);

struct EpisodeState {
  Website site;  // private copy; element values mutate during the episode
  int current_page = 0;
  int t = 0;
  int horizon = 0;
  double gamma = 0.99;
  double step_penalty = 0.0;  // -2 / horizon
  Instruction instruction;
  std::map<std::string, std::string> filled;
  bool done = false;
  TerminalKind terminal = TerminalKind::none;

  const std::vector<DomElement>& page() const { return site.pages[static_cast<std::size_t>(current_page)]; }
  bool is_final_page() const { return current_page + 1 == site.page_count(); }
};

struct ObsElement {
  ElemId id = 0;
  Tag tag = Tag::text;
  std::vector<std::string> text_tokens;
  std::vector<std::string> value_tokens;
  bool focusable = false;
  int depth = 0;
  int sibling_index = 0;
};

struct ObsField {
  std::vector<std::string> key_tokens;
  std::vector<std::string> value_tokens;
};

/// What a navigator sees: the current page (without hidden keys) and the instruction.
struct Observation {
  int page = 0;
  std::vector<ObsElement> elements;
  std::vector<ObsField> fields;
};

struct StepInfo {
  double potential_before = 0.0;
  double potential_after = 0.0;
  double shaping = 0.0;
  int n_correct = 0;
  TerminalKind terminal = TerminalKind::none;
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct Episode {
  EpisodeState state;
  Observation observation;
};

/// Samples the instruction from each key's value domain with `seed`; agent starts on page 0.
Episode reset(const Website& site, std::uint64_t seed, const EnvConfig& config = {});

/// Applies one action. Throws ContractViolation if the episode is done, the element is not a
/// focusable element of the current page, or the field index is invalid.
StepOutcome step(EpisodeState& state, const NavAction& action);

/// Fraction of instruction keys currently holding the instructed value; 1 when there are none.
double potential(const EpisodeState& state);
int correct_count(const EpisodeState& state);

Observation observe(const EpisodeState& state);

/// Canonical text of an observation; contains no hidden keys.
std::string serialize(const Observation& obs);

/// Scripted solver using hidden keys: fill the first incorrect key bound on this page,
/// otherwise advance, otherwise submit.
NavAction oracle_policy(const EpisodeState& state);

/// Sum over t of gamma^t * r_t.
double episode_return(std::span<const double> rewards, double gamma);

/// One line-delimited trace record for a step (observation digest, action, reward, info).
std::string trace_record(int t, const Observation& before, const NavAction& action, const StepOutcome& outcome);

}  // namespace regretforge
