#pragma once

#include <cstdint>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "tracestrat/types.hpp"

namespace tracestrat::actions {

/// One event matcher inside an action rule. Every populated field must match;
/// `target` is a regular expression matched against the whole target string.
struct MatchSpec {
  std::optional<Stream> stream;
  std::optional<std::string> kind;
  std::optional<std::string> target;  // ECMAScript regex, full match
  std::regex target_re;               // compiled form of `target`
  bool target_literal = false;        // pattern has no regex metacharacters

  bool matches(const RawEvent& event) const;
};

struct ActionRule {
  std::string action;  // label this rule produces
  std::vector<MatchSpec> any_of;
  int64_t min_duration_ms = 0;
  bool dwell_only = false;  // run's end extends to the next event

  bool matches(const RawEvent& event) const;
};

struct ActionLibrary {
  std::vector<ActionRule> rules;  // precedence order, first match wins
  int64_t idle_gap_ms = 5000;

  const ActionRule* match(const RawEvent& event) const;
  bool has_action(const std::string& action) const;
};

/// A contiguous run of events mapped to one action label.
struct LearningAction {
  std::string action;
  int64_t start_ms = 0;
  int64_t end_ms = 0;
  std::string target;  // target of the run's first event
  std::size_t n_events = 0;
};

inline constexpr const char* kUnmappedAction = "UNMAPPED_ACTION";

/// Parses an action library from its JSON text. Throws Error on schema
/// violations: unknown stream names, bad regexes, a rule without matchers,
/// or two rules sharing one action label.
ActionLibrary compile_library(const std::string& json_text);

/// Maps one session's events to learning actions.
///
/// Each event is matched against the rules in order; the first matching rule
/// labels it. Consecutive events matched by the same rule merge into one run
/// while the gap between neighbours stays within idle_gap_ms. Unmatched
/// events become one UNMAPPED_ACTION each. A dwell_only run's end extends to
/// the timestamp of the next event in the session (its own end if last). Runs
/// shorter than the rule's min_duration_ms demote to UNMAPPED_ACTION.
std::vector<LearningAction> map_actions(const EventStream& stream,
                                        const ActionLibrary& library);

}  // namespace tracestrat::actions
