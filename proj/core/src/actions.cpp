#include "tracestrat/actions.hpp"

#include <utility>

#include <json.hpp>

namespace tracestrat::actions {

namespace {

using ordered_json = nlohmann::ordered_json;

MatchSpec parse_match_spec(const ordered_json& obj) {
  if (!obj.is_object()) throw Error("matcher must be a JSON object");
  MatchSpec spec;
  if (auto it = obj.find("stream"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw Error("matcher stream must be a string");
    spec.stream = stream_from_string(it->get_ref<const std::string&>());
  }
  if (auto it = obj.find("kind"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw Error("matcher kind must be a string");
    spec.kind = it->get<std::string>();
  }
  if (auto it = obj.find("target"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw Error("matcher target must be a string");
    spec.target = it->get<std::string>();
    spec.target_literal =
        spec.target->find_first_not_of(
            "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"
            "0123456789_- :/") == std::string::npos;
    try {
      spec.target_re.assign(*spec.target,
                            std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw Error("bad target regex '" + *spec.target + "': " + e.what());
    }
  }
  if (!spec.stream && !spec.kind && !spec.target) {
    throw Error("matcher must constrain at least one of stream/kind/target");
  }
  return spec;
}

}  // namespace

bool MatchSpec::matches(const RawEvent& event) const {
  if (stream && *stream != event.stream) return false;
  if (kind && *kind != event.kind) return false;
  if (target) {
    if (target_literal) return event.target == *target;
    return std::regex_match(event.target, target_re);
  }
  return true;
}

bool ActionRule::matches(const RawEvent& event) const {
  for (const MatchSpec& spec : any_of) {
    if (spec.matches(event)) return true;
  }
  return false;
}

const ActionRule* ActionLibrary::match(const RawEvent& event) const {
  for (const ActionRule& rule : rules) {
    if (rule.matches(event)) return &rule;
  }
  return nullptr;
}

bool ActionLibrary::has_action(const std::string& action) const {
  for (const ActionRule& rule : rules) {
    if (rule.action == action) return true;
  }
  return false;
}

ActionLibrary compile_library(const std::string& json_text) {
  ordered_json doc = ordered_json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw Error("action library is not valid JSON");
  if (!doc.is_object()) throw Error("action library must be a JSON object");

  ActionLibrary library;
  if (auto it = doc.find("idle_gap_ms"); it != doc.end()) {
    if (!it->is_number_integer() && !it->is_number_unsigned()) {
      throw Error("idle_gap_ms must be an integer");
    }
    library.idle_gap_ms = it->get<int64_t>();
    if (library.idle_gap_ms < 0) throw Error("idle_gap_ms must be >= 0");
  }

  auto rules_it = doc.find("rules");
  if (rules_it == doc.end() || !rules_it->is_array()) {
    throw Error("action library needs a rules array");
  }
  // An empty rules array is a valid (if useless) library: every event then
  // maps to UNMAPPED_ACTION.
  for (const ordered_json& rule_obj : *rules_it) {
    if (!rule_obj.is_object()) throw Error("rule must be a JSON object");
    ActionRule rule;
    auto action_it = rule_obj.find("action");
    if (action_it == rule_obj.end() || !action_it->is_string() ||
        action_it->get_ref<const std::string&>().empty()) {
      throw Error("rule needs a non-empty action label");
    }
    rule.action = action_it->get<std::string>();
    if (rule.action == kUnmappedAction) {
      throw Error("UNMAPPED_ACTION is reserved");
    }
    for (const ActionRule& earlier : library.rules) {
      if (earlier.action == rule.action) {
        throw Error("duplicate action label '" + rule.action + "'");
      }
    }

    auto match_it = rule_obj.find("match");
    if (match_it == rule_obj.end() || !match_it->is_array() ||
        match_it->empty()) {
      throw Error("rule '" + rule.action + "' needs a non-empty match array");
    }
    for (const ordered_json& spec_obj : *match_it) {
      rule.any_of.push_back(parse_match_spec(spec_obj));
    }

    if (auto it = rule_obj.find("min_duration_ms"); it != rule_obj.end()) {
      if (!it->is_number_integer() && !it->is_number_unsigned()) {
        throw Error("min_duration_ms must be an integer");
      }
      rule.min_duration_ms = it->get<int64_t>();
      if (rule.min_duration_ms < 0) {
        throw Error("min_duration_ms must be >= 0");
      }
    }
    if (auto it = rule_obj.find("dwell_only"); it != rule_obj.end()) {
      if (!it->is_boolean()) throw Error("dwell_only must be a boolean");
      rule.dwell_only = it->get<bool>();
    }
    library.rules.push_back(std::move(rule));
  }
  return library;
}

std::vector<LearningAction> map_actions(const EventStream& stream,
                                        const ActionLibrary& library) {
  struct Run {
    const ActionRule* rule;  // nullptr for unmatched
    std::size_t first;       // index range into stream.events
    std::size_t last;
  };

  // Pass 1: label every event, merge same-rule neighbours within the gap.
  std::vector<Run> runs;
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const RawEvent& event = stream.events[i];
    const ActionRule* rule = library.match(event);
    if (rule && !runs.empty() && runs.back().rule == rule) {
      const RawEvent& prev = stream.events[runs.back().last];
      if (event.timestamp_ms - prev.timestamp_ms <= library.idle_gap_ms) {
        runs.back().last = i;
        continue;
      }
    }
    runs.push_back({rule, i, i});
  }

  // Pass 2: realize runs, applying dwell extension and the duration floor.
  std::vector<LearningAction> result;
  result.reserve(runs.size());
  for (const Run& run : runs) {
    const RawEvent& first = stream.events[run.first];
    const RawEvent& last = stream.events[run.last];
    LearningAction action;
    action.start_ms = first.timestamp_ms;
    action.end_ms = last.timestamp_ms;
    action.target = first.target;
    action.n_events = run.last - run.first + 1;
    if (run.rule) {
      action.action = run.rule->action;
      if (run.rule->dwell_only && run.last + 1 < stream.events.size()) {
        action.end_ms = stream.events[run.last + 1].timestamp_ms;
      }
      if (action.end_ms - action.start_ms < run.rule->min_duration_ms) {
        action.action = kUnmappedAction;
      }
    } else {
      action.action = kUnmappedAction;
    }
    result.push_back(std::move(action));
  }
  return result;
}

}  // namespace tracestrat::actions
