#include "tracestrat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <utility>

#include <json.hpp>

namespace tracestrat::synth {

namespace {

using ordered_json = nlohmann::ordered_json;

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t pick_index(std::mt19937_64& rng, std::size_t n) {
  auto idx = static_cast<std::size_t>(u01(rng) * static_cast<double>(n));
  return idx < n ? idx : n - 1;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::size_t sample_categorical(std::mt19937_64& rng,
                               const std::vector<double>& probs) {
  double target = u01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (target < acc) return i;
  }
  return probs.size() - 1;
}

void validate_profile(const GeneratorProfile& profile) {
  if (profile.initial.size() != kNumProcesses ||
      profile.transition.size() != kNumProcesses) {
    throw Error("profile '" + profile.name + "' has wrong dimensions");
  }
  double init_sum = 0.0;
  for (double v : profile.initial) init_sum += v;
  if (std::abs(init_sum - 1.0) > 1e-9) {
    throw Error("profile '" + profile.name + "' initial vector sum is off");
  }
  for (const auto& row : profile.transition) {
    if (row.size() != kNumProcesses) {
      throw Error("profile '" + profile.name + "' has wrong dimensions");
    }
    double row_sum = 0.0;
    for (double v : row) {
      if (v < 0.0) throw Error("profile '" + profile.name + "' has negative probability");
      row_sum += v;
    }
    if (std::abs(row_sum - 1.0) > 1e-9) {
      throw Error("profile '" + profile.name + "' row sum is off");
    }
  }
  if (profile.min_len < 2 || profile.max_len < profile.min_len) {
    throw Error("profile '" + profile.name + "' has a bad length range");
  }
  if (profile.weight < 0.0) {
    throw Error("profile '" + profile.name + "' has a negative weight");
  }
}

// Event recipes per action label. A "*" target is bound per realization;
// family names the target counter used for the binding.
struct Recipe {
  std::vector<EventTemplate> events;
  const char* family = "";
};

const std::map<std::string, Recipe>& recipes() {
  static const std::map<std::string, Recipe> table = {
      {"WRITE_ESSAY",
       {{{Stream::keyboard, "keypress", "essay"},
         {Stream::keyboard, "keypress", "essay"}},
        ""}},
      {"EDIT_ANNOTATION",
       {{{Stream::keyboard, "keypress", "annotation"},
         {Stream::keyboard, "keypress", "annotation"}},
        ""}},
      {"READ_ANNOTATION", {{{Stream::mouse, "click", "annotation"}}, ""}},
      {"SEARCH", {{{Stream::keyboard, "keypress", "search_box"}}, ""}},
      {"PLANNER",
       {{{Stream::mouse, "click", "planner"},
         {Stream::mouse, "click", "planner"}},
        ""}},
      {"TIMER", {{{Stream::mouse, "click", "timer"}}, ""}},
      {"RUBRIC", {{{Stream::navigation, "page_view", "rubric"}}, ""}},
      {"GENERAL_INSTRUCTION",
       {{{Stream::navigation, "page_view", "general_instruction"}}, ""}},
      {"TASK_INSTRUCTION",
       {{{Stream::navigation, "page_view", "task_instruction"}}, ""}},
      {"CHECK_ESSAY",
       {{{Stream::navigation, "page_view", "essay_review"}}, ""}},
      {"SCROLL_READING",
       {{{Stream::mouse, "scroll", "*"}, {Stream::mouse, "scroll", "*"}}, ""}},
      {"RELEVANT_READING",
       {{{Stream::navigation, "page_view", "*"}}, "reading_page_"}},
      {"REVIEW_SOURCE",
       {{{Stream::navigation, "page_view", "*"}}, "source_"}},
      {"OPEN_ESSAY", {{{Stream::navigation, "page_view", "essay"}}, ""}},
  };
  return table;
}

PatternRealization realize(const processes::ProcessPattern& pattern,
                           bool reversed) {
  PatternRealization realization;
  realization.pattern_id = pattern.pattern_id;
  realization.label = pattern.emits;
  realization.visit = pattern.visit;
  realization.reversed = reversed;

  std::vector<std::string> sequence = pattern.sequence;
  if (reversed) std::reverse(sequence.begin(), sequence.end());

  bool has_placeholder = false;
  std::set<std::string> families;
  for (const std::string& action : sequence) {
    auto it = recipes().find(action);
    if (it == recipes().end()) {
      throw Error("no emission recipe for action " + action);
    }
    ActionRealization ar;
    ar.action = action;
    ar.events = it->second.events;
    for (const EventTemplate& event : ar.events) {
      if (event.target == "*") has_placeholder = true;
    }
    if (*it->second.family != '\0') families.insert(it->second.family);
    realization.actions.push_back(std::move(ar));
  }
  if (has_placeholder) {
    if (families.size() != 1) {
      throw Error("pattern '" + pattern.pattern_id +
                  "' has placeholder events but no single target family");
    }
    realization.family = *families.begin();
  }
  return realization;
}

}  // namespace

std::vector<GeneratorProfile> profiles_from_json(const std::string& text) {
  ordered_json doc = ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error("profiles file is not valid JSON");
  auto profiles_it = doc.find("profiles");
  if (!doc.is_object() || profiles_it == doc.end() ||
      !profiles_it->is_array() || profiles_it->empty()) {
    throw Error("profiles file needs a non-empty profiles array");
  }
  std::vector<GeneratorProfile> profiles;
  for (const ordered_json& obj : *profiles_it) {
    GeneratorProfile profile;
    try {
      profile.name = obj.at("name").get<std::string>();
      profile.initial = obj.at("initial").get<std::vector<double>>();
      profile.transition =
          obj.at("transition").get<std::vector<std::vector<double>>>();
      profile.min_len = obj.at("min_len").get<int>();
      profile.max_len = obj.at("max_len").get<int>();
      profile.weight = obj.at("weight").get<double>();
    } catch (const ordered_json::exception& e) {
      throw Error(std::string("bad profile entry: ") + e.what());
    }
    validate_profile(profile);
    profiles.push_back(std::move(profile));
  }
  return profiles;
}

SampleResult sample_sequences(const std::vector<GeneratorProfile>& profiles,
                              std::size_t n, std::uint64_t seed,
                              const std::string& session_id) {
  if (profiles.empty()) throw Error("no generator profiles");
  std::vector<double> weights;
  double weight_sum = 0.0;
  for (const GeneratorProfile& profile : profiles) {
    validate_profile(profile);
    weight_sum += profile.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw Error("profile weights must sum to 1");
  }
  for (const GeneratorProfile& profile : profiles) {
    weights.push_back(profile.weight);
  }

  SampleResult result;
  for (std::size_t i = 0; i < n; ++i) {
    std::seed_seq sub{seed, static_cast<std::uint64_t>(i),
                      fnv1a64(session_id)};
    std::mt19937_64 rng(sub);
    std::size_t which = sample_categorical(rng, weights);
    const GeneratorProfile& profile = profiles[which];
    auto span = static_cast<std::size_t>(profile.max_len - profile.min_len);
    std::size_t len = static_cast<std::size_t>(profile.min_len) +
                      (span > 0 ? pick_index(rng, span + 1) : 0);

    fomm::ProcessSequence seq;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "st%04zu", i + 1);
    seq.student_id = buf;
    seq.session_id = session_id;
    std::size_t state = sample_categorical(rng, profile.initial);
    seq.labels.push_back(process_alphabet()[state]);
    seq.durations_ms.push_back(10000);
    for (std::size_t step = 1; step < len; ++step) {
      state = sample_categorical(rng, profile.transition[state]);
      seq.labels.push_back(process_alphabet()[state]);
      seq.durations_ms.push_back(10000);
    }
    result.sequences.push_back(std::move(seq));
    result.true_components.push_back(static_cast<int>(which));
  }
  return result;
}

EmissionMap build_emission_map(
    const std::vector<processes::ProcessPattern>& patterns) {
  EmissionMap map;
  for (const processes::ProcessPattern& pattern : patterns) {
    map.realizations[pattern.emits].push_back(realize(pattern, false));
    if (pattern.bidirectional && pattern.sequence.size() > 1) {
      std::vector<std::string> reversed(pattern.sequence.rbegin(),
                                        pattern.sequence.rend());
      if (reversed != pattern.sequence) {
        map.realizations[pattern.emits].push_back(realize(pattern, true));
      }
    }
  }
  for (ProcessLabel label : process_alphabet()) {
    auto it = map.realizations.find(label);
    if (it == map.realizations.end() || it->second.empty()) {
      throw Error("process label " + std::string(to_string(label)) +
                  " has no emission realization");
    }
  }
  return map;
}

TraceEmitter::TraceEmitter(const EmissionMap& map, EmitOptions opts,
                           std::uint64_t seed)
    : map_(map), opts_(std::move(opts)) {
  std::seed_seq sub{seed, static_cast<std::uint64_t>(0x74726163)};
  rng_.seed(sub);
  next_ms_ = opts_.start_ms;
}

void TraceEmitter::emit(ProcessLabel label) {
  auto it = map_.realizations.find(label);
  if (it == map_.realizations.end() || it->second.empty()) {
    throw Error("uncoverable label in context: " +
                std::string(to_string(label)));
  }
  std::vector<const PatternRealization*> satisfiable;
  for (const PatternRealization& realization : it->second) {
    if (realization.visit == processes::VisitConstraint::repeat) {
      auto visited = visited_.find(realization.family);
      if (visited == visited_.end() || visited->second.empty()) continue;
    }
    satisfiable.push_back(&realization);
  }
  if (satisfiable.empty()) {
    throw Error("uncoverable label in context: " +
                std::string(to_string(label)));
  }
  emit(*satisfiable[pick_index(rng_, satisfiable.size())]);
}

void TraceEmitter::emit(const PatternRealization& realization) {
  std::string bound;
  if (!realization.family.empty()) {
    if (realization.visit == processes::VisitConstraint::repeat) {
      auto visited = visited_.find(realization.family);
      if (visited == visited_.end() || visited->second.empty()) {
        throw Error("uncoverable label in context: " +
                    std::string(to_string(realization.label)) + " (pattern " +
                    realization.pattern_id + " needs a visited " +
                    realization.family + " target)");
      }
      bound = visited->second[pick_index(rng_, visited->second.size())];
    } else {
      bound = realization.family +
              std::to_string(++counters_[realization.family]);
    }
  }

  if (any_instance_ && !events_.empty()) {
    next_ms_ = events_.back().timestamp_ms + opts_.between_instances_gap_ms;
  }
  bool first_action = true;
  for (const ActionRealization& action : realization.actions) {
    if (!first_action) {
      next_ms_ = events_.back().timestamp_ms + opts_.between_actions_gap_ms;
    }
    first_action = false;
    bool first_event = true;
    for (const EventTemplate& tmpl : action.events) {
      if (!first_event) {
        next_ms_ = events_.back().timestamp_ms + opts_.within_action_gap_ms;
      }
      first_event = false;
      RawEvent event;
      event.timestamp_ms = next_ms_;
      event.student_id = opts_.student_id;
      event.session_id = opts_.session_id;
      event.stream = tmpl.stream;
      event.kind = tmpl.kind;
      event.target = tmpl.target == "*" ? bound : tmpl.target;
      events_.push_back(std::move(event));
    }
  }
  any_instance_ = true;

  if (!realization.family.empty() &&
      realization.visit != processes::VisitConstraint::repeat) {
    visited_[realization.family].push_back(bound);
  }
}

std::vector<ProcessLabel> sanitize_for_emission(
    std::vector<ProcessLabel> seq) {
  bool seen_first_reading = false;
  for (ProcessLabel& label : seq) {
    if (label == ProcessLabel::LC_FirstReading) {
      seen_first_reading = true;
    } else if (label == ProcessLabel::LC_Rereading && !seen_first_reading) {
      label = ProcessLabel::LC_FirstReading;
      seen_first_reading = true;
    }
  }
  return seq;
}

std::vector<RawEvent> emit_raw_trace(const std::vector<ProcessLabel>& seq,
                                     const EmissionMap& map,
                                     std::uint64_t seed,
                                     const EmitOptions& opts) {
  TraceEmitter emitter(map, opts, seed);
  for (ProcessLabel label : seq) emitter.emit(label);
  return emitter.take();
}

}  // namespace tracestrat::synth
