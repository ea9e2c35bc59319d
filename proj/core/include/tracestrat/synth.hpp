#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tracestrat/fomm.hpp"
#include "tracestrat/processes.hpp"
#include "tracestrat/types.hpp"

namespace tracestrat::synth {

/// Ground-truth Markov generator over the canonical 7-label alphabet.
struct GeneratorProfile {
  std::string name;
  std::vector<double> initial;                  // length 7, sums to 1
  std::vector<std::vector<double>> transition;  // 7x7 row-stochastic
  int min_len = 2;
  int max_len = 2;
  double weight = 1.0;
};

std::vector<GeneratorProfile> profiles_from_json(const std::string& text);

struct SampleResult {
  std::vector<fomm::ProcessSequence> sequences;
  std::vector<int> true_components;  // generator index per sequence
};

/// Draws n sequences: profile by weight, length uniform in [min, max],
/// then a Markov walk. Each sequence gets its own sub-seed, so results do
/// not depend on sampling order. Throws on invalid profiles (rows or
/// weights off by more than 1e-9, min_len < 2).
SampleResult sample_sequences(const std::vector<GeneratorProfile>& profiles,
                              std::size_t n, std::uint64_t seed,
                              const std::string& session_id = "S1");

struct EventTemplate {
  Stream stream = Stream::navigation;
  std::string kind;
  std::string target;  // "*" is replaced by the realization's bound target
};

struct ActionRealization {
  std::string action;
  std::vector<EventTemplate> events;
};

/// One way to write a process label into the event log: a directed pattern
/// from the process library expanded into concrete event templates.
struct PatternRealization {
  std::string pattern_id;
  ProcessLabel label = ProcessLabel::No_Process;
  processes::VisitConstraint visit = processes::VisitConstraint::any;
  std::string family;  // target-counter family, e.g. "reading_page_"
  bool reversed = false;
  std::vector<ActionRealization> actions;
};

struct EmissionMap {
  std::map<ProcessLabel, std::vector<PatternRealization>> realizations;
};

/// Expands process patterns into emission realizations using the built-in
/// per-action event recipes (one forward realization per pattern plus one
/// reversed per bidirectional pattern). Throws when an action has no recipe
/// or some process label ends up uncoverable.
EmissionMap build_emission_map(
    const std::vector<processes::ProcessPattern>& patterns);

struct EmitOptions {
  std::string student_id = "synth";
  std::string session_id = "S1";
  int64_t start_ms = 0;
  // Gaps are chosen against the default libraries: events inside one action
  // merge (100 < idle gap 5000), actions inside one instance chain
  // (6000 <= within_gap 10000), instances never chain (12000 > 10000).
  int64_t within_action_gap_ms = 100;
  int64_t between_actions_gap_ms = 6000;
  int64_t between_instances_gap_ms = 12000;
};

/// Stateful trace writer for one student-session. Tracks emitted targets per
/// family so visit-constrained realizations stay consistent with what the
/// process mapper will reconstruct.
class TraceEmitter {
 public:
  TraceEmitter(const EmissionMap& map, EmitOptions opts, std::uint64_t seed);

  /// Emits one label via a uniformly chosen satisfiable realization.
  /// Throws "uncoverable label in context" when none is satisfiable.
  void emit(ProcessLabel label);

  /// Emits one specific realization; throws when its visit constraint
  /// cannot be satisfied by the targets emitted so far.
  void emit(const PatternRealization& realization);

  const std::vector<RawEvent>& events() const { return events_; }
  std::vector<RawEvent> take() { return std::move(events_); }

 private:
  const EmissionMap& map_;
  EmitOptions opts_;
  std::mt19937_64 rng_;
  std::vector<RawEvent> events_;
  std::map<std::string, std::vector<std::string>> visited_;  // per family
  std::map<std::string, int> counters_;
  int64_t next_ms_ = 0;
  bool any_instance_ = false;
};

/// Replaces every LC.Rereading that no earlier LC.FirstReading backs with
/// LC.FirstReading, making the sequence emittable from a fresh session.
std::vector<ProcessLabel> sanitize_for_emission(std::vector<ProcessLabel> seq);

/// Full trace for one sequence. Throws on uncoverable labels; callers with
/// arbitrary sequences should sanitize_for_emission first.
std::vector<RawEvent> emit_raw_trace(const std::vector<ProcessLabel>& seq,
                                     const EmissionMap& map,
                                     std::uint64_t seed,
                                     const EmitOptions& opts = {});

}  // namespace tracestrat::synth
