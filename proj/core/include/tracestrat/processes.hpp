#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tracestrat/actions.hpp"
#include "tracestrat/types.hpp"

namespace tracestrat::processes {

/// Constraint on the first consumed action's target, checked against the
/// per-session set of targets already consumed by earlier instances.
enum class VisitConstraint { any, first, repeat };

struct ProcessPattern {
  std::string pattern_id;
  std::vector<std::string> sequence;  // action labels, length >= 1
  // One entry per consecutive pair. nullopt means immediate adjacency (no
  // time bound beyond contiguity); a value bounds start(next) - end(prev).
  std::vector<std::optional<int64_t>> pair_gaps;
  bool bidirectional = false;
  ProcessLabel emits = ProcessLabel::No_Process;
  VisitConstraint visit = VisitConstraint::any;
};

struct ProcessInstance {
  ProcessLabel label = ProcessLabel::No_Process;
  int64_t start_ms = 0;
  int64_t end_ms = 0;
  std::string matched_pattern;  // pattern_id, or "fallback"
  std::size_t span_first = 0;   // inclusive indices into the action list
  std::size_t span_last = 0;
};

struct StudentSessionInstances {
  std::string student_id;
  std::string session_id;
  std::vector<ProcessInstance> instances;
};

inline constexpr int64_t kDefaultWithinGapMs = 10000;
inline constexpr const char* kFallbackPattern = "fallback";

/// Parses a process library and validates every referenced action label
/// against the action library. Throws Error on unknown labels (naming them),
/// empty sequences, negative gaps, duplicate pattern ids, or emits set to
/// No_Process.
std::vector<ProcessPattern> compile_process_library(
    const std::string& json_text, const actions::ActionLibrary& actions_lib);

/// Greedy left-to-right scan. At each position the longest matching pattern
/// wins (library order breaks ties); its actions are consumed and one
/// instance emitted. Actions matching nothing emit one No_Process instance
/// each. Every action index lands in exactly one instance span.
std::vector<ProcessInstance> map_processes(
    const std::vector<actions::LearningAction>& action_seq,
    const std::vector<ProcessPattern>& patterns);

/// Time-ordered process labels with No_Process removed.
std::vector<ProcessLabel> extract_sequence(
    const std::vector<ProcessInstance>& instances);

struct ProcessTimeRow {
  ProcessLabel process = ProcessLabel::No_Process;
  std::string session_id;
  std::size_t n_students = 0;
  double mean_minutes = 0.0;
  double sd_minutes = 0.0;  // sample SD; 0 when only one student
};

/// Per-student totals per process (absent process counts as 0 minutes), then
/// mean and sample SD across the students of each session. Rows come out
/// ordered by session id, then canonical process order.
std::vector<ProcessTimeRow> process_time_stats(
    const std::vector<StudentSessionInstances>& sessions);

void write_instances_csv(std::ostream& out,
                         const std::vector<StudentSessionInstances>& sessions);

/// Inverse of write_instances_csv. Rows regroup by (student_id, session_id)
/// in first-appearance order; span indices are not persisted and come back
/// as positions within the regrouped instance list.
std::vector<StudentSessionInstances> read_instances_csv(std::istream& in);

}  // namespace tracestrat::processes
