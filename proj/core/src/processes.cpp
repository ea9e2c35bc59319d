#include "tracestrat/processes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <utility>

#include <json.hpp>

#include "tracestrat/csv.hpp"
#include "tracestrat/stats.hpp"

namespace tracestrat::processes {

namespace {

using ordered_json = nlohmann::ordered_json;

std::optional<int64_t> parse_adjacency_entry(const ordered_json& entry,
                                             const std::string& pattern_id) {
  if (entry.is_string()) {
    if (entry.get_ref<const std::string&>() == "immediate") {
      return std::nullopt;
    }
    throw Error("pattern '" + pattern_id +
                "': adjacency string must be \"immediate\"");
  }
  if (entry.is_object()) {
    auto it = entry.find("within_gap_ms");
    if (it == entry.end() ||
        (!it->is_number_integer() && !it->is_number_unsigned())) {
      throw Error("pattern '" + pattern_id +
                  "': adjacency object needs integer within_gap_ms");
    }
    int64_t gap = it->get<int64_t>();
    if (gap < 0) {
      throw Error("pattern '" + pattern_id + "': negative gap");
    }
    return gap;
  }
  throw Error("pattern '" + pattern_id + "': bad adjacency entry");
}

VisitConstraint parse_visit(const std::string& text,
                            const std::string& pattern_id) {
  if (text == "any") return VisitConstraint::any;
  if (text == "first") return VisitConstraint::first;
  if (text == "repeat") return VisitConstraint::repeat;
  throw Error("pattern '" + pattern_id + "': unknown visit constraint '" +
              text + "'");
}

struct Matcher {
  const ProcessPattern* pattern;
  bool reversed;

  const std::string& label_at(std::size_t i) const {
    const auto& seq = pattern->sequence;
    return reversed ? seq[seq.size() - 1 - i] : seq[i];
  }
  std::optional<int64_t> gap_at(std::size_t pair) const {
    const auto& gaps = pattern->pair_gaps;
    return reversed ? gaps[gaps.size() - 1 - pair] : gaps[pair];
  }
};

bool try_match(const Matcher& m,
               const std::vector<actions::LearningAction>& action_seq,
               std::size_t pos, const std::set<std::string>& visited) {
  const std::size_t len = m.pattern->sequence.size();
  if (pos + len > action_seq.size()) return false;
  for (std::size_t i = 0; i < len; ++i) {
    if (action_seq[pos + i].action != m.label_at(i)) return false;
    if (i > 0) {
      std::optional<int64_t> gap = m.gap_at(i - 1);
      if (gap) {
        int64_t delta =
            action_seq[pos + i].start_ms - action_seq[pos + i - 1].end_ms;
        if (delta > *gap) return false;
      }
    }
  }
  switch (m.pattern->visit) {
    case VisitConstraint::any:
      return true;
    case VisitConstraint::first:
      return visited.count(action_seq[pos].target) == 0;
    case VisitConstraint::repeat:
      return !action_seq[pos].target.empty() &&
             visited.count(action_seq[pos].target) > 0;
  }
  return false;
}

}  // namespace

std::vector<ProcessPattern> compile_process_library(
    const std::string& json_text, const actions::ActionLibrary& actions_lib) {
  ordered_json doc = ordered_json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw Error("process library is not valid JSON");
  if (!doc.is_object()) throw Error("process library must be a JSON object");
  auto patterns_it = doc.find("patterns");
  if (patterns_it == doc.end() || !patterns_it->is_array() ||
      patterns_it->empty()) {
    throw Error("process library needs a non-empty patterns array");
  }

  std::vector<ProcessPattern> patterns;
  std::set<std::string> seen_ids;
  for (const ordered_json& obj : *patterns_it) {
    if (!obj.is_object()) throw Error("pattern must be a JSON object");
    ProcessPattern pattern;

    auto id_it = obj.find("pattern_id");
    if (id_it == obj.end() || !id_it->is_string() ||
        id_it->get_ref<const std::string&>().empty()) {
      throw Error("pattern needs a non-empty pattern_id");
    }
    pattern.pattern_id = id_it->get<std::string>();
    if (!seen_ids.insert(pattern.pattern_id).second) {
      throw Error("duplicate pattern_id '" + pattern.pattern_id + "'");
    }
    if (pattern.pattern_id == kFallbackPattern) {
      throw Error("pattern_id 'fallback' is reserved");
    }

    auto seq_it = obj.find("sequence");
    if (seq_it == obj.end() || !seq_it->is_array() || seq_it->empty()) {
      throw Error("pattern '" + pattern.pattern_id + "': empty sequence");
    }
    for (const ordered_json& label : *seq_it) {
      if (!label.is_string()) {
        throw Error("pattern '" + pattern.pattern_id +
                    "': sequence entries must be strings");
      }
      const std::string& action = label.get_ref<const std::string&>();
      if (!actions_lib.has_action(action)) {
        throw Error("pattern '" + pattern.pattern_id +
                    "': unknown action label '" + action + "'");
      }
      pattern.sequence.push_back(action);
    }

    const std::size_t n_pairs = pattern.sequence.size() - 1;
    if (auto it = obj.find("adjacency"); it != obj.end()) {
      if (it->is_string()) {
        std::optional<int64_t> gap =
            parse_adjacency_entry(*it, pattern.pattern_id);
        pattern.pair_gaps.assign(n_pairs, gap);
      } else if (it->is_array()) {
        if (it->size() != n_pairs) {
          throw Error("pattern '" + pattern.pattern_id + "': adjacency needs " +
                      std::to_string(n_pairs) + " entries");
        }
        for (const ordered_json& entry : *it) {
          pattern.pair_gaps.push_back(
              parse_adjacency_entry(entry, pattern.pattern_id));
        }
      } else {
        throw Error("pattern '" + pattern.pattern_id + "': bad adjacency");
      }
    } else {
      pattern.pair_gaps.assign(n_pairs, kDefaultWithinGapMs);
    }

    if (auto it = obj.find("bidirectional"); it != obj.end()) {
      if (!it->is_boolean()) {
        throw Error("pattern '" + pattern.pattern_id +
                    "': bidirectional must be a boolean");
      }
      pattern.bidirectional = it->get<bool>();
    }

    auto emits_it = obj.find("emits");
    if (emits_it == obj.end() || !emits_it->is_string()) {
      throw Error("pattern '" + pattern.pattern_id + "': missing emits");
    }
    pattern.emits = process_from_string(emits_it->get_ref<const std::string&>());
    if (pattern.emits == ProcessLabel::No_Process) {
      throw Error("pattern '" + pattern.pattern_id +
                  "': emits must not be No_Process");
    }

    if (auto it = obj.find("visit"); it != obj.end()) {
      if (!it->is_string()) {
        throw Error("pattern '" + pattern.pattern_id +
                    "': visit must be a string");
      }
      pattern.visit =
          parse_visit(it->get_ref<const std::string&>(), pattern.pattern_id);
    }

    patterns.push_back(std::move(pattern));
  }
  return patterns;
}

std::vector<ProcessInstance> map_processes(
    const std::vector<actions::LearningAction>& action_seq,
    const std::vector<ProcessPattern>& patterns) {
  // Longer patterns first; library order breaks ties.
  std::vector<std::size_t> order(patterns.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return patterns[a].sequence.size() >
                            patterns[b].sequence.size();
                   });

  std::vector<ProcessInstance> instances;
  std::set<std::string> visited;
  auto consume = [&](std::size_t first, std::size_t last) {
    for (std::size_t i = first; i <= last; ++i) {
      if (!action_seq[i].target.empty()) visited.insert(action_seq[i].target);
    }
  };

  std::size_t pos = 0;
  while (pos < action_seq.size()) {
    const ProcessPattern* hit = nullptr;
    for (std::size_t idx : order) {
      const ProcessPattern& pattern = patterns[idx];
      Matcher forward{&pattern, false};
      if (try_match(forward, action_seq, pos, visited)) {
        hit = &pattern;
        break;
      }
      if (pattern.bidirectional && pattern.sequence.size() > 1) {
        Matcher backward{&pattern, true};
        if (try_match(backward, action_seq, pos, visited)) {
          hit = &pattern;
          break;
        }
      }
    }

    ProcessInstance instance;
    instance.span_first = pos;
    if (hit) {
      const std::size_t last = pos + hit->sequence.size() - 1;
      instance.label = hit->emits;
      instance.matched_pattern = hit->pattern_id;
      instance.span_last = last;
      instance.start_ms = action_seq[pos].start_ms;
      instance.end_ms = action_seq[last].end_ms;
      consume(pos, last);
      pos = last + 1;
    } else {
      instance.label = ProcessLabel::No_Process;
      instance.matched_pattern = kFallbackPattern;
      instance.span_last = pos;
      instance.start_ms = action_seq[pos].start_ms;
      instance.end_ms = action_seq[pos].end_ms;
      consume(pos, pos);
      ++pos;
    }
    instances.push_back(std::move(instance));
  }
  return instances;
}

std::vector<ProcessLabel> extract_sequence(
    const std::vector<ProcessInstance>& instances) {
  std::vector<ProcessLabel> sequence;
  sequence.reserve(instances.size());
  for (const ProcessInstance& instance : instances) {
    if (instance.label != ProcessLabel::No_Process) {
      sequence.push_back(instance.label);
    }
  }
  return sequence;
}

std::vector<ProcessTimeRow> process_time_stats(
    const std::vector<StudentSessionInstances>& sessions) {
  // session -> student -> per-process total ms
  std::map<std::string,
           std::map<std::string, std::array<int64_t, kNumProcesses>>>
      totals;
  for (const StudentSessionInstances& session : sessions) {
    auto& per_student = totals[session.session_id][session.student_id];
    for (const ProcessInstance& instance : session.instances) {
      if (instance.label == ProcessLabel::No_Process) continue;
      per_student[process_index(instance.label)] +=
          instance.end_ms - instance.start_ms;
    }
  }

  std::vector<ProcessTimeRow> rows;
  for (const auto& [session_id, students] : totals) {
    for (std::size_t p = 0; p < kNumProcesses; ++p) {
      std::vector<double> minutes;
      minutes.reserve(students.size());
      for (const auto& [student_id, per_process] : students) {
        minutes.push_back(static_cast<double>(per_process[p]) / 60000.0);
      }
      ProcessTimeRow row;
      row.process = process_alphabet()[p];
      row.session_id = session_id;
      row.n_students = minutes.size();
      row.mean_minutes = stats::mean(minutes);
      row.sd_minutes = minutes.size() > 1 ? stats::sample_sd(minutes) : 0.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_instances_csv(std::ostream& out,
                         const std::vector<StudentSessionInstances>& sessions) {
  csv::write_row(out, {"student_id", "session_id", "label", "start_ms",
                       "end_ms", "pattern_id"});
  for (const StudentSessionInstances& session : sessions) {
    for (const ProcessInstance& instance : session.instances) {
      csv::write_row(out, {session.student_id, session.session_id,
                           std::string(to_string(instance.label)),
                           std::to_string(instance.start_ms),
                           std::to_string(instance.end_ms),
                           instance.matched_pattern});
    }
  }
}

std::vector<StudentSessionInstances> read_instances_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("instances csv is empty");
  const std::vector<std::string> header = csv::split_row(line);
  const std::vector<std::string> expected = {
      "student_id", "session_id", "label", "start_ms", "end_ms", "pattern_id"};
  if (header != expected) throw Error("instances csv has an unexpected header");

  std::vector<StudentSessionInstances> sessions;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = csv::split_row(line);
    if (fields.size() != 6)
      throw Error("instances csv line " + std::to_string(line_no) +
                  ": expected 6 fields");
    ProcessInstance instance;
    instance.label = process_from_string(fields[2]);
    try {
      instance.start_ms = std::stoll(fields[3]);
      instance.end_ms = std::stoll(fields[4]);
    } catch (const std::exception&) {
      throw Error("instances csv line " + std::to_string(line_no) +
                  ": bad timestamp");
    }
    instance.matched_pattern = fields[5];
    if (sessions.empty() || sessions.back().student_id != fields[0] ||
        sessions.back().session_id != fields[1]) {
      sessions.push_back({fields[0], fields[1], {}});
    }
    instance.span_first = sessions.back().instances.size();
    instance.span_last = instance.span_first;
    sessions.back().instances.push_back(std::move(instance));
  }
  return sessions;
}

}  // namespace tracestrat::processes
