#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tracestrat {

/// Error type thrown by every fatal failure in the toolkit. Record-level
/// problems (a malformed log line, a student missing an outcome) are data,
/// not exceptions; they come back in reject/exclusion reports instead.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// The three raw trace streams captured by the learning platform.
enum class Stream { navigation, mouse, keyboard };

std::string_view to_string(Stream s);
Stream stream_from_string(std::string_view s);

/// One time-stamped log record.
struct RawEvent {
  std::int64_t timestamp_ms = 0;
  std::string student_id;
  std::string session_id;
  Stream stream = Stream::navigation;
  std::string kind;
  std::string target;
  std::vector<std::pair<std::string, std::string>> payload;
};

/// All events of one student-session, sorted by timestamp (stable).
struct EventStream {
  std::string student_id;
  std::string session_id;
  std::vector<RawEvent> events;
};

/// The seven SRL processes plus the fallback label. No_Process never enters
/// a transition model; it exists only so unmatched actions stay auditable.
enum class ProcessLabel {
  MC_Orientation,
  MC_Planning,
  MC_Monitoring,
  MC_Evaluation,
  LC_FirstReading,
  LC_Rereading,
  HC_ElaborationOrganisation,
  No_Process,
};

inline constexpr std::size_t kNumProcesses = 7;

/// Canonical ordering of the seven modelled processes. Index in this array
/// is the row/column index used by every transition matrix.
const std::array<ProcessLabel, kNumProcesses>& process_alphabet();

std::string_view to_string(ProcessLabel label);
ProcessLabel process_from_string(std::string_view s);

/// Index of a label in the canonical alphabet. Throws for No_Process.
std::size_t process_index(ProcessLabel label);

}  // namespace tracestrat
