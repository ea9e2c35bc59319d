#pragma once

#include <iosfwd>
#include <vector>

#include "tracestrat/types.hpp"

namespace tracestrat::ingest {

enum class LogFormat { jsonl, csv };

struct RecordReject {
  std::size_t line_no = 0;  // 1-based physical line
  std::string reason;
};

struct ParseResult {
  std::vector<RawEvent> events;  // file order, malformed records removed
  std::vector<RecordReject> rejects;
};

/// Parses a raw event log. JSONL: one object per line with fields
/// timestamp/student_id/session_id/stream/kind/target/payload (the short
/// aliases ts/student/session are accepted too). CSV: fixed header
/// timestamp,student_id,session_id,stream,kind,target,payload with payload
/// encoded as key=value pairs joined by ';'.
///
/// Malformed records become rejects with their line number; nothing is
/// silently dropped. A stream that cannot be read at all throws.
ParseResult parse_log(std::istream& in, LogFormat format);

/// Groups events by (student_id, session_id) and stably sorts each group by
/// timestamp so equal stamps keep input order. Streams come back sorted by
/// (student_id, session_id).
std::vector<EventStream> sessionize(std::vector<RawEvent> events);

void write_rejects_csv(std::ostream& out,
                       const std::vector<RecordReject>& rejects);

/// Canonical JSONL serialization, one event per line (long field names).
void write_events_jsonl(std::ostream& out, const std::vector<RawEvent>& events);

}  // namespace tracestrat::ingest
