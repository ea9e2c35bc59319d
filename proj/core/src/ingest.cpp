#include "tracestrat/ingest.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>

#include <json.hpp>

#include "tracestrat/csv.hpp"

namespace tracestrat::ingest {

namespace {

using ordered_json = nlohmann::ordered_json;

// Returns the first present key from the given aliases, or nullptr.
const ordered_json* find_field(const ordered_json& obj,
                               std::initializer_list<const char*> names) {
  for (const char* name : names) {
    auto it = obj.find(name);
    if (it != obj.end() && !it->is_null()) return &*it;
  }
  return nullptr;
}

bool parse_jsonl_record(const std::string& line, RawEvent& out,
                        std::string& reason) {
  ordered_json obj = ordered_json::parse(line, nullptr, false);
  if (obj.is_discarded()) {
    reason = "invalid JSON";
    return false;
  }
  if (!obj.is_object()) {
    reason = "record is not a JSON object";
    return false;
  }

  const ordered_json* ts = find_field(obj, {"timestamp", "ts", "timestamp_ms"});
  if (!ts) {
    reason = "missing timestamp";
    return false;
  }
  if (!ts->is_number_integer() && !ts->is_number_unsigned()) {
    reason = "timestamp is not an integer";
    return false;
  }
  out.timestamp_ms = ts->get<int64_t>();
  if (out.timestamp_ms < 0) {
    reason = "negative timestamp";
    return false;
  }

  const ordered_json* student = find_field(obj, {"student_id", "student"});
  if (!student || !student->is_string() ||
      student->get_ref<const std::string&>().empty()) {
    reason = "missing student_id";
    return false;
  }
  out.student_id = student->get<std::string>();

  const ordered_json* session = find_field(obj, {"session_id", "session"});
  if (!session || !session->is_string() ||
      session->get_ref<const std::string&>().empty()) {
    reason = "missing session_id";
    return false;
  }
  out.session_id = session->get<std::string>();

  const ordered_json* stream = find_field(obj, {"stream"});
  if (!stream || !stream->is_string()) {
    reason = "missing stream";
    return false;
  }
  try {
    out.stream = stream_from_string(stream->get_ref<const std::string&>());
  } catch (const Error&) {
    reason = "unknown stream '" + stream->get<std::string>() + "'";
    return false;
  }

  const ordered_json* kind = find_field(obj, {"kind", "event", "type"});
  if (!kind || !kind->is_string()) {
    reason = "missing kind";
    return false;
  }
  out.kind = kind->get<std::string>();

  out.target.clear();
  if (const ordered_json* target = find_field(obj, {"target"})) {
    if (!target->is_string()) {
      reason = "target is not a string";
      return false;
    }
    out.target = target->get<std::string>();
  }

  out.payload.clear();
  if (const ordered_json* payload = find_field(obj, {"payload"})) {
    if (payload->is_object()) {
      for (auto it = payload->begin(); it != payload->end(); ++it) {
        const ordered_json& v = it.value();
        std::string value;
        if (v.is_string()) {
          value = v.get<std::string>();
        } else {
          value = v.dump();
        }
        out.payload.emplace_back(it.key(), std::move(value));
      }
    } else if (payload->is_array()) {
      for (const ordered_json& entry : *payload) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
            !entry[1].is_string()) {
          reason = "payload array entries must be [key, value] string pairs";
          return false;
        }
        out.payload.emplace_back(entry[0].get<std::string>(),
                                 entry[1].get<std::string>());
      }
    } else {
      reason = "payload must be an object or array";
      return false;
    }
  }
  return true;
}

std::vector<std::pair<std::string, std::string>> parse_payload_field(
    const std::string& field) {
  std::vector<std::pair<std::string, std::string>> payload;
  std::size_t pos = 0;
  while (pos < field.size()) {
    std::size_t semi = field.find(';', pos);
    if (semi == std::string::npos) semi = field.size();
    std::string item = field.substr(pos, semi - pos);
    if (!item.empty()) {
      std::size_t eq = item.find('=');
      if (eq == std::string::npos) {
        payload.emplace_back(std::move(item), "");
      } else {
        payload.emplace_back(item.substr(0, eq), item.substr(eq + 1));
      }
    }
    pos = semi + 1;
  }
  return payload;
}

const char* kCsvHeader[] = {"timestamp", "student_id", "session_id", "stream",
                            "kind",      "target",     "payload"};

bool parse_csv_record(const std::vector<std::string>& fields, RawEvent& out,
                      std::string& reason) {
  if (fields.size() != 7) {
    reason = "expected 7 fields, got " + std::to_string(fields.size());
    return false;
  }
  const std::string& ts = fields[0];
  if (ts.empty() ||
      ts.find_first_not_of("0123456789-") != std::string::npos) {
    reason = "timestamp is not an integer";
    return false;
  }
  try {
    out.timestamp_ms = std::stoll(ts);
  } catch (const std::exception&) {
    reason = "timestamp is not an integer";
    return false;
  }
  if (out.timestamp_ms < 0) {
    reason = "negative timestamp";
    return false;
  }
  if (fields[1].empty()) {
    reason = "missing student_id";
    return false;
  }
  out.student_id = fields[1];
  if (fields[2].empty()) {
    reason = "missing session_id";
    return false;
  }
  out.session_id = fields[2];
  try {
    out.stream = stream_from_string(fields[3]);
  } catch (const Error&) {
    reason = "unknown stream '" + fields[3] + "'";
    return false;
  }
  if (fields[4].empty()) {
    reason = "missing kind";
    return false;
  }
  out.kind = fields[4];
  out.target = fields[5];
  out.payload = parse_payload_field(fields[6]);
  return true;
}

}  // namespace

ParseResult parse_log(std::istream& in, LogFormat format) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    if (format == LogFormat::csv && !header_seen) {
      header_seen = true;
      std::vector<std::string> fields = csv::split_row(line);
      bool ok = fields.size() == 7;
      for (std::size_t i = 0; ok && i < 7; ++i) ok = fields[i] == kCsvHeader[i];
      if (!ok) {
        throw Error(
            "bad CSV header: expected "
            "timestamp,student_id,session_id,stream,kind,target,payload");
      }
      continue;
    }

    RawEvent event;
    std::string reason;
    bool ok = format == LogFormat::jsonl
                  ? parse_jsonl_record(line, event, reason)
                  : parse_csv_record(csv::split_row(line), event, reason);
    if (ok) {
      result.events.push_back(std::move(event));
    } else {
      result.rejects.push_back({line_no, std::move(reason)});
    }
  }
  if (in.bad()) throw Error("I/O error while reading event log");
  return result;
}

std::vector<EventStream> sessionize(std::vector<RawEvent> events) {
  std::map<std::pair<std::string, std::string>, std::vector<RawEvent>> groups;
  for (RawEvent& event : events) {
    auto key = std::make_pair(event.student_id, event.session_id);
    groups[std::move(key)].push_back(std::move(event));
  }
  std::vector<EventStream> streams;
  streams.reserve(groups.size());
  for (auto& [key, group] : groups) {
    std::stable_sort(group.begin(), group.end(),
                     [](const RawEvent& a, const RawEvent& b) {
                       return a.timestamp_ms < b.timestamp_ms;
                     });
    EventStream stream;
    stream.student_id = key.first;
    stream.session_id = key.second;
    stream.events = std::move(group);
    streams.push_back(std::move(stream));
  }
  return streams;
}

void write_rejects_csv(std::ostream& out,
                       const std::vector<RecordReject>& rejects) {
  csv::write_row(out, {"line_no", "reason"});
  for (const RecordReject& reject : rejects) {
    csv::write_row(out, {std::to_string(reject.line_no), reject.reason});
  }
}

void write_events_jsonl(std::ostream& out,
                        const std::vector<RawEvent>& events) {
  for (const RawEvent& event : events) {
    ordered_json obj;
    obj["timestamp"] = event.timestamp_ms;
    obj["student_id"] = event.student_id;
    obj["session_id"] = event.session_id;
    obj["stream"] = to_string(event.stream);
    obj["kind"] = event.kind;
    obj["target"] = event.target;
    ordered_json payload = ordered_json::object();
    for (const auto& [key, value] : event.payload) payload[key] = value;
    obj["payload"] = std::move(payload);
    out << obj.dump() << '\n';
  }
}

}  // namespace tracestrat::ingest
