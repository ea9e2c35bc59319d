#include <doctest.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "tracestrat/ingest.hpp"
#include "tracestrat/types.hpp"

using namespace tracestrat;
using ingest::LogFormat;

namespace {

ingest::ParseResult parse(const std::string& text,
                          LogFormat format = LogFormat::jsonl) {
  std::istringstream in(text);
  return ingest::parse_log(in, format);
}

}  // namespace

TEST_CASE("jsonl line with short aliases parses to one event") {
  const auto result = parse(
      R"({"ts": 1000, "student": "a1", "session": "S1", "stream": "mouse", )"
      R"("kind": "click", "target": "timer"})"
      "\n");
  REQUIRE(result.events.size() == 1);
  CHECK(result.rejects.empty());
  const RawEvent& e = result.events[0];
  CHECK(e.timestamp_ms == 1000);
  CHECK(e.student_id == "a1");
  CHECK(e.session_id == "S1");
  CHECK(e.stream == Stream::mouse);
  CHECK(e.kind == "click");
  CHECK(e.target == "timer");
  CHECK(e.payload.empty());
}

TEST_CASE("long field names and payload object parse") {
  const auto result = parse(
      R"({"timestamp": 5, "student_id": "a1", "session_id": "S1", )"
      R"("stream": "keyboard", "kind": "keypress", "target": "essay", )"
      R"("payload": {"key": "a"}})"
      "\n");
  REQUIRE(result.events.size() == 1);
  REQUIRE(result.events[0].payload.size() == 1);
  CHECK(result.events[0].payload[0].first == "key");
  CHECK(result.events[0].payload[0].second == "a");
}

TEST_CASE("record without a timestamp is rejected with its line number") {
  const auto result = parse(
      R"({"student": "a1", "session": "S1", "stream": "mouse", "kind": "click"})"
      "\n");
  CHECK(result.events.empty());
  REQUIRE(result.rejects.size() == 1);
  CHECK(result.rejects[0].line_no == 1);
  CHECK(result.rejects[0].reason.find("timestamp") != std::string::npos);
}

TEST_CASE("malformed lines reject individually, good lines survive") {
  const std::string good =
      R"({"ts": 2, "student": "a1", "session": "S1", "stream": "mouse", "kind": "click"})";
  const auto result = parse("not json\n" + good + "\n{\"ts\": true}\n");
  CHECK(result.events.size() == 1);
  REQUIRE(result.rejects.size() == 2);
  CHECK(result.rejects[0].line_no == 1);
  CHECK(result.rejects[1].line_no == 3);
}

TEST_CASE("parse keeps file order even when timestamps are not sorted") {
  std::string text;
  for (int ts : {300, 100, 200}) {
    text += R"({"ts": )" + std::to_string(ts) +
            R"(, "student": "a1", "session": "S1", "stream": "mouse", "kind": "click"})"
            "\n";
  }
  const auto result = parse(text);
  REQUIRE(result.events.size() == 3);
  CHECK(result.events[0].timestamp_ms == 300);
  CHECK(result.events[1].timestamp_ms == 100);
  CHECK(result.events[2].timestamp_ms == 200);
}

TEST_CASE("sessionize splits by student and session") {
  std::vector<RawEvent> events(3);
  events[0] = {10, "a1", "S1", Stream::mouse, "click", "timer", {}};
  events[1] = {20, "a1", "S2", Stream::mouse, "click", "timer", {}};
  events[2] = {5, "a1", "S1", Stream::mouse, "click", "planner", {}};
  const auto streams = ingest::sessionize(std::move(events));
  REQUIRE(streams.size() == 2);
  CHECK(streams[0].session_id == "S1");
  CHECK(streams[0].events.size() == 2);
  CHECK(streams[0].events[0].timestamp_ms == 5);
  CHECK(streams[1].session_id == "S2");
  CHECK(streams[1].events.size() == 1);
}

TEST_CASE("sessionize sorts five shuffled events into one stream") {
  std::vector<RawEvent> events;
  for (int ts : {50, 10, 40, 20, 30}) {
    events.push_back({ts, "a1", "S1", Stream::mouse, "click", "t", {}});
  }
  const auto streams = ingest::sessionize(std::move(events));
  REQUIRE(streams.size() == 1);
  REQUIRE(streams[0].events.size() == 5);
  for (std::size_t i = 0; i + 1 < 5; ++i) {
    CHECK(streams[0].events[i].timestamp_ms <=
          streams[0].events[i + 1].timestamp_ms);
  }
}

TEST_CASE("sessionize of nothing is nothing") {
  CHECK(ingest::sessionize({}).empty());
  CHECK(parse("").events.empty());
  CHECK(parse("").rejects.empty());
}

TEST_CASE("equal timestamps keep input order") {
  std::vector<RawEvent> events;
  for (int i = 0; i < 4; ++i) {
    events.push_back(
        {100, "a1", "S1", Stream::mouse, "click", "t" + std::to_string(i), {}});
  }
  const auto streams = ingest::sessionize(std::move(events));
  REQUIRE(streams.size() == 1);
  for (int i = 0; i < 4; ++i) {
    CHECK(streams[0].events[i].target == "t" + std::to_string(i));
  }
}

TEST_CASE("every input line becomes an event or a reject") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> coin(0, 3);
  std::string text;
  std::size_t lines = 0;
  for (int i = 0; i < 300; ++i) {
    ++lines;
    switch (coin(rng)) {
      case 0:
        text += "garbage line\n";
        break;
      case 1:
        text += R"({"ts": -5, "student": "x", "session": "S1", "stream": "mouse", "kind": "c"})"
                "\n";
        break;
      default:
        text += R"({"ts": )" + std::to_string(i) +
                R"(, "student": "s)" + std::to_string(i % 7) +
                R"(", "session": "S)" + std::to_string(i % 2 + 1) +
                R"(", "stream": "keyboard", "kind": "keypress", "target": "essay"})"
                "\n";
    }
  }
  const auto result = parse(text);
  CHECK(result.events.size() + result.rejects.size() == lines);

  auto streams = ingest::sessionize(result.events);
  std::size_t total = 0;
  for (const auto& s : streams) total += s.events.size();
  CHECK(total == result.events.size());

  std::vector<RawEvent> flattened;
  for (const auto& s : streams) {
    flattened.insert(flattened.end(), s.events.begin(), s.events.end());
  }
  const auto again = ingest::sessionize(flattened);
  REQUIRE(again.size() == streams.size());
  for (std::size_t i = 0; i < streams.size(); ++i) {
    CHECK(again[i].student_id == streams[i].student_id);
    CHECK(again[i].session_id == streams[i].session_id);
    REQUIRE(again[i].events.size() == streams[i].events.size());
    for (std::size_t j = 0; j < streams[i].events.size(); ++j) {
      CHECK(again[i].events[j].timestamp_ms ==
            streams[i].events[j].timestamp_ms);
      CHECK(again[i].events[j].target == streams[i].events[j].target);
    }
  }
}

TEST_CASE("csv log format parses with payload pairs") {
  const std::string text =
      "timestamp,student_id,session_id,stream,kind,target,payload\n"
      "1000,a1,S1,mouse,click,timer,\n"
      "2000,a1,S1,keyboard,keypress,essay,key=a;mod=shift\n";
  const auto result = parse(text, LogFormat::csv);
  REQUIRE(result.events.size() == 2);
  CHECK(result.rejects.empty());
  CHECK(result.events[0].target == "timer");
  REQUIRE(result.events[1].payload.size() == 2);
  CHECK(result.events[1].payload[0].first == "key");
  CHECK(result.events[1].payload[1].second == "shift");
}

TEST_CASE("csv with a wrong header throws") {
  std::istringstream in("time,who\n1,2\n");
  CHECK_THROWS_AS(ingest::parse_log(in, LogFormat::csv), Error);
}

TEST_CASE("csv rejects carry line numbers past the header") {
  const std::string text =
      "timestamp,student_id,session_id,stream,kind,target,payload\n"
      "nope,a1,S1,mouse,click,timer,\n";
  const auto result = parse(text, LogFormat::csv);
  CHECK(result.events.empty());
  REQUIRE(result.rejects.size() == 1);
  CHECK(result.rejects[0].line_no == 2);
}

TEST_CASE("rejects csv lists line and reason") {
  std::ostringstream out;
  ingest::write_rejects_csv(out, {{3, "invalid JSON"}, {9, "missing kind"}});
  CHECK(out.str() ==
        "line_no,reason\n"
        "3,invalid JSON\n"
        "9,missing kind\n");
}

TEST_CASE("events jsonl round-trips through the parser") {
  std::vector<RawEvent> events;
  events.push_back({1, "a1", "S1", Stream::navigation, "page_view",
                    "reading_page_1", {{"ref", "menu"}}});
  events.push_back({2, "a2", "S2", Stream::keyboard, "keypress", "essay", {}});
  std::ostringstream out;
  ingest::write_events_jsonl(out, events);
  const auto result = parse(out.str());
  CHECK(result.rejects.empty());
  REQUIRE(result.events.size() == 2);
  CHECK(result.events[0].timestamp_ms == 1);
  CHECK(result.events[0].stream == Stream::navigation);
  CHECK(result.events[0].payload.size() == 1);
  CHECK(result.events[1].student_id == "a2");
}

TEST_CASE("stream names round-trip") {
  for (Stream s : {Stream::navigation, Stream::mouse, Stream::keyboard}) {
    CHECK(stream_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(stream_from_string("telepathy"), Error);
}
