#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tracestrat/actions.hpp"
#include "tracestrat/cluster.hpp"
#include "tracestrat/fomm.hpp"
#include "tracestrat/longitudinal.hpp"
#include "tracestrat/outcomes.hpp"
#include "tracestrat/processes.hpp"
#include "tracestrat/types.hpp"

namespace tracestrat::tool {

/// Invalid invocation or config; the CLI maps this to exit code 2.
/// Everything else thrown during a run maps to exit code 1.
struct ConfigError : Error {
  using Error::Error;
};

struct RunConfig {
  std::string events_path;
  std::string outcomes_path;  // empty: skip the outcome tables
  std::string action_lib_path;
  std::string process_lib_path;
  std::string out_dir = "out";
  int k = 3;  // 0 picks K by BIC over 1..6
  double threshold = 0.10;
  std::uint64_t seed = 0;
  int threads = 1;
  cluster::EmConfig em;
  outcomes::SessionMaxMap session_max;  // merged over default_session_max()
};

/// Parses the JSON config document. Unknown keys are rejected so typos
/// fail loudly. Flags are merged on top by the CLI.
RunConfig config_from_json(const std::string& text);

/// Throws ConfigError when required paths are missing or absent on disk,
/// or when numeric settings are out of range.
void validate_config(const RunConfig& config);

bool log_enabled();
void log_line(std::string_view message);

std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex64(std::uint64_t value);

std::string read_file(const std::string& path);

/// Writes path + ".partial" then renames into place, so interrupted or
/// failed writes never leave a half-written artifact under the final name.
void write_artifact(const std::string& path, const std::string& content);

/// Parses (format chosen by extension: .csv, else JSONL) and sessionizes an
/// event log, logging reject counts.
std::vector<EventStream> load_events(const std::string& path);

/// Per-session action and process mapping, striped over `threads` workers.
/// Output order and content do not depend on the thread count.
std::vector<processes::StudentSessionInstances> map_sessions(
    const std::vector<EventStream>& streams,
    const actions::ActionLibrary& library,
    const std::vector<processes::ProcessPattern>& patterns, int threads);

/// Sequences with at least two process instances; shorter sessions are
/// logged and dropped (they carry no transition information).
std::vector<fomm::ProcessSequence> modelable_sequences(
    const std::vector<processes::StudentSessionInstances>& sessions);

/// Splits assignments by session id, pairs students across the first two
/// sessions in sorted order, and builds the k x k movement table. Fewer
/// than two sessions yield the all-zero table.
longitudinal::ContingencyTable cross_session_table(
    const std::vector<cluster::Assignment>& assignments, int k);

struct RunResult {
  std::vector<std::string> files;  // artifact names relative to out_dir
  std::string manifest_path;
  int k = 0;
};

/// Full pipeline: ingest, action/process mapping, per-session models,
/// mixture clustering, strategy graphs, cross-session symmetry, outcome
/// tables, manifest. Any failure surfaces as an Error prefixed with the
/// stage name; the artifact being written at that moment keeps its
/// .partial suffix.
RunResult run_pipeline(const RunConfig& config);

}  // namespace tracestrat::tool
