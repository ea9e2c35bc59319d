#include "pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "tracestrat/actions.hpp"
#include "tracestrat/fomm.hpp"
#include "tracestrat/ingest.hpp"
#include "tracestrat/longitudinal.hpp"
#include "tracestrat/processes.hpp"

namespace fs = std::filesystem;

namespace tracestrat::tool {

namespace {

void require_keys(const nlohmann::json& obj,
                  const std::set<std::string>& allowed,
                  const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace

RunConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  require_keys(j,
               {"events", "outcomes", "action_lib", "process_lib", "out", "k",
                "threshold", "seed", "threads", "em", "session_max"},
               "top level");

  RunConfig config;
  try {
    if (j.contains("events")) config.events_path = j["events"].get<std::string>();
    if (j.contains("outcomes"))
      config.outcomes_path = j["outcomes"].get<std::string>();
    if (j.contains("action_lib"))
      config.action_lib_path = j["action_lib"].get<std::string>();
    if (j.contains("process_lib"))
      config.process_lib_path = j["process_lib"].get<std::string>();
    if (j.contains("out")) config.out_dir = j["out"].get<std::string>();
    if (j.contains("k")) config.k = j["k"].get<int>();
    if (j.contains("threshold"))
      config.threshold = j["threshold"].get<double>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) config.threads = j["threads"].get<int>();
    if (j.contains("em")) {
      const nlohmann::json& em = j["em"];
      if (!em.is_object()) throw ConfigError("config: em must be an object");
      require_keys(em, {"max_iter", "tol", "n_restarts", "smoothing_alpha", "mode"},
                   "em");
      if (em.contains("max_iter")) config.em.max_iter = em["max_iter"].get<int>();
      if (em.contains("tol")) config.em.tol = em["tol"].get<double>();
      if (em.contains("n_restarts"))
        config.em.n_restarts = em["n_restarts"].get<int>();
      if (em.contains("smoothing_alpha"))
        config.em.smoothing_alpha = em["smoothing_alpha"].get<double>();
      if (em.contains("mode")) {
        const std::string mode = em["mode"].get<std::string>();
        if (mode == "markov") {
          config.em.mode = cluster::EmMode::markov;
        } else if (mode == "gaussian") {
          config.em.mode = cluster::EmMode::gaussian;
        } else {
          throw ConfigError("config: em.mode must be markov or gaussian");
        }
      }
    }
    if (j.contains("session_max")) {
      const nlohmann::json& sm = j["session_max"];
      if (!sm.is_object())
        throw ConfigError("config: session_max must be an object");
      for (const auto& [session, max] : sm.items()) {
        config.session_max[session] = max.get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return config;
}

void validate_config(const RunConfig& config) {
  if (config.events_path.empty()) {
    throw ConfigError("events path is required");
  }
  auto must_exist = [](const std::string& path, const char* what) {
    if (!path.empty() && !fs::exists(path)) {
      throw ConfigError(std::string(what) + " path does not exist: " + path);
    }
  };
  must_exist(config.events_path, "events");
  must_exist(config.outcomes_path, "outcomes");
  must_exist(config.action_lib_path, "action library");
  must_exist(config.process_lib_path, "process library");
  if (config.action_lib_path.empty())
    throw ConfigError("action library path is required");
  if (config.process_lib_path.empty())
    throw ConfigError("process library path is required");
  if (config.out_dir.empty()) throw ConfigError("output directory is required");
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0))
    throw ConfigError("threshold must lie in [0, 1]");
  if (config.k < 0) throw ConfigError("k must be >= 0 (0 selects by BIC)");
  if (config.threads < 1) throw ConfigError("threads must be >= 1");
  if (config.em.max_iter < 1) throw ConfigError("em.max_iter must be >= 1");
  if (!(config.em.tol > 0.0)) throw ConfigError("em.tol must be > 0");
  if (config.em.n_restarts < 1)
    throw ConfigError("em.n_restarts must be >= 1");
  if (!(config.em.smoothing_alpha > 0.0))
    throw ConfigError("em.smoothing_alpha must be > 0");
}

bool log_enabled() {
  static const bool enabled = [] {
    const char* value = std::getenv("TRACE_STRATEGIST_LOG");
    return value != nullptr && *value != '\0' &&
           std::string_view(value) != "0";
  }();
  return enabled;
}

void log_line(std::string_view message) {
  if (!log_enabled()) return;
  std::cerr << "[trace-strategist] " << message << '\n';
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string to_hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return std::string(buf, 16);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error("cannot read file: " + path);
  return std::move(buffer).str();
}

void write_artifact(const std::string& path, const std::string& content) {
  const std::string partial = path + ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + partial);
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write failed: " + partial);
  }
  std::error_code ec;
  fs::rename(partial, path, ec);
  if (ec) throw Error("cannot move " + partial + " into place: " + ec.message());
}

std::vector<EventStream> load_events(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open events file: " + path);
  const ingest::LogFormat format = path.size() >= 4 &&
                                           path.compare(path.size() - 4, 4,
                                                        ".csv") == 0
                                       ? ingest::LogFormat::csv
                                       : ingest::LogFormat::jsonl;
  ingest::ParseResult parsed = ingest::parse_log(in, format);
  if (!parsed.rejects.empty()) {
    log_line("rejected " + std::to_string(parsed.rejects.size()) +
             " malformed record(s)");
  }
  std::vector<EventStream> streams = ingest::sessionize(std::move(parsed.events));
  log_line("parsed " + std::to_string(streams.size()) + " student-session(s)");
  return streams;
}

std::vector<processes::StudentSessionInstances> map_sessions(
    const std::vector<EventStream>& streams,
    const actions::ActionLibrary& library,
    const std::vector<processes::ProcessPattern>& patterns, int threads) {
  std::vector<processes::StudentSessionInstances> sessions(streams.size());
  const std::size_t n_threads =
      std::min(static_cast<std::size_t>(std::max(threads, 1)),
               std::max<std::size_t>(streams.size(), 1));
  auto work = [&](std::size_t offset) {
    for (std::size_t i = offset; i < streams.size(); i += n_threads) {
      std::vector<actions::LearningAction> acts =
          actions::map_actions(streams[i], library);
      sessions[i] = {streams[i].student_id, streams[i].session_id,
                     processes::map_processes(acts, patterns)};
    }
  };
  if (n_threads <= 1) {
    work(0);
    return sessions;
  }
  std::vector<std::exception_ptr> errors(n_threads);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        work(t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return sessions;
}

std::vector<fomm::ProcessSequence> modelable_sequences(
    const std::vector<processes::StudentSessionInstances>& sessions) {
  std::vector<fomm::ProcessSequence> seqs;
  seqs.reserve(sessions.size());
  for (const processes::StudentSessionInstances& session : sessions) {
    fomm::ProcessSequence seq = fomm::make_sequence(session);
    if (seq.labels.size() < 2) {
      log_line("skipping " + session.student_id + "/" + session.session_id +
               ": fewer than two process instances");
      continue;
    }
    seqs.push_back(std::move(seq));
  }
  return seqs;
}

longitudinal::ContingencyTable cross_session_table(
    const std::vector<cluster::Assignment>& assignments, int k) {
  std::set<std::string> session_ids;
  for (const cluster::Assignment& a : assignments) {
    session_ids.insert(a.session_id);
  }
  std::vector<longitudinal::PairedAssignment> pairs;
  if (session_ids.size() >= 2) {
    auto it = session_ids.begin();
    const std::string first = *it++;
    const std::string second = *it;
    if (session_ids.size() > 2) {
      log_line("more than two sessions; symmetry test pairs '" + first +
               "' with '" + second + "'");
    }
    std::vector<cluster::Assignment> s1, s2;
    for (const cluster::Assignment& a : assignments) {
      if (a.session_id == first) s1.push_back(a);
      if (a.session_id == second) s2.push_back(a);
    }
    const longitudinal::PairingResult pairing =
        longitudinal::pair_assignments(s1, s2);
    if (!pairing.only_s1.empty() || !pairing.only_s2.empty()) {
      log_line(
          std::to_string(pairing.only_s1.size() + pairing.only_s2.size()) +
          " student(s) present in only one session");
    }
    pairs = pairing.pairs;
  } else {
    log_line("single session; symmetry test is degenerate");
  }
  return longitudinal::build_table(pairs, k);
}

RunResult run_pipeline(const RunConfig& config) {
  validate_config(config);
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) {
    throw Error("cannot create output directory " + config.out_dir + ": " +
                ec.message());
  }

  struct Artifact {
    std::string kind;
    std::string name;
    std::uint64_t bytes = 0;
    std::uint64_t hash = 0;
  };
  std::vector<Artifact> artifacts;
  auto emit = [&](const std::string& kind, const std::string& name,
                  const std::string& content) {
    write_artifact((fs::path(config.out_dir) / name).string(), content);
    artifacts.push_back({kind, name, content.size(), fnv1a64(content)});
    log_line("wrote " + name);
  };
  auto stage = [&](const char* name, auto&& body) {
    log_line(std::string("stage ") + name);
    try {
      body();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(std::string("stage ") + name + ": " + e.what());
    }
  };

  std::vector<EventStream> streams;
  stage("ingest", [&] {
    streams = load_events(config.events_path);
    if (streams.empty()) throw Error("no events parsed");
  });

  std::vector<processes::StudentSessionInstances> sessions;
  stage("map", [&] {
    const actions::ActionLibrary library =
        actions::compile_library(read_file(config.action_lib_path));
    const std::vector<processes::ProcessPattern> patterns =
        processes::compile_process_library(read_file(config.process_lib_path),
                                           library);
    sessions = map_sessions(streams, library, patterns, config.threads);
    streams.clear();
    streams.shrink_to_fit();
    std::ostringstream out;
    processes::write_instances_csv(out, sessions);
    emit("instances", "instances.csv", std::move(out).str());
  });

  std::vector<fomm::ProcessSequence> seqs;
  stage("fomm", [&] {
    seqs = modelable_sequences(sessions);
    if (seqs.empty())
      throw Error("no session yields two or more process instances");
    std::vector<fomm::SessionModel> models;
    models.reserve(seqs.size());
    for (const fomm::ProcessSequence& seq : seqs) {
      models.push_back({seq.student_id, seq.session_id, fomm::build_fomm(seq)});
    }
    std::ostringstream out;
    fomm::write_matrices_csv(out, models);
    emit("fomm_matrices", "fomm_matrices.csv", std::move(out).str());
  });

  int k = config.k;
  cluster::StrategyMixture mixture;
  std::vector<cluster::Assignment> assignments;
  stage("cluster", [&] {
    cluster::EmConfig em = config.em;
    em.seed = config.seed;
    if (k == 0) {
      std::vector<int> range;
      for (int candidate = 1;
           candidate <= std::min<int>(6, static_cast<int>(seqs.size()));
           ++candidate) {
        range.push_back(candidate);
      }
      const cluster::KSelection selection = cluster::select_k(seqs, range, em);
      k = selection.recommended_k;
      log_line("BIC selected k = " + std::to_string(k));
    }
    mixture = cluster::fit_em(seqs, k, em);
    assignments = cluster::assign(mixture, seqs);
    emit("mixture", "mixture.json", cluster::mixture_to_json(mixture));
    std::ostringstream out;
    cluster::write_assignments_csv(out, assignments);
    emit("assignments", "assignments.csv", std::move(out).str());
  });

  stage("graphs", [&] {
    const std::vector<cluster::ClusterBundle> bundles =
        cluster::strategy_report(assignments, seqs, k, config.threshold);
    for (const cluster::ClusterBundle& bundle : bundles) {
      const std::string tag = "strategy_" + std::to_string(bundle.cluster);
      const std::string full =
          bundle.pooled
              ? fomm::export_graph(*bundle.pooled, bundle.frequencies, tag)
              : "digraph " + tag + " {\n}\n";
      emit("graph_full", tag + "_full.dot", full);
      const std::string summarized =
          bundle.summarized
              ? fomm::export_graph(*bundle.summarized, bundle.frequencies,
                                   tag + "_summarized")
              : "digraph " + tag + "_summarized {\n}\n";
      emit("graph_summarized", tag + "_summarized.dot", summarized);
    }
  });

  stage("longitudinal", [&] {
    const longitudinal::ContingencyTable table =
        cross_session_table(assignments, k);
    longitudinal::SymmetryTestResult result;
    if (k >= 2) {
      result = longitudinal::bowker_test(table);
    } else {
      result.degenerate = true;
    }
    std::ostringstream out;
    longitudinal::write_bowker_csv(out, result);
    emit("bowker", "bowker.csv", std::move(out).str());
    emit("sankey", "sankey.json", longitudinal::sankey_export(table));
  });

  if (!config.outcomes_path.empty()) {
    stage("outcomes", [&] {
      std::ifstream in(config.outcomes_path, std::ios::binary);
      if (!in) throw Error("cannot open outcomes file: " + config.outcomes_path);
      std::vector<outcomes::OutcomeRecord> records =
          outcomes::read_outcomes_csv(in);
      outcomes::SessionMaxMap session_max = outcomes::default_session_max();
      for (const auto& [session, max] : config.session_max) {
        session_max[session] = max;
      }
      for (outcomes::OutcomeRecord& record : records) {
        outcomes::normalize(record, session_max);
      }
      const outcomes::FilterResult filtered = outcomes::filter_complete(records);
      if (!filtered.excluded.empty()) {
        log_line("excluded " + std::to_string(filtered.excluded.size()) +
                 " incomplete outcome record(s)");
      }
      const outcomes::DescribeResult described =
          outcomes::describe(filtered.kept, assignments, k,
                             /*split_sessions=*/false);
      for (const std::string& miss : described.unmatched) {
        log_line("no strategy assignment for " + miss);
      }
      std::ostringstream desc_out;
      outcomes::write_descriptives_csv(desc_out, described,
                                       /*split_sessions=*/false);
      emit("descriptives", "descriptives.csv", std::move(desc_out).str());
      const outcomes::CompareAllResult compared =
          outcomes::compare_all(filtered.kept, assignments);
      for (const std::string& warning : compared.warnings) {
        log_line(warning);
      }
      std::ostringstream pair_out;
      outcomes::write_pairwise_csv(pair_out, compared.results);
      emit("pairwise", "pairwise.csv", std::move(pair_out).str());
    });
  }

  RunResult result;
  result.k = k;
  stage("manifest", [&] {
    std::sort(artifacts.begin(), artifacts.end(),
              [](const Artifact& a, const Artifact& b) { return a.name < b.name; });
    std::set<std::string> kinds;
    for (const Artifact& artifact : artifacts) kinds.insert(artifact.kind);
    nlohmann::ordered_json manifest;
    manifest["artifact_kinds"] = kinds;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const Artifact& artifact : artifacts) {
      nlohmann::ordered_json entry;
      entry["kind"] = artifact.kind;
      entry["path"] = artifact.name;
      entry["bytes"] = artifact.bytes;
      entry["fnv1a64"] = to_hex64(artifact.hash);
      files.push_back(std::move(entry));
    }
    manifest["files"] = std::move(files);
    write_artifact((fs::path(config.out_dir) / "manifest.json").string(),
                   manifest.dump(2) + "\n");
    for (const Artifact& artifact : artifacts) {
      result.files.push_back(artifact.name);
    }
    result.files.push_back("manifest.json");
    result.manifest_path =
        (fs::path(config.out_dir) / "manifest.json").string();
  });
  return result;
}

}  // namespace tracestrat::tool
