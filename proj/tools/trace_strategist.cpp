#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipeline.hpp"
#include "tracestrat/actions.hpp"
#include "tracestrat/cluster.hpp"
#include "tracestrat/csv.hpp"
#include "tracestrat/fomm.hpp"
#include "tracestrat/ingest.hpp"
#include "tracestrat/longitudinal.hpp"
#include "tracestrat/outcomes.hpp"
#include "tracestrat/processes.hpp"
#include "tracestrat/synth.hpp"
#include "tracestrat/types.hpp"

#ifndef TRACESTRAT_DEFAULT_DATA_DIR
#define TRACESTRAT_DEFAULT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace tracestrat;

namespace {

std::string data_file(const char* name) {
  return (fs::path(TRACESTRAT_DEFAULT_DATA_DIR) / name).string();
}

void require_exists(const std::string& path, const char* what) {
  if (!fs::exists(path)) {
    throw tool::ConfigError(std::string(what) + " path does not exist: " + path);
  }
}

std::string out_path(const std::string& out_dir, const char* name) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw Error("cannot create output directory " + out_dir + ": " +
                ec.message());
  }
  return (fs::path(out_dir) / name).string();
}

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

outcomes::SessionMaxMap parse_session_max(
    const std::vector<std::string>& entries) {
  outcomes::SessionMaxMap map;
  for (const std::string& entry : entries) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= entry.size()) {
      throw tool::ConfigError("bad --session-max entry '" + entry +
                              "' (expected SESSION=MAX)");
    }
    try {
      std::size_t used = 0;
      const double max = std::stod(entry.substr(eq + 1), &used);
      if (used != entry.size() - eq - 1) throw std::invalid_argument("trail");
      map[entry.substr(0, eq)] = max;
    } catch (const std::exception&) {
      throw tool::ConfigError("bad --session-max entry '" + entry +
                              "' (expected SESSION=MAX)");
    }
  }
  return map;
}

cluster::EmMode parse_em_mode(const std::string& mode) {
  if (mode == "markov") return cluster::EmMode::markov;
  if (mode == "gaussian") return cluster::EmMode::gaussian;
  throw tool::ConfigError("em mode must be markov or gaussian, got '" + mode +
                          "'");
}

std::vector<fomm::ProcessSequence> sequences_from_file(
    const std::string& instances_path) {
  require_exists(instances_path, "instances");
  std::ifstream in(instances_path, std::ios::binary);
  if (!in) throw Error("cannot open instances file: " + instances_path);
  return tool::modelable_sequences(processes::read_instances_csv(in));
}

std::vector<cluster::Assignment> assignments_from_file(
    const std::string& assignments_path) {
  require_exists(assignments_path, "assignments");
  std::ifstream in(assignments_path, std::ios::binary);
  if (!in) throw Error("cannot open assignments file: " + assignments_path);
  std::vector<cluster::Assignment> assignments =
      cluster::read_assignments_csv(in);
  if (assignments.empty()) throw Error("assignments file has no rows");
  return assignments;
}

int cmd_ingest(const std::string& events, const std::string& out_dir) {
  require_exists(events, "events");
  std::ifstream in(events, std::ios::binary);
  if (!in) throw Error("cannot open events file: " + events);
  const ingest::LogFormat format =
      events.size() >= 4 && events.compare(events.size() - 4, 4, ".csv") == 0
          ? ingest::LogFormat::csv
          : ingest::LogFormat::jsonl;
  ingest::ParseResult parsed = ingest::parse_log(in, format);
  const std::size_t n_rejects = parsed.rejects.size();
  std::ostringstream rejects_out;
  ingest::write_rejects_csv(rejects_out, parsed.rejects);
  const std::vector<EventStream> streams =
      ingest::sessionize(std::move(parsed.events));
  std::size_t n_events = 0;
  std::ostringstream events_out;
  for (const EventStream& stream : streams) {
    ingest::write_events_jsonl(events_out, stream.events);
    n_events += stream.events.size();
  }
  tool::write_artifact(out_path(out_dir, "events.jsonl"),
                       std::move(events_out).str());
  tool::write_artifact(out_path(out_dir, "rejects.csv"),
                       std::move(rejects_out).str());
  std::cout << "ingested " << n_events << " event(s) in " << streams.size()
            << " student-session(s), rejected " << n_rejects
            << "; wrote events.jsonl, rejects.csv\n";
  return 0;
}

int cmd_map(const std::string& events, const std::string& action_lib,
            const std::string& process_lib, const std::string& out_dir,
            int threads) {
  require_exists(events, "events");
  require_exists(action_lib, "action library");
  require_exists(process_lib, "process library");
  const actions::ActionLibrary library =
      actions::compile_library(tool::read_file(action_lib));
  const std::vector<processes::ProcessPattern> patterns =
      processes::compile_process_library(tool::read_file(process_lib),
                                         library);
  const std::vector<EventStream> streams = tool::load_events(events);
  const std::vector<processes::StudentSessionInstances> sessions =
      tool::map_sessions(streams, library, patterns, threads);
  std::ostringstream out;
  processes::write_instances_csv(out, sessions);
  tool::write_artifact(out_path(out_dir, "instances.csv"),
                       std::move(out).str());
  std::size_t n_instances = 0;
  for (const auto& session : sessions) n_instances += session.instances.size();
  std::cout << "mapped " << n_instances << " process instance(s) across "
            << sessions.size() << " student-session(s); wrote instances.csv\n";
  return 0;
}

int cmd_fomm(const std::string& instances, const std::string& out_dir) {
  const std::vector<fomm::ProcessSequence> seqs =
      sequences_from_file(instances);
  if (seqs.empty()) throw Error("no session yields two or more process instances");
  std::vector<fomm::SessionModel> models;
  models.reserve(seqs.size());
  for (const fomm::ProcessSequence& seq : seqs) {
    models.push_back({seq.student_id, seq.session_id, fomm::build_fomm(seq)});
  }
  std::ostringstream out;
  fomm::write_matrices_csv(out, models);
  tool::write_artifact(out_path(out_dir, "fomm_matrices.csv"),
                       std::move(out).str());
  std::cout << "built " << models.size()
            << " transition model(s); wrote fomm_matrices.csv\n";
  return 0;
}

int cmd_cluster(const std::string& instances, int k, const cluster::EmConfig& em,
                const std::string& out_dir) {
  const std::vector<fomm::ProcessSequence> seqs =
      sequences_from_file(instances);
  if (seqs.empty()) throw Error("no session yields two or more process instances");
  cluster::EmConfig config = em;
  if (k == 0) {
    std::vector<int> range;
    for (int candidate = 1;
         candidate <= std::min<int>(6, static_cast<int>(seqs.size()));
         ++candidate) {
      range.push_back(candidate);
    }
    const cluster::KSelection selection = cluster::select_k(seqs, range, config);
    k = selection.recommended_k;
    std::cout << "BIC selected k = " << k << "\n";
  }
  const cluster::StrategyMixture mixture = cluster::fit_em(seqs, k, config);
  const std::vector<cluster::Assignment> assignments =
      cluster::assign(mixture, seqs);
  tool::write_artifact(out_path(out_dir, "mixture.json"),
                       cluster::mixture_to_json(mixture));
  std::ostringstream out;
  cluster::write_assignments_csv(out, assignments);
  tool::write_artifact(out_path(out_dir, "assignments.csv"),
                       std::move(out).str());
  std::cout << "fit " << k << "-strategy mixture over " << seqs.size()
            << " sequence(s), log-likelihood "
            << csv::format_double(mixture.log_likelihood)
            << "; wrote mixture.json, assignments.csv\n";
  return 0;
}

int cmd_longitudinal(const std::string& assignments_path,
                     const std::string& out_dir, bool exact) {
  const std::vector<cluster::Assignment> assignments =
      assignments_from_file(assignments_path);
  const int k = static_cast<int>(assignments.front().posterior.size());
  if (exact && k != 2) {
    throw tool::ConfigError("the exact test requires k = 2 strategies");
  }
  const longitudinal::ContingencyTable table =
      tool::cross_session_table(assignments, k);
  longitudinal::SymmetryTestResult result;
  if (k >= 2) {
    result = longitudinal::bowker_test(table);
  } else {
    result.degenerate = true;
  }
  std::ostringstream out;
  longitudinal::write_bowker_csv(out, result);
  tool::write_artifact(out_path(out_dir, "bowker.csv"), std::move(out).str());
  tool::write_artifact(out_path(out_dir, "sankey.json"),
                       longitudinal::sankey_export(table));
  std::cout << "symmetry chi2 = " << csv::format_double(result.chi2)
            << ", df = " << result.df
            << ", p = " << csv::format_double(result.p_value)
            << "; wrote bowker.csv, sankey.json\n";
  if (exact) {
    std::cout << "exact McNemar p = "
              << csv::format_double(longitudinal::mcnemar_exact(table)) << "\n";
  }
  return 0;
}

int cmd_outcomes(const std::string& outcomes_path,
                 const std::string& assignments_path,
                 const std::vector<std::string>& session_max_entries,
                 bool split_sessions, const std::string& out_dir) {
  require_exists(outcomes_path, "outcomes");
  const std::vector<cluster::Assignment> assignments =
      assignments_from_file(assignments_path);
  const int k = static_cast<int>(assignments.front().posterior.size());
  std::ifstream in(outcomes_path, std::ios::binary);
  if (!in) throw Error("cannot open outcomes file: " + outcomes_path);
  std::vector<outcomes::OutcomeRecord> records = outcomes::read_outcomes_csv(in);
  outcomes::SessionMaxMap session_max = outcomes::default_session_max();
  for (const auto& [session, max] : parse_session_max(session_max_entries)) {
    session_max[session] = max;
  }
  for (outcomes::OutcomeRecord& record : records) {
    outcomes::normalize(record, session_max);
  }
  const outcomes::FilterResult filtered = outcomes::filter_complete(records);
  if (!filtered.excluded.empty()) {
    tool::log_line("excluded " + std::to_string(filtered.excluded.size()) +
                   " incomplete outcome record(s)");
  }
  const outcomes::DescribeResult described =
      outcomes::describe(filtered.kept, assignments, k, split_sessions);
  std::ostringstream desc_out;
  outcomes::write_descriptives_csv(desc_out, described, split_sessions);
  tool::write_artifact(out_path(out_dir, "descriptives.csv"),
                       std::move(desc_out).str());
  const outcomes::CompareAllResult compared =
      outcomes::compare_all(filtered.kept, assignments);
  for (const std::string& warning : compared.warnings) {
    tool::log_line(warning);
  }
  std::ostringstream pair_out;
  outcomes::write_pairwise_csv(pair_out, compared.results);
  tool::write_artifact(out_path(out_dir, "pairwise.csv"),
                       std::move(pair_out).str());
  std::cout << "described " << filtered.kept.size()
            << " complete outcome record(s), " << compared.results.size()
            << " pairwise comparison(s); wrote descriptives.csv, pairwise.csv\n";
  return 0;
}

int cmd_synth(const std::string& profiles, std::size_t n, int sessions,
              std::uint64_t seed, const std::string& action_lib,
              const std::string& process_lib, const std::string& out_dir) {
  const std::string profiles_path =
      profiles == "demo" ? data_file("profiles_demo.json") : profiles;
  require_exists(profiles_path, "profiles");
  require_exists(action_lib, "action library");
  require_exists(process_lib, "process library");
  if (sessions < 1) throw tool::ConfigError("sessions must be >= 1");

  const std::vector<synth::GeneratorProfile> generator_profiles =
      synth::profiles_from_json(tool::read_file(profiles_path));
  const actions::ActionLibrary library =
      actions::compile_library(tool::read_file(action_lib));
  const std::vector<processes::ProcessPattern> patterns =
      processes::compile_process_library(tool::read_file(process_lib),
                                         library);
  const synth::EmissionMap emission_map = synth::build_emission_map(patterns);

  std::ostringstream trace_out;
  std::ostringstream truth_out;
  std::ostringstream outcomes_out;
  csv::write_row(truth_out, {"student_id", "session_id", "component", "profile"});
  csv::write_row(outcomes_out,
                 {"student_id", "session_id", "pre_raw", "post_raw",
                  "essay_score"});
  std::size_t n_events = 0;
  for (int s = 1; s <= sessions; ++s) {
    const std::string session_id = "S" + std::to_string(s);
    const synth::SampleResult sample =
        synth::sample_sequences(generator_profiles, n, seed, session_id);
    for (std::size_t i = 0; i < sample.sequences.size(); ++i) {
      const fomm::ProcessSequence& seq = sample.sequences[i];
      const int component = sample.true_components[i];
      const std::vector<ProcessLabel> labels =
          synth::sanitize_for_emission(seq.labels);
      synth::EmitOptions opts;
      opts.student_id = seq.student_id;
      opts.session_id = seq.session_id;
      const std::uint64_t emit_seed =
          seed ^ tool::fnv1a64(seq.student_id + "/" + seq.session_id);
      const std::vector<RawEvent> events =
          synth::emit_raw_trace(labels, emission_map, emit_seed, opts);
      ingest::write_events_jsonl(trace_out, events);
      n_events += events.size();
      csv::write_row(truth_out,
                     {seq.student_id, seq.session_id,
                      std::to_string(component),
                      generator_profiles[static_cast<std::size_t>(component)]
                          .name});

      std::seed_seq sub_seed{static_cast<unsigned>(seed & 0xffffffffu),
                             static_cast<unsigned>(seed >> 32),
                             static_cast<unsigned>(i),
                             static_cast<unsigned>(s), 0x6f757463u};
      std::mt19937_64 rng(sub_seed);
      const double max = session_id == "S1" ? 15.0 : 10.0;
      const double c = static_cast<double>(component);
      const double pre = max * (0.35 + 0.08 * c + 0.30 * u01(rng));
      const double post = max * (0.45 + 0.10 * c + 0.30 * u01(rng));
      const double essay = 12.0 + 2.0 * c + (u01(rng) * 4.0 - 2.0);
      csv::write_row(outcomes_out,
                     {seq.student_id, seq.session_id, csv::format_double(pre),
                      csv::format_double(post), csv::format_double(essay)});
    }
  }
  tool::write_artifact(out_path(out_dir, "trace.jsonl"),
                       std::move(trace_out).str());
  tool::write_artifact(out_path(out_dir, "true_labels.csv"),
                       std::move(truth_out).str());
  tool::write_artifact(out_path(out_dir, "outcomes.csv"),
                       std::move(outcomes_out).str());
  std::cout << "emitted " << n_events << " event(s) for " << n << " student(s) x "
            << sessions
            << " session(s); wrote trace.jsonl, true_labels.csv, outcomes.csv\n";
  return 0;
}

int cmd_run(const tool::RunConfig& config) {
  const tool::RunResult result = tool::run_pipeline(config);
  std::cout << "wrote " << result.files.size() << " file(s) to "
            << config.out_dir << " (k = " << result.k << "); manifest at "
            << result.manifest_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "trace-strategist: mines self-regulated-learning strategies from raw "
      "interaction logs (rule-based action and process mapping, per-session "
      "Markov models, mixture clustering, cross-session symmetry tests, "
      "outcome comparisons)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "1.0.0");

  std::string events;
  std::string outcomes_path;
  std::string action_lib = data_file("action_library.json");
  std::string process_lib = data_file("process_library.json");
  std::string instances = "instances.csv";
  std::string assignments_path = "assignments.csv";
  std::string profiles = "demo";
  std::string config_path;
  std::string out_dir = "out";
  std::string em_mode = "markov";
  int k = 3;
  double threshold = 0.10;
  std::uint64_t seed = 0;
  int threads = 1;
  std::size_t n = 180;
  int sessions = 1;
  int max_iter = 500;
  double tol = 1e-6;
  int restarts = 10;
  double alpha = 0.5;
  std::vector<std::string> session_max_entries;
  bool exact = false;

  CLI::App* ingest_cmd =
      app.add_subcommand("ingest", "Parse a raw event log and report rejects");
  ingest_cmd->add_option("--events", events, "Raw event log (.jsonl or .csv)")
      ->required();
  ingest_cmd->add_option("--out", out_dir, "Output directory");

  CLI::App* map_cmd = app.add_subcommand(
      "map", "Map raw events to learning actions and process instances");
  map_cmd->add_option("--events", events, "Raw event log (.jsonl or .csv)")
      ->required();
  map_cmd->add_option("--action-lib", action_lib, "Action rule library JSON");
  map_cmd->add_option("--process-lib", process_lib,
                      "Process pattern library JSON");
  map_cmd->add_option("--threads", threads, "Worker threads");
  map_cmd->add_option("--out", out_dir, "Output directory");

  CLI::App* fomm_cmd = app.add_subcommand(
      "fomm", "Build per-session first-order Markov models");
  fomm_cmd->add_option("--instances", instances, "instances.csv from `map`")
      ->required();
  fomm_cmd->add_option("--out", out_dir, "Output directory");

  CLI::App* cluster_cmd = app.add_subcommand(
      "cluster", "Fit the strategy mixture and assign sessions");
  cluster_cmd->add_option("--instances", instances, "instances.csv from `map`")
      ->required();
  cluster_cmd->add_option("--k", k, "Number of strategies (0 = pick by BIC)");
  cluster_cmd->add_option("--seed", seed, "Random seed");
  cluster_cmd->add_option("--max-iter", max_iter, "EM iteration cap");
  cluster_cmd->add_option("--tol", tol, "EM convergence tolerance");
  cluster_cmd->add_option("--restarts", restarts, "EM restarts");
  cluster_cmd->add_option("--alpha", alpha, "Additive smoothing");
  cluster_cmd->add_option("--em-mode", em_mode, "markov or gaussian");
  cluster_cmd->add_option("--out", out_dir, "Output directory");

  CLI::App* longitudinal_cmd = app.add_subcommand(
      "longitudinal", "Cross-session strategy movement and symmetry test");
  longitudinal_cmd
      ->add_option("--assignments", assignments_path,
                   "assignments.csv from `cluster`")
      ->required();
  longitudinal_cmd->add_flag("--exact", exact,
                             "Also run the exact binomial test (k = 2)");
  longitudinal_cmd->add_option("--out", out_dir, "Output directory");

  CLI::App* outcomes_cmd = app.add_subcommand(
      "outcomes", "Outcome descriptives and pairwise strategy comparisons");
  outcomes_cmd
      ->add_option("--outcomes", outcomes_path,
                   "Outcome scores CSV (pre/post/essay)")
      ->required();
  outcomes_cmd
      ->add_option("--assignments", assignments_path,
                   "assignments.csv from `cluster`")
      ->required();
  outcomes_cmd->add_option("--session-max", session_max_entries,
                           "Session score maximum as SESSION=MAX (repeatable)");
  bool split_sessions = false;
  outcomes_cmd->add_flag("--per-session", split_sessions,
                         "Break descriptives down by session");
  outcomes_cmd->add_option("--out", out_dir, "Output directory");

  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "Generate a synthetic trace from known strategy generators");
  synth_cmd->add_option("--profiles", profiles,
                        "Generator profile JSON, or 'demo'");
  synth_cmd->add_option("--n", n, "Students per session");
  synth_cmd->add_option("--sessions", sessions, "Sessions per student");
  synth_cmd->add_option("--seed", seed, "Random seed");
  synth_cmd->add_option("--action-lib", action_lib, "Action rule library JSON");
  synth_cmd->add_option("--process-lib", process_lib,
                        "Process pattern library JSON");
  synth_cmd->add_option("--out", out_dir, "Output directory");

  CLI::App* run_cmd =
      app.add_subcommand("run", "Run the full pipeline and write a manifest");
  std::string run_events, run_outcomes, run_action_lib, run_process_lib,
      run_out, run_em_mode;
  int run_k = 0, run_threads = 0, run_max_iter = 0, run_restarts = 0;
  double run_threshold = 0.0, run_tol = 0.0, run_alpha = 0.0;
  std::uint64_t run_seed = 0;
  run_cmd->add_option("--config", config_path, "JSON config (flags override)");
  run_cmd->add_option("--events", run_events, "Raw event log (.jsonl or .csv)");
  run_cmd->add_option("--outcomes", run_outcomes, "Outcome scores CSV");
  run_cmd->add_option("--action-lib", run_action_lib,
                      "Action rule library JSON");
  run_cmd->add_option("--process-lib", run_process_lib,
                      "Process pattern library JSON");
  run_cmd->add_option("--k", run_k, "Number of strategies (0 = pick by BIC)");
  run_cmd->add_option("--threshold", run_threshold,
                      "Summarization frequency threshold");
  run_cmd->add_option("--seed", run_seed, "Random seed");
  run_cmd->add_option("--threads", run_threads, "Worker threads");
  run_cmd->add_option("--max-iter", run_max_iter, "EM iteration cap");
  run_cmd->add_option("--tol", run_tol, "EM convergence tolerance");
  run_cmd->add_option("--restarts", run_restarts, "EM restarts");
  run_cmd->add_option("--alpha", run_alpha, "Additive smoothing");
  run_cmd->add_option("--em-mode", run_em_mode, "markov or gaussian");
  run_cmd->add_option("--session-max", session_max_entries,
                      "Session score maximum as SESSION=MAX (repeatable)");
  run_cmd->add_option("--out", run_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(ingest_cmd)) return cmd_ingest(events, out_dir);
    if (app.got_subcommand(map_cmd)) {
      return cmd_map(events, action_lib, process_lib, out_dir, threads);
    }
    if (app.got_subcommand(fomm_cmd)) return cmd_fomm(instances, out_dir);
    if (app.got_subcommand(cluster_cmd)) {
      cluster::EmConfig em;
      em.max_iter = max_iter;
      em.tol = tol;
      em.n_restarts = restarts;
      em.smoothing_alpha = alpha;
      em.seed = seed;
      em.mode = parse_em_mode(em_mode);
      return cmd_cluster(instances, k, em, out_dir);
    }
    if (app.got_subcommand(longitudinal_cmd)) {
      return cmd_longitudinal(assignments_path, out_dir, exact);
    }
    if (app.got_subcommand(outcomes_cmd)) {
      return cmd_outcomes(outcomes_path, assignments_path, session_max_entries,
                          split_sessions, out_dir);
    }
    if (app.got_subcommand(synth_cmd)) {
      return cmd_synth(profiles, n, sessions, seed, action_lib, process_lib,
                       out_dir);
    }
    if (app.got_subcommand(run_cmd)) {
      tool::RunConfig config;
      if (run_cmd->count("--config") > 0) {
        require_exists(config_path, "config");
        config = tool::config_from_json(tool::read_file(config_path));
      }
      if (run_cmd->count("--events") > 0) config.events_path = run_events;
      if (run_cmd->count("--outcomes") > 0) config.outcomes_path = run_outcomes;
      if (run_cmd->count("--action-lib") > 0)
        config.action_lib_path = run_action_lib;
      if (run_cmd->count("--process-lib") > 0)
        config.process_lib_path = run_process_lib;
      if (run_cmd->count("--k") > 0) config.k = run_k;
      if (run_cmd->count("--threshold") > 0) config.threshold = run_threshold;
      if (run_cmd->count("--seed") > 0) config.seed = run_seed;
      if (run_cmd->count("--threads") > 0) config.threads = run_threads;
      if (run_cmd->count("--max-iter") > 0) config.em.max_iter = run_max_iter;
      if (run_cmd->count("--tol") > 0) config.em.tol = run_tol;
      if (run_cmd->count("--restarts") > 0) config.em.n_restarts = run_restarts;
      if (run_cmd->count("--alpha") > 0)
        config.em.smoothing_alpha = run_alpha;
      if (run_cmd->count("--em-mode") > 0)
        config.em.mode = parse_em_mode(run_em_mode);
      if (run_cmd->count("--out") > 0) config.out_dir = run_out;
      for (const auto& [session, max] :
           parse_session_max(session_max_entries)) {
        config.session_max[session] = max;
      }
      if (config.action_lib_path.empty())
        config.action_lib_path = data_file("action_library.json");
      if (config.process_lib_path.empty())
        config.process_lib_path = data_file("process_library.json");
      return cmd_run(config);
    }
  } catch (const tool::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
