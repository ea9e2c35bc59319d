#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tracestrat/actions.hpp"
#include "tracestrat/cluster.hpp"
#include "tracestrat/fomm.hpp"
#include "tracestrat/ingest.hpp"
#include "tracestrat/processes.hpp"
#include "tracestrat/synth.hpp"
#include "tracestrat/types.hpp"

using namespace tracestrat;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return std::move(out).str();
}

const std::string kDataDir = TRACESTRAT_DATA_DIR;

const actions::ActionLibrary& action_lib() {
  static const auto lib =
      actions::compile_library(slurp(kDataDir + "/action_library.json"));
  return lib;
}

const std::vector<processes::ProcessPattern>& process_lib() {
  static const auto patterns = processes::compile_process_library(
      slurp(kDataDir + "/process_library.json"), action_lib());
  return patterns;
}

synth::GeneratorProfile mixed_profile(int len) {
  synth::GeneratorProfile p;
  p.name = "mixed";
  p.initial.assign(kNumProcesses, 0.0);
  p.initial[4] = 0.5;
  p.initial[6] = 0.5;
  p.transition.assign(kNumProcesses,
                      std::vector<double>(kNumProcesses, 1.0 / 7.0));
  p.transition[4] = {0.02, 0.02, 0.02, 0.02, 0.55, 0.02, 0.35};
  p.transition[6] = {0.02, 0.02, 0.02, 0.02, 0.35, 0.02, 0.55};
  p.min_len = len;
  p.max_len = len;
  return p;
}

// One synthetic session with roughly `n_labels` process instances.
std::vector<RawEvent> session_events(int n_labels, std::uint64_t seed) {
  static const auto map = synth::build_emission_map(process_lib());
  const auto sample =
      synth::sample_sequences({mixed_profile(n_labels)}, 1, seed);
  return synth::emit_raw_trace(
      synth::sanitize_for_emission(sample.sequences[0].labels), map, seed);
}

void BM_parse_log(benchmark::State& state) {
  const auto events = session_events(static_cast<int>(state.range(0)), 11);
  std::ostringstream jsonl;
  ingest::write_events_jsonl(jsonl, events);
  const std::string text = std::move(jsonl).str();
  for (auto _ : state) {
    std::istringstream in(text);
    auto parsed = ingest::parse_log(in, ingest::LogFormat::jsonl);
    benchmark::DoNotOptimize(parsed.events.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(events.size()));
}
BENCHMARK(BM_parse_log)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_map_actions(benchmark::State& state) {
  const auto events = session_events(static_cast<int>(state.range(0)), 13);
  EventStream stream;
  stream.student_id = "bench";
  stream.session_id = "S1";
  stream.events = events;
  for (auto _ : state) {
    auto actions_seq = actions::map_actions(stream, action_lib());
    benchmark::DoNotOptimize(actions_seq.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(events.size()));
}
BENCHMARK(BM_map_actions)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_map_processes(benchmark::State& state) {
  const auto events = session_events(static_cast<int>(state.range(0)), 17);
  EventStream stream;
  stream.student_id = "bench";
  stream.session_id = "S1";
  stream.events = events;
  const auto actions_seq = actions::map_actions(stream, action_lib());
  for (auto _ : state) {
    auto instances = processes::map_processes(actions_seq, process_lib());
    benchmark::DoNotOptimize(instances.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(actions_seq.size()));
}
BENCHMARK(BM_map_processes)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_build_fomm(benchmark::State& state) {
  const auto sample = synth::sample_sequences(
      {mixed_profile(static_cast<int>(state.range(0)))}, 1, 19);
  const auto& seq = sample.sequences[0];
  for (auto _ : state) {
    auto model = fomm::build_fomm(seq);
    benchmark::DoNotOptimize(model.counts.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(seq.labels.size()));
}
BENCHMARK(BM_build_fomm)->Arg(1000)->Arg(10000);

void BM_fit_em(benchmark::State& state) {
  const auto sample = synth::sample_sequences(
      {mixed_profile(100)}, static_cast<std::size_t>(state.range(0)), 23);
  cluster::EmConfig em;
  em.n_restarts = 2;
  em.seed = 7;
  for (auto _ : state) {
    auto mixture = cluster::fit_em(sample.sequences, 3, em);
    benchmark::DoNotOptimize(mixture.log_likelihood);
  }
}
BENCHMARK(BM_fit_em)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
