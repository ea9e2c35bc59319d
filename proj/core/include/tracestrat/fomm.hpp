#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tracestrat/processes.hpp"
#include "tracestrat/types.hpp"

namespace tracestrat::fomm {

/// One student-session's SRL process trail, No_Process removed. Consecutive
/// duplicates stay: self-transitions are meaningful.
struct ProcessSequence {
  std::string student_id;
  std::string session_id;
  std::vector<ProcessLabel> labels;
  std::vector<int64_t> durations_ms;  // parallel to labels
};

ProcessSequence make_sequence(const processes::StudentSessionInstances& s);

/// First-order Markov model over an ordered alphabet. Counts are doubles
/// because summarization bridges fractional mass through removed states;
/// freshly built models hold integers exactly.
struct TransitionModel {
  std::vector<ProcessLabel> alphabet;
  std::vector<std::vector<double>> counts;
  std::vector<std::vector<double>> probs;  // row-stochastic where row count > 0
  std::vector<double> initial;
  int64_t n_transitions = 0;

  std::size_t size() const { return alphabet.size(); }
};

/// Builds the 7-state model of one sequence: counts of adjacent pairs,
/// row-normalized probs (zero rows stay zero), initial = indicator of the
/// first label. Throws "sequence too short for transitions" below length 2.
TransitionModel build_fomm(const ProcessSequence& seq);

/// Pools several sequences into one model: summed pair counts, initial =
/// fraction of sequences starting in each state.
TransitionModel build_pooled(const std::vector<const ProcessSequence*>& seqs);

/// Fraction of all process instances per label, pooled over the sequences.
/// Throws on empty input. Fractions sum to 1.
std::map<ProcessLabel, double> relative_frequencies(
    const std::vector<ProcessSequence>& seqs);

/// Removes states whose relative frequency is below the threshold and
/// bridges transitions through them: with R the removed set and K the kept
/// set, H = (I - P_RR)^-1 * P_RK distributes each entry into R over the kept
/// states it eventually reaches, so counts[a][b] gains counts[a][x]*H[x][b].
/// The initial vector is bridged the same way. Throws "empty summarized
/// model" when nothing survives.
TransitionModel summarize_model(const TransitionModel& model,
                                const std::map<ProcessLabel, double>& freqs,
                                double threshold = 0.10);

/// DOT digraph: node label = process name plus relative frequency, edge
/// label = probability at 2 decimals, zero-probability edges omitted.
std::string export_graph(const TransitionModel& model,
                         const std::map<ProcessLabel, double>& freqs,
                         const std::string& graph_name = "process_model");

struct SessionModel {
  std::string student_id;
  std::string session_id;
  TransitionModel model;
};

/// Wide CSV: one row per (student, session, from_label), probability columns
/// in canonical alphabet order.
void write_matrices_csv(std::ostream& out,
                        const std::vector<SessionModel>& models);

}  // namespace tracestrat::fomm
