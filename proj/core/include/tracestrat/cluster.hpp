#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tracestrat/fomm.hpp"
#include "tracestrat/types.hpp"

namespace tracestrat::cluster {

/// markov: mixture of first-order Markov chains fit on the sequences
/// themselves (the default; handles unequal lengths correctly).
/// gaussian: diagonal-covariance Gaussian mixture on flattened smoothed
/// per-session transition matrices, provided for comparison.
enum class EmMode { markov, gaussian };

struct EmConfig {
  int max_iter = 500;
  double tol = 1e-6;  // on the penalized objective
  int n_restarts = 10;
  double smoothing_alpha = 0.5;
  std::uint64_t seed = 0;
  EmMode mode = EmMode::markov;
};

struct MixtureComponent {
  double weight = 0.0;
  std::vector<double> initial;                  // length 7, strictly positive
  std::vector<std::vector<double>> transition;  // 7x7, rows strictly positive
};

struct StrategyMixture {
  int k = 0;
  std::uint64_t seed = 0;
  double log_likelihood = 0.0;  // data log-likelihood at the fitted params
  int n_iterations = 0;
  std::vector<MixtureComponent> components;  // descending weight
  // Penalized objective (data LL plus Dirichlet smoothing prior) per
  // iteration of the winning restart; non-decreasing by construction.
  std::vector<double> objective_trace;
};

struct Assignment {
  std::string student_id;
  std::string session_id;
  int cluster = 0;  // argmax posterior, lowest index on ties
  std::vector<double> posterior;
};

/// Fits a K-component mixture by EM with additive smoothing alpha on
/// transition and initial counts. Sequences are canonically ordered by
/// (student_id, session_id) internally, so input order never changes the
/// result. k-means++ seeding on flattened smoothed per-sequence matrices;
/// best of n_restarts by data log-likelihood; bit-reproducible from seed.
/// Throws when K exceeds the sequence count, a sequence is shorter than 2,
/// or a likelihood goes non-finite (naming the sequence).
StrategyMixture fit_em(const std::vector<fomm::ProcessSequence>& seqs, int k,
                       const EmConfig& config);

/// One E-step at the fitted parameters. Output follows the canonical
/// (student_id, session_id) order.
std::vector<Assignment> assign(const StrategyMixture& mixture,
                               const std::vector<fomm::ProcessSequence>& seqs);

struct KSelectionRow {
  int k = 0;
  double log_likelihood = 0.0;
  double bic = 0.0;
};

struct KSelection {
  std::vector<KSelectionRow> rows;
  int recommended_k = 0;  // argmin BIC, smallest K on ties
};

/// BIC = -2*LL + params*ln(n_sequences) with params = K-1 + K*6 + K*42 in
/// markov mode (weights + initial vectors + transition rows).
KSelection select_k(const std::vector<fomm::ProcessSequence>& seqs,
                    const std::vector<int>& k_range, const EmConfig& config);

struct ClusterBundle {
  int cluster = 0;
  std::size_t count = 0;
  double share = 0.0;
  std::map<ProcessLabel, double> frequencies;   // empty when count == 0
  std::optional<fomm::TransitionModel> pooled;  // member counts, not averages
  std::optional<fomm::TransitionModel> summarized;
};

/// Per-cluster descriptive bundle. Pooled models concatenate member counts;
/// summarization filters states under the frequency threshold. A summarized
/// model is absent (not an error) when the pooled sequences have no
/// transitions or no state survives the threshold. Throws when a sequence
/// has no assignment.
std::vector<ClusterBundle> strategy_report(
    const std::vector<Assignment>& assignments,
    const std::vector<fomm::ProcessSequence>& seqs, int k,
    double threshold = 0.10);

std::string mixture_to_json(const StrategyMixture& mixture);
StrategyMixture mixture_from_json(const std::string& text);

void write_assignments_csv(std::ostream& out,
                           const std::vector<Assignment>& assignments);
std::vector<Assignment> read_assignments_csv(std::istream& in);

}  // namespace tracestrat::cluster
