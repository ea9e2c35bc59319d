#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracestrat/cluster.hpp"
#include "tracestrat/types.hpp"

namespace tracestrat::outcomes {

struct OutcomeRecord {
  std::string student_id;
  std::string session_id;
  std::optional<double> pre_raw;
  std::optional<double> post_raw;
  std::optional<double> essay_score;
  std::optional<double> pre_norm;
  std::optional<double> post_norm;

  bool complete() const { return pre_raw && post_raw && essay_score; }
};

/// Maximum raw test score per session; normalization divides by this.
using SessionMaxMap = std::map<std::string, double>;

SessionMaxMap default_session_max();  // S1: 15, S2: 10

/// Fills pre_norm/post_norm in place. Throws, naming the student, when a raw
/// score falls outside [0, session_max] or the session has no known maximum.
void normalize(OutcomeRecord& record, const SessionMaxMap& session_max);

struct Exclusion {
  std::string student_id;
  std::string session_id;
  std::string missing;  // "pre", "post", "essay", joined by ';'
};

struct FilterResult {
  std::vector<OutcomeRecord> kept;
  std::vector<Exclusion> excluded;
};

FilterResult filter_complete(const std::vector<OutcomeRecord>& records);

enum class Outcome { essay, pre, post };

std::string_view to_string(Outcome outcome);

struct DescriptiveRow {
  int cluster = 0;
  Outcome outcome = Outcome::essay;
  std::string session_id;  // empty in pooled mode
  std::size_t n = 0;
  std::optional<double> mean;  // absent when n == 0
  std::optional<double> sd;    // absent when n < 2
};

struct DescribeResult {
  std::vector<DescriptiveRow> rows;
  std::vector<std::string> unmatched;  // "student/session" with no assignment
};

/// Inner-joins complete records with assignments and reports mean and sample
/// SD per (strategy, outcome) cell, pooled across sessions by default or per
/// session when split_sessions is set. Pre/post use normalized scores.
DescribeResult describe(const std::vector<OutcomeRecord>& records,
                        const std::vector<cluster::Assignment>& assignments,
                        int k, bool split_sessions = false);

struct PairwiseResult {
  Outcome outcome = Outcome::essay;
  int strategy_a = 0;
  int strategy_b = 0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double coef = 0.0;  // mean_b - mean_a, the OLS slope on 1[strategy == b]
  double t = 0.0;
  double p = 0.0;
  double p_corrected = 0.0;
  double cohen_d = 0.0;  // (mean_a - mean_b) / pooled SD
  double ci_low = 0.0;   // 95% CI for coef
  double ci_high = 0.0;
  bool flips_significance = false;  // correction crosses the 0.05 line
};

/// Pooled-variance two-group comparison, identical to OLS on an indicator
/// regressor. Throws on an empty group or zero pooled variance
/// ("degenerate variance"). m is the Bonferroni comparison count.
PairwiseResult pairwise_compare(
    const std::vector<OutcomeRecord>& records,
    const std::vector<cluster::Assignment>& assignments, Outcome outcome,
    int strategy_a, int strategy_b, std::size_t m = 1);

struct CompareAllResult {
  std::vector<PairwiseResult> results;
  std::vector<std::string> warnings;
};

/// Every unordered strategy pair for each of essay/pre/post, Bonferroni m =
/// pair count per outcome. A single present strategy yields no results and a
/// warning; pairs that cannot be fit (tiny or constant groups) are skipped
/// with a warning instead of aborting the rest.
CompareAllResult compare_all(
    const std::vector<OutcomeRecord>& records,
    const std::vector<cluster::Assignment>& assignments);

std::vector<OutcomeRecord> read_outcomes_csv(std::istream& in);
void write_descriptives_csv(std::ostream& out, const DescribeResult& result,
                            bool split_sessions = false);
void write_pairwise_csv(std::ostream& out,
                        const std::vector<PairwiseResult>& results);

}  // namespace tracestrat::outcomes
