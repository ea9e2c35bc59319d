#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tracestrat/cluster.hpp"
#include "tracestrat/types.hpp"

namespace tracestrat::longitudinal {

struct PairedAssignment {
  std::string student_id;
  int cluster_s1 = 0;
  int cluster_s2 = 0;
};

struct PairingResult {
  std::vector<PairedAssignment> pairs;  // sorted by student_id
  std::vector<std::string> only_s1;     // students missing from session 2
  std::vector<std::string> only_s2;
};

/// Inner join on student_id. Students present in only one session land in
/// the unmatched lists. Throws on a duplicate student within one session.
PairingResult pair_assignments(
    const std::vector<cluster::Assignment>& assignments_s1,
    const std::vector<cluster::Assignment>& assignments_s2);

struct ContingencyTable {
  int k = 0;
  std::vector<std::vector<int64_t>> cells;  // rows = session 1 strategy
};

/// cells[i][j] = students moving from strategy i to j. Throws on cluster
/// ids outside [0, k).
ContingencyTable build_table(const std::vector<PairedAssignment>& pairs,
                             int k);

struct SymmetryTestResult {
  double chi2 = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::vector<std::pair<int, int>> skipped_pairs;  // n_ij + n_ji == 0
  bool degenerate = false;                         // df == 0, p fixed at 1
};

/// McNemar-Bowker symmetry test: chi2 = sum over informative pairs i<j of
/// (n_ij - n_ji)^2 / (n_ij + n_ji), df = number of informative pairs.
/// Throws for k < 2.
SymmetryTestResult bowker_test(const ContingencyTable& table);

/// Exact binomial McNemar test for the 2x2 case. Throws when k != 2.
double mcnemar_exact(const ContingencyTable& table);

/// JSON Sankey data: nodes [{id,label}] for every strategy in both sessions,
/// links [{source,target,value,percent}] for nonzero cells; percent is the
/// share of the source row.
std::string sankey_export(const ContingencyTable& table);

void write_bowker_csv(std::ostream& out, const SymmetryTestResult& result);

}  // namespace tracestrat::longitudinal
