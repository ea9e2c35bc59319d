#include "tracestrat/longitudinal.hpp"

#include <map>
#include <ostream>

#include <json.hpp>

#include "tracestrat/csv.hpp"
#include "tracestrat/stats.hpp"

namespace tracestrat::longitudinal {

namespace {

using ordered_json = nlohmann::ordered_json;

std::map<std::string, int> roster(
    const std::vector<cluster::Assignment>& assignments,
    const char* session_name) {
  std::map<std::string, int> by_student;
  for (const cluster::Assignment& a : assignments) {
    if (!by_student.emplace(a.student_id, a.cluster).second) {
      throw Error("duplicate student '" + a.student_id + "' in " +
                  session_name);
    }
  }
  return by_student;
}

}  // namespace

PairingResult pair_assignments(
    const std::vector<cluster::Assignment>& assignments_s1,
    const std::vector<cluster::Assignment>& assignments_s2) {
  std::map<std::string, int> s1 = roster(assignments_s1, "session 1");
  std::map<std::string, int> s2 = roster(assignments_s2, "session 2");

  PairingResult result;
  for (const auto& [student, cluster_s1] : s1) {
    auto it = s2.find(student);
    if (it == s2.end()) {
      result.only_s1.push_back(student);
    } else {
      result.pairs.push_back({student, cluster_s1, it->second});
    }
  }
  for (const auto& [student, cluster_s2] : s2) {
    if (s1.find(student) == s1.end()) result.only_s2.push_back(student);
  }
  return result;
}

ContingencyTable build_table(const std::vector<PairedAssignment>& pairs,
                             int k) {
  if (k < 1) throw Error("contingency table needs k >= 1");
  ContingencyTable table;
  table.k = k;
  table.cells.assign(static_cast<std::size_t>(k),
                     std::vector<int64_t>(static_cast<std::size_t>(k), 0));
  for (const PairedAssignment& pair : pairs) {
    if (pair.cluster_s1 < 0 || pair.cluster_s1 >= k || pair.cluster_s2 < 0 ||
        pair.cluster_s2 >= k) {
      throw Error("cluster id out of range for student '" + pair.student_id +
                  "'");
    }
    ++table.cells[static_cast<std::size_t>(pair.cluster_s1)]
                 [static_cast<std::size_t>(pair.cluster_s2)];
  }
  return table;
}

SymmetryTestResult bowker_test(const ContingencyTable& table) {
  if (table.k < 2) throw Error("symmetry test needs k >= 2");
  SymmetryTestResult result;
  for (int i = 0; i < table.k; ++i) {
    for (int j = i + 1; j < table.k; ++j) {
      int64_t nij = table.cells[static_cast<std::size_t>(i)]
                               [static_cast<std::size_t>(j)];
      int64_t nji = table.cells[static_cast<std::size_t>(j)]
                               [static_cast<std::size_t>(i)];
      if (nij + nji == 0) {
        result.skipped_pairs.emplace_back(i, j);
        continue;
      }
      double diff = static_cast<double>(nij - nji);
      result.chi2 += diff * diff / static_cast<double>(nij + nji);
      ++result.df;
    }
  }
  if (result.df == 0) {
    result.p_value = 1.0;
    result.degenerate = true;
  } else {
    result.p_value = stats::chi2_sf(result.chi2, result.df);
  }
  return result;
}

double mcnemar_exact(const ContingencyTable& table) {
  if (table.k != 2) throw Error("exact McNemar test needs k == 2");
  return stats::mcnemar_exact_p(table.cells[0][1], table.cells[1][0]);
}

std::string sankey_export(const ContingencyTable& table) {
  ordered_json doc;
  ordered_json nodes = ordered_json::array();
  for (int session = 1; session <= 2; ++session) {
    for (int c = 0; c < table.k; ++c) {
      ordered_json node;
      node["id"] =
          "s" + std::to_string(session) + "_strategy_" + std::to_string(c);
      node["label"] =
          "Session " + std::to_string(session) + " Strategy " +
          std::to_string(c);
      nodes.push_back(std::move(node));
    }
  }
  doc["nodes"] = std::move(nodes);

  ordered_json links = ordered_json::array();
  for (int i = 0; i < table.k; ++i) {
    int64_t row_total = 0;
    for (int j = 0; j < table.k; ++j) {
      row_total += table.cells[static_cast<std::size_t>(i)]
                              [static_cast<std::size_t>(j)];
    }
    if (row_total == 0) continue;
    for (int j = 0; j < table.k; ++j) {
      int64_t value = table.cells[static_cast<std::size_t>(i)]
                                 [static_cast<std::size_t>(j)];
      if (value == 0) continue;
      ordered_json link;
      link["source"] = "s1_strategy_" + std::to_string(i);
      link["target"] = "s2_strategy_" + std::to_string(j);
      link["value"] = value;
      link["percent"] = 100.0 * static_cast<double>(value) /
                        static_cast<double>(row_total);
      links.push_back(std::move(link));
    }
  }
  doc["links"] = std::move(links);
  return doc.dump(2) + "\n";
}

void write_bowker_csv(std::ostream& out, const SymmetryTestResult& result) {
  csv::write_row(out, {"chi2", "df", "p", "skipped_pairs"});
  std::string skipped;
  for (const auto& [i, j] : result.skipped_pairs) {
    if (!skipped.empty()) skipped += ';';
    skipped += std::to_string(i) + "-" + std::to_string(j);
  }
  csv::write_row(out, {csv::format_double(result.chi2),
                       std::to_string(result.df),
                       csv::format_double(result.p_value), skipped});
}

}  // namespace tracestrat::longitudinal
