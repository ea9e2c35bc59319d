#include "tracestrat/outcomes.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <utility>

#include "tracestrat/csv.hpp"
#include "tracestrat/stats.hpp"

namespace tracestrat::outcomes {

namespace {

std::optional<double> value_of(const OutcomeRecord& record, Outcome outcome) {
  switch (outcome) {
    case Outcome::essay:
      return record.essay_score;
    case Outcome::pre:
      return record.pre_norm;
    case Outcome::post:
      return record.post_norm;
  }
  return std::nullopt;
}

constexpr Outcome kOutcomes[] = {Outcome::essay, Outcome::pre, Outcome::post};

// Complete records joined to their cluster; throws nothing, collects
// unmatched keys instead.
struct Joined {
  std::vector<std::pair<const OutcomeRecord*, int>> rows;
  std::vector<std::string> unmatched;
};

Joined join(const std::vector<OutcomeRecord>& records,
            const std::vector<cluster::Assignment>& assignments) {
  std::map<std::pair<std::string, std::string>, int> cluster_of;
  for (const cluster::Assignment& a : assignments) {
    cluster_of[{a.student_id, a.session_id}] = a.cluster;
  }
  Joined joined;
  for (const OutcomeRecord& record : records) {
    if (!record.complete()) continue;
    auto it = cluster_of.find({record.student_id, record.session_id});
    if (it == cluster_of.end()) {
      joined.unmatched.push_back(record.student_id + "/" + record.session_id);
    } else {
      joined.rows.emplace_back(&record, it->second);
    }
  }
  return joined;
}

std::optional<double> parse_optional(const std::string& field,
                                     std::size_t line_no) {
  if (field.empty()) return std::nullopt;
  try {
    std::size_t consumed = 0;
    double v = std::stod(field, &consumed);
    if (consumed != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw Error("outcomes line " + std::to_string(line_no) +
                ": bad number '" + field + "'");
  }
}

}  // namespace

SessionMaxMap default_session_max() { return {{"S1", 15.0}, {"S2", 10.0}}; }

void normalize(OutcomeRecord& record, const SessionMaxMap& session_max) {
  auto it = session_max.find(record.session_id);
  if (it == session_max.end()) {
    throw Error("no session maximum configured for session '" +
                record.session_id + "' (student '" + record.student_id + "')");
  }
  double max = it->second;
  auto check = [&](const std::optional<double>& raw, const char* which) {
    if (raw && (*raw < 0.0 || *raw > max)) {
      throw Error(std::string(which) + " score out of range for student '" +
                  record.student_id + "' in session '" + record.session_id +
                  "'");
    }
  };
  check(record.pre_raw, "pre");
  check(record.post_raw, "post");
  if (record.pre_raw) record.pre_norm = *record.pre_raw / max;
  if (record.post_raw) record.post_norm = *record.post_raw / max;
}

FilterResult filter_complete(const std::vector<OutcomeRecord>& records) {
  FilterResult result;
  for (const OutcomeRecord& record : records) {
    if (record.complete()) {
      result.kept.push_back(record);
      continue;
    }
    std::string missing;
    auto add = [&](const char* name) {
      if (!missing.empty()) missing += ';';
      missing += name;
    };
    if (!record.pre_raw) add("pre");
    if (!record.post_raw) add("post");
    if (!record.essay_score) add("essay");
    result.excluded.push_back(
        {record.student_id, record.session_id, std::move(missing)});
  }
  return result;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::essay:
      return "essay";
    case Outcome::pre:
      return "pre";
    case Outcome::post:
      return "post";
  }
  throw Error("unknown outcome");
}

DescribeResult describe(const std::vector<OutcomeRecord>& records,
                        const std::vector<cluster::Assignment>& assignments,
                        int k, bool split_sessions) {
  Joined joined = join(records, assignments);
  DescribeResult result;
  result.unmatched = std::move(joined.unmatched);

  std::set<std::string> sessions;
  if (split_sessions) {
    for (const auto& [record, cluster_id] : joined.rows) {
      sessions.insert(record->session_id);
    }
  } else {
    sessions.insert("");
  }

  for (const std::string& session : sessions) {
    for (int c = 0; c < k; ++c) {
      for (Outcome outcome : kOutcomes) {
        std::vector<double> values;
        for (const auto& [record, cluster_id] : joined.rows) {
          if (cluster_id != c) continue;
          if (split_sessions && record->session_id != session) continue;
          if (std::optional<double> v = value_of(*record, outcome)) {
            values.push_back(*v);
          }
        }
        DescriptiveRow row;
        row.cluster = c;
        row.outcome = outcome;
        row.session_id = session;
        row.n = values.size();
        if (!values.empty()) row.mean = stats::mean(values);
        if (values.size() > 1) row.sd = stats::sample_sd(values);
        result.rows.push_back(std::move(row));
      }
    }
  }
  return result;
}

PairwiseResult pairwise_compare(
    const std::vector<OutcomeRecord>& records,
    const std::vector<cluster::Assignment>& assignments, Outcome outcome,
    int strategy_a, int strategy_b, std::size_t m) {
  Joined joined = join(records, assignments);
  std::vector<double> group_a;
  std::vector<double> group_b;
  for (const auto& [record, cluster_id] : joined.rows) {
    std::optional<double> v = value_of(*record, outcome);
    if (!v) continue;
    if (cluster_id == strategy_a) group_a.push_back(*v);
    if (cluster_id == strategy_b) group_b.push_back(*v);
  }
  if (group_a.empty() || group_b.empty()) {
    throw Error("empty strategy group in pairwise comparison " +
                std::to_string(strategy_a) + " vs " +
                std::to_string(strategy_b));
  }
  const std::size_t n_a = group_a.size();
  const std::size_t n_b = group_b.size();
  if (n_a + n_b < 3) {
    throw Error("pooled variance undefined: fewer than 3 observations");
  }

  double mean_a = stats::mean(group_a);
  double mean_b = stats::mean(group_b);
  double ss = 0.0;
  for (double v : group_a) ss += (v - mean_a) * (v - mean_a);
  for (double v : group_b) ss += (v - mean_b) * (v - mean_b);
  double df = static_cast<double>(n_a + n_b - 2);
  double pooled_var = ss / df;
  if (pooled_var <= 0.0) throw Error("degenerate variance");
  double pooled_sd = std::sqrt(pooled_var);
  double se = pooled_sd * std::sqrt(1.0 / static_cast<double>(n_a) +
                                    1.0 / static_cast<double>(n_b));

  PairwiseResult result;
  result.outcome = outcome;
  result.strategy_a = strategy_a;
  result.strategy_b = strategy_b;
  result.n_a = n_a;
  result.n_b = n_b;
  result.coef = mean_b - mean_a;
  result.t = result.coef / se;
  result.p = 2.0 * stats::student_t_sf(std::abs(result.t), df);
  result.p_corrected = std::min(1.0, result.p * static_cast<double>(m));
  result.cohen_d = (mean_a - mean_b) / pooled_sd;
  double t_crit = stats::student_t_quantile(0.975, df);
  result.ci_low = result.coef - t_crit * se;
  result.ci_high = result.coef + t_crit * se;
  result.flips_significance = (result.p < 0.05) != (result.p_corrected < 0.05);
  return result;
}

CompareAllResult compare_all(
    const std::vector<OutcomeRecord>& records,
    const std::vector<cluster::Assignment>& assignments) {
  Joined joined = join(records, assignments);
  std::set<int> present;
  for (const auto& [record, cluster_id] : joined.rows) {
    present.insert(cluster_id);
  }

  CompareAllResult result;
  if (present.size() < 2) {
    result.warnings.push_back(
        "fewer than two strategies present; no pairwise comparisons");
    return result;
  }
  std::vector<int> strategies(present.begin(), present.end());
  std::size_t m = strategies.size() * (strategies.size() - 1) / 2;
  for (Outcome outcome : kOutcomes) {
    for (std::size_t i = 0; i < strategies.size(); ++i) {
      for (std::size_t j = i + 1; j < strategies.size(); ++j) {
        try {
          result.results.push_back(pairwise_compare(
              records, assignments, outcome, strategies[i], strategies[j], m));
        } catch (const Error& e) {
          result.warnings.push_back(
              "skipping " + std::string(to_string(outcome)) + " " +
              std::to_string(strategies[i]) + " vs " +
              std::to_string(strategies[j]) + ": " + e.what());
        }
      }
    }
  }
  return result;
}

std::vector<OutcomeRecord> read_outcomes_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("empty outcomes file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = csv::split_row(line);
  const std::vector<std::string> expected = {
      "student_id", "session_id", "pre_raw", "post_raw", "essay_score"};
  if (header != expected) {
    throw Error(
        "bad outcomes header: expected "
        "student_id,session_id,pre_raw,post_raw,essay_score");
  }
  std::vector<OutcomeRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = csv::split_row(line);
    if (fields.size() != 5) {
      throw Error("outcomes line " + std::to_string(line_no) +
                  ": wrong field count");
    }
    OutcomeRecord record;
    record.student_id = fields[0];
    record.session_id = fields[1];
    if (record.student_id.empty() || record.session_id.empty()) {
      throw Error("outcomes line " + std::to_string(line_no) +
                  ": missing student_id or session_id");
    }
    record.pre_raw = parse_optional(fields[2], line_no);
    record.post_raw = parse_optional(fields[3], line_no);
    record.essay_score = parse_optional(fields[4], line_no);
    records.push_back(std::move(record));
  }
  return records;
}

void write_descriptives_csv(std::ostream& out, const DescribeResult& result,
                            bool split_sessions) {
  std::vector<std::string> header;
  if (split_sessions) header.push_back("session_id");
  header.insert(header.end(), {"strategy", "outcome", "n", "mean", "sd"});
  csv::write_row(out, header);
  for (const DescriptiveRow& row : result.rows) {
    std::vector<std::string> fields;
    if (split_sessions) fields.push_back(row.session_id);
    fields.push_back(std::to_string(row.cluster));
    fields.emplace_back(to_string(row.outcome));
    fields.push_back(std::to_string(row.n));
    fields.push_back(row.mean ? csv::format_double(*row.mean) : "");
    fields.push_back(row.sd ? csv::format_double(*row.sd) : "");
    csv::write_row(out, fields);
  }
}

void write_pairwise_csv(std::ostream& out,
                        const std::vector<PairwiseResult>& results) {
  csv::write_row(out, {"outcome", "pair", "n_a", "n_b", "coef", "t", "p",
                       "p_corrected", "cohen_d", "ci_low", "ci_high",
                       "flips_significance"});
  for (const PairwiseResult& r : results) {
    csv::write_row(
        out,
        {std::string(to_string(r.outcome)),
         std::to_string(r.strategy_a) + " vs " + std::to_string(r.strategy_b),
         std::to_string(r.n_a), std::to_string(r.n_b),
         csv::format_double(r.coef), csv::format_double(r.t),
         csv::format_double(r.p), csv::format_double(r.p_corrected),
         csv::format_double(r.cohen_d), csv::format_double(r.ci_low),
         csv::format_double(r.ci_high),
         r.flips_significance ? "true" : "false"});
  }
}

}  // namespace tracestrat::outcomes
