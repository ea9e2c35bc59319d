#include "tracestrat/fomm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <utility>

#include "tracestrat/csv.hpp"

namespace tracestrat::fomm {

namespace {

std::vector<std::vector<double>> zeros(std::size_t n) {
  return std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0));
}

void normalize_rows(TransitionModel& model) {
  const std::size_t n = model.size();
  model.probs = zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (double c : model.counts[i]) row_sum += c;
    if (row_sum <= 0.0) continue;  // zero rows stay zero
    for (std::size_t j = 0; j < n; ++j) {
      model.probs[i][j] = model.counts[i][j] / row_sum;
    }
  }
}

// Solves A * X = B in place with partial pivoting; A is square, B has the
// same row count. Throws on a singular system.
std::vector<std::vector<double>> solve(std::vector<std::vector<double>> a,
                                       std::vector<std::vector<double>> b) {
  const std::size_t n = a.size();
  const std::size_t m = b.empty() ? 0 : b[0].size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12) {
      throw Error("summarization bridge is singular (absorbing removed set)");
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double factor = a[r][col] / a[col][col];
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      for (std::size_t c = 0; c < m; ++c) b[r][c] -= factor * b[col][c];
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) b[r][c] /= a[r][r];
  }
  return b;
}

std::string node_id(ProcessLabel label) {
  std::string id(to_string(label));
  for (char& ch : id) {
    if (ch == '.' || ch == '/') ch = '_';
  }
  return id;
}

}  // namespace

ProcessSequence make_sequence(const processes::StudentSessionInstances& s) {
  ProcessSequence seq;
  seq.student_id = s.student_id;
  seq.session_id = s.session_id;
  for (const processes::ProcessInstance& instance : s.instances) {
    if (instance.label == ProcessLabel::No_Process) continue;
    seq.labels.push_back(instance.label);
    seq.durations_ms.push_back(instance.end_ms - instance.start_ms);
  }
  return seq;
}

TransitionModel build_fomm(const ProcessSequence& seq) {
  if (seq.labels.size() < 2) {
    throw Error("sequence too short for transitions");
  }
  TransitionModel model;
  model.alphabet.assign(process_alphabet().begin(), process_alphabet().end());
  model.counts = zeros(kNumProcesses);
  model.initial.assign(kNumProcesses, 0.0);
  model.initial[process_index(seq.labels.front())] = 1.0;
  for (std::size_t i = 0; i + 1 < seq.labels.size(); ++i) {
    model.counts[process_index(seq.labels[i])]
                [process_index(seq.labels[i + 1])] += 1.0;
  }
  model.n_transitions = static_cast<int64_t>(seq.labels.size() - 1);
  normalize_rows(model);
  return model;
}

TransitionModel build_pooled(const std::vector<const ProcessSequence*>& seqs) {
  TransitionModel model;
  model.alphabet.assign(process_alphabet().begin(), process_alphabet().end());
  model.counts = zeros(kNumProcesses);
  model.initial.assign(kNumProcesses, 0.0);
  std::size_t n_starts = 0;
  for (const ProcessSequence* seq : seqs) {
    if (seq->labels.empty()) continue;
    model.initial[process_index(seq->labels.front())] += 1.0;
    ++n_starts;
    for (std::size_t i = 0; i + 1 < seq->labels.size(); ++i) {
      model.counts[process_index(seq->labels[i])]
                  [process_index(seq->labels[i + 1])] += 1.0;
      ++model.n_transitions;
    }
  }
  if (n_starts > 0) {
    for (double& v : model.initial) v /= static_cast<double>(n_starts);
  }
  normalize_rows(model);
  return model;
}

std::map<ProcessLabel, double> relative_frequencies(
    const std::vector<ProcessSequence>& seqs) {
  std::size_t total = 0;
  std::array<std::size_t, kNumProcesses> counts{};
  for (const ProcessSequence& seq : seqs) {
    for (ProcessLabel label : seq.labels) {
      ++counts[process_index(label)];
      ++total;
    }
  }
  if (total == 0) throw Error("relative_frequencies: no process instances");
  std::map<ProcessLabel, double> freqs;
  for (std::size_t i = 0; i < kNumProcesses; ++i) {
    freqs[process_alphabet()[i]] =
        static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return freqs;
}

TransitionModel summarize_model(const TransitionModel& model,
                                const std::map<ProcessLabel, double>& freqs,
                                double threshold) {
  const std::size_t n = model.size();
  std::vector<std::size_t> kept;
  std::vector<std::size_t> removed;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = freqs.find(model.alphabet[i]);
    double freq = it == freqs.end() ? 0.0 : it->second;
    if (freq < threshold) {
      removed.push_back(i);
    } else {
      kept.push_back(i);
    }
  }
  if (kept.empty()) throw Error("empty summarized model");

  TransitionModel reduced;
  for (std::size_t i : kept) reduced.alphabet.push_back(model.alphabet[i]);
  const std::size_t nk = kept.size();
  reduced.counts = zeros(nk);
  reduced.initial.assign(nk, 0.0);

  if (removed.empty()) {
    for (std::size_t a = 0; a < nk; ++a) {
      reduced.initial[a] = model.initial[kept[a]];
      for (std::size_t b = 0; b < nk; ++b) {
        reduced.counts[a][b] = model.counts[kept[a]][kept[b]];
      }
    }
    reduced.n_transitions = model.n_transitions;
    normalize_rows(reduced);
    return reduced;
  }

  // H[x][b]: expected number of ways mass entering removed state x leaves
  // into kept state b, H = (I - P_RR)^-1 * P_RK.
  const std::size_t nr = removed.size();
  std::vector<std::vector<double>> i_minus_prr(nr,
                                               std::vector<double>(nr, 0.0));
  std::vector<std::vector<double>> p_rk(nr, std::vector<double>(nk, 0.0));
  for (std::size_t x = 0; x < nr; ++x) {
    for (std::size_t y = 0; y < nr; ++y) {
      i_minus_prr[x][y] =
          (x == y ? 1.0 : 0.0) - model.probs[removed[x]][removed[y]];
    }
    for (std::size_t b = 0; b < nk; ++b) {
      p_rk[x][b] = model.probs[removed[x]][kept[b]];
    }
  }
  std::vector<std::vector<double>> h = solve(std::move(i_minus_prr), p_rk);

  for (std::size_t a = 0; a < nk; ++a) {
    reduced.initial[a] = model.initial[kept[a]];
    for (std::size_t b = 0; b < nk; ++b) {
      reduced.counts[a][b] = model.counts[kept[a]][kept[b]];
    }
    for (std::size_t x = 0; x < nr; ++x) {
      double via = model.counts[kept[a]][removed[x]];
      if (via == 0.0) continue;
      for (std::size_t b = 0; b < nk; ++b) {
        reduced.counts[a][b] += via * h[x][b];
      }
    }
  }
  for (std::size_t x = 0; x < nr; ++x) {
    double via = model.initial[removed[x]];
    if (via == 0.0) continue;
    for (std::size_t b = 0; b < nk; ++b) {
      reduced.initial[b] += via * h[x][b];
    }
  }

  double total = 0.0;
  for (const auto& row : reduced.counts) {
    for (double c : row) total += c;
  }
  reduced.n_transitions = static_cast<int64_t>(std::llround(total));
  normalize_rows(reduced);
  return reduced;
}

std::string export_graph(const TransitionModel& model,
                         const std::map<ProcessLabel, double>& freqs,
                         const std::string& graph_name) {
  std::ostringstream out;
  out << "digraph " << graph_name << " {\n";
  out << "  rankdir=LR;\n";
  out << "  node [shape=box];\n";
  for (ProcessLabel label : model.alphabet) {
    auto it = freqs.find(label);
    double freq = it == freqs.end() ? 0.0 : it->second;
    out << "  " << node_id(label) << " [label=\"" << to_string(label) << "\\n"
        << csv::format_fixed2(freq * 100.0) << "%\"];\n";
  }
  for (std::size_t i = 0; i < model.size(); ++i) {
    for (std::size_t j = 0; j < model.size(); ++j) {
      if (model.probs[i][j] <= 0.0) continue;
      out << "  " << node_id(model.alphabet[i]) << " -> "
          << node_id(model.alphabet[j]) << " [label=\""
          << csv::format_fixed2(model.probs[i][j]) << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

void write_matrices_csv(std::ostream& out,
                        const std::vector<SessionModel>& models) {
  std::vector<std::string> header = {"student_id", "session_id", "from_label"};
  for (ProcessLabel label : process_alphabet()) {
    header.emplace_back(to_string(label));
  }
  csv::write_row(out, header);
  for (const SessionModel& sm : models) {
    for (std::size_t i = 0; i < sm.model.size(); ++i) {
      std::vector<std::string> row = {sm.student_id, sm.session_id,
                                      std::string(to_string(
                                          sm.model.alphabet[i]))};
      for (std::size_t j = 0; j < sm.model.size(); ++j) {
        row.push_back(csv::format_double(sm.model.probs[i][j]));
      }
      csv::write_row(out, row);
    }
  }
}

}  // namespace tracestrat::fomm
