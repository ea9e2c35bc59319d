#include "tracestrat/cluster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <utility>

#include <json.hpp>

#include "tracestrat/csv.hpp"

namespace tracestrat::cluster {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kN = kNumProcesses;
constexpr std::size_t kFlat = kN * kN;

// 53-bit uniform in [0, 1); avoids distribution objects so sequences are
// identical across standard libraries.
double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t pick_index(std::mt19937_64& rng, std::size_t n) {
  auto idx = static_cast<std::size_t>(u01(rng) * static_cast<double>(n));
  return idx < n ? idx : n - 1;
}

struct SeqStats {
  const fomm::ProcessSequence* seq = nullptr;
  std::size_t first = 0;
  std::array<double, kFlat> counts{};  // row-major pair counts
  std::array<double, kN> row_counts{};
};

std::string seq_name(const fomm::ProcessSequence& seq) {
  return seq.student_id + "/" + seq.session_id;
}

std::vector<SeqStats> compute_stats(
    const std::vector<fomm::ProcessSequence>& seqs) {
  // Canonical order makes every downstream step independent of input order.
  std::vector<std::size_t> order(seqs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const fomm::ProcessSequence& sa = seqs[a];
    const fomm::ProcessSequence& sb = seqs[b];
    if (sa.student_id != sb.student_id) return sa.student_id < sb.student_id;
    if (sa.session_id != sb.session_id) return sa.session_id < sb.session_id;
    return a < b;
  });

  std::vector<SeqStats> stats;
  stats.reserve(seqs.size());
  for (std::size_t idx : order) {
    const fomm::ProcessSequence& seq = seqs[idx];
    if (seq.labels.size() < 2) {
      throw Error("sequence too short for transitions: " + seq_name(seq));
    }
    SeqStats st;
    st.seq = &seq;
    for (ProcessLabel label : seq.labels) {
      if (label == ProcessLabel::No_Process) {
        throw Error("sequence contains No_Process: " + seq_name(seq));
      }
    }
    st.first = process_index(seq.labels.front());
    for (std::size_t i = 0; i + 1 < seq.labels.size(); ++i) {
      std::size_t a = process_index(seq.labels[i]);
      std::size_t b = process_index(seq.labels[i + 1]);
      st.counts[a * kN + b] += 1.0;
      st.row_counts[a] += 1.0;
    }
    stats.push_back(std::move(st));
  }
  return stats;
}

// Smoothed per-sequence transition probabilities, flattened row-major.
std::array<double, kFlat> features_of(const SeqStats& st, double alpha) {
  std::array<double, kFlat> f{};
  for (std::size_t i = 0; i < kN; ++i) {
    double denom = st.row_counts[i] + alpha * static_cast<double>(kN);
    for (std::size_t j = 0; j < kN; ++j) {
      f[i * kN + j] = (st.counts[i * kN + j] + alpha) / denom;
    }
  }
  return f;
}

double sq_dist(const std::array<double, kFlat>& a,
               const std::array<double, kFlat>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < kFlat; ++i) {
    double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

// k-means++ over the feature vectors; returns chosen sequence indices.
std::vector<std::size_t> kmeanspp_seeds(
    const std::vector<std::array<double, kFlat>>& features, int k,
    std::mt19937_64& rng) {
  const std::size_t n = features.size();
  std::vector<std::size_t> centers;
  centers.push_back(pick_index(rng, n));
  std::vector<double> best_d(n, std::numeric_limits<double>::infinity());
  while (centers.size() < static_cast<std::size_t>(k)) {
    const auto& latest = features[centers.back()];
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      best_d[i] = std::min(best_d[i], sq_dist(features[i], latest));
      total += best_d[i];
    }
    if (total <= 0.0) {
      centers.push_back(pick_index(rng, n));
      continue;
    }
    double target = u01(rng) * total;
    std::size_t chosen = n - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += best_d[i];
      if (acc >= target) {
        chosen = i;
        break;
      }
    }
    centers.push_back(chosen);
  }
  return centers;
}

double log_sum_exp(const std::vector<double>& xs) {
  double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

struct Params {
  std::vector<double> weight;                      // K
  std::vector<std::array<double, kN>> initial;     // K x 7
  std::vector<std::array<double, kFlat>> trans;    // K x 49
};

double log_prior(const Params& p, double alpha) {
  double acc = 0.0;
  for (std::size_t c = 0; c < p.weight.size(); ++c) {
    for (double v : p.initial[c]) acc += std::log(v);
    for (double v : p.trans[c]) acc += std::log(v);
  }
  return alpha * acc;
}

struct EStepResult {
  std::vector<std::vector<double>> resp;  // n x K
  double data_ll = 0.0;
};

EStepResult e_step(const std::vector<SeqStats>& stats, const Params& p) {
  const std::size_t n = stats.size();
  const std::size_t k = p.weight.size();
  std::vector<double> log_weight(k);
  std::vector<std::array<double, kN>> log_init(k);
  std::vector<std::array<double, kFlat>> log_trans(k);
  for (std::size_t c = 0; c < k; ++c) {
    log_weight[c] = std::log(p.weight[c]);
    for (std::size_t i = 0; i < kN; ++i) {
      log_init[c][i] = std::log(p.initial[c][i]);
    }
    for (std::size_t i = 0; i < kFlat; ++i) {
      log_trans[c][i] = std::log(p.trans[c][i]);
    }
  }

  EStepResult result;
  result.resp.assign(n, std::vector<double>(k, 0.0));
  std::vector<double> joint(k);
  for (std::size_t s = 0; s < n; ++s) {
    const SeqStats& st = stats[s];
    for (std::size_t c = 0; c < k; ++c) {
      double ll = log_init[c][st.first];
      for (std::size_t i = 0; i < kFlat; ++i) {
        if (st.counts[i] != 0.0) ll += st.counts[i] * log_trans[c][i];
      }
      joint[c] = log_weight[c] + ll;
    }
    double lse = log_sum_exp(joint);
    if (!std::isfinite(lse)) {
      throw Error("non-finite likelihood for sequence " + seq_name(*st.seq));
    }
    for (std::size_t c = 0; c < k; ++c) {
      result.resp[s][c] = std::exp(joint[c] - lse);
    }
    result.data_ll += lse;
  }
  return result;
}

Params m_step(const std::vector<SeqStats>& stats,
              const std::vector<std::vector<double>>& resp, std::size_t k,
              double alpha) {
  const std::size_t n = stats.size();
  Params p;
  p.weight.assign(k, 0.0);
  p.initial.assign(k, {});
  p.trans.assign(k, {});
  for (std::size_t c = 0; c < k; ++c) {
    std::array<double, kN> init_counts{};
    std::array<double, kFlat> trans_counts{};
    std::array<double, kN> row_counts{};
    double total_resp = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      double r = resp[s][c];
      total_resp += r;
      if (r == 0.0) continue;
      init_counts[stats[s].first] += r;
      for (std::size_t i = 0; i < kFlat; ++i) {
        trans_counts[i] += r * stats[s].counts[i];
      }
      for (std::size_t i = 0; i < kN; ++i) {
        row_counts[i] += r * stats[s].row_counts[i];
      }
    }
    p.weight[c] = total_resp / static_cast<double>(n);
    double init_denom = total_resp + alpha * static_cast<double>(kN);
    for (std::size_t i = 0; i < kN; ++i) {
      p.initial[c][i] = (init_counts[i] + alpha) / init_denom;
    }
    for (std::size_t i = 0; i < kN; ++i) {
      double denom = row_counts[i] + alpha * static_cast<double>(kN);
      for (std::size_t j = 0; j < kN; ++j) {
        p.trans[c][i * kN + j] = (trans_counts[i * kN + j] + alpha) / denom;
      }
    }
  }
  return p;
}

struct EmRun {
  Params params;
  double data_ll = -std::numeric_limits<double>::infinity();
  std::vector<double> objective_trace;
  int n_iterations = 0;
};

EmRun run_em_markov(const std::vector<SeqStats>& stats, int k,
                    const EmConfig& config, std::mt19937_64& rng) {
  const std::size_t n = stats.size();
  std::vector<std::array<double, kFlat>> features(n);
  for (std::size_t s = 0; s < n; ++s) {
    features[s] = features_of(stats[s], config.smoothing_alpha);
  }
  std::vector<std::size_t> seeds = kmeanspp_seeds(features, k, rng);

  Params p;
  p.weight.assign(k, 1.0 / static_cast<double>(k));
  p.initial.reserve(k);
  p.trans.reserve(k);
  double init_denom = 1.0 + config.smoothing_alpha * static_cast<double>(kN);
  for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
    p.trans.push_back(features[seeds[c]]);
    std::array<double, kN> init{};
    for (std::size_t i = 0; i < kN; ++i) {
      double ind = stats[seeds[c]].first == i ? 1.0 : 0.0;
      init[i] = (ind + config.smoothing_alpha) / init_denom;
    }
    p.initial.push_back(init);
  }

  EmRun run;
  double prev_obj = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < config.max_iter; ++it) {
    EStepResult e = e_step(stats, p);
    double obj = e.data_ll + log_prior(p, config.smoothing_alpha);
    run.objective_trace.push_back(obj);
    run.n_iterations = it + 1;
    run.data_ll = e.data_ll;
    if (it > 0 && std::abs(obj - prev_obj) < config.tol) break;
    prev_obj = obj;
    if (it + 1 < config.max_iter) {
      p = m_step(stats, e.resp, static_cast<std::size_t>(k),
                 config.smoothing_alpha);
    }
  }
  run.params = std::move(p);
  return run;
}

// Diagonal-covariance Gaussian mixture over the feature vectors. The output
// chains are re-estimated per cluster from responsibility-weighted counts so
// both modes expose the same component shape.
EmRun run_em_gaussian(const std::vector<SeqStats>& stats, int k,
                      const EmConfig& config, std::mt19937_64& rng) {
  constexpr double kVarFloor = 1e-6;
  const std::size_t n = stats.size();
  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::array<double, kFlat>> features(n);
  for (std::size_t s = 0; s < n; ++s) {
    features[s] = features_of(stats[s], config.smoothing_alpha);
  }
  std::vector<std::size_t> seeds = kmeanspp_seeds(features, k, rng);

  std::array<double, kFlat> grand_mean{};
  for (const auto& f : features) {
    for (std::size_t d = 0; d < kFlat; ++d) grand_mean[d] += f[d];
  }
  for (double& v : grand_mean) v /= static_cast<double>(n);
  std::array<double, kFlat> grand_var{};
  for (const auto& f : features) {
    for (std::size_t d = 0; d < kFlat; ++d) {
      double diff = f[d] - grand_mean[d];
      grand_var[d] += diff * diff;
    }
  }
  for (double& v : grand_var) {
    v = std::max(v / static_cast<double>(n), kVarFloor);
  }

  std::vector<double> weight(kk, 1.0 / static_cast<double>(k));
  std::vector<std::array<double, kFlat>> mean(kk);
  std::vector<std::array<double, kFlat>> var(kk, grand_var);
  for (std::size_t c = 0; c < kk; ++c) mean[c] = features[seeds[c]];

  auto log_density = [&](std::size_t s, std::size_t c) {
    double acc = 0.0;
    for (std::size_t d = 0; d < kFlat; ++d) {
      double diff = features[s][d] - mean[c][d];
      acc += -0.5 * std::log(2.0 * M_PI * var[c][d]) -
             diff * diff / (2.0 * var[c][d]);
    }
    return acc;
  };

  EmRun run;
  std::vector<std::vector<double>> resp(n, std::vector<double>(kk, 0.0));
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < config.max_iter; ++it) {
    double ll = 0.0;
    std::vector<double> joint(kk);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t c = 0; c < kk; ++c) {
        joint[c] = std::log(weight[c]) + log_density(s, c);
      }
      double lse = log_sum_exp(joint);
      if (!std::isfinite(lse)) {
        throw Error("non-finite likelihood for sequence " +
                    seq_name(*stats[s].seq));
      }
      for (std::size_t c = 0; c < kk; ++c) {
        resp[s][c] = std::exp(joint[c] - lse);
      }
      ll += lse;
    }
    run.objective_trace.push_back(ll);
    run.n_iterations = it + 1;
    run.data_ll = ll;
    if (it > 0 && std::abs(ll - prev_ll) < config.tol) break;
    prev_ll = ll;
    if (it + 1 == config.max_iter) break;

    for (std::size_t c = 0; c < kk; ++c) {
      double total = 0.0;
      std::array<double, kFlat> mu{};
      for (std::size_t s = 0; s < n; ++s) {
        total += resp[s][c];
        for (std::size_t d = 0; d < kFlat; ++d) {
          mu[d] += resp[s][c] * features[s][d];
        }
      }
      weight[c] = total / static_cast<double>(n);
      if (total > 0.0) {
        for (double& v : mu) v /= total;
      }
      std::array<double, kFlat> v2{};
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t d = 0; d < kFlat; ++d) {
          double diff = features[s][d] - mu[d];
          v2[d] += resp[s][c] * diff * diff;
        }
      }
      for (std::size_t d = 0; d < kFlat; ++d) {
        var[c][d] = total > 0.0 ? std::max(v2[d] / total, kVarFloor)
                                : grand_var[d];
      }
      mean[c] = mu;
    }
  }

  run.params = m_step(stats, resp, kk, config.smoothing_alpha);
  run.params.weight = weight;
  return run;
}

StrategyMixture finalize(EmRun run, int k, const EmConfig& config) {
  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::size_t> order(kk);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return run.params.weight[a] > run.params.weight[b];
  });

  StrategyMixture mixture;
  mixture.k = k;
  mixture.seed = config.seed;
  mixture.log_likelihood = run.data_ll;
  mixture.n_iterations = run.n_iterations;
  mixture.objective_trace = std::move(run.objective_trace);
  for (std::size_t c : order) {
    MixtureComponent comp;
    comp.weight = run.params.weight[c];
    comp.initial.assign(run.params.initial[c].begin(),
                        run.params.initial[c].end());
    comp.transition.assign(kN, std::vector<double>(kN, 0.0));
    for (std::size_t i = 0; i < kN; ++i) {
      for (std::size_t j = 0; j < kN; ++j) {
        comp.transition[i][j] = run.params.trans[c][i * kN + j];
      }
    }
    mixture.components.push_back(std::move(comp));
  }
  return mixture;
}

}  // namespace

StrategyMixture fit_em(const std::vector<fomm::ProcessSequence>& seqs, int k,
                       const EmConfig& config) {
  if (k < 1) throw Error("K must be >= 1");
  if (static_cast<std::size_t>(k) > seqs.size()) {
    throw Error("K (" + std::to_string(k) + ") exceeds sequence count (" +
                std::to_string(seqs.size()) + ")");
  }
  if (config.smoothing_alpha <= 0.0) {
    throw Error("smoothing_alpha must be > 0");
  }
  std::vector<SeqStats> stats = compute_stats(seqs);

  EmRun best;
  bool have_best = false;
  int restarts = std::max(1, config.n_restarts);
  for (int r = 0; r < restarts; ++r) {
    std::seed_seq seq{config.seed, static_cast<std::uint64_t>(r)};
    std::mt19937_64 rng(seq);
    EmRun run = config.mode == EmMode::markov
                    ? run_em_markov(stats, k, config, rng)
                    : run_em_gaussian(stats, k, config, rng);
    if (!have_best || run.data_ll > best.data_ll) {
      best = std::move(run);
      have_best = true;
    }
  }
  return finalize(std::move(best), k, config);
}

std::vector<Assignment> assign(const StrategyMixture& mixture,
                               const std::vector<fomm::ProcessSequence>& seqs) {
  if (mixture.components.empty()) throw Error("mixture has no components");
  std::vector<SeqStats> stats = compute_stats(seqs);
  const std::size_t k = mixture.components.size();

  Params p;
  p.weight.reserve(k);
  for (const MixtureComponent& comp : mixture.components) {
    p.weight.push_back(comp.weight);
    std::array<double, kN> init{};
    std::copy(comp.initial.begin(), comp.initial.end(), init.begin());
    p.initial.push_back(init);
    std::array<double, kFlat> trans{};
    for (std::size_t i = 0; i < kN; ++i) {
      for (std::size_t j = 0; j < kN; ++j) {
        trans[i * kN + j] = comp.transition[i][j];
      }
    }
    p.trans.push_back(trans);
  }

  EStepResult e = e_step(stats, p);
  std::vector<Assignment> assignments;
  assignments.reserve(stats.size());
  for (std::size_t s = 0; s < stats.size(); ++s) {
    Assignment a;
    a.student_id = stats[s].seq->student_id;
    a.session_id = stats[s].seq->session_id;
    a.posterior = e.resp[s];
    a.cluster = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (a.posterior[c] > a.posterior[a.cluster]) {
        a.cluster = static_cast<int>(c);
      }
    }
    assignments.push_back(std::move(a));
  }
  return assignments;
}

KSelection select_k(const std::vector<fomm::ProcessSequence>& seqs,
                    const std::vector<int>& k_range, const EmConfig& config) {
  if (k_range.empty()) throw Error("k_range must be non-empty");
  KSelection selection;
  double n = static_cast<double>(seqs.size());
  for (int k : k_range) {
    StrategyMixture mixture = fit_em(seqs, k, config);
    double params =
        config.mode == EmMode::markov
            ? static_cast<double>(k - 1 + k * (kN - 1) + k * kN * (kN - 1))
            : static_cast<double>(k - 1 + 2 * k * kFlat);
    KSelectionRow row;
    row.k = k;
    row.log_likelihood = mixture.log_likelihood;
    row.bic = -2.0 * mixture.log_likelihood + params * std::log(n);
    selection.rows.push_back(row);
  }
  const KSelectionRow* best = &selection.rows.front();
  for (const KSelectionRow& row : selection.rows) {
    if (row.bic < best->bic || (row.bic == best->bic && row.k < best->k)) {
      best = &row;
    }
  }
  selection.recommended_k = best->k;
  return selection;
}

std::vector<ClusterBundle> strategy_report(
    const std::vector<Assignment>& assignments,
    const std::vector<fomm::ProcessSequence>& seqs, int k, double threshold) {
  std::map<std::pair<std::string, std::string>, int> cluster_of;
  for (const Assignment& a : assignments) {
    cluster_of[{a.student_id, a.session_id}] = a.cluster;
  }
  std::vector<std::vector<const fomm::ProcessSequence*>> members(
      static_cast<std::size_t>(k));
  for (const fomm::ProcessSequence& seq : seqs) {
    auto it = cluster_of.find({seq.student_id, seq.session_id});
    if (it == cluster_of.end()) {
      throw Error("no assignment for sequence " + seq_name(seq));
    }
    if (it->second < 0 || it->second >= k) {
      throw Error("assignment cluster out of range for " + seq_name(seq));
    }
    members[static_cast<std::size_t>(it->second)].push_back(&seq);
  }

  std::vector<ClusterBundle> bundles;
  for (int c = 0; c < k; ++c) {
    const auto& group = members[static_cast<std::size_t>(c)];
    ClusterBundle bundle;
    bundle.cluster = c;
    bundle.count = group.size();
    bundle.share = seqs.empty()
                       ? 0.0
                       : static_cast<double>(group.size()) /
                             static_cast<double>(seqs.size());
    if (!group.empty()) {
      std::size_t total = 0;
      std::array<std::size_t, kN> label_counts{};
      for (const fomm::ProcessSequence* seq : group) {
        for (ProcessLabel label : seq->labels) {
          ++label_counts[process_index(label)];
          ++total;
        }
      }
      if (total > 0) {
        for (std::size_t i = 0; i < kN; ++i) {
          bundle.frequencies[process_alphabet()[i]] =
              static_cast<double>(label_counts[i]) /
              static_cast<double>(total);
        }
      }
      bundle.pooled = fomm::build_pooled(group);
      if (bundle.pooled->n_transitions > 0) {
        try {
          bundle.summarized = fomm::summarize_model(
              *bundle.pooled, bundle.frequencies, threshold);
        } catch (const Error&) {
          // Nothing survives the threshold, or the removed states trap all
          // flow; the bundle simply carries no summarized model.
        }
      }
    }
    bundles.push_back(std::move(bundle));
  }
  return bundles;
}

std::string mixture_to_json(const StrategyMixture& mixture) {
  ordered_json doc;
  doc["k"] = mixture.k;
  doc["seed"] = mixture.seed;
  doc["log_likelihood"] = mixture.log_likelihood;
  doc["n_iterations"] = mixture.n_iterations;
  ordered_json components = ordered_json::array();
  for (const MixtureComponent& comp : mixture.components) {
    ordered_json obj;
    obj["weight"] = comp.weight;
    obj["initial"] = comp.initial;
    obj["transition"] = comp.transition;
    components.push_back(std::move(obj));
  }
  doc["components"] = std::move(components);
  return doc.dump(2) + "\n";
}

StrategyMixture mixture_from_json(const std::string& text) {
  ordered_json doc = ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error("mixture file is not valid JSON");
  StrategyMixture mixture;
  try {
    mixture.k = doc.at("k").get<int>();
    mixture.seed = doc.at("seed").get<std::uint64_t>();
    mixture.log_likelihood = doc.at("log_likelihood").get<double>();
    mixture.n_iterations = doc.at("n_iterations").get<int>();
    for (const ordered_json& obj : doc.at("components")) {
      MixtureComponent comp;
      comp.weight = obj.at("weight").get<double>();
      comp.initial = obj.at("initial").get<std::vector<double>>();
      comp.transition =
          obj.at("transition").get<std::vector<std::vector<double>>>();
      mixture.components.push_back(std::move(comp));
    }
  } catch (const ordered_json::exception& e) {
    throw Error(std::string("bad mixture file: ") + e.what());
  }
  if (mixture.components.size() != static_cast<std::size_t>(mixture.k)) {
    throw Error("mixture file: k does not match component count");
  }
  for (const MixtureComponent& comp : mixture.components) {
    if (comp.initial.size() != kN || comp.transition.size() != kN) {
      throw Error("mixture file: component has wrong dimensions");
    }
    for (const auto& row : comp.transition) {
      if (row.size() != kN) {
        throw Error("mixture file: component has wrong dimensions");
      }
    }
  }
  return mixture;
}

void write_assignments_csv(std::ostream& out,
                           const std::vector<Assignment>& assignments) {
  std::vector<std::string> header = {"student_id", "session_id", "cluster"};
  std::size_t k = assignments.empty() ? 0 : assignments.front().posterior.size();
  for (std::size_t c = 0; c < k; ++c) {
    header.push_back("posterior_" + std::to_string(c));
  }
  csv::write_row(out, header);
  for (const Assignment& a : assignments) {
    std::vector<std::string> row = {a.student_id, a.session_id,
                                    std::to_string(a.cluster)};
    for (double p : a.posterior) row.push_back(csv::format_double(p));
    csv::write_row(out, row);
  }
}

std::vector<Assignment> read_assignments_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("empty assignments file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = csv::split_row(line);
  if (header.size() < 3 || header[0] != "student_id" ||
      header[1] != "session_id" || header[2] != "cluster") {
    throw Error("bad assignments header");
  }
  std::size_t k = header.size() - 3;
  std::vector<Assignment> assignments;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = csv::split_row(line);
    if (fields.size() != header.size()) {
      throw Error("assignments line " + std::to_string(line_no) +
                  ": wrong field count");
    }
    Assignment a;
    a.student_id = fields[0];
    a.session_id = fields[1];
    try {
      a.cluster = std::stoi(fields[2]);
      for (std::size_t c = 0; c < k; ++c) {
        a.posterior.push_back(std::stod(fields[3 + c]));
      }
    } catch (const std::exception&) {
      throw Error("assignments line " + std::to_string(line_no) +
                  ": bad number");
    }
    assignments.push_back(std::move(a));
  }
  return assignments;
}

}  // namespace tracestrat::cluster
