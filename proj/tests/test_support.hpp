#pragma once

#include <stdlib.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tracestrat/fomm.hpp"
#include "tracestrat/types.hpp"

namespace testsupport {

/// Self-deleting scratch directory.
class TempDir {
 public:
  TempDir() {
    std::string tpl =
        (std::filesystem::temp_directory_path() / "tracestrat_XXXXXX")
            .string();
    std::vector<char> buf(tpl.begin(), tpl.end());
    buf.push_back('\0');
    if (mkdtemp(buf.data()) == nullptr) {
      throw std::runtime_error("mkdtemp failed");
    }
    path_ = buf.data();
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

inline bool near(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

inline tracestrat::ProcessLabel lab(int i) {
  return tracestrat::process_alphabet()[static_cast<std::size_t>(i)];
}

inline std::vector<tracestrat::ProcessLabel> labels_of(
    const std::vector<int>& idx) {
  std::vector<tracestrat::ProcessLabel> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(lab(i));
  return out;
}

inline tracestrat::fomm::ProcessSequence make_seq(
    const std::vector<int>& idx, std::string student = "s1",
    std::string session = "S1") {
  tracestrat::fomm::ProcessSequence seq;
  seq.student_id = std::move(student);
  seq.session_id = std::move(session);
  seq.labels = labels_of(idx);
  seq.durations_ms.assign(seq.labels.size(), 60000);
  return seq;
}

/// Brute-force adjacent-pair counts over the canonical 7-label alphabet.
inline std::array<std::array<long long, 7>, 7> pair_counts(
    const std::vector<tracestrat::ProcessLabel>& labels) {
  std::array<std::array<long long, 7>, 7> counts{};
  for (std::size_t i = 0; i + 1 < labels.size(); ++i) {
    counts[tracestrat::process_index(labels[i])]
          [tracestrat::process_index(labels[i + 1])] += 1;
  }
  return counts;
}

inline std::vector<int> random_label_indices(std::mt19937_64& rng,
                                             std::size_t len) {
  std::uniform_int_distribution<int> pick(0, 6);
  std::vector<int> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = pick(rng);
  return out;
}

/// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(const std::vector<int>& a,
                                  const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::runtime_error("ARI size mismatch");
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, long long> cell;
  std::map<int, long long> row, col;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cell[{a[i], b[i]}] += 1;
    row[a[i]] += 1;
    col[b[i]] += 1;
  }
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_row = 0.0, sum_col = 0.0;
  for (const auto& [key, count] : cell) index += comb2(double(count));
  for (const auto& [key, count] : row) sum_row += comb2(double(count));
  for (const auto& [key, count] : col) sum_col += comb2(double(count));
  const double expected = sum_row * sum_col / comb2(n);
  const double max_index = 0.5 * (sum_row + sum_col);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

/// Exact two-sided Student-t p via the closed-form CDF for integer df
/// (Abramowitz & Stegun 26.7.3/26.7.4), independent of the library's
/// incomplete-beta route.
inline double t_two_sided_p(double t, int df) {
  const double x = std::fabs(t);
  const double theta = std::atan2(x, std::sqrt(static_cast<double>(df)));
  const double c = std::cos(theta), s = std::sin(theta);
  double a;  // P(|T| <= x)
  if (df == 1) {
    a = 2.0 * theta / M_PI;
  } else if (df % 2 == 1) {
    double term = c, sum = c;
    for (int j = 2; j <= df - 3; j += 2) {
      term *= static_cast<double>(j) / (j + 1) * c * c;
      sum += term;
    }
    a = 2.0 / M_PI * (theta + s * sum);
  } else {
    double term = 1.0, sum = 1.0;
    for (int j = 1; j <= df - 3; j += 2) {
      term *= static_cast<double>(j) / (j + 1) * c * c;
      sum += term;
    }
    a = s * sum;
  }
  double p = 1.0 - a;
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return p;
}

/// 97.5% Student-t quantile by bisection on the closed-form CDF.
inline double t_quantile_975(int df) {
  double lo = 0.0, hi = 200.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (t_two_sided_p(mid, df) > 0.05) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct TwoGroupFit {
  double coef = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p = 0.0;
  double d = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Literal least squares on y = b0 + b1 * 1[group b]: explicit normal
/// equations, residual variance, covariance of the estimate.
inline TwoGroupFit ols_fit(const std::vector<double>& a,
                           const std::vector<double>& b) {
  const std::size_t n = a.size() + b.size();
  long double sxx = 0.0L, sx = 0.0L, sxy = 0.0L, sy = 0.0L;
  std::vector<std::pair<double, double>> rows;  // (x, y)
  for (double y : a) rows.emplace_back(0.0, y);
  for (double y : b) rows.emplace_back(1.0, y);
  for (const auto& [x, y] : rows) {
    sx += x;
    sxx += x * x;
    sxy += x * y;
    sy += y;
  }
  const long double det = static_cast<long double>(n) * sxx - sx * sx;
  const long double b1 = (static_cast<long double>(n) * sxy - sx * sy) / det;
  const long double b0 = (sxx * sy - sx * sxy) / det;
  long double rss = 0.0L;
  for (const auto& [x, y] : rows) {
    const long double r = y - (b0 + b1 * x);
    rss += r * r;
  }
  const int df = static_cast<int>(n) - 2;
  const long double sigma2 = rss / df;
  const long double var_b1 = sigma2 * static_cast<long double>(n) / det;
  TwoGroupFit fit;
  fit.coef = static_cast<double>(b1);
  fit.se = static_cast<double>(std::sqrt(var_b1));
  fit.t = fit.coef / fit.se;
  fit.p = t_two_sided_p(fit.t, df);
  fit.d = static_cast<double>(-b1 / std::sqrt(sigma2));
  const double tq = t_quantile_975(df);
  fit.ci_low = fit.coef - tq * fit.se;
  fit.ci_high = fit.coef + tq * fit.se;
  return fit;
}

/// Textbook pooled-variance two-sample t-test.
inline TwoGroupFit ttest_fit(const std::vector<double>& a,
                             const std::vector<double>& b) {
  auto mean_of = [](const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
  };
  const double ma = mean_of(a), mb = mean_of(b);
  double ssa = 0.0, ssb = 0.0;
  for (double x : a) ssa += (x - ma) * (x - ma);
  for (double x : b) ssb += (x - mb) * (x - mb);
  const int df = static_cast<int>(a.size() + b.size()) - 2;
  const double sp = std::sqrt((ssa + ssb) / df);
  const double se =
      sp * std::sqrt(1.0 / static_cast<double>(a.size()) +
                     1.0 / static_cast<double>(b.size()));
  TwoGroupFit fit;
  fit.coef = mb - ma;
  fit.se = se;
  fit.t = fit.coef / se;
  fit.p = t_two_sided_p(fit.t, df);
  fit.d = (ma - mb) / sp;
  const double tq = t_quantile_975(df);
  fit.ci_low = fit.coef - tq * se;
  fit.ci_high = fit.coef + tq * se;
  return fit;
}

}  // namespace testsupport
