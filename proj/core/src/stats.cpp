#include "tracestrat/stats.hpp"

#include <cmath>
#include <limits>

#include "tracestrat/types.hpp"

namespace tracestrat::stats {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Continued fraction for the incomplete beta (Lentz).
double beta_cf(double a, double b, double x) {
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

double log_binom(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double gamma_q(double a, double x) {
  if (a <= 0.0) throw Error("gamma_q: a must be positive");
  if (x < 0.0) throw Error("gamma_q: x must be non-negative");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw Error("incomplete_beta: a,b must be positive");
  if (x < 0.0 || x > 1.0) throw Error("incomplete_beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x));
  // Use the symmetry relation so the continued fraction converges fast.
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double chi2_sf(double x, int df) {
  if (df <= 0) throw Error("chi2_sf: df must be positive");
  if (x < 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

double student_t_sf(double t, double df) {
  if (df <= 0.0) throw Error("student_t_sf: df must be positive");
  double x = df / (df + t * t);
  double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t >= 0.0 ? tail : 1.0 - tail;
}

double student_t_quantile(double p, double df) {
  if (p <= 0.0 || p >= 1.0) throw Error("student_t_quantile: p outside (0,1)");
  if (p == 0.5) return 0.0;
  // CDF is monotone; bracket then bisect. 200 iterations gives full
  // double precision for any realistic df.
  double lo = -1.0, hi = 1.0;
  auto cdf = [df](double q) { return 1.0 - student_t_sf(q, df); };
  while (cdf(lo) > p) lo *= 2.0;
  while (cdf(hi) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p) lo = mid;
    else hi = mid;
    if (hi - lo < 1e-14 * std::max(1.0, std::fabs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

double mcnemar_exact_p(std::int64_t b, std::int64_t c) {
  if (b < 0 || c < 0) throw Error("mcnemar_exact_p: negative count");
  std::int64_t n = b + c;
  if (n == 0) return 1.0;
  std::int64_t x = std::min(b, c);
  if (b == c) return 1.0;
  double cdf = 0.0;
  double log_half_n = -static_cast<double>(n) * std::log(2.0);
  for (std::int64_t i = 0; i <= x; ++i) {
    cdf += std::exp(log_binom(n, i) + log_half_n);
  }
  return std::min(1.0, 2.0 * cdf);
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw Error("mean of empty sample");
  double s = 0.0;
  for (double v : xs) s += v;
  return s / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) throw Error("sample_sd requires at least 2 observations");
  double m = mean(xs);
  double ss = 0.0;
  for (double v : xs) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace tracestrat::stats
