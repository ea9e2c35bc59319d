#pragma once

#include <cstdint>
#include <vector>

namespace tracestrat::stats {

/// Regularized upper incomplete gamma Q(a, x). Series for x < a+1,
/// Lentz continued fraction otherwise; relative error well below 1e-10.
double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// Upper-tail chi-square survival P(X >= x) at df degrees of freedom.
double chi2_sf(double x, int df);

/// Upper-tail Student-t survival P(T >= t) at df degrees of freedom.
double student_t_sf(double t, double df);

/// Student-t quantile: smallest q with CDF(q) = p. Bisection on the CDF.
double student_t_quantile(double p, double df);

/// Exact two-sided McNemar p for a 2x2 paired table with off-diagonal
/// counts b and c: doubled binomial tail at min(b, c), capped at 1.
double mcnemar_exact_p(std::int64_t b, std::int64_t c);

double mean(const std::vector<double>& xs);

/// Sample standard deviation (n-1 denominator). Requires xs.size() >= 2.
double sample_sd(const std::vector<double>& xs);

}  // namespace tracestrat::stats
