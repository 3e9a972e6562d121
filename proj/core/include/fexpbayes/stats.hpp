#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fexpbayes {

// regularized lower incomplete gamma P(a, x); Q(a, x) = 1 - P(a, x)
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// upper tail of the chi-square distribution with df degrees of freedom
double chi2_sf(double x, double df);

// Pearson statistic on observed counts vs expected probabilities. Expected counts
// below min_expected are merged into the previous cell before the statistic
// is formed. Returns the p-value.
struct GofResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
};
GofResult chi2_gof(const std::vector<double>& observed,
                   const std::vector<double>& expected_prob, double min_expected = 5.0);

// Effective sample size by the initial monotone positive sequence estimator.
// Returns n for a constant series.
double ess(std::span<const double> x);

double mean(std::span<const double> x);
double variance(std::span<const double> x);
double median(std::vector<double> x);          // by value: sorts a copy
double quantile(std::vector<double> x, double q);

// least squares slope of y against x
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace fexpbayes
