#pragma once

#include <span>
#include <vector>

namespace sdi {

double mean(std::span<const double> x);

/// Sample variance with divisor n-1.
double variance(std::span<const double> x);

/// Moment skewness m3 / m2^(3/2) with 1/n moments.
/// Throws TooFewPoints (n < 3) or ConstantSample (zero variance).
double skewness(std::span<const double> x);

/// 1-based ranks; tied values receive the average of their ranks.
std::vector<double> average_ranks(std::span<const double> x);

// Distribution helpers (standard normal, Student t, chi-squared).
double normal_cdf(double x);
double normal_quantile(double p);
double normal_logpdf(double x);
double students_t_cdf(double x, double nu);
double students_t_quantile(double p, double nu);
double chi_squared_cdf(double x, double dof);
double chi_squared_quantile(double p, double dof);

/// Kolmogorov distribution function K(x) = P(sup|B| <= x).
double kolmogorov_cdf(double x);

/// Inverse of kolmogorov_cdf.
double kolmogorov_quantile(double p);

/// Two-sided KS statistic of `u` against U(0,1).
double ks_statistic_uniform(std::span<const double> u);

/// Two-sided KS statistic of `z` against N(0,1).
double ks_statistic_normal(std::span<const double> z);

/// Asymptotic KS critical value at level alpha: Kinv(1-alpha)/sqrt(n).
double ks_critical_value(std::size_t n, double alpha);

struct LjungBoxResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int lags = 0;
};

/// Ljung-Box portmanteau test on the first `lags` autocorrelations.
LjungBoxResult ljung_box(std::span<const double> x, int lags);

}  // namespace sdi
