#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "sdi/core.hpp"

namespace sdi {

/// Sign applied to a variable before standardization so that larger values
/// always mean "wetter". Demand-side variables (e.g. PET, VPD) use Negative.
enum class Orientation { Positive, Negative };

/// Returns a copy of `series` with values multiplied by the orientation sign.
MonthlyTimeSeries orient(const MonthlyTimeSeries& series, Orientation o);

/// Yeo-Johnson transform psi(lambda, x). Monotone in x for every lambda;
/// lambda = 1 is the identity shifted by nothing.
double yeo_johnson(double lambda, double x);

/// Grid search for the lambda in [-2, 4] (step 0.01) minimizing the absolute
/// sample skewness of the transformed values. Ties break toward lambda = 1.
double estimate_lambda(std::span<const double> sample);

struct Deseasonalized {
    std::vector<double> residuals;          // (x_k - mu_{m_k}) / sigma_{m_k}
    std::array<double, 12> month_mean{};    // NaN where the month is absent
    std::array<double, 12> month_sd{};      // NaN where the month is absent
};

/// Removes the mean seasonal cycle month by month and scales by the monthly
/// standard deviation (divisor n-1). Months absent from the record are
/// allowed; months with a single observation raise InsufficientMonthData and
/// months whose sd falls below 1e-12 times the month's own level raise
/// DegenerateMonth.
Deseasonalized deseasonalize(const MonthlyTimeSeries& series);

struct ArmaFit {
    int p = 0;
    int q = 0;
    std::vector<double> phi;    // AR coefficients
    std::vector<double> theta;  // MA coefficients
    double sigma2 = 0.0;        // innovation variance estimate
    double loglik = 0.0;        // maximized Gaussian log-likelihood
    std::vector<double> eps;    // residual series, same length as input
};

/// Exact Gaussian maximum likelihood ARMA(p, q) fit on a mean-zero series.
/// Residuals follow the recursion
///   eps_k = r_k - sum_j phi_j r_{k-j} - sum_j theta_j eps_{k-j}
/// with pre-sample values set to zero. The optimizer works in a partial
/// autocorrelation parametrization, so the returned polynomial is causal and
/// invertible; a fit driven onto the stationarity boundary raises
/// NonStationaryFit, and optimizer failure raises SingularFit.
ArmaFit fit_arma(std::span<const double> r, int p, int q);

/// Probability integral transform via average ranks: u_k = rank(eps_k)/(T+1).
std::vector<double> empirical_pit(std::span<const double> eps);

/// z_k = Phi^-1(u_k); all u must lie strictly inside (0,1).
std::vector<double> to_zscale(std::span<const double> u);

struct MarginalOptions {
    int p = 1;
    int q = 0;
    /// When set, skips lambda estimation and applies this lambda to every
    /// month (lambda = 1 disables the power transform entirely).
    std::optional<double> fixed_lambda;
};

/// Fitted per-variable standardization model plus its outputs on the
/// training record.
struct MarginalModel {
    std::string variable_id;
    Orientation orientation = Orientation::Positive;
    std::array<double, 12> lambda{};
    std::array<double, 12> month_mean{};
    std::array<double, 12> month_sd{};
    ArmaFit arma;
    std::vector<TimeStamp> stamps;
    std::vector<double> u;  // copula-scale series
    std::vector<double> z;  // standard-normal series
};

/// Full per-variable pipeline: orientation, per-month Yeo-Johnson,
/// deseasonalization, ARMA whitening, empirical PIT, z-scale. Long-term
/// trends are deliberately left in place.
MarginalModel fit_marginal(const MonthlyTimeSeries& series, Orientation o,
                           const MarginalOptions& options = {});

}  // namespace sdi
