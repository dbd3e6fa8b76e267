#include "sdi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "sdi/errors.hpp"

namespace sdi {

namespace {
const boost::math::normal_distribution<double> kStdNormal{};
}

double mean(std::span<const double> x) {
    if (x.empty()) throw TooFewPoints("mean: empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) throw TooFewPoints("variance: need at least 2 points");
    double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double skewness(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 3) throw TooFewPoints("skewness: need at least 3 points");
    double m = mean(x);
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        double d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (m2 <= 0.0) throw ConstantSample("skewness: sample has zero variance");
    return m3 / std::pow(m2, 1.5);
}

std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double normal_cdf(double x) { return boost::math::cdf(kStdNormal, x); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw OutOfRange("normal_quantile: p must lie in (0,1)");
    return boost::math::quantile(kStdNormal, p);
}

double normal_logpdf(double x) { return -0.5 * (std::log(2.0 * M_PI) + x * x); }

double students_t_cdf(double x, double nu) {
    return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}

double students_t_quantile(double p, double nu) {
    if (!(p > 0.0 && p < 1.0)) throw OutOfRange("students_t_quantile: p must lie in (0,1)");
    return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}

double chi_squared_cdf(double x, double dof) {
    return boost::math::cdf(boost::math::chi_squared_distribution<double>(dof), x);
}

double chi_squared_quantile(double p, double dof) {
    if (!(p > 0.0 && p < 1.0)) throw OutOfRange("chi_squared_quantile: p must lie in (0,1)");
    return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

double kolmogorov_cdf(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 5.0) return 1.0;
    // Alternating series 1 - 2 sum (-1)^(k-1) exp(-2 k^2 x^2); rapid for x
    // not tiny. For small x use the theta-function form instead.
    if (x >= 1.0) {
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            double term = std::exp(-2.0 * k * k * x * x);
            s += (k % 2 == 1) ? term : -term;
            if (term < 1e-18) break;
        }
        return 1.0 - 2.0 * s;
    }
    double s = 0.0;
    double a = M_PI * M_PI / (8.0 * x * x);
    for (int k = 0; k < 20; ++k) {
        double term = std::exp(-a * (2 * k + 1) * (2 * k + 1));
        s += term;
        if (term < 1e-18) break;
    }
    return std::sqrt(2.0 * M_PI) / x * s;
}

double kolmogorov_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw OutOfRange("kolmogorov_quantile: p must lie in (0,1)");
    double lo = 1e-3, hi = 5.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (kolmogorov_cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double ks_statistic_uniform(std::span<const double> u) {
    const std::size_t n = u.size();
    if (n == 0) throw TooFewPoints("ks_statistic_uniform: empty sample");
    std::vector<double> s(u.begin(), u.end());
    std::sort(s.begin(), s.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double fi = s[i];
        d = std::max(d, static_cast<double>(i + 1) / n - fi);
        d = std::max(d, fi - static_cast<double>(i) / n);
    }
    return d;
}

double ks_statistic_normal(std::span<const double> z) {
    std::vector<double> u(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) u[i] = normal_cdf(z[i]);
    return ks_statistic_uniform(u);
}

double ks_critical_value(std::size_t n, double alpha) {
    if (n == 0) throw TooFewPoints("ks_critical_value: n must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw OutOfRange("ks_critical_value: alpha in (0,1)");
    return kolmogorov_quantile(1.0 - alpha) / std::sqrt(static_cast<double>(n));
}

LjungBoxResult ljung_box(std::span<const double> x, int lags) {
    const std::size_t n = x.size();
    if (lags < 1) throw DomainError("ljung_box: lags must be positive");
    if (n <= static_cast<std::size_t>(lags) + 1)
        throw TooFewPoints("ljung_box: series shorter than requested lags");
    double m = mean(x);
    double c0 = 0.0;
    for (double v : x) c0 += (v - m) * (v - m);
    if (c0 <= 0.0) throw ConstantSample("ljung_box: sample has zero variance");
    double q = 0.0;
    for (int k = 1; k <= lags; ++k) {
        double ck = 0.0;
        for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t)
            ck += (x[t] - m) * (x[t - k] - m);
        double rho = ck / c0;
        q += rho * rho / static_cast<double>(n - static_cast<std::size_t>(k));
    }
    q *= static_cast<double>(n) * (static_cast<double>(n) + 2.0);
    double p = 1.0 - chi_squared_cdf(q, lags);
    return LjungBoxResult{q, p, lags};
}

}  // namespace sdi
