#include "sdi/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sdi/numeric.hpp"
#include "sdi/stats.hpp"

namespace sdi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class E>
[[noreturn]] void rethrow_with(const std::string& context, const E& e) {
    throw E(context + ": " + e.what());
}

// Maps partial autocorrelations in (-1,1) to AR (or MA) coefficients via the
// Levinson-Durbin step; every pacf vector yields a causal polynomial.
std::vector<double> pacf_to_coeffs(std::span<const double> pacf) {
    const std::size_t k = pacf.size();
    std::vector<double> phi(k, 0.0), tmp(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < j; ++i) tmp[i] = phi[i] - pacf[j] * phi[j - 1 - i];
        for (std::size_t i = 0; i < j; ++i) phi[i] = tmp[i];
        phi[j] = pacf[j];
    }
    return phi;
}

// Yule-Walker partial autocorrelations from the sample ACF (1/T divisor).
std::vector<double> sample_pacf(std::span<const double> r, int p) {
    const std::size_t n = r.size();
    double m = mean(r);
    std::vector<double> rho(static_cast<std::size_t>(p) + 1, 0.0);
    for (int k = 0; k <= p; ++k) {
        double c = 0.0;
        for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t)
            c += (r[t] - m) * (r[t - static_cast<std::size_t>(k)] - m);
        rho[static_cast<std::size_t>(k)] = c / static_cast<double>(n);
    }
    if (rho[0] <= 0.0) throw ConstantSample("fit_arma: zero-variance input");
    for (int k = p; k >= 0; --k) rho[static_cast<std::size_t>(k)] /= rho[0];

    std::vector<double> a(static_cast<std::size_t>(p), 0.0);
    std::vector<double> pacf(static_cast<std::size_t>(p), 0.0);
    double err = 1.0;
    for (int k = 0; k < p; ++k) {
        double num = rho[static_cast<std::size_t>(k) + 1];
        for (int j = 0; j < k; ++j)
            num -= a[static_cast<std::size_t>(j)] * rho[static_cast<std::size_t>(k - j)];
        double kk = (err > 1e-12) ? num / err : 0.0;
        kk = std::clamp(kk, -0.98, 0.98);
        pacf[static_cast<std::size_t>(k)] = kk;
        std::vector<double> na = a;
        for (int j = 0; j < k; ++j)
            na[static_cast<std::size_t>(j)] =
                a[static_cast<std::size_t>(j)] - kk * a[static_cast<std::size_t>(k - 1 - j)];
        na[static_cast<std::size_t>(k)] = kk;
        a = std::move(na);
        err *= (1.0 - kk * kk);
    }
    return pacf;
}

struct ArmaParams {
    std::vector<double> phi;
    std::vector<double> theta;
};

ArmaParams unpack(const std::vector<double>& y, int p, int q) {
    std::vector<double> rp(static_cast<std::size_t>(p)), rq(static_cast<std::size_t>(q));
    for (int j = 0; j < p; ++j) rp[static_cast<std::size_t>(j)] = std::tanh(y[static_cast<std::size_t>(j)]);
    for (int j = 0; j < q; ++j)
        rq[static_cast<std::size_t>(j)] = std::tanh(y[static_cast<std::size_t>(p + j)]);
    return ArmaParams{pacf_to_coeffs(rp), pacf_to_coeffs(rq)};
}

std::vector<double> arma_residuals(std::span<const double> r, const std::vector<double>& phi,
                                   const std::vector<double>& theta) {
    const std::size_t n = r.size();
    std::vector<double> eps(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double e = r[k];
        for (std::size_t j = 0; j < phi.size(); ++j)
            if (k >= j + 1) e -= phi[j] * r[k - j - 1];
        for (std::size_t j = 0; j < theta.size(); ++j)
            if (k >= j + 1) e -= theta[j] * eps[k - j - 1];
        eps[k] = e;
    }
    return eps;
}

// Exact Gaussian likelihood of an ARMA(p,q) series via the Kalman filter in
// Harvey's state-space form, with the innovation variance concentrated out.
struct KalmanOut {
    double ssq = 0.0;
    double sumlog = 0.0;
    bool ok = false;
};

KalmanOut kalman_pass(std::span<const double> r, const std::vector<double>& phi,
                      const std::vector<double>& theta) {
    const int p = static_cast<int>(phi.size());
    const int q = static_cast<int>(theta.size());
    const int m = std::max(p, q + 1);
    const std::size_t mu = static_cast<std::size_t>(m);

    std::vector<double> tm(mu * mu, 0.0);  // transition matrix, row-major
    for (int i = 0; i < m; ++i) {
        if (i < p) tm[static_cast<std::size_t>(i) * mu] = phi[static_cast<std::size_t>(i)];
        if (i + 1 < m) tm[static_cast<std::size_t>(i) * mu + static_cast<std::size_t>(i) + 1] = 1.0;
    }
    std::vector<double> rv(mu, 0.0);
    rv[0] = 1.0;
    for (int j = 0; j < q; ++j) rv[static_cast<std::size_t>(j) + 1] = theta[static_cast<std::size_t>(j)];

    // Stationary state covariance: solve P = T P T' + R R' as a linear
    // system in the m^2 entries of P.
    std::vector<double> big(mu * mu * mu * mu, 0.0), rhs(mu * mu, 0.0);
    for (std::size_t i = 0; i < mu; ++i)
        for (std::size_t j = 0; j < mu; ++j) {
            std::size_t row = i * mu + j;
            rhs[row] = rv[i] * rv[j];
            for (std::size_t k = 0; k < mu; ++k)
                for (std::size_t l = 0; l < mu; ++l) {
                    double v = -tm[i * mu + k] * tm[j * mu + l];
                    if (k == i && l == j) v += 1.0;
                    big[row * mu * mu + k * mu + l] += v;
                }
        }
    std::vector<double> pv;
    try {
        pv = solve_linear(std::move(big), std::move(rhs));
    } catch (const SingularFit&) {
        return {};
    }

    std::vector<double> a(mu, 0.0), pcol(mu, 0.0), anew(mu, 0.0);
    std::vector<double> pm = pv, pupd(mu * mu, 0.0), tmp(mu * mu, 0.0);
    double ssq = 0.0, sumlog = 0.0;
    for (double yt : r) {
        double v = yt - a[0];
        double f = pm[0];
        if (!(f > 1e-300) || !std::isfinite(f)) return {};
        ssq += v * v / f;
        sumlog += std::log(f);
        for (std::size_t i = 0; i < mu; ++i) pcol[i] = pm[i * mu];
        for (std::size_t i = 0; i < mu; ++i) anew[i] = a[i] + pcol[i] * v / f;
        for (std::size_t i = 0; i < mu; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < mu; ++k) s += tm[i * mu + k] * anew[k];
            a[i] = s;
        }
        for (std::size_t i = 0; i < mu; ++i)
            for (std::size_t j = 0; j < mu; ++j) pupd[i * mu + j] = pm[i * mu + j] - pcol[i] * pcol[j] / f;
        for (std::size_t i = 0; i < mu; ++i)
            for (std::size_t j = 0; j < mu; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < mu; ++k) s += tm[i * mu + k] * pupd[k * mu + j];
                tmp[i * mu + j] = s;
            }
        for (std::size_t i = 0; i < mu; ++i)
            for (std::size_t j = 0; j < mu; ++j) {
                double s = rv[i] * rv[j];
                for (std::size_t k = 0; k < mu; ++k) s += tmp[i * mu + k] * tm[j * mu + k];
                pm[i * mu + j] = s;
            }
    }
    if (!std::isfinite(ssq) || !std::isfinite(sumlog) || ssq <= 0.0) return {};
    return KalmanOut{ssq, sumlog, true};
}

}  // namespace

MonthlyTimeSeries orient(const MonthlyTimeSeries& series, Orientation o) {
    if (o == Orientation::Positive) return series;
    std::vector<double> v = series.values();
    for (double& x : v) x = -x;
    return MonthlyTimeSeries(series.stamps(), std::move(v), series.variable_id());
}

double yeo_johnson(double lambda, double x) {
    if (x >= 0.0) {
        if (lambda == 0.0) return std::log1p(x);
        return std::expm1(lambda * std::log1p(x)) / lambda;
    }
    if (lambda == 2.0) return -std::log1p(-x);
    return -std::expm1((2.0 - lambda) * std::log1p(-x)) / (2.0 - lambda);
}

double estimate_lambda(std::span<const double> sample) {
    if (sample.size() < 3) throw TooFewPoints("estimate_lambda: need at least 3 points");
    if (std::all_of(sample.begin(), sample.end(), [&](double v) { return v == sample[0]; }))
        throw ConstantSample("estimate_lambda: constant sample");
    double best_lambda = kNaN, best_obj = kInf;
    std::vector<double> t(sample.size());
    for (int i = 0; i <= 600; ++i) {
        double lam = static_cast<double>(i) / 100.0 - 2.0;
        for (std::size_t k = 0; k < sample.size(); ++k) t[k] = yeo_johnson(lam, sample[k]);
        double obj;
        try {
            obj = std::fabs(skewness(t));
        } catch (const Error&) {
            continue;  // transform collapsed numerically at this lambda
        }
        if (!std::isfinite(obj)) continue;
        if (obj < best_obj ||
            (obj == best_obj && std::fabs(lam - 1.0) < std::fabs(best_lambda - 1.0)))
        {
            best_obj = obj;
            best_lambda = lam;
        }
    }
    if (!std::isfinite(best_lambda))
        throw ConstantSample("estimate_lambda: no usable lambda on the grid");
    return best_lambda;
}

Deseasonalized deseasonalize(const MonthlyTimeSeries& series) {
    const auto& vals = series.values();

    Deseasonalized out;
    out.month_mean.fill(kNaN);
    out.month_sd.fill(kNaN);
    out.residuals.assign(vals.size(), 0.0);

    for (const auto& set : month_partition(series)) {
        if (set.indices.empty()) continue;
        if (set.indices.size() < 2)
            throw InsufficientMonthData("deseasonalize: month " + std::to_string(set.month) +
                                        " has a single observation");
        double m = 0.0;
        for (std::size_t k : set.indices) m += vals[k];
        m /= static_cast<double>(set.indices.size());
        double s = 0.0;
        for (std::size_t k : set.indices) s += (vals[k] - m) * (vals[k] - m);
        s = std::sqrt(s / static_cast<double>(set.indices.size() - 1));
        // The power transform can put months on very different scales, so the
        // degeneracy floor must be relative to the month itself, not to the
        // overall series range.
        if (s <= 1e-12 * std::max(1.0, std::fabs(m)))
            throw DegenerateMonth("deseasonalize: month " + std::to_string(set.month) +
                                  " has (near-)zero variance");
        out.month_mean[static_cast<std::size_t>(set.month - 1)] = m;
        out.month_sd[static_cast<std::size_t>(set.month - 1)] = s;
        for (std::size_t k : set.indices) out.residuals[k] = (vals[k] - m) / s;
    }
    return out;
}

ArmaFit fit_arma(std::span<const double> r, int p, int q) {
    if (p < 0 || q < 0) throw DomainError("fit_arma: negative order");
    const std::size_t n = r.size();
    const double dn = static_cast<double>(n);
    if (p == 0 && q == 0) {
        ArmaFit fit;
        fit.eps.assign(r.begin(), r.end());
        double ssq = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
        if (ssq <= 0.0) throw ConstantSample("fit_arma: zero-variance input");
        fit.sigma2 = ssq / dn;
        fit.loglik = -0.5 * dn * (std::log(2.0 * M_PI) + std::log(fit.sigma2) + 1.0);
        return fit;
    }
    if (n < static_cast<std::size_t>(10 * (p + q + 1)))
        throw TooFewPoints("fit_arma: series too short for requested order");

    std::vector<double> y0(static_cast<std::size_t>(p + q), 0.0);
    if (p > 0) {
        auto pc = sample_pacf(r, p);
        for (int j = 0; j < p; ++j) y0[static_cast<std::size_t>(j)] = std::atanh(pc[static_cast<std::size_t>(j)]);
    }

    auto css = [&](const std::vector<double>& y) {
        ArmaParams ap = unpack(y, p, q);
        auto eps = arma_residuals(r, ap.phi, ap.theta);
        double ssq = std::inner_product(eps.begin(), eps.end(), eps.begin(), 0.0);
        return std::isfinite(ssq) && ssq > 0.0 ? std::log(ssq) : kInf;
    };
    auto exact = [&](const std::vector<double>& y) {
        ArmaParams ap = unpack(y, p, q);
        KalmanOut ko = kalman_pass(r, ap.phi, ap.theta);
        return ko.ok ? dn * std::log(ko.ssq / dn) + ko.sumlog : kInf;
    };

    NelderMeadResult warm = nelder_mead(css, y0, 0.2, 1e-9);
    NelderMeadResult opt = nelder_mead(exact, warm.x, 0.05, 1e-10);
    if (!opt.converged || !std::isfinite(opt.f))
        throw SingularFit("fit_arma: likelihood optimization failed to converge");

    for (double yj : opt.x)
        if (std::fabs(std::tanh(yj)) >= 1.0 - 1e-8)
            throw NonStationaryFit("fit_arma: estimate on the stationarity/invertibility boundary");

    ArmaParams ap = unpack(opt.x, p, q);
    KalmanOut ko = kalman_pass(r, ap.phi, ap.theta);
    if (!ko.ok) throw SingularFit("fit_arma: likelihood degenerate at optimum");

    ArmaFit fit;
    fit.p = p;
    fit.q = q;
    fit.phi = std::move(ap.phi);
    fit.theta = std::move(ap.theta);
    fit.sigma2 = ko.ssq / dn;
    fit.loglik = -0.5 * (dn * std::log(2.0 * M_PI) + dn * std::log(fit.sigma2) + ko.sumlog + dn);
    fit.eps = arma_residuals(r, fit.phi, fit.theta);
    return fit;
}

std::vector<double> empirical_pit(std::span<const double> eps) {
    if (eps.empty()) throw TooFewPoints("empirical_pit: empty sample");
    std::vector<double> u = average_ranks(eps);
    const double denom = static_cast<double>(eps.size()) + 1.0;
    for (double& v : u) v /= denom;
    return u;
}

std::vector<double> to_zscale(std::span<const double> u) {
    std::vector<double> z(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!(u[k] > 0.0 && u[k] < 1.0))
            throw OutOfRange("to_zscale: value outside (0,1) at position " + std::to_string(k));
        z[k] = normal_quantile(u[k]);
    }
    return z;
}

MarginalModel fit_marginal(const MonthlyTimeSeries& series, Orientation o,
                           const MarginalOptions& options) {
    const std::string ctx = "fit_marginal('" + series.variable_id() + "')";
    MarginalModel model;
    model.variable_id = series.variable_id();
    model.orientation = o;
    model.stamps = series.stamps();
    model.lambda.fill(kNaN);

    MonthlyTimeSeries oriented = orient(series, o);
    const auto part = month_partition(oriented);
    const auto& vals = oriented.values();

    for (const auto& set : part) {
        const std::size_t mi = static_cast<std::size_t>(set.month - 1);
        if (set.indices.empty()) continue;
        if (options.fixed_lambda) {
            model.lambda[mi] = *options.fixed_lambda;
            continue;
        }
        std::vector<double> sample;
        sample.reserve(set.indices.size());
        for (std::size_t k : set.indices) sample.push_back(vals[k]);
        try {
            model.lambda[mi] = estimate_lambda(sample);
        } catch (const TooFewPoints& e) {
            rethrow_with(ctx + " month " + std::to_string(set.month), e);
        } catch (const ConstantSample& e) {
            rethrow_with(ctx + " month " + std::to_string(set.month), e);
        }
    }

    std::vector<double> transformed(vals.size(), 0.0);
    for (const auto& set : part)
        for (std::size_t k : set.indices)
            transformed[k] = yeo_johnson(model.lambda[static_cast<std::size_t>(set.month - 1)], vals[k]);

    MonthlyTimeSeries tseries(series.stamps(), std::move(transformed), series.variable_id());
    try {
        Deseasonalized des = deseasonalize(tseries);
        model.month_mean = des.month_mean;
        model.month_sd = des.month_sd;
        model.arma = fit_arma(des.residuals, options.p, options.q);
    } catch (const InsufficientMonthData& e) {
        rethrow_with(ctx, e);
    } catch (const DegenerateMonth& e) {
        rethrow_with(ctx, e);
    } catch (const NonStationaryFit& e) {
        rethrow_with(ctx, e);
    } catch (const SingularFit& e) {
        rethrow_with(ctx, e);
    } catch (const TooFewPoints& e) {
        rethrow_with(ctx, e);
    } catch (const ConstantSample& e) {
        rethrow_with(ctx, e);
    }

    model.u = empirical_pit(model.arma.eps);
    model.z = to_zscale(model.u);
    return model;
}

}  // namespace sdi
