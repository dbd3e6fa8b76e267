#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sdi/errors.hpp"
#include "sdi/marginal.hpp"
#include "sdi/stats.hpp"

using namespace sdi;

namespace {

MonthlyTimeSeries series_of(std::vector<double> values, TimeStamp start = {2000, 1},
                            std::string id = "PRE") {
    auto stamps = make_stamps(start, values.size());
    return {std::move(stamps), std::move(values), std::move(id)};
}

}  // namespace

TEST_CASE("orientation flips demand-side variables") {
    auto s = series_of({1.0, -2.0, 0.0});
    auto neg = orient(s, Orientation::Negative);
    CHECK(neg.values() == std::vector<double>{-1.0, 2.0, -0.0});
    auto pos = orient(s, Orientation::Positive);
    CHECK(pos.values() == s.values());
    auto zeros = orient(series_of({0.0, 0.0, 0.0}), Orientation::Negative);
    CHECK(zeros.values()[1] == 0.0);
}

TEST_CASE("yeo-johnson evaluates all four branches") {
    CHECK(yeo_johnson(1.0, 5.0) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(yeo_johnson(1.0, -4.2) == doctest::Approx(-4.2).epsilon(1e-15));
    CHECK(yeo_johnson(0.0, 1.0) == doctest::Approx(oracle::kLn2).epsilon(1e-15));
    CHECK(yeo_johnson(3.0, -1.0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(yeo_johnson(0.5, 2.5) == doctest::Approx(oracle::kYeoJohnsonHalf25).epsilon(1e-15));
    CHECK(yeo_johnson(2.7, -1.3) == doctest::Approx(oracle::kYeoJohnson27Neg13).epsilon(1e-15));
    CHECK(yeo_johnson(2.0, -1.5) == doctest::Approx(-std::log(2.5)).epsilon(1e-15));
    CHECK(yeo_johnson(0.0, 0.0) == 0.0);
}

TEST_CASE("yeo-johnson is monotone in x for any lambda") {
    for (double lam : {-2.0, -0.5, 0.0, 1.0, 2.0, 3.7}) {
        double prev = yeo_johnson(lam, -6.0);
        for (double x = -5.5; x <= 6.0; x += 0.5) {
            double cur = yeo_johnson(lam, x);
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("lambda search recognizes symmetric samples") {
    std::vector<double> sym{-2.0, -1.0, 0.0, 1.0, 2.0};
    CHECK(estimate_lambda(sym) == doctest::Approx(1.0));
}

TEST_CASE("lambda search shrinks skew in the right direction") {
    // Deterministic exponential quantile sample: strongly right-skewed.
    std::vector<double> right(40);
    for (std::size_t i = 0; i < right.size(); ++i)
        right[i] = -std::log(1.0 - (i + 0.5) / 40.0);
    double lam_r = estimate_lambda(right);
    CHECK(lam_r < 1.0);

    std::vector<double> left = right;
    for (double& v : left) v = -v;
    double lam_l = estimate_lambda(left);
    CHECK(lam_l > 1.0);

    // The transform at the chosen lambda must actually reduce the skew.
    std::vector<double> t(right.size());
    for (std::size_t i = 0; i < right.size(); ++i) t[i] = yeo_johnson(lam_r, right[i]);
    CHECK(std::fabs(skewness(t)) < std::fabs(skewness(right)));
}

TEST_CASE("lambda search error paths") {
    CHECK_THROWS_AS(estimate_lambda(std::vector<double>{1.0, 2.0}), TooFewPoints);
    CHECK_THROWS_AS(estimate_lambda(std::vector<double>{3.0, 3.0, 3.0}), ConstantSample);
}

TEST_CASE("deseasonalization recovers hand-computed month statistics") {
    // Two full years; every month sees the values {2, 0}.
    std::vector<double> vals(24);
    for (std::size_t k = 0; k < 24; ++k) vals[k] = k < 12 ? 2.0 : 0.0;
    auto des = deseasonalize(series_of(std::move(vals)));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int m = 0; m < 12; ++m) {
        CHECK(des.month_mean[m] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(des.month_sd[m] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
        CHECK(des.residuals[m] == doctest::Approx(inv_sqrt2).epsilon(1e-14));
        CHECK(des.residuals[m + 12] == doctest::Approx(-inv_sqrt2).epsilon(1e-14));
    }
}

TEST_CASE("deseasonalized residuals are centered") {
    auto s = oracle::seasonal_series(11, 240);
    auto des = deseasonalize(s);
    double total = 0.0;
    for (double r : des.residuals) total += r;
    CHECK(std::fabs(total) < 1e-9 * 240);
    // Per-month mean is zero and per-month variance is one by construction.
    auto part = month_partition(s);
    for (const auto& set : part) {
        std::vector<double> month;
        for (auto k : set.indices) month.push_back(des.residuals[k]);
        CHECK(mean(month) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(variance(month) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("deseasonalization error paths") {
    SUBCASE("a pure periodic signal has zero within-month variance") {
        std::vector<double> vals(24);
        for (std::size_t k = 0; k < 24; ++k) vals[k] = static_cast<double>(k % 12);
        CHECK_THROWS_AS(deseasonalize(series_of(std::move(vals))), DegenerateMonth);
    }
    SUBCASE("thirteen months leave eleven singleton months") {
        std::vector<double> vals(13);
        for (std::size_t k = 0; k < 13; ++k) vals[k] = static_cast<double>(k) * 1.1;
        CHECK_THROWS_AS(deseasonalize(series_of(std::move(vals))), InsufficientMonthData);
    }
}

TEST_CASE("arma(0,0) returns the input as residuals") {
    std::vector<double> r{0.3, -1.2, 0.7, 0.1, -0.5};
    auto fit = fit_arma(r, 0, 0);
    CHECK(fit.eps == r);
    CHECK(fit.phi.empty());
    CHECK(fit.theta.empty());
    double ssq = 0.0;
    for (double v : r) ssq += v * v;
    CHECK(fit.sigma2 == doctest::Approx(ssq / 5.0).epsilon(1e-15));
}

TEST_CASE("ar(1) estimate recovers the generating coefficient") {
    oracle::Rng rng(101);
    std::vector<double> r(600);
    double prev = 0.0;
    for (auto& v : r) {
        prev = 0.6 * prev + rng.normal();
        v = prev;
    }
    auto fit = fit_arma(r, 1, 0);
    REQUIRE(fit.phi.size() == 1);
    CHECK(fit.phi[0] > 0.5);
    CHECK(fit.phi[0] < 0.7);

    SUBCASE("reported log-likelihood matches the closed-form ar(1) likelihood") {
        CHECK(fit.loglik ==
              doctest::Approx(oracle::ar1_exact_loglik(r, fit.phi[0], fit.sigma2)).epsilon(1e-9));
    }
    SUBCASE("the estimate maximizes the concentrated likelihood") {
        const double at_hat = oracle::ar1_concentrated_loglik(r, fit.phi[0]);
        CHECK(at_hat + 1e-7 >= oracle::ar1_concentrated_loglik(r, fit.phi[0] + 0.02));
        CHECK(at_hat + 1e-7 >= oracle::ar1_concentrated_loglik(r, fit.phi[0] - 0.02));
    }
    SUBCASE("residuals satisfy the defining recursion") {
        for (std::size_t k = 1; k < r.size(); ++k)
            CHECK(fit.eps[k] == doctest::Approx(r[k] - fit.phi[0] * r[k - 1]).epsilon(1e-12));
        CHECK(fit.eps[0] == r[0]);
    }
}

TEST_CASE("white noise yields a near-zero ar coefficient") {
    oracle::Rng rng(77);
    std::vector<double> r(900);
    for (auto& v : r) v = rng.normal();
    auto fit = fit_arma(r, 1, 0);
    CHECK(std::fabs(fit.phi[0]) < 3.0 / std::sqrt(900.0));
}

TEST_CASE("ma(1) estimate recovers the generating coefficient") {
    oracle::Rng rng(55);
    std::vector<double> r(800);
    double e_prev = rng.normal();
    for (auto& v : r) {
        double e = rng.normal();
        v = e + 0.5 * e_prev;
        e_prev = e;
    }
    auto fit = fit_arma(r, 0, 1);
    REQUIRE(fit.theta.size() == 1);
    CHECK(fit.theta[0] > 0.35);
    CHECK(fit.theta[0] < 0.65);
}

TEST_CASE("arma(1,1) estimates land near the generating pair") {
    oracle::Rng rng(3001);
    std::vector<double> r(1200);
    double y = 0.0, e_prev = rng.normal();
    for (auto& v : r) {
        double e = rng.normal();
        y = 0.6 * y + e + 0.3 * e_prev;
        e_prev = e;
        v = y;
    }
    auto fit = fit_arma(r, 1, 1);
    CHECK(fit.phi[0] == doctest::Approx(0.6).epsilon(0.25));
    CHECK(fit.theta[0] == doctest::Approx(0.3).epsilon(0.6));
}

TEST_CASE("arma fit error paths") {
    std::vector<double> tiny(15, 0.5);
    CHECK_THROWS_AS(fit_arma(tiny, 1, 0), TooFewPoints);
    std::vector<double> flat(40, 0.0);
    CHECK_THROWS_AS(fit_arma(flat, 0, 0), ConstantSample);
    CHECK_THROWS_AS(fit_arma(flat, 1, 0), ConstantSample);
}

TEST_CASE("empirical pit maps to rank/(T+1)") {
    std::vector<double> eps{0.5, -1.2, 2.0};
    CHECK(empirical_pit(eps) == std::vector<double>{0.5, 0.25, 0.75});

    std::vector<double> sorted(9);
    for (std::size_t i = 0; i < 9; ++i) sorted[i] = static_cast<double>(i) - 4.0;
    auto u = empirical_pit(sorted);
    for (std::size_t i = 0; i < 9; ++i)
        CHECK(u[i] == doctest::Approx((i + 1.0) / 10.0).epsilon(1e-15));

    CHECK(empirical_pit(std::vector<double>{42.0}) == std::vector<double>{0.5});

    std::vector<double> tied{1.0, 1.0, 2.0};
    CHECK(empirical_pit(tied) == std::vector<double>{0.375, 0.375, 0.75});
}

TEST_CASE("z-scale transform and its domain") {
    std::vector<double> u{0.5, 0.975, 0.025};
    auto z = to_zscale(u);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == doctest::Approx(oracle::kNormalQuantile975).epsilon(1e-14));
    CHECK(z[2] == doctest::Approx(-oracle::kNormalQuantile975).epsilon(1e-14));
    CHECK_THROWS_AS(to_zscale(std::vector<double>{0.5, 1.0}), OutOfRange);
    CHECK_THROWS_AS(to_zscale(std::vector<double>{0.0}), OutOfRange);
}

TEST_CASE("full marginal pipeline produces calibrated z-scores") {
    auto s = oracle::seasonal_series(42, 360);
    auto model = fit_marginal(s, Orientation::Positive);

    CHECK(model.variable_id == "PRE");
    CHECK(model.u.size() == 360);
    CHECK(model.z.size() == 360);
    for (double u : model.u) {
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
    for (int m = 0; m < 12; ++m) {
        CHECK(std::isfinite(model.lambda[m]));
        CHECK(std::isfinite(model.month_mean[m]));
        CHECK(model.month_sd[m] > 0.0);
    }
    // The empirical PIT makes z a permutation of normal scores, so the KS
    // distance to N(0,1) must be far below any conventional critical value.
    CHECK(ks_statistic_normal(model.z) < ks_critical_value(360, 0.01));
    // Whitening: the fitted AR step removes the injected serial correlation.
    auto lb = ljung_box(model.arma.eps, 12);
    CHECK(lb.statistic < chi_squared_quantile(0.99, 12.0));
}

TEST_CASE("pipeline with fixed lambda is translation invariant") {
    auto s = oracle::seasonal_series(91, 240);
    MarginalOptions opt;
    opt.fixed_lambda = 1.0;
    auto base = fit_marginal(s, Orientation::Positive, opt);

    std::vector<double> shifted = s.values();
    for (double& v : shifted) v += 1000.0;
    auto moved = fit_marginal({s.stamps(), shifted, s.variable_id()}, Orientation::Positive, opt);

    CHECK(base.u == moved.u);
    CHECK(base.z == moved.z);
}

TEST_CASE("negative orientation equals fitting the negated series") {
    auto s = oracle::seasonal_series(17, 240, 0.4, {1961, 1}, "PET");
    auto a = fit_marginal(s, Orientation::Negative);
    std::vector<double> negated = s.values();
    for (double& v : negated) v = -v;
    auto b = fit_marginal({s.stamps(), negated, s.variable_id()}, Orientation::Positive);
    CHECK(a.u == b.u);
    CHECK(a.orientation == Orientation::Negative);
}

TEST_CASE("marginal errors carry the variable and month context") {
    // Month 3 is constant across years; the lambda stage must name it.
    auto s = oracle::seasonal_series(23, 120, 0.5, {1990, 1}, "VPD");
    std::vector<double> vals = s.values();
    for (std::size_t k = 0; k < vals.size(); ++k)
        if (s.stamps()[k].month == 3) vals[k] = 7.0;
    try {
        fit_marginal({s.stamps(), vals, "VPD"}, Orientation::Positive);
        FAIL("expected ConstantSample");
    } catch (const ConstantSample& e) {
        const std::string msg = e.what();
        CHECK(msg.find("fit_marginal('VPD')") != std::string::npos);
        CHECK(msg.find("month 3") != std::string::npos);
    }
}

TEST_CASE("short records are rejected with context") {
    // Two observations per month are too few to estimate a lambda.
    auto s = oracle::seasonal_series(5, 24);
    CHECK_THROWS_AS(fit_marginal(s, Orientation::Positive), TooFewPoints);
}
