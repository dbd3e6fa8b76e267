#include "sdi/copula.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "sdi/numeric.hpp"
#include "sdi/stats.hpp"

namespace sdi {

namespace {

constexpr double kClamp = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double x) { return std::clamp(x, kClamp, 1.0 - kClamp); }

void check_unit(double x, const char* op) {
    if (!(x > 0.0 && x < 1.0)) throw DomainError(std::string(op) + ": argument outside (0,1)");
}

double logsumexp2(double a, double b) {
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// ---------------------------------------------------------------------------
// Base-family (rotation 0) density, h-function and inverse. All families
// here are exchangeable, so a single h covers both conditionals.

double gaussian_logc_xy(double rho, double x, double y) {
    double r2 = 1.0 - rho * rho;
    return -0.5 * std::log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}

double student_logc_xy(double rho, double nu, double x, double y) {
    double r2 = 1.0 - rho * rho;
    double q = (x * x - 2.0 * rho * x * y + y * y) / r2;
    return std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) - 2.0 * std::lgamma(0.5 * (nu + 1.0)) -
           0.5 * std::log(r2) - 0.5 * (nu + 2.0) * std::log1p(q / nu) +
           0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}

double clayton_log_s(double theta, double u, double v) {
    // log(u^-theta + v^-theta - 1), evaluated via shifted exponentials.
    double a = -theta * std::log(u);
    double b = -theta * std::log(v);
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
}

double clayton_logc(double theta, double u, double v) {
    return std::log1p(theta) - (theta + 1.0) * (std::log(u) + std::log(v)) -
           (2.0 + 1.0 / theta) * clayton_log_s(theta, u, v);
}

double clayton_h(double theta, double u, double v) {
    double lh = -(theta + 1.0) * std::log(v) - (1.0 + 1.0 / theta) * clayton_log_s(theta, u, v);
    return std::exp(lh);
}

double clayton_hinv(double theta, double w, double v) {
    double t = std::expm1(-theta / (theta + 1.0) * std::log(w));
    if (t <= 0.0) return 1.0 - kClamp;
    double log_term = -theta * std::log(v) + std::log(t);
    double log_inner = log_term > 36.0 ? log_term : std::log1p(std::exp(log_term));
    return std::exp(-log_inner / theta);
}

struct GumbelParts {
    double lxt, lyt;  // log(-log u), log(-log v)
    double xt, yt;    // -log u, -log v
    double logS, A;
};

GumbelParts gumbel_parts(double theta, double u, double v) {
    GumbelParts g;
    g.xt = -std::log(u);
    g.yt = -std::log(v);
    g.lxt = std::log(g.xt);
    g.lyt = std::log(g.yt);
    g.logS = logsumexp2(theta * g.lxt, theta * g.lyt);
    g.A = std::exp(g.logS / theta);
    return g;
}

double gumbel_logc(double theta, double u, double v) {
    GumbelParts g = gumbel_parts(theta, u, v);
    return -g.A + (theta - 1.0) * (g.lxt + g.lyt) + g.xt + g.yt + (1.0 / theta - 2.0) * g.logS +
           std::log(g.A + theta - 1.0);
}

double gumbel_h(double theta, double u, double v) {
    GumbelParts g = gumbel_parts(theta, u, v);
    return std::exp(-g.A + (1.0 / theta - 1.0) * g.logS + (theta - 1.0) * g.lyt + g.yt);
}

double frank_logc(double theta, double u, double v) {
    double d = std::expm1(-theta);
    double gu = std::expm1(-theta * u);
    double gv = std::expm1(-theta * v);
    double denom = d + gu * gv;
    return std::log(std::fabs(theta * d)) - theta * (u + v) - 2.0 * std::log(std::fabs(denom));
}

double frank_h(double theta, double u, double v) {
    double d = std::expm1(-theta);
    double gu = std::expm1(-theta * u);
    double gv = std::expm1(-theta * v);
    return std::exp(-theta * v) * gu / (d + gu * gv);
}

double frank_hinv(double theta, double w, double v) {
    double d = std::expm1(-theta);
    double gv = std::expm1(-theta * v);
    double gu = w * d / (std::exp(-theta * v) - w * gv);
    return -std::log1p(gu) / theta;
}

struct JoeParts {
    double l1u, l1v;      // log(1-u), log(1-v)
    double omx, omy;      // 1-x, 1-y with x=(1-u)^theta
    double logM;
};

JoeParts joe_parts(double theta, double u, double v) {
    JoeParts j;
    j.l1u = std::log1p(-u);
    j.l1v = std::log1p(-v);
    double lx = theta * j.l1u;
    double ly = theta * j.l1v;
    j.omx = -std::expm1(lx);
    j.omy = -std::expm1(ly);
    j.logM = logsumexp2(ly, lx + std::log(j.omy));  // M = y + x(1-y)
    return j;
}

double joe_logc(double theta, double u, double v) {
    JoeParts j = joe_parts(theta, u, v);
    double tail = theta * std::exp(j.logM) + (theta - 1.0) * j.omx * j.omy;
    return (theta - 1.0) * (j.l1u + j.l1v) + (1.0 / theta - 2.0) * j.logM + std::log(tail);
}

double joe_h(double theta, double u, double v) {
    JoeParts j = joe_parts(theta, u, v);
    return std::exp((1.0 / theta - 1.0) * j.logM + (theta - 1.0) * j.l1v + std::log(j.omx));
}

double base_logc(Family f, const std::vector<double>& par, double u, double v) {
    switch (f) {
        case Family::Independence:
            return 0.0;
        case Family::Gaussian:
            return gaussian_logc_xy(par[0], normal_quantile(u), normal_quantile(v));
        case Family::StudentT:
            return student_logc_xy(par[0], par[1], students_t_quantile(u, par[1]),
                                   students_t_quantile(v, par[1]));
        case Family::Clayton:
            return clayton_logc(par[0], u, v);
        case Family::Gumbel:
            return gumbel_logc(par[0], u, v);
        case Family::Frank:
            return frank_logc(par[0], u, v);
        case Family::Joe:
            return joe_logc(par[0], u, v);
    }
    throw DomainError("unknown family");
}

double base_h(Family f, const std::vector<double>& par, double u, double v) {
    switch (f) {
        case Family::Independence:
            return u;
        case Family::Gaussian: {
            double rho = par[0];
            double x = normal_quantile(u), y = normal_quantile(v);
            return normal_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
        }
        case Family::StudentT: {
            double rho = par[0], nu = par[1];
            double x = students_t_quantile(u, nu), y = students_t_quantile(v, nu);
            double s = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
            return students_t_cdf((x - rho * y) / s, nu + 1.0);
        }
        case Family::Clayton:
            return clayton_h(par[0], u, v);
        case Family::Gumbel:
            return gumbel_h(par[0], u, v);
        case Family::Frank:
            return frank_h(par[0], u, v);
        case Family::Joe:
            return joe_h(par[0], u, v);
    }
    throw DomainError("unknown family");
}

double base_hinv_root(Family f, const std::vector<double>& par, double w, double v) {
    auto fn = [&](double u) { return base_h(f, par, u, v) - w; };
    double lo = kClamp, hi = 1.0 - kClamp;
    double flo = fn(lo), fhi = fn(hi);
    if (flo >= 0.0) return lo;
    if (fhi <= 0.0) return hi;
    auto tol = [](double a, double b) { return b - a < 1e-13; };
    std::uintmax_t iter = 200;
    auto br = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi, tol, iter);
    return 0.5 * (br.first + br.second);
}

double base_hinv(Family f, const std::vector<double>& par, double w, double v) {
    switch (f) {
        case Family::Independence:
            return w;
        case Family::Gaussian: {
            double rho = par[0];
            double y = normal_quantile(v);
            return normal_cdf(rho * y + std::sqrt(1.0 - rho * rho) * normal_quantile(w));
        }
        case Family::StudentT: {
            double rho = par[0], nu = par[1];
            double y = students_t_quantile(v, nu);
            double s = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
            return students_t_cdf(rho * y + s * students_t_quantile(w, nu + 1.0), nu);
        }
        case Family::Clayton:
            return clayton_hinv(par[0], w, v);
        case Family::Frank:
            return frank_hinv(par[0], w, v);
        case Family::Gumbel:
        case Family::Joe:
            return base_hinv_root(f, par, w, v);
    }
    throw DomainError("unknown family");
}

// ---------------------------------------------------------------------------
// Rotation adapters. c_90(u,v) = c(v, 1-u), c_180(u,v) = c(1-u, 1-v),
// c_270(u,v) = c(1-v, u); the h adapters follow by differentiating the
// rotated distribution function.

int mirror_rotation(int rot) { return (rot == 90 || rot == 270) ? 360 - rot : rot; }

double rotated_logc(const PairCopula& c, double u, double v) {
    switch (c.tag.rotation) {
        case 0:
            return base_logc(c.tag.family, c.parameters, u, v);
        case 90:
            return base_logc(c.tag.family, c.parameters, v, 1.0 - u);
        case 180:
            return base_logc(c.tag.family, c.parameters, 1.0 - u, 1.0 - v);
        default:
            return base_logc(c.tag.family, c.parameters, 1.0 - v, u);
    }
}

double rotated_h1(const PairCopula& c, double u, double v) {
    switch (c.tag.rotation) {
        case 0:
            return base_h(c.tag.family, c.parameters, u, v);
        case 90:
            return 1.0 - base_h(c.tag.family, c.parameters, 1.0 - u, v);
        case 180:
            return 1.0 - base_h(c.tag.family, c.parameters, 1.0 - u, 1.0 - v);
        default:
            return base_h(c.tag.family, c.parameters, u, 1.0 - v);
    }
}

double rotated_h1_inverse(const PairCopula& c, double w, double v) {
    switch (c.tag.rotation) {
        case 0:
            return base_hinv(c.tag.family, c.parameters, w, v);
        case 90:
            return 1.0 - base_hinv(c.tag.family, c.parameters, 1.0 - w, v);
        case 180:
            return 1.0 - base_hinv(c.tag.family, c.parameters, 1.0 - w, 1.0 - v);
        default:
            return base_hinv(c.tag.family, c.parameters, w, 1.0 - v);
    }
}

// ---------------------------------------------------------------------------
// Kendall tau helpers.

double debye1(double x) {
    // D1(x) = (1/x) int_0^x t/(e^t - 1) dt for x > 0.
    auto f = [](double t) { return t > 1e-12 ? t / std::expm1(t) : 1.0 - 0.5 * t; };
    double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, x, 8, 1e-12);
    return integral / x;
}

double frank_tau(double theta) {
    double a = std::fabs(theta);
    double tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
    return theta > 0.0 ? tau : -tau;
}

double joe_tau(double theta) {
    if (theta == 1.0) return 0.0;
    auto f = [theta](double s) {
        if (s <= 0.0 || s >= 1.0) return 0.0;
        double g = -std::expm1(theta * std::log(s));  // 1 - s^theta
        if (g <= 0.0) return 0.0;
        return g * std::log(g) * std::exp((1.0 - theta) * std::log(s));
    };
    double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 10, 1e-12);
    return 1.0 + 4.0 / theta * integral;
}

void validate_parameters(const FamilyTag& tag, const std::vector<double>& par) {
    auto need = [&](std::size_t k) {
        if (par.size() != k)
            throw DomainError("copula " + to_string(tag) + ": expected " + std::to_string(k) +
                              " parameter(s), got " + std::to_string(par.size()));
    };
    for (double p : par)
        if (!std::isfinite(p)) throw DomainError("copula " + to_string(tag) + ": non-finite parameter");
    switch (tag.family) {
        case Family::Independence:
            need(0);
            break;
        case Family::Gaussian:
            need(1);
            if (!(par[0] > -1.0 && par[0] < 1.0))
                throw DomainError("gaussian copula: rho must lie in (-1,1)");
            break;
        case Family::StudentT:
            need(2);
            if (!(par[0] > -1.0 && par[0] < 1.0))
                throw DomainError("studentt copula: rho must lie in (-1,1)");
            if (!(par[1] >= 2.0 && par[1] <= 30.0))
                throw DomainError("studentt copula: nu must lie in [2,30]");
            break;
        case Family::Clayton:
            need(1);
            if (!(par[0] > 0.0)) throw DomainError("clayton copula: theta must be positive");
            break;
        case Family::Gumbel:
            need(1);
            if (!(par[0] >= 1.0)) throw DomainError("gumbel copula: theta must be >= 1");
            break;
        case Family::Frank:
            need(1);
            if (par[0] == 0.0) throw DomainError("frank copula: theta must be nonzero");
            break;
        case Family::Joe:
            need(1);
            if (!(par[0] >= 1.0)) throw DomainError("joe copula: theta must be >= 1");
            break;
    }
}

}  // namespace

std::string to_string(Family f) {
    switch (f) {
        case Family::Independence:
            return "independence";
        case Family::Gaussian:
            return "gaussian";
        case Family::StudentT:
            return "studentt";
        case Family::Clayton:
            return "clayton";
        case Family::Gumbel:
            return "gumbel";
        case Family::Frank:
            return "frank";
        case Family::Joe:
            return "joe";
    }
    return "?";
}

std::string to_string(const FamilyTag& tag) {
    std::string s = to_string(tag.family);
    if (tag.rotation != 0) s += std::to_string(tag.rotation);
    return s;
}

FamilyTag parse_family_tag(const std::string& text) {
    std::string base;
    std::string digits;
    for (char ch : text) {
        if (std::isdigit(static_cast<unsigned char>(ch)))
            digits += ch;
        else if (digits.empty())
            base += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        else
            throw ParseError("bad family tag '" + text + "'");
    }
    FamilyTag tag;
    if (base == "independence" || base == "indep")
        tag.family = Family::Independence;
    else if (base == "gaussian" || base == "normal")
        tag.family = Family::Gaussian;
    else if (base == "studentt" || base == "t" || base == "student")
        tag.family = Family::StudentT;
    else if (base == "clayton")
        tag.family = Family::Clayton;
    else if (base == "gumbel")
        tag.family = Family::Gumbel;
    else if (base == "frank")
        tag.family = Family::Frank;
    else if (base == "joe")
        tag.family = Family::Joe;
    else
        throw ParseError("unknown copula family '" + text + "'");
    tag.rotation = digits.empty() ? 0 : std::stoi(digits);
    try {
        validate_tag(tag);
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    return tag;
}

void validate_tag(const FamilyTag& tag) {
    if (tag.rotation != 0 && tag.rotation != 90 && tag.rotation != 180 && tag.rotation != 270)
        throw DomainError("copula rotation must be one of 0/90/180/270");
    bool rotatable = tag.family == Family::Clayton || tag.family == Family::Gumbel ||
                     tag.family == Family::Joe;
    if (tag.rotation != 0 && !rotatable)
        throw DomainError("rotation is only defined for clayton, gumbel and joe");
}

int parameter_count(Family f) {
    switch (f) {
        case Family::Independence:
            return 0;
        case Family::StudentT:
            return 2;
        default:
            return 1;
    }
}

PairCopula make_pair_copula(FamilyTag tag, std::vector<double> parameters) {
    validate_tag(tag);
    validate_parameters(tag, parameters);
    return PairCopula{tag, std::move(parameters)};
}

double pair_log_density(const PairCopula& c, double u, double v) {
    check_unit(u, "pair_density");
    check_unit(v, "pair_density");
    return rotated_logc(c, clamp01(u), clamp01(v));
}

double pair_density(const PairCopula& c, double u, double v) {
    return std::exp(pair_log_density(c, u, v));
}

double h_function(const PairCopula& c, double u, double v) {
    check_unit(u, "h_function");
    check_unit(v, "h_function");
    return clamp01(rotated_h1(c, clamp01(u), clamp01(v)));
}

double h_function2(const PairCopula& c, double v, double u) {
    PairCopula m{FamilyTag{c.tag.family, mirror_rotation(c.tag.rotation)}, c.parameters};
    return h_function(m, v, u);
}

double h_inverse(const PairCopula& c, double w, double v) {
    check_unit(w, "h_inverse");
    check_unit(v, "h_inverse");
    return clamp01(rotated_h1_inverse(c, clamp01(w), clamp01(v)));
}

double h_inverse2(const PairCopula& c, double w, double u) {
    PairCopula m{FamilyTag{c.tag.family, mirror_rotation(c.tag.rotation)}, c.parameters};
    return h_inverse(m, w, u);
}

double pair_loglik(const PairCopula& c, std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw LengthMismatch("pair_loglik: unequal sample lengths");
    double ll = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) ll += pair_log_density(c, u[i], v[i]);
    return ll;
}

double kendall_tau(const PairCopula& c) {
    double tau = 0.0;
    switch (c.tag.family) {
        case Family::Independence:
            return 0.0;
        case Family::Gaussian:
        case Family::StudentT:
            tau = 2.0 / M_PI * std::asin(c.parameters[0]);
            break;
        case Family::Clayton:
            tau = c.parameters[0] / (c.parameters[0] + 2.0);
            break;
        case Family::Gumbel:
            tau = 1.0 - 1.0 / c.parameters[0];
            break;
        case Family::Frank:
            tau = frank_tau(c.parameters[0]);
            break;
        case Family::Joe:
            tau = joe_tau(c.parameters[0]);
            break;
    }
    if (c.tag.rotation == 90 || c.tag.rotation == 270) tau = -tau;
    return tau;
}

namespace {

long long merge_count(std::vector<double>& y, std::vector<double>& buf, std::size_t lo,
                      std::size_t hi) {
    if (hi - lo < 2) return 0;
    std::size_t mid = lo + (hi - lo) / 2;
    long long cnt = merge_count(y, buf, lo, mid) + merge_count(y, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (y[j] < y[i]) {
            cnt += static_cast<long long>(mid - i);
            buf[k++] = y[j++];
        } else {
            buf[k++] = y[i++];
        }
    }
    while (i < mid) buf[k++] = y[i++];
    while (j < hi) buf[k++] = y[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              y.begin() + static_cast<std::ptrdiff_t>(lo));
    return cnt;
}

}  // namespace

double empirical_kendall_tau(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw LengthMismatch("empirical_kendall_tau: unequal lengths");
    const std::size_t n = x.size();
    if (n < 2) throw TooFewPoints("empirical_kendall_tau: need at least 2 points");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    long long n1 = 0, n3 = 0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
            long long g = static_cast<long long>(j - i + 1);
            n1 += g * (g - 1) / 2;
            std::size_t a = i;
            while (a <= j) {
                std::size_t b = a;
                while (b + 1 <= j && y[order[b + 1]] == y[order[a]]) ++b;
                long long t = static_cast<long long>(b - a + 1);
                n3 += t * (t - 1) / 2;
                a = b + 1;
            }
            i = j + 1;
        }
    }

    std::vector<double> ys(n), buf(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
    long long swaps = merge_count(ys, buf, 0, n);

    long long n2 = 0;
    {
        std::vector<double> sy(y.begin(), y.end());
        std::sort(sy.begin(), sy.end());
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && sy[j + 1] == sy[i]) ++j;
            long long g = static_cast<long long>(j - i + 1);
            n2 += g * (g - 1) / 2;
            i = j + 1;
        }
    }

    long long n0 = static_cast<long long>(n) * (static_cast<long long>(n) - 1) / 2;
    if (n0 == n1 || n0 == n2)
        throw ConstantSample("empirical_kendall_tau: a margin is constant");
    double num = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
    double den = std::sqrt(static_cast<double>(n0 - n1)) * std::sqrt(static_cast<double>(n0 - n2));
    return std::clamp(num / den, -1.0, 1.0);
}

IndependenceTest independence_test(std::span<const double> u, std::span<const double> v,
                                   double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw OutOfRange("independence_test: alpha in (0,1)");
    const double n = static_cast<double>(u.size());
    double tau = empirical_kendall_tau(u, v);
    double stat = std::sqrt(9.0 * n * (n - 1.0) / (2.0 * (2.0 * n + 5.0))) * std::fabs(tau);
    double p = 2.0 * (1.0 - normal_cdf(stat));
    return IndependenceTest{stat, p, p > alpha};
}

namespace {

struct Derotated {
    std::vector<double> a;
    std::vector<double> b;
};

// Maps a sample so that the rotated family evaluated on (u,v) equals the
// base family evaluated on (a,b).
Derotated derotate(int rotation, std::span<const double> u, std::span<const double> v) {
    Derotated d;
    d.a.resize(u.size());
    d.b.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        double uu = clamp01(u[i]), vv = clamp01(v[i]);
        switch (rotation) {
            case 0:
                d.a[i] = uu;
                d.b[i] = vv;
                break;
            case 90:
                d.a[i] = vv;
                d.b[i] = 1.0 - uu;
                break;
            case 180:
                d.a[i] = 1.0 - uu;
                d.b[i] = 1.0 - vv;
                break;
            default:
                d.a[i] = 1.0 - vv;
                d.b[i] = uu;
                break;
        }
    }
    return d;
}

struct ThetaFit {
    double theta = 0.0;
    double loglik = -kInf;
    bool at_boundary = false;
};

ThetaFit fit_one_parameter(Family f, double lo, double hi, const Derotated& d) {
    auto negll = [&](double theta) {
        double ll = 0.0;
        switch (f) {
            case Family::Clayton:
                for (std::size_t i = 0; i < d.a.size(); ++i) ll += clayton_logc(theta, d.a[i], d.b[i]);
                break;
            case Family::Gumbel:
                for (std::size_t i = 0; i < d.a.size(); ++i) ll += gumbel_logc(theta, d.a[i], d.b[i]);
                break;
            case Family::Frank:
                if (theta == 0.0) return 0.0;
                for (std::size_t i = 0; i < d.a.size(); ++i) ll += frank_logc(theta, d.a[i], d.b[i]);
                break;
            case Family::Joe:
                for (std::size_t i = 0; i < d.a.size(); ++i) ll += joe_logc(theta, d.a[i], d.b[i]);
                break;
            default:
                throw DomainError("fit_one_parameter: unsupported family");
        }
        return std::isfinite(ll) ? -ll : kInf;
    };
    BrentResult br = brent_minimize(negll, lo, hi, 1e-7);
    ThetaFit out;
    out.theta = br.x;
    out.loglik = -br.f;
    out.at_boundary = (hi - br.x) < 1e-3 * (hi - lo) || (f == Family::Frank && (br.x - lo) < 1e-3 * (hi - lo));
    return out;
}

struct EllipticalData {
    std::vector<double> x, y;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
};

EllipticalData transform_normal(std::span<const double> u, std::span<const double> v) {
    EllipticalData e;
    e.x.resize(u.size());
    e.y.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        e.x[i] = normal_quantile(clamp01(u[i]));
        e.y[i] = normal_quantile(clamp01(v[i]));
        e.sxx += e.x[i] * e.x[i];
        e.syy += e.y[i] * e.y[i];
        e.sxy += e.x[i] * e.y[i];
    }
    return e;
}

struct StudentProfile {
    std::vector<double> aa;  // x^2 + y^2
    std::vector<double> bb;  // x y
    double sl = 0.0;         // sum log(1+x^2/nu) + log(1+y^2/nu)
};

StudentProfile transform_student(std::span<const double> u, std::span<const double> v, double nu) {
    StudentProfile s;
    s.aa.resize(u.size());
    s.bb.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        double x = students_t_quantile(clamp01(u[i]), nu);
        double y = students_t_quantile(clamp01(v[i]), nu);
        s.aa[i] = x * x + y * y;
        s.bb[i] = x * y;
        s.sl += std::log1p(x * x / nu) + std::log1p(y * y / nu);
    }
    return s;
}

double student_profile_ll(const StudentProfile& s, double nu, double rho, std::size_t n) {
    double r2 = 1.0 - rho * rho;
    double cst = std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
                 2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log(r2);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.aa.size(); ++i)
        acc += std::log1p((s.aa[i] - 2.0 * rho * s.bb[i]) / (nu * r2));
    return static_cast<double>(n) * cst - 0.5 * (nu + 2.0) * acc + 0.5 * (nu + 1.0) * s.sl;
}

struct StudentEval {
    double rho = 0.0;
    double ll = -kInf;
};

StudentEval student_best_rho(std::span<const double> u, std::span<const double> v, double nu) {
    StudentProfile s = transform_student(u, v, nu);
    const std::size_t n = u.size();
    auto neg = [&](double rho) { return -student_profile_ll(s, nu, rho, n); };
    BrentResult br = brent_minimize(neg, -0.9999, 0.9999, 1e-6);
    return StudentEval{br.x, -br.f};
}

const double kRhoBound = 0.9999;

FitResult fit_mle_checked(FamilyTag tag, std::span<const double> u, std::span<const double> v) {
    const std::size_t n = u.size();
    FitResult out;
    out.n = n;

    switch (tag.family) {
        case Family::Independence:
            out.copula = PairCopula{tag, {}};
            out.loglik = 0.0;
            return out;
        case Family::Gaussian: {
            EllipticalData e = transform_normal(u, v);
            const double dn = static_cast<double>(n);
            auto neg = [&](double rho) {
                double r2 = 1.0 - rho * rho;
                return 0.5 * dn * std::log(r2) +
                       (rho * rho * (e.sxx + e.syy) - 2.0 * rho * e.sxy) / (2.0 * r2);
            };
            BrentResult br = brent_minimize(neg, -kRhoBound, kRhoBound, 1e-9);
            out.copula = make_pair_copula(tag, {br.x});
            out.loglik = -br.f;
            out.at_boundary = std::fabs(br.x) > kRhoBound - 1e-4;
            return out;
        }
        case Family::StudentT: {
            static const double grid[] = {2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 20.0, 30.0};
            double best_nu = grid[0];
            StudentEval best = student_best_rho(u, v, grid[0]);
            std::size_t best_i = 0;
            for (std::size_t i = 1; i < std::size(grid); ++i) {
                StudentEval ev = student_best_rho(u, v, grid[i]);
                if (ev.ll > best.ll) {
                    best = ev;
                    best_nu = grid[i];
                    best_i = i;
                }
            }
            // Golden-section refinement of nu between the neighbouring grid
            // points, in log scale.
            double lo = std::log(grid[best_i == 0 ? 0 : best_i - 1]);
            double hi = std::log(grid[std::min(best_i + 1, std::size(grid) - 1)]);
            if (hi > lo) {
                const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
                double a = lo, b = hi;
                double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
                StudentEval e1 = student_best_rho(u, v, std::exp(x1));
                StudentEval e2 = student_best_rho(u, v, std::exp(x2));
                for (int it = 0; it < 10 && (b - a) > 5e-3; ++it) {
                    if (e1.ll > e2.ll) {
                        b = x2;
                        x2 = x1;
                        e2 = e1;
                        x1 = b - gr * (b - a);
                        e1 = student_best_rho(u, v, std::exp(x1));
                    } else {
                        a = x1;
                        x1 = x2;
                        e1 = e2;
                        x2 = a + gr * (b - a);
                        e2 = student_best_rho(u, v, std::exp(x2));
                    }
                }
                StudentEval er = e1.ll > e2.ll ? e1 : e2;
                double nur = std::exp(e1.ll > e2.ll ? x1 : x2);
                if (er.ll > best.ll) {
                    best = er;
                    best_nu = nur;
                }
            }
            best_nu = std::clamp(best_nu, 2.0, 30.0);
            out.copula = make_pair_copula(tag, {best.rho, best_nu});
            out.loglik = best.ll;
            out.at_boundary = std::fabs(best.rho) > kRhoBound - 1e-4 || best_nu < 2.0 + 1e-6 ||
                              best_nu > 30.0 - 1e-6;
            return out;
        }
        case Family::Frank: {
            Derotated d = derotate(0, u, v);
            ThetaFit tf = fit_one_parameter(Family::Frank, -35.0, 35.0, d);
            if (std::fabs(tf.theta) < 1e-4) {
                out.copula = PairCopula{FamilyTag{Family::Independence, 0}, {}};
                out.loglik = 0.0;
                return out;
            }
            out.copula = make_pair_copula(tag, {tf.theta});
            out.loglik = tf.loglik;
            out.at_boundary = tf.at_boundary;
            return out;
        }
        case Family::Clayton:
        case Family::Gumbel:
        case Family::Joe: {
            Derotated d = derotate(tag.rotation, u, v);
            double lo = tag.family == Family::Clayton ? 1e-4 : 1.0;
            double hi = tag.family == Family::Clayton ? 28.0 : 50.0;
            ThetaFit tf = fit_one_parameter(tag.family, lo, hi, d);
            out.copula = make_pair_copula(tag, {tf.theta});
            out.loglik = tf.loglik;
            out.at_boundary = tf.at_boundary;
            return out;
        }
    }
    throw DomainError("fit_mle: unknown family");
}

}  // namespace

FitResult fit_mle(FamilyTag tag, std::span<const double> u, std::span<const double> v) {
    validate_tag(tag);
    if (u.size() != v.size()) throw LengthMismatch("fit_mle: unequal sample lengths");
    if (u.size() < 20) throw TooFewPoints("fit_mle: need at least 20 observations");
    for (std::size_t i = 0; i < u.size(); ++i) {
        check_unit(u[i], "fit_mle");
        check_unit(v[i], "fit_mle");
    }
    return fit_mle_checked(tag, u, v);
}

std::vector<FamilyTag> default_candidates() {
    std::vector<FamilyTag> out;
    out.push_back({Family::Independence, 0});
    out.push_back({Family::Gaussian, 0});
    out.push_back({Family::StudentT, 0});
    out.push_back({Family::Frank, 0});
    for (Family f : {Family::Clayton, Family::Gumbel, Family::Joe})
        for (int rot : {0, 90, 180, 270}) out.push_back({f, rot});
    return out;
}

PairCopula select_family(std::span<const double> u, std::span<const double> v,
                         std::span<const FamilyTag> candidates, double alpha,
                         std::vector<std::string>* warnings) {
    if (candidates.empty()) throw DomainError("select_family: empty candidate list");
    if (alpha > 0.0) {
        IndependenceTest it = independence_test(u, v, alpha);
        if (it.independent) return PairCopula{FamilyTag{Family::Independence, 0}, {}};
    }
    const double logn = std::log(static_cast<double>(u.size()));
    bool have = false;
    double best_bic = kInf;
    int best_k = 0;
    PairCopula best;
    for (const FamilyTag& tag : candidates) {
        FitResult fr;
        try {
            fr = fit_mle(tag, u, v);
        } catch (const Error& e) {
            if (warnings) warnings->push_back("candidate " + to_string(tag) + " skipped: " + e.what());
            continue;
        }
        int k = parameter_count(fr.copula.tag.family);
        double bic = -2.0 * fr.loglik + static_cast<double>(k) * logn;
        bool better = !have || bic < best_bic - 1e-9 ||
                      (std::fabs(bic - best_bic) <= 1e-9 && k < best_k);
        if (better) {
            have = true;
            best_bic = bic;
            best_k = k;
            best = fr.copula;
        }
    }
    if (!have) throw SingularFit("select_family: every candidate fit failed");
    return best;
}

std::pair<std::vector<double>, std::vector<double>> simulate_pair(const PairCopula& c, std::size_t n,
                                                                  std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    auto unif = [&gen]() {
        return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
    };
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        double vv = unif();
        double ww = unif();
        v[i] = vv;
        u[i] = h_inverse(c, ww, vv);
    }
    return {std::move(u), std::move(v)};
}

}  // namespace sdi
