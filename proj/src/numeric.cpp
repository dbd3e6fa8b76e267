#include "sdi/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "sdi/errors.hpp"

namespace sdi {

BrentResult brent_minimize(const std::function<double(double)>& f, double lo, double hi, double tol,
                           int max_iter) {
    if (!(lo < hi)) throw DomainError("brent_minimize: empty interval");
    const double gold = 0.5 * (3.0 - std::sqrt(5.0));
    double a = lo, b = hi;
    double x = a + gold * (b - a);
    double w = x, v = x;
    int evals = 0;
    auto eval = [&](double t) {
        ++evals;
        return f(t);
    };
    double fx = eval(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        double m = 0.5 * (a + b);
        double tol1 = tol + 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(x);
        double tol2 = 2.0 * tol1;
        if (std::fabs(x - m) <= tol2 - 0.5 * (b - a)) break;
        bool parabolic = false;
        if (std::fabs(e) > tol1) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::fabs(q);
            double e_old = e;
            e = d;
            if (std::fabs(p) < std::fabs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol1 : -tol1;
                parabolic = true;
            }
        }
        if (!parabolic) {
            e = (x < m) ? b - x : a - x;
            d = gold * e;
        }
        double u = (std::fabs(d) >= tol1) ? x + d : x + (d > 0.0 ? tol1 : -tol1);
        double fu = eval(u);
        if (fu <= fx) {
            if (u < x)
                b = x;
            else
                a = x;
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if (u < x)
                a = u;
            else
                b = u;
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }
    return BrentResult{x, fx, evals};
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, double step, double ftol, int max_iter) {
    const std::size_t n = start.size();
    if (n == 0) throw DomainError("nelder_mead: empty start point");
    if (max_iter <= 0) max_iter = 500 * static_cast<int>(n);

    std::vector<std::vector<double>> pts(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    std::vector<double> fv(n + 1);
    int evals = 0;
    auto eval = [&](const std::vector<double>& p) {
        ++evals;
        double v = f(p);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(pts[i]);

    bool converged = false;
    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<std::size_t> ord(n + 1);
        for (std::size_t i = 0; i <= n; ++i) ord[i] = i;
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::size_t lo = ord[0], hi = ord[n], nh = ord[n - 1];

        if (std::fabs(fv[hi] - fv[lo]) <= ftol * (std::fabs(fv[lo]) + 1.0)) {
            converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == hi) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j];
        }
        for (std::size_t j = 0; j < n; ++j) centroid[j] /= static_cast<double>(n);

        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (pts[hi][j] - centroid[j]);
            return p;
        };

        std::vector<double> refl = blend(-1.0);
        double frefl = eval(refl);
        if (frefl < fv[lo]) {
            std::vector<double> expd = blend(-2.0);
            double fexpd = eval(expd);
            if (fexpd < frefl) {
                pts[hi] = std::move(expd);
                fv[hi] = fexpd;
            } else {
                pts[hi] = std::move(refl);
                fv[hi] = frefl;
            }
        } else if (frefl < fv[nh]) {
            pts[hi] = std::move(refl);
            fv[hi] = frefl;
        } else {
            std::vector<double> ctr = blend(frefl < fv[hi] ? -0.5 : 0.5);
            double fctr = eval(ctr);
            if (fctr < std::min(frefl, fv[hi])) {
                pts[hi] = std::move(ctr);
                fv[hi] = fctr;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == lo) continue;
                    for (std::size_t j = 0; j < n; ++j)
                        pts[i][j] = pts[lo][j] + 0.5 * (pts[i][j] - pts[lo][j]);
                    fv[i] = eval(pts[i]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fv[i] < fv[best]) best = i;
    return NelderMeadResult{pts[best], fv[best], converged, evals};
}

std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    if (a.size() != n * n) throw LengthMismatch("solve_linear: matrix/vector size mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        if (std::fabs(a[piv * n + col]) < 1e-300) throw SingularFit("solve_linear: singular matrix");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[piv * n + j], a[col * n + j]);
            std::swap(b[piv], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            double m = a[r * n + col] / a[col * n + col];
            if (m == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a[r * n + j] -= m * a[col * n + j];
            b[r] -= m * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t j = ri + 1; j < n; ++j) s -= a[ri * n + j] * x[j];
        x[ri] = s / a[ri * n + ri];
    }
    return x;
}

}  // namespace sdi
