#pragma once

#include <functional>
#include <vector>

namespace sdi {

struct BrentResult {
    double x = 0.0;
    double f = 0.0;
    int evaluations = 0;
};

/// Derivative-free 1-d minimization on [lo, hi] (Brent: golden section with
/// parabolic interpolation). `tol` is an absolute tolerance on x.
BrentResult brent_minimize(const std::function<double(double)>& f, double lo, double hi,
                           double tol = 1e-8, int max_iter = 200);

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    bool converged = false;
    int evaluations = 0;
};

/// Nelder-Mead simplex minimization from `start` with initial step `step`
/// per coordinate. Converged when the simplex function spread falls below
/// `ftol` (absolute plus relative).
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, double step = 0.1, double ftol = 1e-10,
                             int max_iter = 0);

/// Solves Ax = b by Gaussian elimination with partial pivoting. `a` is
/// row-major n*n and is consumed. Throws SingularFit when the pivot
/// collapses. Intended for small systems.
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b);

}  // namespace sdi
