#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "bec/errors.hpp"

namespace bec::num {

inline constexpr double pi = 3.14159265358979323846;

template <class T>
constexpr T sqr(T x) { return x * x; }

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

// Bracketed root of f on [a, b]; f(a) and f(b) must differ in sign.
template <class F>
double find_root(F f, double a, double b, double xtol = 1e-15)
{
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0))
        throw domain_error("find_root: interval does not bracket a root");
    auto tol = [xtol](double lo, double hi) { return std::abs(hi - lo) <= xtol * std::max(1.0, std::abs(lo)); };
    std::uintmax_t iters = 200;
    auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    return 0.5 * (lo + hi);
}

// Local minimum of f on [a, b]; returns (argmin, min).
template <class F>
std::pair<double, double> minimize_scalar(F f, double a, double b)
{
    std::uintmax_t iters = 500;
    return boost::math::tools::brent_find_minima(f, a, b, std::numeric_limits<double>::digits / 2, iters);
}

// Adaptive Gauss-Kronrod on [a, b].
template <class F>
double integrate(F f, double a, double b, double rtol = 1e-12)
{
    if (a == b) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 10, rtol, &err);
}

} // namespace bec::num
