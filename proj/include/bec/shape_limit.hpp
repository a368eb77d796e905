#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "bec/errors.hpp"
#include "bec/numerics.hpp"

namespace bec {

// Weight rho_bar(x) = (R^2 - |x|^2)_+ and a target weighted volume.
struct WeightParams {
    double R = 1.0;
    double alpha1 = 0.0;

    double alpha_bar() const { return num::pi * R * R * R * R / 2.0; }
    double rho(double r) const { return num::pos(R * R - r * r); }
    double total_rho2() const { return num::pi * std::pow(R, 6) / 3.0; }

    void validate() const
    {
        if (!(R > 1.0)) throw domain_error("WeightParams: R must exceed 1");
    }

    void validate_alpha() const
    {
        validate();
        if (!(alpha1 > 0.0 && alpha1 < alpha_bar())) throw domain_error("WeightParams: alpha1 outside (0, alpha_bar)");
    }
};

// Closed forms for centered balls B_r, r <= R.
inline double ball_volume(double r, const WeightParams& w)
{
    r = std::min(r, w.R);
    return num::pi * (w.R * w.R * r * r - r * r * r * r / 2.0);
}

inline double ball_perimeter(double r, const WeightParams& w)
{
    return 2.0 * num::pi * r * std::pow(w.rho(r), 1.5);
}

inline double ball_rho2(double r, const WeightParams& w)
{
    r = std::min(r, w.R);
    const double q = w.R * w.R - r * r;
    return num::pi * (std::pow(w.R, 6) - q * q * q) / 3.0;
}

inline double ball_radius_for_volume(double alpha, const WeightParams& w)
{
    const double ab = w.alpha_bar();
    if (!(alpha > 0.0 && alpha < ab)) throw domain_error("ball_radius_for_volume: alpha outside (0, alpha_bar)");
    // r^2 = R^2 - sqrt(R^4 - 2 alpha / pi), rationalized to avoid cancellation for small alpha
    const double a = 2.0 * alpha / num::pi;
    const double R2 = w.R * w.R;
    return std::sqrt(a / (R2 + std::sqrt(R2 * R2 - a)));
}

// r(theta) = r_b (1 + u(theta)), u = sum_k a_k cos k theta + b_k sin k theta.
struct StarShape {
    double base_radius = 1.0;
    std::vector<std::pair<double, double>> fourier; // index k holds (a_k, b_k)

    static StarShape ball(double r) { return StarShape{r, {{0.0, 0.0}}}; }

    static StarShape single_mode(double r, int k, double t)
    {
        StarShape s{r, std::vector<std::pair<double, double>>(static_cast<std::size_t>(k) + 1, {0.0, 0.0})};
        s.fourier[static_cast<std::size_t>(k)].first = t;
        return s;
    }

    double u(double th) const
    {
        double s = 0.0;
        for (std::size_t k = 0; k < fourier.size(); ++k)
            s += fourier[k].first * std::cos(k * th) + fourier[k].second * std::sin(k * th);
        return s;
    }

    double du(double th) const
    {
        double s = 0.0;
        for (std::size_t k = 1; k < fourier.size(); ++k)
            s += k * (-fourier[k].first * std::sin(k * th) + fourier[k].second * std::cos(k * th));
        return s;
    }

    double r(double th) const { return base_radius * (1.0 + u(th)); }
    double dr(double th) const { return base_radius * du(th); }
};

struct ShapeReport {
    double F_value = 0.0;
    double V_value = 0.0;
    double complement_term = 0.0;
    double G_value = 0.0;
};

// Coefficient in front of the complement integral: xi/2 or xi.
enum class XiConvention { half, full };

inline double xi_coefficient(double xi, XiConvention c) { return c == XiConvention::half ? 0.5 * xi : xi; }

inline constexpr int shape_nodes = 4096;

namespace detail {

template <class F>
double periodic_trapezoid(F f, int n)
{
    double s = 0.0;
    const double dt = 2.0 * num::pi / n;
    for (int i = 0; i < n; ++i) s += f(i * dt);
    return s * dt;
}

inline void check_shape(const StarShape& s, const WeightParams& w, int n)
{
    w.validate();
    if (!(s.base_radius > 0.0)) throw domain_error("StarShape: base radius must be positive");
    const double dt = 2.0 * num::pi / n;
    for (int i = 0; i < n; ++i) {
        const double th = i * dt;
        if (!(1.0 + s.u(th) > 0.0)) throw domain_error("StarShape: 1 + u must stay positive");
        if (!(s.r(th) < w.R)) throw domain_error("StarShape: boundary leaves the support of the weight");
    }
}

} // namespace detail

inline double weighted_perimeter(const StarShape& s, const WeightParams& w, int n = shape_nodes)
{
    detail::check_shape(s, w, n);
    return detail::periodic_trapezoid(
        [&](double th) {
            const double r = s.r(th), d = s.dr(th);
            return std::pow(w.rho(r), 1.5) * std::sqrt(r * r + d * d);
        },
        n);
}

inline double weighted_volume(const StarShape& s, const WeightParams& w, int n = shape_nodes)
{
    detail::check_shape(s, w, n);
    const double R2 = w.R * w.R;
    return detail::periodic_trapezoid(
        [&](double th) {
            const double r2 = s.r(th) * s.r(th);
            return R2 * r2 / 2.0 - r2 * r2 / 4.0;
        },
        n);
}

// int_E rho_bar^2
inline double weighted_rho2(const StarShape& s, const WeightParams& w, int n = shape_nodes)
{
    detail::check_shape(s, w, n);
    const double R2 = w.R * w.R, R6 = R2 * R2 * R2;
    return detail::periodic_trapezoid(
        [&](double th) {
            const double q = R2 - s.r(th) * s.r(th);
            return (R6 - q * q * q) / 6.0;
        },
        n);
}

inline ShapeReport g_xi(const StarShape& s, const WeightParams& w, double xi, double sigma_K,
                        XiConvention conv = XiConvention::half, int n = shape_nodes)
{
    ShapeReport rep;
    rep.F_value = weighted_perimeter(s, w, n);
    rep.V_value = weighted_volume(s, w, n);
    rep.complement_term = w.total_rho2() - weighted_rho2(s, w, n);
    rep.G_value = sigma_K * rep.F_value + xi_coefficient(xi, conv) * rep.complement_term;
    return rep;
}

// Shift the k = 0 coefficient so that the weighted volume equals `target`.
inline StarShape volume_matched(StarShape s, const WeightParams& w, double target, int n = shape_nodes)
{
    if (!(target > 0.0 && target < w.alpha_bar())) throw domain_error("volume_matched: target outside (0, alpha_bar)");
    if (s.fourier.empty()) s.fourier.push_back({0.0, 0.0});
    // admissible a0 range: keep 1 + u > 0 and r < R
    double umin = 1e300, umax = -1e300;
    const double dt = 2.0 * num::pi / n;
    StarShape z = s;
    z.fourier[0].first = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = z.u(i * dt);
        umin = std::min(umin, v);
        umax = std::max(umax, v);
    }
    const double lo = -1.0 - umin + 1e-12, hi = w.R / s.base_radius - 1.0 - umax - 1e-12;
    if (!(lo < hi)) throw domain_error("volume_matched: perturbation too large for the support");
    auto f = [&](double a0) {
        z.fourier[0].first = a0;
        return weighted_volume(z, w, n) - target;
    };
    z.fourier[0].first = num::find_root(f, lo, hi, 1e-15);
    return z;
}

struct StabilityGap {
    double gap = 0.0;     // int_{E^c} rho^2 - int_{B^c} rho^2, B the centered ball of equal V
    double symdiff = 0.0; // int_{E delta B} rho
    double ball_radius = 0.0;
};

inline StabilityGap volume_stability_gap(const StarShape& s, const WeightParams& w, int n = shape_nodes)
{
    const double V = weighted_volume(s, w, n);
    StabilityGap out;
    out.ball_radius = ball_radius_for_volume(V, w);
    out.gap = ball_rho2(out.ball_radius, w) - weighted_rho2(s, w, n);
    const double R2 = w.R * w.R;
    auto P = [&](double r) { return R2 * r * r / 2.0 - r * r * r * r / 4.0; };
    const double pm = P(out.ball_radius);
    out.symdiff = detail::periodic_trapezoid([&](double th) { return std::abs(P(s.r(th)) - pm); }, n);
    return out;
}

inline double mode_coefficient(double R, int k)
{
    if (k < 0) throw domain_error("mode_coefficient: k must be nonnegative");
    const double R2 = R * R;
    if (R2 == 1.0) throw domain_error("mode_coefficient: undefined at R = 1");
    return static_cast<double>(k) * k - R2 * (2.0 + R2) / ((R2 - 1.0) * (R2 - 1.0));
}

inline double mode_coefficient(const WeightParams& w, int k) { return mode_coefficient(w.R, k); }

// Radii where mode_coefficient(., k) changes sign, k >= 2: R^2 = ((k^2+1) -+ sqrt(3k^2+1)) / (k^2-1).
inline std::pair<double, double> mode_threshold_radii(int k)
{
    if (k < 2) throw domain_error("mode_threshold_radii: needs k >= 2");
    const double k2 = static_cast<double>(k) * k;
    const double d = std::sqrt(3.0 * k2 + 1.0);
    return {std::sqrt((k2 + 1.0 - d) / (k2 - 1.0)), std::sqrt((k2 + 1.0 + d) / (k2 - 1.0))};
}

// Second-order prediction of F(E) - F(B) for r = 1 + u around the unit ball.
inline double fuglede_form(const WeightParams& w, const StarShape& s)
{
    if (!(w.R > 1.0)) throw domain_error("fuglede_form: needs R > 1");
    if (std::abs(s.base_radius - 1.0) > 1e-14) throw domain_error("fuglede_form: base radius must be 1");
    double grad2 = 0.0, u2 = 0.0;
    for (std::size_t k = 0; k < s.fourier.size(); ++k) {
        const double c2 = s.fourier[k].first * s.fourier[k].first + s.fourier[k].second * s.fourier[k].second;
        const double w_k = k == 0 ? 2.0 * num::pi : num::pi;
        u2 += w_k * (k == 0 ? s.fourier[0].first * s.fourier[0].first : c2);
        grad2 += num::pi * static_cast<double>(k) * k * c2;
    }
    const double R2 = w.R * w.R;
    const double c = R2 * (2.0 + R2) / ((R2 - 1.0) * (R2 - 1.0));
    return std::pow(R2 - 1.0, 1.5) * 0.5 * (grad2 - c * u2);
}

inline double isoperimetric_ratio(double F, double V, const WeightParams& w)
{
    if (!(V > 0.0 && V <= w.alpha_bar() / 2.0 * (1.0 + 1e-12)))
        throw domain_error("isoperimetric_ratio: requires 0 < V <= alpha_bar / 2");
    return F / std::pow(V, 5.0 / 6.0);
}

inline double isoperimetric_ratio(const StarShape& s, const WeightParams& w, int n = shape_nodes)
{
    return isoperimetric_ratio(weighted_perimeter(s, w, n), weighted_volume(s, w, n), w);
}

// Smallest Lambda with int u^2 <= delta int u'^2 + Lambda (int |u|)^2 over the given samples.
inline double poincare_constant(const std::vector<StarShape>& samples, double delta, int n = shape_nodes)
{
    double lam = 0.0;
    for (const auto& s : samples) {
        const double u2 = detail::periodic_trapezoid([&](double t) { return s.u(t) * s.u(t); }, n);
        const double du2 = detail::periodic_trapezoid([&](double t) { return s.du(t) * s.du(t); }, n);
        const double u1 = detail::periodic_trapezoid([&](double t) { return std::abs(s.u(t)); }, n);
        if (u1 > 0.0) lam = std::max(lam, (u2 - delta * du2) / (u1 * u1));
    }
    return lam;
}

} // namespace bec
