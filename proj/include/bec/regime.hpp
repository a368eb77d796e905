#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "bec/shape_limit.hpp"

namespace bec {

// F, V and int_E rho_bar^2 of a set E inside the support of the weight.
struct RegionValues {
    double F = 0.0;
    double V = 0.0;
    double rho2 = 0.0;

    RegionValues complement(const WeightParams& w) const { return {F, w.alpha_bar() - V, w.total_rho2() - rho2}; }
    double complement_term(const WeightParams& w) const { return w.total_rho2() - rho2; }
};

inline RegionValues star_values(const StarShape& s, const WeightParams& w, int n = shape_nodes)
{
    return {weighted_perimeter(s, w, n), weighted_volume(s, w, n), weighted_rho2(s, w, n)};
}

inline RegionValues ball_values(double r, const WeightParams& w)
{
    return {ball_perimeter(r, w), ball_volume(r, w), ball_rho2(r, w)};
}

// Disk of radius s centred at (c, 0), clipped to the support.
inline RegionValues disk_values(double c, double s, const WeightParams& w, int n = shape_nodes)
{
    w.validate();
    if (!(s > 0.0)) throw domain_error("disk_values: radius must be positive");
    const double R2 = w.R * w.R;
    const double A = R2 - c * c;
    RegionValues out;
    out.F = detail::periodic_trapezoid(
        [&](double p) {
            const double x = c + s * std::cos(p), y = s * std::sin(p);
            return std::pow(num::pos(R2 - x * x - y * y), 1.5) * s;
        },
        n);
    // rho_bar along the ray from the centre is A - B t - t^2
    double V = 0.0, Q = 0.0;
    const double dt = 2.0 * num::pi / n;
    for (int i = 0; i < n; ++i) {
        const double B = 2.0 * c * std::cos(i * dt);
        const double disc = B * B + 4.0 * A;
        if (disc <= 0.0) continue;
        const double sq = std::sqrt(disc);
        const double lo = std::max(0.0, (-B - sq) / 2.0), hi = std::min(s, (-B + sq) / 2.0);
        if (!(hi > lo)) continue;
        auto v = [&](double t) { return A * t * t / 2.0 - B * t * t * t / 3.0 - t * t * t * t / 4.0; };
        auto q = [&](double t) {
            const double t2 = t * t;
            return A * A * t2 / 2.0 - 2.0 * A * B * t2 * t / 3.0 + (B * B - 2.0 * A) * t2 * t2 / 4.0 +
                   2.0 * B * t2 * t2 * t / 5.0 + t2 * t2 * t2 / 6.0;
        };
        V += v(hi) - v(lo);
        Q += q(hi) - q(lo);
    }
    out.V = V * dt;
    out.rho2 = Q * dt;
    return out;
}

// {x_1 > d} intersected with the support.
inline RegionValues cap_values(double d, const WeightParams& w)
{
    w.validate();
    if (!(d > -w.R && d < w.R)) throw domain_error("cap_values: d must lie in (-R, R)");
    const double R2 = w.R * w.R;
    const double m2 = R2 - d * d;
    RegionValues out;
    out.F = 3.0 * num::pi / 8.0 * m2 * m2;
    out.V = num::integrate([&](double x) { return 4.0 / 3.0 * std::pow(num::pos(R2 - x * x), 1.5); }, d, w.R);
    out.rho2 = num::integrate([&](double x) { return 16.0 / 15.0 * std::pow(num::pos(R2 - x * x), 2.5); }, d, w.R);
    return out;
}

// Disk of radius s internally tangent to the boundary of the support.
inline RegionValues tangent_ball_values(double s, const WeightParams& w, int n = shape_nodes)
{
    if (!(s > 0.0 && s <= w.R)) throw domain_error("tangent_ball_values: radius must lie in (0, R]");
    return disk_values(w.R - s, s, w, n);
}

struct Competitor {
    std::string family;
    std::string label;
    bool radial = false;
    RegionValues values;
};

struct RegimeOptions {
    double sigma_K = 1.0;
    XiConvention convention = XiConvention::half;
    int fourier_modes = 6;
    std::vector<double> fourier_amplitudes{0.02, 0.05, 0.1, 0.2};
    int centers = 8;
    int annuli = 8;
    int nodes = 1024;
    std::vector<std::string> families{"ball", "annulus", "cap", "disk", "fourier"};

    bool uses(const std::string& f) const { return std::find(families.begin(), families.end(), f) != families.end(); }
};

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0.0)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

} // namespace detail

// V-matched competitor library for a target weighted volume alpha1 in (0, alpha_bar).
inline std::vector<Competitor> competitor_library(const WeightParams& w, const RegimeOptions& opt = {})
{
    w.validate_alpha();
    const double ab = w.alpha_bar(), a = w.alpha1;
    std::vector<Competitor> lib;

    // the centered ball is always present: it anchors the crossover estimate
    const double rb = ball_radius_for_volume(a, w);
    lib.push_back({"ball", "centered ball", true, ball_values(rb, w)});
    if (opt.uses("annulus"))
        lib.push_back({"annulus", "complement of centered ball", true,
                       ball_values(ball_radius_for_volume(ab - a, w), w).complement(w)});
    // B_r2 \ B_r1 with matched volume
    for (int i = 1; opt.uses("annulus") && i <= opt.annuli; ++i) {
        const double r1 = w.R * i / (opt.annuli + 1.0);
        const double v1 = ball_volume(r1, w);
        if (v1 + a >= ab) break;
        const double r2 = ball_radius_for_volume(v1 + a, w);
        const RegionValues b1 = ball_values(r1, w), b2 = ball_values(r2, w);
        lib.push_back({"annulus", detail::fmt("annulus r1=%.4g", r1), true, {b1.F + b2.F, b2.V - b1.V, b2.rho2 - b1.rho2}});
    }

    // half-plane caps; a cap's complement is again a cap
    if (opt.uses("cap")) {
        const double d = num::find_root([&](double x) { return cap_values(x, w).V - a; }, -w.R * (1 - 1e-12),
                                        w.R * (1 - 1e-12), 1e-14);
        lib.push_back({"cap", detail::fmt("cap d=%.4g", d), false, cap_values(d, w)});
    }

    // off-centre disks, possibly clipped by the support, and their complements
    for (int i = 1; opt.uses("disk") && i <= opt.centers; ++i) {
        const double c = w.R * i / opt.centers;
        for (int comp = 0; comp < 2; ++comp) {
            const double target = comp ? ab - a : a;
            auto f = [&](double s) { return disk_values(c, s, w, opt.nodes).V - target; };
            const double smax = w.R + c;
            if (f(smax) < 0.0) continue;
            const double s = num::find_root(f, 1e-9 * w.R, smax, 1e-13);
            RegionValues v = disk_values(c, s, w, opt.nodes);
            if (comp) v = v.complement(w);
            lib.push_back({comp ? "disk-complement" : "disk", detail::fmt(comp ? "complement of disk c=%.4g s=%.4g" : "disk c=%.4g s=%.4g", c, s), false, v});
        }
    }

    // V-matched Fourier perturbations of the centered ball
    for (int k = 1; opt.uses("fourier") && k <= opt.fourier_modes; ++k)
        for (double t : opt.fourier_amplitudes) {
            try {
                const StarShape s = volume_matched(StarShape::single_mode(rb, k, t), w, a, opt.nodes);
                lib.push_back({"fourier", detail::fmt("mode k=%g t=%g", k, t), false, star_values(s, w, opt.nodes)});
            } catch (const domain_error&) {
                // perturbation leaves the support
            }
        }
    return lib;
}

inline double competitor_G(const Competitor& c, const WeightParams& w, double xi, const RegimeOptions& opt)
{
    return opt.sigma_K * c.values.F + xi_coefficient(xi, opt.convention) * c.values.complement_term(w);
}

struct FamilyBest {
    std::string family;
    std::string label;
    double G = 0.0;
};

struct RegimeVerdict {
    double xi = 0.0;
    std::vector<FamilyBest> families;
    bool symmetry_broken = false;
    double best_radial = 0.0;
    double best_nonradial = 0.0;
    std::string winner;
};

inline RegimeVerdict regime_detector(const std::vector<Competitor>& lib, const WeightParams& w, double xi,
                              const RegimeOptions& opt = {})
{
    RegimeVerdict v;
    v.xi = xi;
    v.best_radial = v.best_nonradial = std::numeric_limits<double>::infinity();
    std::string wr, wn;
    for (const auto& c : lib) {
        const double G = competitor_G(c, w, xi, opt);
        auto it = std::find_if(v.families.begin(), v.families.end(), [&](const FamilyBest& f) { return f.family == c.family; });
        if (it == v.families.end())
            v.families.push_back({c.family, c.label, G});
        else if (G < it->G)
            *it = {c.family, c.label, G};
        if (c.radial && G < v.best_radial) {
            v.best_radial = G;
            wr = c.label;
        }
        if (!c.radial && G < v.best_nonradial) {
            v.best_nonradial = G;
            wn = c.label;
        }
    }
    v.symmetry_broken = v.best_nonradial < v.best_radial - 1e-12 * std::abs(v.best_radial);
    v.winner = v.symmetry_broken ? wn : wr;
    return v;
}

inline RegimeVerdict regime_detector(const WeightParams& w, double xi, const RegimeOptions& opt = {})
{
    return regime_detector(competitor_library(w, opt), w, xi, opt);
}

struct RegimeSweep {
    std::vector<RegimeVerdict> verdicts;
    bool monotone = true;   // once radial wins it keeps winning as xi grows
    double flip_xi = std::numeric_limits<double>::quiet_NaN(); // first swept xi with a radial winner
    double ball_crossover = 0.0; // largest xi at which some competitor still beats the centered ball
};

inline RegimeSweep regime_sweep(const WeightParams& w, const std::vector<double>& xis, const RegimeOptions& opt = {})
{
    const auto lib = competitor_library(w, opt);
    RegimeSweep out;
    std::vector<double> sorted = xis;
    std::sort(sorted.begin(), sorted.end());
    bool radial_seen = false;
    for (double xi : sorted) {
        out.verdicts.push_back(regime_detector(lib, w, xi, opt));
        const bool radial = !out.verdicts.back().symmetry_broken;
        if (radial && !radial_seen) out.flip_xi = xi;
        if (!radial && radial_seen) out.monotone = false;
        radial_seen = radial_seen || radial;
    }
    // exact crossing against the ball: both energies are affine in xi
    const Competitor& ball = lib.front();
    const double coef = xi_coefficient(1.0, opt.convention);
    for (const auto& c : lib) {
        const double dF = ball.values.F - c.values.F;
        const double dC = c.values.complement_term(w) - ball.values.complement_term(w);
        if (dF > 0.0 && dC > 0.0) out.ball_crossover = std::max(out.ball_crossover, opt.sigma_K * dF / (coef * dC));
        if (dF > 0.0 && dC <= 0.0) out.ball_crossover = std::numeric_limits<double>::infinity();
    }
    return out;
}

// Ratios over random V-matched perturbations of the centered ball.
struct ShapeConstants {
    int samples = 0;
    double min_gap_ratio = std::numeric_limits<double>::infinity(); // gap / symdiff^2
    double max_deficit_ratio = -std::numeric_limits<double>::infinity(); // (F(B) - F(E)) / symdiff^2
};

inline StarShape random_star(double r, std::mt19937_64& rng, int modes, double amplitude)
{
    std::uniform_int_distribution<int> pick(1, modes);
    std::uniform_real_distribution<double> u(-1.0, 1.0), mag(0.1, 1.0);
    StarShape s{r, std::vector<std::pair<double, double>>(static_cast<std::size_t>(modes) + 1, {0.0, 0.0})};
    const int main = pick(rng);
    const double scale = amplitude * mag(rng);
    for (int k = 1; k <= modes; ++k) {
        const double weight = k == main ? 1.0 : 0.3 / k;
        s.fourier[static_cast<std::size_t>(k)] = {scale * weight * u(rng), scale * weight * u(rng)};
    }
    return s;
}

inline ShapeConstants shape_constants(const WeightParams& w, int samples, std::uint64_t seed, double amplitude = 0.05,
                                      int modes = 6, int n = 1024)
{
    w.validate_alpha();
    const double rb = ball_radius_for_volume(w.alpha1, w);
    const double FB = ball_perimeter(rb, w);
    std::mt19937_64 rng(seed);
    ShapeConstants out;
    while (out.samples < samples) {
        StarShape s;
        try {
            s = volume_matched(random_star(rb, rng, modes, amplitude), w, w.alpha1, n);
        } catch (const domain_error&) {
            continue;
        }
        const StabilityGap g = volume_stability_gap(s, w, n);
        if (!(g.symdiff > 0.0)) continue;
        const double sd2 = g.symdiff * g.symdiff;
        out.min_gap_ratio = std::min(out.min_gap_ratio, g.gap / sd2);
        out.max_deficit_ratio = std::max(out.max_deficit_ratio, (FB - weighted_perimeter(s, w, n)) / sd2);
        ++out.samples;
    }
    return out;
}

} // namespace bec
