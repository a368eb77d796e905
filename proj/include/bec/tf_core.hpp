#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "bec/errors.hpp"
#include "bec/numerics.hpp"

namespace bec {

struct TFParams {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double g = 1.0;
    double K = 0.0;
};

struct TFProfile {
    double r0 = 0.0;
    double r1 = 0.0;
    double R1 = 0.0;
    double R2 = 0.0;
    double E0 = 0.0;
    double sigma_plus = 0.0;
    double sigma_minus = 0.0;
};

// Closed-form minimal energy; also meaningful at g = 1 where no profile is built.
inline double tf_minimal_energy(double alpha1, double alpha2, double g)
{
    using std::pow, std::sqrt;
    return 2.0 / 3.0 * sqrt(2.0 / num::pi) *
           (pow(alpha1 + alpha2, 1.5) + (sqrt(g) - 1.0) * pow(alpha2, 1.5));
}

inline TFProfile tf_profile(const TFParams& p)
{
    using std::sqrt;
    if (!(p.alpha1 > 0.0)) throw domain_error("tf_profile: alpha1 must be positive");
    if (!(p.alpha2 >= 0.0)) throw domain_error("tf_profile: alpha2 must be nonnegative");
    if (!(p.g > 1.0)) throw domain_error("tf_profile: requires g > 1");
    if (!(p.K >= sqrt(p.g))) throw domain_error("tf_profile: requires K >= sqrt(g)");

    TFProfile t;
    t.r1 = std::pow(2.0 * p.alpha1 / num::pi, 0.25);
    const double a = p.alpha2 / p.alpha1;
    // sqrt(1+a) - sqrt(a) without cancellation
    const double t0 = 1.0 / (sqrt(1.0 + a) + sqrt(a));
    t.r0 = t.r1 * sqrt(t0);
    const double r0sq = t.r0 * t.r0;
    t.R1 = sqrt(0.5 * r0sq + std::pow(t.r1, 4) / (2.0 * r0sq));
    t.R2 = sqrt(r0sq + sqrt(2.0 * p.g * p.alpha2 / num::pi));
    t.E0 = tf_minimal_energy(p.alpha1, p.alpha2, p.g);
    t.sigma_plus = t.R1 * t.R1 - r0sq;
    t.sigma_minus = (t.R2 * t.R2 - r0sq) / p.g;
    return t;
}

struct RadialPair {
    TFProfile profile;
    double g = 1.0;

    std::pair<double, double> operator()(double r) const
    {
        const double rr = r * r;
        const double rho1 = r < profile.r0 ? num::pos(profile.R1 * profile.R1 - rr) : 0.0;
        const double rho2 = r > profile.r0 ? num::pos(profile.R2 * profile.R2 - rr) / g : 0.0;
        return {rho1, rho2};
    }
};

inline RadialPair tf_density(const TFProfile& profile, const TFParams& p)
{
    return RadialPair{profile, p.g};
}

// Composite midpoint rule in r with weights 2*pi*r*dr. Breakpoints split the
// panels so that jumps of the integrand fall on cell edges.
struct RadialRule {
    std::vector<double> r;
    std::vector<double> w;
    std::size_t size() const { return r.size(); }
};

inline RadialRule radial_rule(double rmax, double h, std::vector<double> breaks = {})
{
    if (!(rmax > 0.0) || !(h > 0.0)) throw domain_error("radial_rule: rmax and h must be positive");
    breaks.push_back(0.0);
    breaks.push_back(rmax);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [rmax](double b) { return b < 0.0 || b > rmax; }),
                 breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    RadialRule rule;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i], b = breaks[i + 1];
        if (b - a <= 0.0) continue;
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / h)));
        const double dh = (b - a) / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double rm = a + (static_cast<double>(j) + 0.5) * dh;
            rule.r.push_back(rm);
            rule.w.push_back(2.0 * num::pi * rm * dh);
        }
    }
    return rule;
}

// Default rule for a profile: [0, R2+1], step R2/4096, breaks at r0 and R2.
inline RadialRule tf_rule(const TFProfile& t, double h = 0.0)
{
    if (h <= 0.0) h = t.R2 / 4096.0;
    return radial_rule(t.R2 + 1.0, h, {t.r0, t.R2});
}

struct RadialSamples {
    std::vector<double> rho1;
    std::vector<double> rho2;
};

inline RadialSamples sample(const RadialPair& pair, const RadialRule& rule)
{
    RadialSamples s;
    s.rho1.resize(rule.size());
    s.rho2.resize(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) std::tie(s.rho1[i], s.rho2[i]) = pair(rule.r[i]);
    return s;
}

inline double tf_integrand(double rho1, double rho2, double r, const TFParams& p)
{
    return 0.5 * rho1 * rho1 + 0.5 * p.g * rho2 * rho2 + p.K * rho1 * rho2 + (rho1 + rho2) * r * r;
}

inline double tf_energy(const RadialSamples& s, const RadialRule& rule, const TFParams& p)
{
    if (s.rho1.size() != rule.size() || s.rho2.size() != rule.size())
        throw precondition_error("tf_energy: samples do not match the rule");
    double e = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        if (s.rho1[i] < 0.0 || s.rho2[i] < 0.0) throw domain_error("tf_energy: negative density sample");
        e += rule.w[i] * tf_integrand(s.rho1[i], s.rho2[i], rule.r[i], p);
    }
    return e;
}

inline double tf_energy(const RadialPair& pair, const TFParams& p, const RadialRule& rule)
{
    return tf_energy(sample(pair, rule), rule, p);
}

inline std::pair<double, double> radial_mass(const RadialSamples& s, const RadialRule& rule)
{
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        m1 += rule.w[i] * s.rho1[i];
        m2 += rule.w[i] * s.rho2[i];
    }
    return {m1, m2};
}

// Objective in t = (r/r1)^2 whose minimizer fixes the interface radius.
inline double interior_objective(double t, const TFParams& p)
{
    if (!(t > 0.0)) throw domain_error("interior_objective: t must be positive");
    const double r1sq = std::sqrt(2.0 * p.alpha1 / num::pi);
    const double r16 = r1sq * r1sq * r1sq;
    if (t < 1.0) return num::pi / 24.0 * r16 * (6.0 * t + 3.0 / t - t * t * t) + p.alpha2 * r1sq * t;
    return num::pi / 3.0 * r16 + p.alpha2 * r1sq * t;
}

struct StabilityMeasure {
    double l1 = 0.0;     // |d rho|_1 summed over both components
    double dE = 0.0;     // E(rho0 + d rho) - E0 on the same rule
    double ratio = 0.0;  // l1^2 / dE
    double linear = 0.0; // l1 / dE
};

inline StabilityMeasure stability_measure(const RadialSamples& delta, const TFParams& p, const RadialRule& rule,
                                          double mass_tol = 1e-9)
{
    const RadialSamples base = sample(tf_density(tf_profile(p), p), rule);
    if (delta.rho1.size() != rule.size() || delta.rho2.size() != rule.size())
        throw precondition_error("stability_ratio: perturbation does not match the rule");

    StabilityMeasure m;
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double a = base.rho1[i] + delta.rho1[i], b = base.rho2[i] + delta.rho2[i];
        if (a < -1e-13 || b < -1e-13) throw precondition_error("stability_ratio: rho0 + delta is negative");
        m1 += rule.w[i] * delta.rho1[i];
        m2 += rule.w[i] * delta.rho2[i];
        m.l1 += rule.w[i] * (std::abs(delta.rho1[i]) + std::abs(delta.rho2[i]));
        m.dE += rule.w[i] * (tf_integrand(std::max(a, 0.0), std::max(b, 0.0), rule.r[i], p) -
                             tf_integrand(base.rho1[i], base.rho2[i], rule.r[i], p));
    }
    if (std::abs(m1) > mass_tol * p.alpha1 || std::abs(m2) > mass_tol * std::max(p.alpha2, 1e-300))
        throw precondition_error("stability_ratio: perturbation changes the masses");
    if (m.l1 == 0.0) return m;
    if (!(m.dE > 0.0)) throw solver_error("stability_ratio: nonpositive energy increase (quadrature failure)", {m.dE});
    m.ratio = m.l1 * m.l1 / m.dE;
    m.linear = m.l1 / m.dE;
    return m;
}

inline double stability_ratio(const RadialSamples& delta, const TFParams& p, const RadialRule& rule)
{
    return stability_measure(delta, p, rule).ratio;
}

// Perturbation families for the stability harness. All are mass-neutral with
// respect to the rule they are built on.
namespace perturb {

inline double window_mass(const std::vector<double>& f, const RadialRule& rule, double a, double b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        if (rule.r[i] > a && rule.r[i] < b) m += rule.w[i] * f[i];
    return m;
}

inline double window_area(const RadialRule& rule, double a, double b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        if (rule.r[i] > a && rule.r[i] < b) m += rule.w[i];
    return m;
}

// Remove the fraction s of component `which` on (a, b) and spread the same
// mass uniformly over (c, d).
inline RadialSamples annular_transfer(const TFParams& p, const RadialRule& rule, int which, double s, double a,
                                      double b, double c, double d)
{
    const RadialSamples base = sample(tf_density(tf_profile(p), p), rule);
    const std::vector<double>& rho = which == 1 ? base.rho1 : base.rho2;
    std::vector<double> dr(rule.size(), 0.0);
    for (std::size_t i = 0; i < rule.size(); ++i)
        if (rule.r[i] > a && rule.r[i] < b) dr[i] -= s * rho[i];
    const double removed = -window_mass(dr, rule, a, b);
    const double area = window_area(rule, c, d);
    if (area <= 0.0) throw precondition_error("annular_transfer: empty target annulus");
    for (std::size_t i = 0; i < rule.size(); ++i)
        if (rule.r[i] > c && rule.r[i] < d) dr[i] += removed / area;

    RadialSamples out;
    out.rho1.assign(rule.size(), 0.0);
    out.rho2.assign(rule.size(), 0.0);
    (which == 1 ? out.rho1 : out.rho2) = std::move(dr);
    return out;
}

// Exchange the two components in a band of width w on each side of r0.
inline RadialSamples boundary_swap(const TFParams& p, const RadialRule& rule, double w)
{
    const TFProfile t = tf_profile(p);
    const RadialSamples base = sample(tf_density(t, p), rule);
    RadialSamples out;
    out.rho1.assign(rule.size(), 0.0);
    out.rho2.assign(rule.size(), 0.0);
    const double lo = t.r0 - w, hi = t.r0 + w;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        if (rule.r[i] > lo && rule.r[i] < t.r0) out.rho1[i] = -base.rho1[i];
        if (rule.r[i] > t.r0 && rule.r[i] < hi) out.rho2[i] = -base.rho2[i];
    }
    const double q1 = -window_mass(out.rho1, rule, lo, t.r0) / window_area(rule, t.r0, hi);
    const double q2 = -window_mass(out.rho2, rule, t.r0, hi) / window_area(rule, lo, t.r0);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        if (rule.r[i] > t.r0 && rule.r[i] < hi) out.rho1[i] = q1;
        if (rule.r[i] > lo && rule.r[i] < t.r0) out.rho2[i] = q2;
    }
    return out;
}

// rho_i^0 * b_i(r) with a random cosine series b_i, projected to zero mass.
inline RadialSamples random_bump(const TFParams& p, const RadialRule& rule, std::mt19937_64& rng, double amplitude,
                                 int modes = 6)
{
    const TFProfile t = tf_profile(p);
    const RadialSamples base = sample(tf_density(t, p), rule);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RadialSamples out;
    for (int which = 1; which <= 2; ++which) {
        const std::vector<double>& rho = which == 1 ? base.rho1 : base.rho2;
        std::vector<double> c(static_cast<std::size_t>(modes));
        double norm = 0.0;
        for (auto& ci : c) {
            ci = u(rng);
            norm += std::abs(ci);
        }
        std::vector<double> d(rule.size());
        for (std::size_t i = 0; i < rule.size(); ++i) {
            double b = 0.0;
            for (int k = 0; k < modes; ++k)
                b += c[static_cast<std::size_t>(k)] * std::cos((k + 1) * num::pi * rule.r[i] / t.R2);
            d[i] = amplitude * b / norm * rho[i];
        }
        double md = 0.0, mr = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            md += rule.w[i] * d[i];
            mr += rule.w[i] * rho[i];
        }
        if (mr > 0.0)
            for (std::size_t i = 0; i < rule.size(); ++i) d[i] -= md / mr * rho[i];
        (which == 1 ? out.rho1 : out.rho2) = std::move(d);
    }
    return out;
}

} // namespace perturb

struct StabilitySummary {
    double sup_annular = 0.0;
    double sup_swap = 0.0;
    double sup_random = 0.0;
    std::vector<double> swap_widths;
    std::vector<double> swap_ratio;  // squared ratio along the swap family
    std::vector<double> swap_linear; // linear ratio along the swap family
    double sup() const { return std::max({sup_annular, sup_swap, sup_random}); }
};

inline StabilitySummary stability_sweep(const TFParams& p, std::uint64_t seed, int n_random = 50, double h = 0.0)
{
    const TFProfile t = tf_profile(p);
    StabilitySummary s;
    for (double w : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
        const double width = w * t.r0;
        const RadialRule rule =
            radial_rule(t.R2 + 1.0, h > 0.0 ? h : t.R2 / 4096.0, {t.r0 - width, t.r0, t.r0 + width, t.R2});
        const auto m = stability_measure(perturb::boundary_swap(p, rule, width), p, rule);
        s.swap_widths.push_back(width);
        s.swap_ratio.push_back(m.ratio);
        s.swap_linear.push_back(m.linear);
        s.sup_swap = std::max(s.sup_swap, m.ratio);
    }

    const RadialRule rule = tf_rule(t, h);
    for (double frac : {0.05, 0.2, 0.5}) {
        for (double a : {0.0, 0.3, 0.6}) {
            const double lo = a * t.r0, hi = lo + 0.3 * t.r0;
            auto d = perturb::annular_transfer(p, rule, 1, frac, lo, hi, 0.0, t.r0);
            s.sup_annular = std::max(s.sup_annular, stability_ratio(d, p, rule));
            const double lo2 = t.r0 + a * (t.R2 - t.r0), hi2 = lo2 + 0.3 * (t.R2 - t.r0);
            auto d2 = perturb::annular_transfer(p, rule, 2, frac, lo2, hi2, t.r0, t.R2);
            s.sup_annular = std::max(s.sup_annular, stability_ratio(d2, p, rule));
        }
    }

    std::mt19937_64 rng(seed);
    for (int i = 0; i < n_random; ++i) {
        const double amp = 0.5 * std::pow(10.0, -3.0 * i / std::max(1, n_random - 1));
        auto d = perturb::random_bump(p, rule, rng, amp);
        s.sup_random = std::max(s.sup_random, stability_ratio(d, p, rule));
    }
    return s;
}

} // namespace bec
