#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bec/tf_core.hpp"
#include "oracles.hpp"

using namespace bec;

namespace {

TFParams example() { return {oracle::pi / 2, oracle::pi / 2, 4.0, 2.0}; }

// Exact energy of a piecewise-polynomial radial pair, by Simpson on each smooth piece.
double exact_energy(const TFParams& p, const TFProfile& t)
{
    auto e = [&](double r) {
        auto [a, b] = tf_density(t, p)(r);
        return 2 * oracle::pi * r * tf_integrand(a, b, r, p);
    };
    return oracle::simpson(e, 0.0, t.r0 * (1 - 1e-15), 4000) + oracle::simpson(e, t.r0 * (1 + 1e-15), t.R2, 4000);
}

} // namespace

TEST(TfProfile, WorkedExample)
{
    const TFProfile t = tf_profile(example());
    EXPECT_NEAR(t.r1, 1.0, 1e-14);
    EXPECT_NEAR(t.r0, std::sqrt(std::sqrt(2.0) - 1.0), 1e-14);
    EXPECT_NEAR(t.R1, std::pow(2.0, 0.25), 1e-14);
    EXPECT_NEAR(t.R2, std::sqrt(std::sqrt(2.0) + 1.0), 1e-14);
    EXPECT_NEAR(t.sigma_plus, 1.0, 1e-14);
    EXPECT_NEAR(t.sigma_minus, 0.5, 1e-14);
    EXPECT_NEAR(t.E0, 2.0 / 3.0 * oracle::pi * (std::sqrt(2.0) + 0.5), 1e-13);
    EXPECT_NEAR(t.r0, 0.64359, 1e-5);
    EXPECT_NEAR(t.R2, 1.55377, 1e-5);
}

TEST(TfProfile, Limits)
{
    TFParams p{1.3, 0.0, 2.0, 3.0};
    const TFProfile t = tf_profile(p);
    EXPECT_DOUBLE_EQ(t.r0, t.r1);
    EXPECT_NEAR(t.E0, 2.0 / 3.0 * std::sqrt(2.0 / oracle::pi) * std::pow(1.3, 1.5), 1e-14);
    EXPECT_NEAR(tf_minimal_energy(0.7, 0.4, 1.0), 2.0 / 3.0 * std::sqrt(2.0 / oracle::pi) * std::pow(1.1, 1.5), 1e-14);
}

TEST(TfProfile, RejectsHypothesisViolations)
{
    EXPECT_THROW(tf_profile({1.0, 1.0, 1.0, 2.0}), bec::domain_error);
    EXPECT_THROW(tf_profile({1.0, 1.0, 4.0, 1.9}), bec::domain_error);
    EXPECT_THROW(tf_profile({0.0, 1.0, 4.0, 3.0}), bec::domain_error);
    EXPECT_NO_THROW(tf_profile({1.0, 1.0, 4.0, 2.0}));
}

TEST(TfProfile, OrderingInvariants)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ua(0.1, 5.0), ug(1.01, 9.0);
    for (int i = 0; i < 200; ++i) {
        TFParams p{ua(rng), ua(rng), ug(rng), 0.0};
        p.K = std::sqrt(p.g) * 1.5;
        const TFProfile t = tf_profile(p);
        EXPECT_GT(t.r0, 0.0);
        EXPECT_LT(t.r0, t.r1);
        EXPECT_LT(t.r0, t.R1);
        EXPECT_LT(t.R1, t.R2);
        EXPECT_NEAR(t.sigma_plus / t.sigma_minus, std::sqrt(p.g), 4e-15 * std::sqrt(p.g));
    }
}

TEST(TfDensity, PointValues)
{
    const TFParams p = example();
    const TFProfile t = tf_profile(p);
    const RadialPair rho = tf_density(t, p);
    EXPECT_DOUBLE_EQ(rho(0.0).first, t.R1 * t.R1);
    EXPECT_DOUBLE_EQ(rho(0.0).second, 0.0);
    EXPECT_NEAR(rho(t.r0 * (1 - 1e-12)).first, t.sigma_plus, 1e-10);
    EXPECT_NEAR(rho(t.r0 * (1 + 1e-12)).second, t.sigma_minus, 1e-10);
    EXPECT_EQ(rho(t.R2).first + rho(t.R2).second, 0.0);
    EXPECT_EQ(rho(t.R2 + 3).first + rho(t.R2 + 3).second, 0.0);
    for (double r = 0; r < 3; r += 0.01) {
        auto [a, b] = rho(r);
        EXPECT_EQ(a * b, 0.0);
    }
}

TEST(TfDensity, MassesMatch)
{
    const TFParams p{0.8, 2.1, 3.0, 2.5};
    const TFProfile t = tf_profile(p);
    const RadialRule rule = tf_rule(t);
    auto [m1, m2] = radial_mass(sample(tf_density(t, p), rule), rule);
    EXPECT_NEAR(m1, p.alpha1, 1e-7 * p.alpha1);
    EXPECT_NEAR(m2, p.alpha2, 1e-7 * p.alpha2);
}

TEST(TfEnergy, MatchesClosedFormAndOracle)
{
    for (TFParams p : {example(), TFParams{0.3, 2.0, 1.7, 2.0}, TFParams{4.0, 0.5, 8.0, 3.0}}) {
        const TFProfile t = tf_profile(p);
        const double e = tf_energy(tf_density(t, p), p, tf_rule(t));
        EXPECT_NEAR(e, t.E0, 1e-6 * t.E0);
        EXPECT_NEAR(exact_energy(p, t), t.E0, 1e-9 * t.E0);
    }
}

TEST(TfEnergy, SecondOrderInStep)
{
    const TFParams p = example();
    const TFProfile t = tf_profile(p);
    const double e1 = std::abs(tf_energy(tf_density(t, p), p, tf_rule(t, 0.01)) - t.E0);
    const double e2 = std::abs(tf_energy(tf_density(t, p), p, tf_rule(t, 0.005)) - t.E0);
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.1);
}

TEST(TfEnergy, ZeroAndNegative)
{
    const TFParams p = example();
    const RadialRule rule = radial_rule(2.0, 0.01);
    RadialSamples z{std::vector<double>(rule.size(), 0.0), std::vector<double>(rule.size(), 0.0)};
    EXPECT_EQ(tf_energy(z, rule, p), 0.0);
    z.rho1[3] = -1e-3;
    EXPECT_THROW(tf_energy(z, rule, p), bec::domain_error);
}

TEST(TfEnergy, MonotoneInParameters)
{
    double prev = 0.0;
    for (double a = 0.2; a < 4; a += 0.2) {
        const double e = tf_minimal_energy(a, 1.0, 3.0);
        EXPECT_GT(e, prev);
        prev = e;
    }
    prev = 0.0;
    for (double a = 0.2; a < 4; a += 0.2) {
        const double e = tf_minimal_energy(1.0, a, 3.0);
        EXPECT_GT(e, prev);
        prev = e;
    }
    prev = 0.0;
    for (double g = 1.0; g < 9; g += 0.5) {
        const double e = tf_minimal_energy(1.0, 1.0, g);
        EXPECT_GT(e, prev);
        prev = e;
    }
}

TEST(InteriorObjective, ArgminMatchesClosedForm)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ua(0.1, 5.0);
    for (int i = 0; i < 20; ++i) {
        TFParams p{ua(rng), ua(rng), 4.0, 2.0};
        const TFProfile t = tf_profile(p);
        // golden section only resolves the argmin to ~sqrt(eps); refine on the slope
        auto f = [&](double s) { return interior_objective(s, p); };
        const double t0 = oracle::golden_min(f, 1e-6, 2.0, 1e-7);
        auto slope = [&](double s) { return (f(s + 1e-5) - f(s - 1e-5)) / 2e-5; };
        const double tmin = oracle::bisect(slope, t0 - 1e-4, t0 + 1e-4, 60);
        EXPECT_NEAR(tmin, (t.r0 / t.r1) * (t.r0 / t.r1), 1e-8);
    }
}

TEST(InteriorObjective, ShapeAndContinuity)
{
    const TFParams p = example();
    EXPECT_GT(interior_objective(1e-8, p), 1e6);
    EXPECT_NEAR(interior_objective(1 - 1e-12, p), interior_objective(1.0, p), 1e-10);
    EXPECT_THROW(interior_objective(0.0, p), bec::domain_error);
    EXPECT_THROW(interior_objective(-1.0, p), bec::domain_error);
}

TEST(Stability, ZeroPerturbation)
{
    const TFParams p = example();
    const RadialRule rule = tf_rule(tf_profile(p));
    RadialSamples z{std::vector<double>(rule.size(), 0.0), std::vector<double>(rule.size(), 0.0)};
    EXPECT_EQ(stability_ratio(z, p, rule), 0.0);
}

TEST(Stability, RejectsMassChange)
{
    const TFParams p = example();
    const RadialRule rule = tf_rule(tf_profile(p));
    RadialSamples z{std::vector<double>(rule.size(), 0.0), std::vector<double>(rule.size(), 0.0)};
    z.rho1[10] = 0.1;
    EXPECT_THROW(stability_ratio(z, p, rule), bec::precondition_error);
}

TEST(Stability, SwapFamilyLinearRatioDiverges)
{
    const TFParams p = example();
    const auto s = stability_sweep(p, 1, 10);
    ASSERT_GE(s.swap_linear.size(), 3u);
    for (std::size_t i = 1; i < s.swap_linear.size(); ++i) EXPECT_GT(s.swap_linear[i], 1.5 * s.swap_linear[i - 1]);
    for (double r : s.swap_ratio) EXPECT_LT(r, 4.0 * s.swap_ratio.front());
}

TEST(Stability, SwapRaisesEnergy)
{
    const TFParams p = example();
    const TFProfile t = tf_profile(p);
    const double w = 0.05;
    const RadialRule rule = radial_rule(t.R2 + 1, t.R2 / 4096, {t.r0 - w, t.r0, t.r0 + w, t.R2});
    const auto d = perturb::boundary_swap(p, rule, w);
    const auto base = sample(tf_density(t, p), rule);
    RadialSamples q = base;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        q.rho1[i] += d.rho1[i];
        q.rho2[i] += d.rho2[i];
    }
    EXPECT_GT(tf_energy(q, rule, p), tf_energy(base, rule, p));
}

TEST(Stability, RandomFamiliesBounded)
{
    for (TFParams p : {example(), TFParams{1.0, 2.0, 2.0, 3.0}}) {
        const auto s = stability_sweep(p, 42, 40);
        EXPECT_GT(s.sup(), 0.0);
        EXPECT_TRUE(std::isfinite(s.sup()));
        const auto s2 = stability_sweep(p, 43, 80);
        EXPECT_LT(s2.sup_random, 2.0 * std::max(s.sup_random, s.sup_annular));
    }
}
