#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bec/gp_field.hpp"
#include "oracles.hpp"

using namespace bec;

namespace {

GPParams example(double eps)
{
    GPParams p;
    p.epsilon = eps;
    p.g = 4.0;
    p.K = 2.0;
    p.alpha1 = oracle::pi / 2;
    p.alpha2 = oracle::pi / 2;
    return p;
}

ScalarField random_field(const Grid2D& g, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    ScalarField f(g);
    for (Eigen::Index k = 0; k < f.v.size(); ++k) f.v[k] = u(rng);
    return f;
}

double directional(const std::function<double(const ScalarField&, const ScalarField&)>& E, const ScalarField& a,
                   const ScalarField& b, const ScalarField& da, const ScalarField& db)
{
    return oracle::central_diff([&](double t) {
        ScalarField x = a, y = b;
        x.v += t * da.v;
        y.v += t * db.v;
        return E(x, y);
    });
}

} // namespace

TEST(GpEnergy, ZeroFields)
{
    const Grid2D g = Grid2D::centered(16, 2.0);
    EXPECT_EQ(gp_energy(ScalarField(g), ScalarField(g), example(0.1)), 0.0);
    auto [g1, g2] = gp_gradient(ScalarField(g), ScalarField(g), example(0.1));
    EXPECT_EQ(g1.v.abs().maxCoeff(), 0.0);
    EXPECT_EQ(g2.v.abs().maxCoeff(), 0.0);
}

TEST(GpEnergy, ConstantFieldNoPotential)
{
    const Grid2D g = Grid2D::centered(16, 2.0);
    GPParams p = example(0.25);
    p.potential = Potential::none;
    const double c = 0.7;
    const double e = gp_energy(ScalarField(g, c), ScalarField(g), p, Boundary::neumann);
    EXPECT_NEAR(e, (1 / 0.25) * 0.5 * std::pow(c, 4) * g.area(), 1e-12);
}

TEST(GpEnergy, GridMismatch)
{
    EXPECT_THROW(gp_energy(ScalarField(Grid2D::centered(16, 2)), ScalarField(Grid2D::centered(16, 3)), example(0.1)),
                 bec::precondition_error);
}

TEST(GpEnergy, SecondOrderForSmoothField)
{
    // eta = exp(-r^2): grad term pi, quartic term pi/8, potential term pi/4
    GPParams p = example(1.0);
    const double exact = oracle::pi + oracle::pi / 8 + oracle::pi / 4;
    auto err = [&](int n) {
        const Grid2D g = Grid2D::centered(n, 5.0);
        const ScalarField e = ScalarField::from(g, [](double x, double y) { return std::exp(-x * x - y * y); });
        return std::abs(g_energy(e, p) - exact);
    };
    const double e1 = err(64), e2 = err(128);
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.15);
}

TEST(GpGradient, MatchesCentralDifferences)
{
    std::mt19937_64 rng(5);
    const Grid2D g = Grid2D::centered(12, 2.0);
    for (int trial = 0; trial < 5; ++trial) {
        const ScalarField a = random_field(g, rng), b = random_field(g, rng);
        const ScalarField da = random_field(g, rng, -1, 1), db = random_field(g, rng, -1, 1);
        for (Boundary bc : {Boundary::dirichlet, Boundary::neumann}) {
            GPParams p = example(0.3);
            auto [g1, g2] = gp_gradient(a, b, p, bc);
            const double an = inner(g1, da) + inner(g2, db);
            const double fd = directional([&](auto& x, auto& y) { return gp_energy(x, y, p, bc); }, a, b, da, db);
            EXPECT_NEAR(an, fd, 1e-5 * std::abs(fd));

            auto [j1, j2] = j_gradient(a, b, 0.6, 3.0, 0.3, bc);
            const double anj = inner(j1, da) + inner(j2, db);
            const double fdj = directional([&](auto& x, auto& y) { return j_energy(x, y, 0.6, 3.0, 0.3, bc); }, a, b, da, db);
            EXPECT_NEAR(anj, fdj, 1e-5 * std::abs(fdj));
        }
    }
}

TEST(JEnergy, ConstantExamples)
{
    const Grid2D g = Grid2D::centered(16, 1.0);
    EXPECT_NEAR(j_energy(ScalarField(g, 1.0), ScalarField(g, 0.0), 0.5, 3.0, 0.1), 0.0, 1e-13);
    const double s = std::sqrt(0.5);
    EXPECT_NEAR(j_energy(ScalarField(g, s), ScalarField(g, s), 0.5, 3.0, 0.1), (1 / 0.1) * (3.0 - 1) / 4 * g.area(),
                1e-10);
}

TEST(JEnergy, InterfaceEnergyScalesWithLength)
{
    // a straight interface of length 2 across the box: J ~ sigma * 2 for small eps
    const double eps = 0.05, lam = 1.0, K = 1e4;
    // put a node on the kink at x = 0
    const double h = 2.0 / 400;
    const Grid2D g(401, 401, h, -1.0 - h / 2, -1.0 - h / 2);
    auto e1 = ScalarField::from(g, [&](double x, double) { return x > 0 ? std::tanh(x / (std::sqrt(2.0) * eps)) : 0.0; });
    auto e2 = ScalarField::from(g, [&](double x, double) { return x < 0 ? std::tanh(-x / (std::sqrt(2.0) * lam * eps)) : 0.0; });
    const double J = j_energy(e1, e2, lam, K, eps);
    EXPECT_NEAR(J / 2.0, (1 + lam) * 2 * std::sqrt(2.0) / 3, 0.01);
}

TEST(RhoBar, Examples)
{
    const RhoBar rb = rho_bar(oracle::pi / 2);
    EXPECT_NEAR(rb.R, 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(rb(0.0), 1.0);
    EXPECT_EQ(rb(1.0), 0.0);
    const RhoBar r2 = rho_bar(3.7);
    const double m = oracle::simpson([&](double r) { return 2 * oracle::pi * r * r2(r); }, 0.0, r2.R);
    EXPECT_NEAR(m, 3.7, 1e-10);
    EXPECT_THROW(rho_bar(0.0), bec::domain_error);
}

TEST(Reparametrize, Examples)
{
    auto r = reparametrize(1.0, 2.0, 1.0, 3.0, 5.0);
    EXPECT_DOUBLE_EQ(r.lambda, 1.0);
    EXPECT_DOUBLE_EQ(r.K_tilde, 3.0);
    EXPECT_DOUBLE_EQ(r.alpha2_tilde, 2.0);
    r = reparametrize(1.0, 2.0, 4.0, 3.0, 5.0);
    EXPECT_NEAR(r.lambda * r.lambda, 0.5, 1e-15);
    EXPECT_NEAR(r.K_tilde, 1.5, 1e-15);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int i = 0; i < 100; ++i) {
        const double a1 = u(rng), a2 = u(rng), gg = 1 + u(rng), area = u(rng);
        const auto q = reparametrize(a1, a2, gg, 2.0, area);
        EXPECT_NEAR(q.alpha1_tilde + q.alpha2_tilde, q.gamma, 1e-12 * q.gamma);
        EXPECT_NEAR(q.density_scale * area, q.gamma, 1e-12 * q.gamma);
    }
}

TEST(MinimizeGp, ConvergesConservesMassAndDescends)
{
    const GPParams p = example(0.2);
    const Grid2D g = gp_grid(p, 64);
    const GPResult r = minimize_gp(p, g);
    EXPECT_TRUE(r.report.converged);
    EXPECT_LT(r.report.gradient_norm, 1e-6);
    EXPECT_NEAR(r.report.mass_errors.first, 0.0, 1e-12);
    EXPECT_NEAR(r.report.mass_errors.second, 0.0, 1e-12);
    for (std::size_t i = 1; i < r.report.energy_trace.size(); ++i)
        EXPECT_LE(r.report.energy_trace[i], r.report.energy_trace[i - 1] * (1 + 1e-12));
    EXPECT_GE(r.eta1.v.minCoeff(), 0.0);
    EXPECT_GE(r.eta2.v.minCoeff(), 0.0);
    // projected gradient at the returned state agrees with the report
    auto [g1, g2] = gp_gradient(r.eta1, r.eta2, p);
    const ScalarField p1 = project_tangent(g1, r.eta1), p2 = project_tangent(g2, r.eta2);
    EXPECT_NEAR(std::sqrt(inner(p1, p1) + inner(p2, p2)), r.report.gradient_norm, 1e-9);
}

TEST(MinimizeGp, ArmijoPolicyAlsoDescends)
{
    const GPParams p = example(0.2);
    MinimizeOptions o;
    o.policy = StepPolicy::armijo;
    o.max_iter = 300;
    const GPResult r = minimize_gp(p, gp_grid(p, 32), std::nullopt, o);
    EXPECT_LT(r.report.energy_trace.back(), r.report.energy_trace.front());
}

TEST(MinimizeGp, EnergyCloseToThomasFermi)
{
    // eps F_eps - E0 stays bounded and shrinks with eps
    const TFParams tp{oracle::pi / 2, oracle::pi / 2, 4.0, 2.0};
    const double E0 = tf_profile(tp).E0;
    double prev = 1e9;
    for (double eps : {0.2, 0.1}) {
        const GPParams p = example(eps);
        const GPResult r = minimize_gp(p, gp_grid(p, 64));
        const double gap = eps * r.report.final_energy - E0;
        EXPECT_GT(gap, 0.0);
        EXPECT_LT(gap, prev);
        prev = gap;
    }
}

TEST(MinimizeGp, SingleComponentApproachesRhoBar)
{
    double prev = 1e9;
    for (double eps : {0.2, 0.1, 0.05}) {
        GPParams p = example(eps);
        p.alpha1 = oracle::pi;
        p.alpha2 = 0.0;
        const Grid2D g = gp_grid(p, 64);
        const GPResult r = minimize_g(p, g);
        EXPECT_EQ(r.eta2.v.abs().maxCoeff(), 0.0);
        const RhoBar rb = rho_bar(p.alpha1);
        const ScalarField rho = ScalarField::from(g, [&](double x, double y) { return rb(x, y); });
        const double l1 = g.cell_area() * (r.eta1.v.square() - rho.v).abs().sum();
        EXPECT_LT(l1, prev);
        prev = l1;
    }
}

TEST(MinimizeGp, RejectsBadParams)
{
    GPParams p = example(1.5);
    EXPECT_THROW(minimize_gp(p, Grid2D::centered(16, 3.0)), bec::domain_error);
}

class LMTest : public ::testing::Test {
protected:
    static GPParams params()
    {
        GPParams p = crossover_params(0.2, 1.5, 3.0, 1.0, 0.6);
        return p;
    }

    // eta = eta_bar * u with smooth u normalized to total mass alpha1 + alpha2
    static std::pair<ScalarField, ScalarField> compose(const ScalarField& bar, double abar)
    {
        const Grid2D& g = bar.grid;
        auto u1 = ScalarField::from(g, [](double x, double y) { return 0.8 + 0.2 * std::sin(x) * std::cos(y); });
        auto u2 = ScalarField::from(g, [](double x, double y) { return 0.5 + 0.1 * std::cos(x + 2 * y); });
        ScalarField e1(g, bar.v * u1.v), e2(g, bar.v * u2.v);
        const double c = std::sqrt(abar / (inner(e1, e1) + inner(e2, e2)));
        e1.v *= c;
        e2.v *= c;
        return {e1, e2};
    }
};

TEST_F(LMTest, TrivialSplitIsExact)
{
    GPParams p = params();
    GPParams q = p;
    q.alpha1 = p.alpha1 + p.alpha2;
    const Grid2D g = gp_grid(q, 48);
    const GPResult bar = minimize_g(q, g);
    const auto d = lm_decomposition(bar.eta1, ScalarField(g), bar.eta1, p);
    EXPECT_NEAR(d.F_tilde, 0.0, 1e-12 * d.F);
    EXPECT_NEAR(d.xi_term, 0.0, 1e-14);
    EXPECT_LT(d.residual, 1e-12 * d.F);
}

TEST_F(LMTest, ResidualBoundedByEulerLagrangeResidual)
{
    for (double xi : {0.0, 1.5}) {
        GPParams p = crossover_params(0.2, xi, 3.0, 1.0, 0.6);
        GPParams q = p;
        q.alpha1 = p.alpha1 + p.alpha2;
        q.alpha2 = 0.0;
        const Grid2D g = gp_grid(q, 48);
        double prev = 1e9;
        for (double tol : {1e-3, 1e-4, 1e-5, 1e-6}) {
            MinimizeOptions o;
            o.tol = tol;
            const GPResult bar = minimize_gp(q, g, std::nullopt, o);
            const ELResidual el = el_residual(bar.eta1, q);
            auto [e1, e2] = compose(bar.eta1, q.alpha1);
            const auto d = lm_decomposition(e1, e2, bar.eta1, p);
            // Cauchy-Schwarz bound of the exact discrete remainder <eta_bar (|u|^2 - 1), r>
            ScalarField w(g);
            for (Eigen::Index k = 0; k < w.v.size(); ++k)
                if (bar.eta1.v[k] >= 1e-8)
                    w.v[k] = (e1.v[k] * e1.v[k] + e2.v[k] * e2.v[k]) / bar.eta1.v[k] - bar.eta1.v[k];
            EXPECT_LE(d.residual, norm(w) * el.norm * (1 + 1e-6) + 1e-11 * d.F);
            EXPECT_LT(d.residual, prev);
            prev = d.residual;
        }
    }
}
