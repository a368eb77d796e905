#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "bec/errors.hpp"
#include "bec/grid.hpp"
#include "bec/numerics.hpp"
#include "bec/tf_core.hpp"

namespace bec {

enum class Potential { harmonic, none };

struct GPParams {
    double epsilon = 1.0;
    double g = 1.0;
    double K = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    Potential potential = Potential::harmonic;
    double xi = 0.0;

    void validate() const
    {
        if (!(epsilon > 0.0 && epsilon <= 1.0)) throw domain_error("GPParams: epsilon must lie in (0, 1]");
        if (!(g >= 1.0)) throw domain_error("GPParams: g must be >= 1");
        if (!(K > 0.0)) throw domain_error("GPParams: K must be positive");
        if (!(alpha1 >= 0.0 && alpha2 >= 0.0)) throw domain_error("GPParams: masses must be nonnegative");
    }
};

// Crossover scaling g = 1 + eps * xi.
inline GPParams crossover_params(double epsilon, double xi, double K, double alpha1, double alpha2)
{
    GPParams p;
    p.epsilon = epsilon;
    p.xi = xi;
    p.g = 1.0 + epsilon * xi;
    p.K = K;
    p.alpha1 = alpha1;
    p.alpha2 = alpha2;
    return p;
}

inline ScalarField potential_field(const Grid2D& g, Potential v)
{
    if (v == Potential::none) return ScalarField(g, 0.0);
    return ScalarField::from(g, [](double x, double y) { return x * x + y * y; });
}

namespace detail {

// Generic two-field energy
//   eps * sum_edges (k1 |d eta1|^2 + k2 |d eta2|^2)
//   + (h^2/eps) sum [ a1/2 eta1^4 + a2/2 eta2^4 + c eta1^2 eta2^2 + V (eta1^2 + eta2^2) + c0 ]
struct QuarticForm {
    double eps = 1.0;
    double k1 = 1.0, k2 = 1.0;
    double a1 = 1.0, a2 = 1.0, c = 0.0;
    double c0 = 0.0;
    Boundary bc = Boundary::dirichlet;
};

inline double quartic_energy(const ScalarField& e1, const ScalarField& e2, const ScalarField& V, const QuarticForm& q)
{
    require_same_grid(e1, e2, "energy");
    require_same_grid(e1, V, "energy");
    const double kin = q.k1 * edge_sum(e1, q.bc) + q.k2 * edge_sum(e2, q.bc);
    const Eigen::ArrayXd s1 = e1.v.square(), s2 = e2.v.square();
    const double pot = (0.5 * q.a1 * s1.square() + 0.5 * q.a2 * s2.square() + q.c * s1 * s2 + V.v * (s1 + s2) + q.c0).sum();
    return q.eps * kin + e1.grid.cell_area() / q.eps * pot;
}

inline std::pair<ScalarField, ScalarField> quartic_gradient(const ScalarField& e1, const ScalarField& e2,
                                                            const ScalarField& V, const QuarticForm& q)
{
    require_same_grid(e1, e2, "gradient");
    require_same_grid(e1, V, "gradient");
    ScalarField g1 = neg_laplacian(e1, q.bc), g2 = neg_laplacian(e2, q.bc);
    const Eigen::ArrayXd s1 = e1.v.square(), s2 = e2.v.square();
    g1.v = 2.0 * q.eps * q.k1 * g1.v + (2.0 / q.eps) * (q.a1 * s1 + q.c * s2 + V.v) * e1.v;
    g2.v = 2.0 * q.eps * q.k2 * g2.v + (2.0 / q.eps) * (q.a2 * s2 + q.c * s1 + V.v) * e2.v;
    return {std::move(g1), std::move(g2)};
}

inline QuarticForm gp_form(const GPParams& p, Boundary bc)
{
    QuarticForm q;
    q.eps = p.epsilon;
    q.a1 = 1.0;
    q.a2 = p.g;
    q.c = p.K;
    q.bc = bc;
    return q;
}

inline QuarticForm j_form(double lambda, double K, double eps, Boundary bc)
{
    // (s^2 + t^2 - 1)^2 / 2 + (K - 1) s^2 t^2 expanded into the generic form with V = -1
    QuarticForm q;
    q.eps = eps;
    q.k2 = lambda * lambda;
    q.a1 = 1.0;
    q.a2 = 1.0;
    q.c = K;
    q.c0 = 0.5;
    q.bc = bc;
    return q;
}

} // namespace detail

inline double gp_energy(const ScalarField& eta1, const ScalarField& eta2, const GPParams& p,
                        Boundary bc = Boundary::dirichlet)
{
    return detail::quartic_energy(eta1, eta2, potential_field(eta1.grid, p.potential), detail::gp_form(p, bc));
}

// L2 gradient (with respect to the h^2-weighted inner product) of gp_energy.
inline std::pair<ScalarField, ScalarField> gp_gradient(const ScalarField& eta1, const ScalarField& eta2,
                                                       const GPParams& p, Boundary bc = Boundary::dirichlet)
{
    return detail::quartic_gradient(eta1, eta2, potential_field(eta1.grid, p.potential), detail::gp_form(p, bc));
}

// One-component functional G(eta) = F(eta, 0).
inline double g_energy(const ScalarField& eta, const GPParams& p, Boundary bc = Boundary::dirichlet)
{
    return gp_energy(eta, ScalarField(eta.grid, 0.0), p, bc);
}

inline double j_energy(const ScalarField& eta1, const ScalarField& eta2, double lambda, double K, double eps,
                       Boundary bc = Boundary::neumann)
{
    return detail::quartic_energy(eta1, eta2, ScalarField(eta1.grid, -1.0), detail::j_form(lambda, K, eps, bc));
}

inline std::pair<ScalarField, ScalarField> j_gradient(const ScalarField& eta1, const ScalarField& eta2, double lambda,
                                                      double K, double eps, Boundary bc = Boundary::neumann)
{
    return detail::quartic_gradient(eta1, eta2, ScalarField(eta1.grid, -1.0), detail::j_form(lambda, K, eps, bc));
}

struct RhoBar {
    double alpha_bar = 0.0;
    double R = 0.0;
    double operator()(double r) const { return num::pos(R * R - r * r); }
    double operator()(double x, double y) const { return num::pos(R * R - x * x - y * y); }
};

inline RhoBar rho_bar(double alpha_bar)
{
    if (!(alpha_bar > 0.0)) throw domain_error("rho_bar: alpha_bar must be positive");
    return RhoBar{alpha_bar, std::pow(2.0 * alpha_bar / num::pi, 0.25)};
}

struct Reparametrization {
    double lambda = 1.0;
    double K_tilde = 0.0;
    double alpha1_tilde = 0.0;
    double alpha2_tilde = 0.0;
    double gamma = 0.0;
    double density_scale = 0.0; // a = gamma / |Omega|
};

inline Reparametrization reparametrize(double alpha1, double alpha2, double g, double K, double omega_area)
{
    if (!(g >= 1.0)) throw domain_error("reparametrize: g must be >= 1");
    if (!(alpha1 > 0.0 && alpha2 > 0.0 && omega_area > 0.0))
        throw domain_error("reparametrize: masses and area must be positive");
    Reparametrization r;
    const double sg = std::sqrt(g);
    r.gamma = alpha1 + alpha2 * sg;
    r.lambda = std::pow(g, -0.25);
    r.K_tilde = K / sg;
    r.alpha1_tilde = alpha1;
    r.alpha2_tilde = sg * alpha2;
    r.density_scale = r.gamma / omega_area;
    return r;
}

// ---------------------------------------------------------------------------
// Constrained minimization

enum class StepPolicy { armijo, barzilai_borwein };

struct MinimizeOptions {
    double tol = 1e-6;       // on the h^2-weighted norm of the projected gradient
    int max_iter = 20000;
    StepPolicy policy = StepPolicy::barzilai_borwein;
    double initial_step = 0.0; // 0 selects h^2 / (8 eps)
    int max_backtracks = 60;
    Boundary bc = Boundary::dirichlet;
};

struct MinimizeReport {
    int iterations = 0;
    std::vector<double> energy_trace;
    double final_energy = 0.0;
    std::pair<double, double> mass_errors{0.0, 0.0};
    double gradient_norm = 0.0;
    bool converged = false;
};

struct GPResult {
    ScalarField eta1;
    ScalarField eta2;
    MinimizeReport report;
};

// Box big enough to hold the Thomas-Fermi support plus a unit margin.
inline Grid2D gp_grid(const GPParams& p, int n)
{
    double R = 0.0;
    if (p.alpha2 > 0.0 && p.g > 1.0 && p.K >= std::sqrt(p.g))
        R = tf_profile({p.alpha1, p.alpha2, p.g, p.K}).R2;
    else
        R = rho_bar(p.alpha1 + std::sqrt(p.g) * p.alpha2).R;
    return Grid2D::centered(n, R + 1.0);
}

namespace detail {

inline void rescale_to_mass(ScalarField& f, double alpha)
{
    if (alpha <= 0.0) {
        f.v.setZero();
        return;
    }
    const double m = inner(f, f);
    if (!(m > 0.0)) throw solver_error("minimize_gp: component vanished", {});
    f.v *= std::sqrt(alpha / m);
}

inline ScalarField box_average(const ScalarField& f, int r)
{
    const Grid2D& g = f.grid;
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double s = 0.0;
            for (int dj = -r; dj <= r; ++dj)
                for (int di = -r; di <= r; ++di) {
                    const int a = i + di, b = j + dj;
                    if (a >= 0 && a < g.nx && b >= 0 && b < g.ny) s += f(a, b);
                }
            out(i, j) = s / ((2 * r + 1) * (2 * r + 1));
        }
    return out;
}

} // namespace detail

// Regularized square roots of the Thomas-Fermi densities (or of rho_bar when
// there is no second component), smoothed over two cells and normalized.
inline std::pair<ScalarField, ScalarField> tf_seed(const GPParams& p, const Grid2D& grid)
{
    ScalarField s1(grid), s2(grid);
    if (p.alpha2 > 0.0) {
        const TFParams tp{p.alpha1, p.alpha2, p.g, p.K};
        const RadialPair rho = tf_density(tf_profile(tp), tp);
        s1 = ScalarField::from(grid, [&](double x, double y) { return std::sqrt(rho(std::hypot(x, y)).first); });
        s2 = ScalarField::from(grid, [&](double x, double y) { return std::sqrt(rho(std::hypot(x, y)).second); });
    } else {
        const RhoBar rb = rho_bar(p.alpha1);
        s1 = ScalarField::from(grid, [&](double x, double y) { return std::sqrt(rb(x, y)); });
    }
    s1 = detail::box_average(s1, 2);
    s2 = detail::box_average(s2, 2);
    detail::rescale_to_mass(s1, p.alpha1);
    detail::rescale_to_mass(s2, p.alpha2);
    return {std::move(s1), std::move(s2)};
}

// Gradient minus its component along eta (tangent to the mass sphere).
inline ScalarField project_tangent(const ScalarField& grad, const ScalarField& eta)
{
    const double nn = inner(eta, eta);
    if (nn <= 0.0) return ScalarField(grad.grid, 0.0);
    ScalarField out = grad;
    out.v -= (inner(grad, eta) / nn) * eta.v;
    return out;
}

inline GPResult minimize_gp(const GPParams& p, const Grid2D& grid,
                            std::optional<std::pair<ScalarField, ScalarField>> init = std::nullopt,
                            const MinimizeOptions& opt = {})
{
    p.validate();
    auto [e1, e2] = init ? std::move(*init) : tf_seed(p, grid);
    require_same_grid(e1, e2, "minimize_gp");
    if (!(e1.grid == grid)) throw precondition_error("minimize_gp: initial fields are not on the given grid");
    if (p.alpha1 + p.alpha2 > 0.0 && grid.area() < 1e-12) throw precondition_error("minimize_gp: empty domain");

    const ScalarField V = potential_field(grid, p.potential);
    const detail::QuarticForm form = detail::gp_form(p, opt.bc);
    const double h2 = grid.cell_area();

    e1.v = e1.v.abs();
    e2.v = e2.v.abs();
    detail::rescale_to_mass(e1, p.alpha1);
    detail::rescale_to_mass(e2, p.alpha2);

    MinimizeReport rep;
    double E = detail::quartic_energy(e1, e2, V, form);
    auto [g1, g2] = detail::quartic_gradient(e1, e2, V, form);
    ScalarField p1 = project_tangent(g1, e1), p2 = project_tangent(g2, e2);
    rep.energy_trace.push_back(E);

    double step = opt.initial_step > 0.0 ? opt.initial_step : h2 / (8.0 * p.epsilon);
    const double base_step = step;
    const double c_armijo = 1e-4;

    for (int it = 0; it < opt.max_iter; ++it) {
        const double pp = inner(p1, p1) + inner(p2, p2);
        rep.gradient_norm = std::sqrt(pp);
        if (rep.gradient_norm < opt.tol) {
            rep.converged = true;
            break;
        }

        ScalarField n1(grid), n2(grid);
        double En = 0.0;
        int bt = 0;
        for (;; ++bt) {
            if (bt > opt.max_backtracks)
                throw solver_error("minimize_gp: line search failed", rep.energy_trace);
            n1.v = (e1.v - step * p1.v).abs();
            n2.v = (e2.v - step * p2.v).abs();
            detail::rescale_to_mass(n1, p.alpha1);
            detail::rescale_to_mass(n2, p.alpha2);
            En = detail::quartic_energy(n1, n2, V, form);
            // the last term absorbs roundoff once decreases fall below machine resolution of E
            if (En <= E - c_armijo * step * pp + 1e-13 * std::abs(E)) break;
            step *= 0.5;
        }

        auto [ng1, ng2] = detail::quartic_gradient(n1, n2, V, form);
        ScalarField q1 = project_tangent(ng1, n1), q2 = project_tangent(ng2, n2);

        if (opt.policy == StepPolicy::barzilai_borwein) {
            const Eigen::ArrayXd s1 = n1.v - e1.v, s2 = n2.v - e2.v;
            const Eigen::ArrayXd y1 = q1.v - p1.v, y2 = q2.v - p2.v;
            const double sy = (s1 * y1).sum() + (s2 * y2).sum();
            const double ss = s1.square().sum() + s2.square().sum();
            step = sy > 0.0 ? ss / sy : 2.0 * step;
            step = std::clamp(step, 1e-3 * base_step, 1e6 * base_step);
        } else if (bt == 0) {
            step = std::min(2.0 * step, 64.0 * base_step);
        }

        e1 = std::move(n1);
        e2 = std::move(n2);
        p1 = std::move(q1);
        p2 = std::move(q2);
        E = En;
        rep.energy_trace.push_back(E);
        rep.iterations = it + 1;
    }

    rep.final_energy = E;
    rep.mass_errors = {inner(e1, e1) - p.alpha1, inner(e2, e2) - p.alpha2};
    return {std::move(e1), std::move(e2), std::move(rep)};
}

inline GPResult minimize_g(const GPParams& p, const Grid2D& grid, const MinimizeOptions& opt = {})
{
    GPParams q = p;
    q.alpha2 = 0.0;
    return minimize_gp(q, grid, std::nullopt, opt);
}

// ---------------------------------------------------------------------------
// Diagnostics

// sqrt of the summed squared L2 distances of (eta1, eta2) to (sqrt rho1, sqrt rho2).
inline double tf_distance(const ScalarField& eta1, const ScalarField& eta2, const TFParams& tp)
{
    const RadialPair rho = tf_density(tf_profile(tp), tp);
    const ScalarField r1 = ScalarField::from(eta1.grid, [&](double x, double y) { return std::sqrt(rho(std::hypot(x, y)).first); });
    const ScalarField r2 = ScalarField::from(eta1.grid, [&](double x, double y) { return std::sqrt(rho(std::hypot(x, y)).second); });
    return std::sqrt(eta1.grid.cell_area() * ((eta1.v - r1.v).square().sum() + (eta2.v - r2.v).square().sum()));
}

struct ELResidual {
    double lambda = 0.0;  // Rayleigh quotient (chemical potential)
    double norm = 0.0;    // h^2-weighted L2 norm of the residual
    ScalarField residual;
};

// Residual of eps(-Lap eta) + (1/eps)(eta^3 + V eta) = lambda eta for the one-component problem.
inline ELResidual el_residual(const ScalarField& eta, const GPParams& p, Boundary bc = Boundary::dirichlet)
{
    const ScalarField V = potential_field(eta.grid, p.potential);
    ScalarField r = neg_laplacian(eta, bc);
    r.v = p.epsilon * r.v + (eta.v.cube() + V.v * eta.v) / p.epsilon;
    ELResidual out;
    out.lambda = inner(r, eta) / inner(eta, eta);
    r.v -= out.lambda * eta.v;
    out.norm = norm(r);
    out.residual = std::move(r);
    return out;
}

struct LMDecomposition {
    double F = 0.0;        // F_eps(eta1, eta2)
    double G = 0.0;        // G_eps(eta_bar)
    double F_tilde = 0.0;  // weighted functional of u = eta / eta_bar
    double xi_term = 0.0;  // (xi/2) sum eta_bar^4 u2^4
    double residual = 0.0; // |F - (G + F_tilde + xi_term)|
    std::size_t masked = 0;
};

inline LMDecomposition lm_decomposition(const ScalarField& eta1, const ScalarField& eta2, const ScalarField& eta_bar,
                                        const GPParams& p, double mask = 1e-8, Boundary bc = Boundary::dirichlet)
{
    require_same_grid(eta1, eta2, "lm_decomposition");
    require_same_grid(eta1, eta_bar, "lm_decomposition");
    const Grid2D& grid = eta1.grid;
    const double h2 = grid.cell_area();

    LMDecomposition d;
    d.F = gp_energy(eta1, eta2, p, bc);
    d.G = g_energy(eta_bar, p, bc);

    ScalarField u1(grid), u2(grid);
    for (Eigen::Index k = 0; k < eta_bar.v.size(); ++k) {
        if (eta_bar.v[k] < mask) {
            ++d.masked;
            continue;
        }
        u1.v[k] = eta1.v[k] / eta_bar.v[k];
        u2.v[k] = eta2.v[k] / eta_bar.v[k];
    }
    Eigen::ArrayXd live = (eta_bar.v >= mask).cast<double>();
    const Eigen::ArrayXd a4 = eta_bar.v.square().square() * live;
    const Eigen::ArrayXd s1 = u1.v.square(), s2 = u2.v.square();
    const Eigen::ArrayXd t = s1 + s2 - 1.0;

    const double kin = edge_sum(u1, bc, &eta_bar) + edge_sum(u2, bc, &eta_bar);
    const double pot = (0.5 * a4 * t.square() + (p.K - 1.0) * a4 * s1 * s2).sum();
    d.F_tilde = p.epsilon * kin + h2 / p.epsilon * pot;
    d.xi_term = 0.5 * (p.g - 1.0) / p.epsilon * h2 * (a4 * s2.square()).sum();
    d.residual = std::abs(d.F - (d.G + d.F_tilde + d.xi_term));
    return d;
}

inline double lm_decomposition_residual(const ScalarField& eta1, const ScalarField& eta2, const ScalarField& eta_bar,
                                        const GPParams& p)
{
    return lm_decomposition(eta1, eta2, eta_bar, p).residual;
}

struct LMCheckRow {
    double tol = 0.0;
    int iterations = 0;
    double el_norm = 0.0;  // Euler-Lagrange residual of the one-component solve
    double residual = 0.0; // splitting defect
    double F = 0.0;
};

// Solves the one-component problem at each tolerance and checks the splitting of a fixed
// two-component field eta = eta_bar * u against it.
inline std::vector<LMCheckRow> lm_check(const GPParams& p, int n, const std::vector<double>& tols)
{
    GPParams q = p;
    q.alpha1 = p.alpha1 + p.alpha2;
    q.alpha2 = 0.0;
    const Grid2D grid = gp_grid(q, n);
    const ScalarField u1 = ScalarField::from(grid, [](double x, double y) { return 0.8 + 0.2 * std::sin(x) * std::cos(y); });
    const ScalarField u2 = ScalarField::from(grid, [](double x, double y) { return 0.5 + 0.1 * std::cos(x + 2 * y); });
    std::vector<LMCheckRow> rows;
    for (double tol : tols) {
        MinimizeOptions o;
        o.tol = tol;
        const GPResult bar = minimize_gp(q, grid, std::nullopt, o);
        ScalarField e1(grid, bar.eta1.v * u1.v), e2(grid, bar.eta1.v * u2.v);
        const double c = std::sqrt(q.alpha1 / (inner(e1, e1) + inner(e2, e2)));
        e1.v *= c;
        e2.v *= c;
        const LMDecomposition d = lm_decomposition(e1, e2, bar.eta1, p);
        rows.push_back({tol, bar.report.iterations, el_residual(bar.eta1, q).norm, d.residual, d.F});
    }
    return rows;
}

} // namespace bec
