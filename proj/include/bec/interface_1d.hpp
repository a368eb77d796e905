#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "bec/errors.hpp"
#include "bec/numerics.hpp"

namespace bec {

struct TransitionParams {
    double lambda = 1.0;
    double K = 2.0;

    void validate() const
    {
        if (!(lambda > 0.0)) throw domain_error("TransitionParams: lambda must be positive");
        if (!(K > 1.0)) throw domain_error("TransitionParams: K must exceed 1");
    }
};

inline double potential_WK(double s, double t, double K)
{
    const double q = 1.0 - s * s - t * t;
    return 0.5 * q * q + (K - 1.0) * s * s * t * t;
}

// min over t >= 0 of W_K(s, t)
inline double potential_wK(double s, double K)
{
    const double a = 1.0 - s * s;
    if (s * s < 1.0 / K) {
        const double b = 1.0 - K * s * s;
        return 0.5 * a * a - 0.5 * b * b;
    }
    return 0.5 * a * a;
}

// Samples on the uniform grid x_i = -L + i h, h = 2L/(n-1).
struct Profile1D {
    double L = 0.0;
    int n = 0;
    std::vector<double> eta1;
    std::vector<double> eta2;

    double h() const { return 2.0 * L / (n - 1); }
    double x(int i) const { return -L + i * h(); }
};

struct SigmaReport {
    double sigma = 0.0;
    double equipartition_sup = 0.0;
    double tail_mass = 0.0;
    int iterations = 0;
    std::vector<double> energy_trace;
    bool converged = false;
};

// Integrand  k1 |eta1'|^2 + k2 |eta2'|^2 + well (eta1^2 + eta2^2 - 1)^2 / 2 + coupling eta1^2 eta2^2.
// The standard problem has (1, lambda^2, 1, K - 1); the weak-segregation
// rescaling x -> x sqrt(K-1) gives (1, lambda^2, 1/(K-1), 1).
struct TransitionForm {
    double k1 = 1.0;
    double k2 = 1.0;
    double well = 1.0;
    double coupling = 1.0;

    static TransitionForm standard(const TransitionParams& p) { return {1.0, p.lambda * p.lambda, 1.0, p.K - 1.0}; }
    static TransitionForm rescaled(const TransitionParams& p)
    {
        return {1.0, p.lambda * p.lambda, 1.0 / (p.K - 1.0), 1.0};
    }

    double W(double s, double t) const
    {
        const double q = s * s + t * t - 1.0;
        return 0.5 * well * q * q + coupling * s * s * t * t;
    }
};

// Edge differences for the gradient terms, trapezoid rule for the potential.
inline double transition_energy(const Profile1D& pr, const TransitionForm& f)
{
    const double h = pr.h();
    double e = 0.0;
    for (int i = 0; i + 1 < pr.n; ++i) {
        const double d1 = pr.eta1[i + 1] - pr.eta1[i], d2 = pr.eta2[i + 1] - pr.eta2[i];
        e += (f.k1 * d1 * d1 + f.k2 * d2 * d2) / h;
    }
    for (int i = 0; i < pr.n; ++i) {
        const double w = (i == 0 || i == pr.n - 1) ? 0.5 : 1.0;
        e += w * h * f.W(pr.eta1[i], pr.eta2[i]);
    }
    return e;
}

inline double transition_energy(const Profile1D& pr, const TransitionParams& p)
{
    return transition_energy(pr, TransitionForm::standard(p));
}

// sup over cells of |kinetic - potential| with the potential at the cell average.
inline double equipartition_sup(const Profile1D& pr, const TransitionForm& f)
{
    const double h = pr.h();
    double s = 0.0;
    for (int i = 0; i + 1 < pr.n; ++i) {
        const double d1 = (pr.eta1[i + 1] - pr.eta1[i]) / h, d2 = (pr.eta2[i + 1] - pr.eta2[i]) / h;
        const double a = 0.5 * (pr.eta1[i] + pr.eta1[i + 1]), b = 0.5 * (pr.eta2[i] + pr.eta2[i + 1]);
        s = std::max(s, std::abs(f.k1 * d1 * d1 + f.k2 * d2 * d2 - f.W(a, b)));
    }
    return s;
}

// Energy carried by the outer tenth of the domain at each end.
inline double tail_energy(const Profile1D& pr, const TransitionForm& f)
{
    const double h = pr.h();
    const int m = std::max(1, pr.n / 10);
    double e = 0.0;
    for (int i = 0; i + 1 < pr.n; ++i) {
        if (i >= m && i + 1 < pr.n - m) continue;
        const double d1 = pr.eta1[i + 1] - pr.eta1[i], d2 = pr.eta2[i + 1] - pr.eta2[i];
        e += (f.k1 * d1 * d1 + f.k2 * d2 * d2) / h + 0.5 * h * (f.W(pr.eta1[i], pr.eta2[i]) + f.W(pr.eta1[i + 1], pr.eta2[i + 1]));
    }
    return e;
}

inline double hard_wall_profile(double lambda, double x)
{
    if (!(x >= 0.0)) throw domain_error("hard_wall_profile: x must be nonnegative");
    return std::tanh(x / (std::sqrt(2.0) * lambda));
}

// The K = infinity pair glued at 0, optionally with component 2 shifted right by delta.
inline Profile1D tanh_pair(double lambda, double L, int n, double delta = 0.0)
{
    Profile1D pr{L, n, std::vector<double>(n), std::vector<double>(n)};
    for (int i = 0; i < n; ++i) {
        const double x = pr.x(i);
        pr.eta1[i] = x > 0.0 ? std::tanh(x / std::sqrt(2.0)) : 0.0;
        pr.eta2[i] = x < delta ? std::tanh((delta - x) / (std::sqrt(2.0) * lambda)) : 0.0;
    }
    pr.eta1[n - 1] = 1.0;
    pr.eta2[0] = 1.0;
    return pr;
}

// Overlapping pair with eta1^2 + eta2^2 = 1, close to the weak-segregation profile.
inline Profile1D smooth_pair(double L, int n, double width = 1.0)
{
    Profile1D pr{L, n, std::vector<double>(n), std::vector<double>(n)};
    for (int i = 0; i < n; ++i) {
        const double t = std::tanh(pr.x(i) / width);
        pr.eta1[i] = std::sqrt(0.5 * (1.0 + t));
        pr.eta2[i] = std::sqrt(0.5 * (1.0 - t));
    }
    pr.eta1[0] = 0.0;
    pr.eta1[n - 1] = 1.0;
    pr.eta2[0] = 1.0;
    pr.eta2[n - 1] = 0.0;
    return pr;
}

struct TransitionOptions {
    double tol = 1e-10;     // on max |dE/d eta_i| / h
    int max_iter = 200;
    double cap = 1.1;       // values are clamped to [0, cap]
    // nodes whose value is held fixed (in addition to both ends); empty means none
    std::vector<char> pin1;
    std::vector<char> pin2;
};

namespace detail {

inline void transition_gradient(const Profile1D& pr, const TransitionForm& f, Eigen::VectorXd& g,
                                std::vector<Eigen::Triplet<double>>* trip)
{
    const int n = pr.n;
    const double h = pr.h();
    g.setZero(2 * n);
    if (trip) trip->clear();
    for (int i = 0; i + 1 < n; ++i) {
        const double d1 = pr.eta1[i + 1] - pr.eta1[i], d2 = pr.eta2[i + 1] - pr.eta2[i];
        g[2 * i] -= 2 * f.k1 * d1 / h;
        g[2 * (i + 1)] += 2 * f.k1 * d1 / h;
        g[2 * i + 1] -= 2 * f.k2 * d2 / h;
        g[2 * (i + 1) + 1] += 2 * f.k2 * d2 / h;
        if (trip) {
            for (int c = 0; c < 2; ++c) {
                const double k = 2 * (c == 0 ? f.k1 : f.k2) / h;
                const int a = 2 * i + c, b = 2 * (i + 1) + c;
                trip->emplace_back(a, a, k);
                trip->emplace_back(b, b, k);
                trip->emplace_back(a, b, -k);
                trip->emplace_back(b, a, -k);
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        const double w = ((i == 0 || i == n - 1) ? 0.5 : 1.0) * h;
        const double s = pr.eta1[i], t = pr.eta2[i];
        const double q = s * s + t * t - 1.0;
        g[2 * i] += w * (2 * f.well * s * q + 2 * f.coupling * s * t * t);
        g[2 * i + 1] += w * (2 * f.well * t * q + 2 * f.coupling * s * s * t);
        if (trip) {
            trip->emplace_back(2 * i, 2 * i, w * (f.well * (2 * q + 4 * s * s) + 2 * f.coupling * t * t));
            trip->emplace_back(2 * i + 1, 2 * i + 1, w * (f.well * (2 * q + 4 * t * t) + 2 * f.coupling * s * s));
            const double st = w * (4 * f.well * s * t + 4 * f.coupling * s * t);
            trip->emplace_back(2 * i, 2 * i + 1, st);
            trip->emplace_back(2 * i + 1, 2 * i, st);
        }
    }
}

} // namespace detail

// Newton iteration with a Levenberg shift and backtracking on the discrete
// energy; boundary values of `init` are kept.
inline std::pair<Profile1D, SigmaReport> minimize_transition(const TransitionForm& f, Profile1D pr,
                                                            const TransitionOptions& opt = {})
{
    const int n = pr.n;
    if (n < 5) throw domain_error("minimize_transition: need at least 5 nodes");
    const double h = pr.h();
    const int N = 2 * n;

    std::vector<char> fixed(N, 0);
    fixed[0] = fixed[1] = fixed[N - 2] = fixed[N - 1] = 1;
    for (int i = 0; i < n; ++i) {
        if (!opt.pin1.empty() && opt.pin1[i]) fixed[2 * i] = 1;
        if (!opt.pin2.empty() && opt.pin2[i]) fixed[2 * i + 1] = 1;
    }

    SigmaReport rep;
    double E = transition_energy(pr, f);
    rep.energy_trace.push_back(E);
    Eigen::VectorXd g;
    std::vector<Eigen::Triplet<double>> trip;
    double mu = 0.0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    bool pattern = false;

    for (int it = 0; it < opt.max_iter; ++it) {
        detail::transition_gradient(pr, f, g, &trip);
        for (int k = 0; k < N; ++k)
            if (fixed[k]) g[k] = 0.0;
        // projected gradient: a clamped variable pushing outward is not a residual
        double gmax = 0.0;
        for (int k = 0; k < N; ++k) {
            const double v = k % 2 ? pr.eta2[k / 2] : pr.eta1[k / 2];
            if ((v <= 0.0 && g[k] > 0.0) || (v >= opt.cap && g[k] < 0.0)) continue;
            gmax = std::max(gmax, std::abs(g[k]));
        }
        if (gmax / h < opt.tol) {
            rep.converged = true;
            break;
        }

        std::vector<Eigen::Triplet<double>> t2;
        t2.reserve(trip.size() + N);
        for (const auto& t : trip)
            if (!fixed[t.row()] && !fixed[t.col()]) t2.push_back(t);
        for (int k = 0; k < N; ++k) t2.emplace_back(k, k, fixed[k] ? 1.0 : 0.0);
        Eigen::SparseMatrix<double> H(N, N);
        H.setFromTriplets(t2.begin(), t2.end());

        Eigen::VectorXd d;
        bool stepped = false, decrement_small = false;
        for (int attempt = 0; attempt < 40 && !stepped; ++attempt) {
            Eigen::SparseMatrix<double> A = H;
            if (mu > 0.0)
                for (int k = 0; k < N; ++k)
                    if (!fixed[k]) A.coeffRef(k, k) += mu * h;
            if (!pattern) {
                solver.analyzePattern(A);
                pattern = true;
            }
            solver.factorize(A);
            bool ok = solver.info() == Eigen::Success;
            if (ok) {
                ok = (solver.vectorD().array() > 0.0).all();
                if (ok) {
                    d = solver.solve(-g);
                    ok = solver.info() == Eigen::Success && g.dot(d) < 0.0;
                }
            }
            if (!ok) {
                mu = mu > 0.0 ? 4.0 * mu : 1e-6;
                continue;
            }
            // an unshifted Newton model predicting a gain below roundoff means we are done
            if (mu == 0.0 && -g.dot(d) < 1e-13 * std::max(1.0, std::abs(E))) {
                decrement_small = true;
                break;
            }

            double a = 1.0;
            for (int bt = 0; bt < 50; ++bt) {
                Profile1D trial = pr;
                for (int i = 0; i < n; ++i) {
                    trial.eta1[i] = std::clamp(pr.eta1[i] + a * d[2 * i], 0.0, opt.cap);
                    trial.eta2[i] = std::clamp(pr.eta2[i] + a * d[2 * i + 1], 0.0, opt.cap);
                }
                const double Et = transition_energy(trial, f);
                if (Et <= E + 1e-4 * a * g.dot(d) + 1e-14 * std::abs(E)) {
                    pr = std::move(trial);
                    E = Et;
                    stepped = true;
                    break;
                }
                a *= 0.5;
            }
            if (stepped) {
                mu = a == 1.0 ? mu / 4.0 : mu;
                if (mu < 1e-12) mu = 0.0;
            } else {
                mu = mu > 0.0 ? 4.0 * mu : 1e-6;
            }
        }
        if (decrement_small) {
            rep.converged = true;
            break;
        }
        if (!stepped) {
            // no descent left at this resolution of E: stationary up to roundoff
            if (gmax / h < 1e3 * opt.tol) {
                rep.converged = true;
                break;
            }
            throw solver_error("minimize_transition: no descent step found", rep.energy_trace);
        }
        rep.energy_trace.push_back(E);
        rep.iterations = it + 1;
    }
    if (!rep.converged) throw solver_error("minimize_transition: iteration budget exhausted", rep.energy_trace);

    rep.sigma = E;
    rep.equipartition_sup = equipartition_sup(pr, f);
    rep.tail_mass = tail_energy(pr, f);
    return {std::move(pr), std::move(rep)};
}

inline double default_half_width(const TransitionParams& p)
{
    return 20.0 * std::max(1.0, p.lambda) / std::min(1.0, std::sqrt(p.K - 1.0));
}

inline std::pair<Profile1D, SigmaReport> minimize_sigma(const TransitionParams& p, double L = 0.0, int n = 16001,
                                                       double tol = 1e-10)
{
    p.validate();
    if (L <= 0.0) L = default_half_width(p);
    TransitionOptions opt;
    opt.tol = tol;
    return minimize_transition(TransitionForm::standard(p), tanh_pair(p.lambda, L, n), opt);
}

// sigma / sqrt(K - 1) from the problem rescaled by x -> x sqrt(K - 1); L is in rescaled units.
inline std::pair<Profile1D, SigmaReport> minimize_sigma_rescaled(const TransitionParams& p, double L = 30.0,
                                                                int n = 12001, double tol = 1e-10)
{
    p.validate();
    TransitionOptions opt;
    opt.tol = tol;
    return minimize_transition(TransitionForm::rescaled(p), smooth_pair(L, n, std::max(1.0, p.lambda)), opt);
}

// Numerical sigma at infinite K: eta1 = 0 on x <= 0 and eta2 = 0 on x >= 0.
inline double split_sigma(double lambda, double L = 20.0, int n = 8001)
{
    TransitionParams p{lambda, 2.0};
    p.validate();
    Profile1D pr = tanh_pair(lambda, L, n);
    TransitionOptions opt;
    opt.pin1.assign(n, 0);
    opt.pin2.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        if (pr.x(i) <= 0.0) {
            opt.pin1[i] = 1;
            pr.eta1[i] = 0.0;
        }
        if (pr.x(i) >= 0.0) {
            opt.pin2[i] = 1;
            pr.eta2[i] = 0.0;
        }
    }
    // coupling never acts when the supports are disjoint
    return minimize_transition(TransitionForm{1.0, lambda * lambda, 1.0, 0.0}, pr, opt).second.sigma;
}

inline double sigma_infinity(double lambda)
{
    if (!(lambda > 0.0)) throw domain_error("sigma_infinity: lambda must be positive");
    return (1.0 + lambda) * 2.0 * std::sqrt(2.0) / 3.0;
}

inline double weak_segregation_limit(double lambda)
{
    if (!(lambda > 0.0 && lambda <= 1.0)) throw domain_error("weak_segregation_limit: lambda must lie in (0, 1]");
    // (1 - l^3)/(1 - l^2) written without the removable singularity at 1
    return 2.0 / 3.0 * (1.0 + lambda + lambda * lambda) / (1.0 + lambda);
}

inline double overlap_competitor_energy(double lambda, double K, double delta)
{
    if (!(delta >= 0.0)) throw domain_error("overlap_competitor_energy: delta must be nonnegative");
    auto f = [&](double x) {
        const double a = std::tanh(x / std::sqrt(2.0)), b = std::tanh((delta - x) / (std::sqrt(2.0) * lambda));
        return K * a * a * b * b - 0.5;
    };
    return sigma_infinity(lambda) + num::integrate(f, 0.0, delta);
}

inline double optimal_overlap(double lambda, double K) { return std::pow(12.0 * lambda * lambda / K, 0.25); }

// Polynomial majorant sigma_inf - delta/2 + K delta^5 / (120 lambda^2) of the overlap competitor.
inline double overlap_majorant(double lambda, double K, double delta)
{
    return sigma_infinity(lambda) - 0.5 * delta + K * std::pow(delta, 5) / (120.0 * lambda * lambda);
}

// Exact energy of the competitor eta1 = tanh(x/sqrt 2)_+, eta2 linear from 1 to 0 on [0, K^{-1/2}].
inline double small_lambda_competitor_energy(double lambda, double K)
{
    if (!(K > 1.0)) throw domain_error("small_lambda_competitor_energy: K must exceed 1");
    const double a = 1.0 / std::sqrt(K);
    auto f = [&](double x) {
        const double s = std::tanh(x / std::sqrt(2.0)), t = 1.0 - x / a;
        const double s2 = s * s, t2 = t * t;
        return 0.5 * (1.0 - t2) * (1.0 - t2) - 0.5 + K * s2 * t2;
    };
    return sigma_infinity(1.0) / 2.0 + lambda * lambda * std::sqrt(K) + num::integrate(f, 0.0, a);
}

inline double sigma_lower_bound(double lambda, double K)
{
    const double c = 32.0 * std::pow(2.0, 0.75) / std::pow(3.0, 1.5);
    return sigma_infinity(lambda) - c * std::sqrt(lambda) * std::pow(K - 1.0, -0.25) - 2.0 * std::sqrt(2.0 / K);
}

inline double sigma_upper_bound(double lambda, double K)
{
    return std::min(overlap_competitor_energy(lambda, K, optimal_overlap(lambda, K)),
                    small_lambda_competitor_energy(lambda, K));
}

// Value at 0 of the polynomial through (x_i, y_i).
inline double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.empty()) throw precondition_error("extrapolate_to_zero: bad samples");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double l = 1.0;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (j != i) l *= (0.0 - x[j]) / (x[i] - x[j]);
        s += l * y[i];
    }
    return s;
}

} // namespace bec
