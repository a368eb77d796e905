#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "bec/cli/config.hpp"
#include "bec/cli/report.hpp"
#include "bec/gp_field.hpp"
#include "bec/interface_1d.hpp"
#include "bec/parallel.hpp"
#include "bec/regime.hpp"
#include "bec/shape_limit.hpp"
#include "bec/tf_core.hpp"

namespace bec::cli {

namespace detail {

inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline void maybe_plot(const ExperimentConfig& cfg, const OutputDir& out, RunReport& rep, const std::string& name,
                       const std::string& csv_path, const std::string& x, const std::vector<std::string>& ys,
                       bool logx = false)
{
    if (!cfg.plot) return;
    const std::string csv = std::filesystem::path(csv_path).filename().string();
    out.write(name, plot_script(csv, x, ys, logx), rep);
}

// Interface radius from the slope of the interior objective.
inline double objective_argmin(const TFParams& p)
{
    auto slope = [&](double t) {
        const double d = 1e-6 * t;
        return (interior_objective(t + d, p) - interior_objective(t - d, p)) / (2.0 * d);
    };
    return num::find_root(slope, 1e-6, 1.0 - 1e-6, 1e-15);
}

} // namespace detail

inline void run_tf(const ExperimentConfig& cfg, const OutputDir& out, RunReport& rep)
{
    const TFParams p{cfg.real("alpha1"), cfg.real("alpha2"), cfg.real("g"), cfg.real("K")};
    const TFProfile t = tf_profile(p);
    const RadialRule rule = tf_rule(t, cfg.real("h"));
    const RadialPair pair = tf_density(t, p);
    const double E = tf_energy(pair, p, rule);
    const double rel = std::abs(E - t.E0) / t.E0;
    const double tstar = detail::objective_argmin(p);
    const double t0 = t.r0 * t.r0 / (t.r1 * t.r1);

    rep.values = {{"r0", t.r0},
                  {"r1", t.r1},
                  {"R1", t.R1},
                  {"R2", t.R2},
                  {"E0", t.E0},
                  {"E_quadrature", E},
                  {"sigma_plus", t.sigma_plus},
                  {"sigma_minus", t.sigma_minus},
                  {"argmin_t", tstar}};
    rep.check("energy_matches_closed_form", rel <= 1e-6, rel, 1e-6);
    rep.check("argmin_matches_closed_form", std::abs(tstar - t0) <= 1e-8, std::abs(tstar - t0), 1e-8);
    const double gap = std::abs(t.sigma_plus / t.sigma_minus - std::sqrt(p.g)) / std::sqrt(p.g);
    rep.check("gap_identity", gap <= 1e-13, gap, 1e-13);

    Table prof{{"r", "rho1", "rho2"}, {}};
    const RadialSamples s = sample(pair, rule);
    for (std::size_t i = 0; i < rule.r.size(); ++i) prof.add({rule.r[i], s.rho1[i], s.rho2[i]});
    const std::string path = out.write("profile.csv", prof, rep);
    detail::maybe_plot(cfg, out, rep, "profile_plot.py", path, "r", {"rho1", "rho2"});

    if (cfg.integer("stability")) {
        const StabilitySummary st = stability_sweep(p, cfg.seed, static_cast<int>(cfg.integer("n-random")), cfg.real("h"));
        rep.values["stability_sup_annular"] = st.sup_annular;
        rep.values["stability_sup_swap"] = st.sup_swap;
        rep.values["stability_sup_random"] = st.sup_random;
        rep.check("stability_ratio_finite", std::isfinite(st.sup()), st.sup(), std::numeric_limits<double>::infinity());
        Table sw{{"width", "ratio_squared", "ratio_linear"}, {}};
        for (std::size_t i = 0; i < st.swap_widths.size(); ++i) sw.add({st.swap_widths[i], st.swap_ratio[i], st.swap_linear[i]});
        const std::string sp = out.write("swap.csv", sw, rep);
        detail::maybe_plot(cfg, out, rep, "swap_plot.py", sp, "width", {"ratio_squared", "ratio_linear"}, true);
    }
}

inline void run_gp(const ExperimentConfig& cfg, const OutputDir& out, RunReport& rep)
{
    GPParams p;
    p.epsilon = cfg.real("epsilon");
    p.g = cfg.real("g");
    p.K = cfg.real("K");
    p.alpha1 = cfg.real("alpha1");
    p.alpha2 = cfg.real("alpha2");
    const std::string pot = cfg.at("potential");
    if (pot == "harmonic")
        p.potential = Potential::harmonic;
    else if (pot == "none")
        p.potential = Potential::none;
    else
        throw usage_error("key 'potential': expected harmonic or none");
    p.validate();
    const Grid2D grid = gp_grid(p, static_cast<int>(cfg.integer("n")));
    MinimizeOptions opt;
    opt.tol = cfg.real("tol");
    opt.max_iter = static_cast<int>(cfg.integer("max-iter"));
    const GPResult r = minimize_gp(p, grid, std::nullopt, opt);
    const MinimizeReport& m = r.report;

    rep.values = {{"final_energy", m.final_energy},
                  {"iterations", m.iterations},
                  {"gradient_norm", m.gradient_norm},
                  {"mass_error_1", m.mass_errors.first},
                  {"mass_error_2", m.mass_errors.second},
                  {"h", grid.h}};
    if (p.potential == Potential::harmonic && p.alpha1 > 0 && p.g > 1 && p.K >= std::sqrt(p.g)) {
        const TFParams tp{p.alpha1, p.alpha2, p.g, p.K};
        rep.values["tf_distance"] = tf_distance(r.eta1, r.eta2, tp);
        rep.values["tf_energy"] = tf_profile(tp).E0;
    }
    rep.check("converged", m.converged, m.gradient_norm, opt.tol);
    double rise = 0.0;
    for (std::size_t i = 1; i < m.energy_trace.size(); ++i)
        rise = std::max(rise, m.energy_trace[i] - m.energy_trace[i - 1]);
    const double slack = 1e-12 * std::abs(m.final_energy);
    rep.check("energy_monotone", rise <= slack, rise, slack);
    const double merr = std::max(m.mass_errors.first, m.mass_errors.second);
    rep.check("mass_conserved", merr <= 1e-10, merr, 1e-10);

    Table f{{"x", "y", "eta1", "eta2"}, {}};
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) f.add({grid.x(i), grid.y(j), r.eta1(i, j), r.eta2(i, j)});
    out.write("fields.csv", f, rep);
    Table tr{{"iteration", "energy"}, {}};
    for (std::size_t i = 0; i < m.energy_trace.size(); ++i) tr.add({static_cast<long>(i), m.energy_trace[i]});
    const std::string tp = out.write("energy.csv", tr, rep);
    detail::maybe_plot(cfg, out, rep, "energy_plot.py", tp, "iteration", {"energy"});
}

inline void run_sigma1d(const ExperimentConfig& cfg, const OutputDir& out, RunReport& rep)
{
    const TransitionParams p{cfg.real("lambda"), cfg.real("K")};
    p.validate();
    const auto [pr, s] = minimize_sigma(p, cfg.real("L"), static_cast<int>(cfg.integer("n")), cfg.real("tol"));
    const double lo = sigma_lower_bound(p.lambda, p.K), hi = sigma_upper_bound(p.lambda, p.K);
    rep.values = {{"sigma", s.sigma},
                  {"lower_bound", lo},
                  {"upper_bound", hi},
                  {"sigma_infinity", sigma_infinity(p.lambda)},
                  {"equipartition_sup", s.equipartition_sup},
                  {"tail_energy", s.tail_mass},
                  {"iterations", s.iterations},
                  {"half_width", pr.L}};
    rep.check("converged", s.converged, s.iterations, 0);
    rep.check("bracketed", lo <= s.sigma && s.sigma <= hi, s.sigma, hi - lo);
    rep.check("equipartition", s.equipartition_sup < 1e-4, s.equipartition_sup, 1e-4);

    Table t{{"x", "eta1", "eta2"}, {}};
    for (int i = 0; i < pr.n; ++i) t.add({pr.x(i), pr.eta1[i], pr.eta2[i]});
    const std::string path = out.write("profile.csv", t, rep);
    detail::maybe_plot(cfg, out, rep, "profile_plot.py", path, "x", {"eta1", "eta2"});
}

inline void run_sigma_sweep(const ExperimentConfig& cfg, const OutputDir& out, RunReport& rep)
{
    const double lambda = cfg.real("lambda");
    const std::vector<double> Ks = cfg.reals("K-list");
    const int n = static_cast<int>(cfg.integer("n"));
    for (double K : Ks) TransitionParams{lambda, K}.validate();
    const auto results = parallel_map<SigmaReport>(
        Ks.size(), [&](std::size_t i) { return minimize_sigma({lambda, Ks[i]}, 0.0, n).second; },
        static_cast<unsigned>(cfg.integer("workers")));

    Table t{{"K", "sigma", "lower_bound", "upper_bound", "sigma_infinity", "sigma_over_sigma_infinity",
             "sigma_over_sqrt_K_minus_1", "weak_limit", "equipartition_sup"},
            {}};
    const double sinf = sigma_infinity(lambda);
    const double weak = weak_segregation_limit(lambda);
    for (std::size_t i = 0; i < Ks.size(); ++i) {
        const double K = Ks[i], s = results[i].sigma;
        const double lo = sigma_lower_bound(lambda, K), hi = sigma_upper_bound(lambda, K);
        t.add({K, s, lo, hi, sinf, s / sinf, s / std::sqrt(K - 1.0), weak, results[i].equipartition_sup});
        const std::string tag = "K=" + detail::fmt(K);
        rep.check("bracketed " + tag, lo <= s && s <= hi, s, hi - lo);
        rep.check("equipartition " + tag, results[i].equipartition_sup < 1e-4, results[i].equipartition_sup, 1e-4);
    }
    rep.values = {{"sigma_infinity", sinf}, {"weak_limit", weak}};
    const std::string path = out.write("sweep.csv", t, rep);
    detail::maybe_plot(cfg, out, rep, "sweep_plot.py", path, "K", {"sigma", "lower_bound", "upper_bound"}, true);
}

inline void run_shape_stability(const ExperimentConfig& cfg, const OutputDir& out, RunReport& rep)
{
    const double a = cfg.real("R-min"), b = cfg.real("R-max");
    const int steps = static_cast<int>(cfg.integer("R-steps"));
    const int kmax = static_cast<int>(cfg.integer("k-max"));
    const double amp = cfg.real("t");
    if (!(a > 1.0 && b > a)) throw usage_error("keys 'R-min', 'R-max': need 1 < R-min < R-max");
    if (steps < 2 || kmax < 2) throw usage_error("keys 'R-steps', 'k-max': need at least 2");

    Table t{{"R"}, {}};
    for (int k = 0; k <= kmax; ++k) t.header.push_back("coef_k" + std::to_string(k));
    t.header.insert(t.header.end(), {"form_k2", "direct_k2", "relative_error_k2"});

    double worst = 0.0, prevR = 0.0, prevc = 0.0, crossing = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < steps; ++i) {
        const double R = a + (b - a) * i / (steps - 1);
        const WeightParams w{R, 0.0};
        std::vector<Cell> row{R};
        for (int k = 0; k <= kmax; ++k) row.push_back(mode_coefficient(w, k));
        const StarShape s = volume_matched(StarShape::single_mode(1.0, 2, amp), w, ball_volume(1.0, w), 1024);
        const double form = fuglede_form(w, s);
        const double direct = weighted_perimeter(s, w, 1024) - ball_perimeter(1.0, w);
        const double c2 = mode_coefficient(w, 2);
        // relative error is meaningless where the form vanishes
        const double relerr = std::abs(c2) > 0.05 ? std::abs(direct - form) / std::abs(form) : 0.0;
        worst = std::max(worst, relerr);
        row.insert(row.end(), {form, direct, relerr});
        t.add(row);
        if (i > 0 && std::isnan(crossing) && (prevc < 0) != (c2 < 0))
            crossing = prevR + (R - prevR) * prevc / (prevc - c2);
        prevR = R;
        prevc = c2;
    }
    const double exact = mode_threshold_radii(2).second;
    rep.values = {{"k2_threshold_exact", exact}, {"k2_sign_change", crossing}, {"max_relative_error_k2", worst}};
    rep.check("fuglede_second_order", worst <= 0.1, worst, 0.1);
    if (a < exact && exact < b) {
        const double err = std::isnan(crossing) ? std::numeric_limits<double>::infinity() : std::abs(crossing - exact);
        rep.check("k2_sign_change_location", err <= 1e-3, err, 1e-3);
    }
    const std::string path = out.write("diagram.csv", t, rep);
    detail::maybe_plot(cfg, out, rep, "diagram_plot.py", path, "R", {"coef_k2", "coef_k3"});
}

inline void run_shape_regimes(const ExperimentConfig& cfg, const OutputDir& out, RunReport& rep)
{
    WeightParams w{cfg.real("R"), 0.0};
    w.validate();
    const double frac = cfg.real("alpha-frac");
    if (!(frac > 0.0 && frac < 1.0)) throw usage_error("key 'alpha-frac': must lie in (0, 1)");
    w.alpha1 = frac * w.alpha_bar();
    RegimeOptions opt;
    opt.sigma_K = cfg.real("sigma-K");
    const std::string conv = cfg.at("convention");
    if (conv == "half")
        opt.convention = XiConvention::half;
    else if (conv == "full")
        opt.convention = XiConvention::full;
    else
        throw usage_error("key 'convention': expected half or full");
    opt.families = cfg.words("families");
    const int steps = static_cast<int>(cfg.integer("xi-steps"));
    const double xmax = cfg.real("xi-max");
    if (steps < 2 || !(xmax > 0.0)) throw usage_error("keys 'xi-steps', 'xi-max': need >= 2 steps and xi-max > 0");

    std::vector<double> xis;
    for (int i = 0; i < steps; ++i) xis.push_back(xmax * i / (steps - 1));
    const auto lib = competitor_library(w, opt);
    RegimeSweep sw;
    Table v{{"xi", "verdict", "best_radial", "best_nonradial", "winner"}, {}};
    Table fam{{"xi", "family", "label", "G"}, {}};
    sw = regime_sweep(w, xis, opt);
    for (const auto& r : sw.verdicts) {
        v.add({r.xi, std::string(r.symmetry_broken ? "symmetry broken" : "ball optimal among tested"), r.best_radial,
               r.best_nonradial, r.winner});
        for (const auto& f : r.families) fam.add({r.xi, f.family, f.label, f.G});
    }

    rep.values = {{"alpha1", w.alpha1},
                  {"alpha_bar", w.alpha_bar()},
                  {"competitors", static_cast<double>(lib.size())},
                  {"flip_xi", sw.flip_xi},
                  {"ball_crossover_xi", sw.ball_crossover}};
    rep.check("symmetry_broken_at_xi0", sw.verdicts.front().symmetry_broken, sw.verdicts.front().best_nonradial,
              sw.verdicts.front().best_radial);
    rep.check("ball_optimal_beyond_threshold", std::isfinite(sw.flip_xi) && !sw.verdicts.back().symmetry_broken,
              sw.flip_xi, xmax);
    rep.check("verdict_monotone", sw.monotone, sw.monotone, 1);

    // isoperimetric ratio: tangent balls and the library, restricted to V <= alpha_bar / 2
    double tmin = std::numeric_limits<double>::infinity(), tmax = 0.0, emp = tmin;
    Table iso{{"radius", "V", "F", "ratio"}, {}};
    for (double s = 0.5 * w.R; s > 1e-3 * w.R; s /= 1.5) {
        const RegionValues rv = tangent_ball_values(s, w);
        if (rv.V > w.alpha_bar() / 2) continue;
        const double q = isoperimetric_ratio(rv.F, rv.V, w);
        iso.add({s, rv.V, rv.F, q});
        tmin = std::min(tmin, q);
        tmax = std::max(tmax, q);
    }
    emp = tmin;
    for (const auto& c : lib)
        if (c.values.V <= w.alpha_bar() / 2) emp = std::min(emp, isoperimetric_ratio(c.values.F, c.values.V, w));
    rep.values["tangent_ratio_min"] = tmin;
    rep.values["tangent_ratio_max"] = tmax;
    rep.values["isoperimetric_empirical_min"] = emp;
    rep.check("tangent_ratio_band", tmax / tmin <= 10.0, tmax / tmin, 10.0);
    rep.check("isoperimetric_min_positive", emp > 0.0, emp, 0.0);

    const int samples = static_cast<int>(cfg.integer("samples"));
    const ShapeConstants c1 = shape_constants(w, samples, cfg.seed), c2 = shape_constants(w, 2 * samples, cfg.seed);
    rep.values["gap_constant_c"] = c2.min_gap_ratio;
    rep.values["deficit_constant_C"] = c2.max_deficit_ratio;
    rep.check("gap_constant_positive", c2.min_gap_ratio > 0.0, c2.min_gap_ratio, 0.0);
    rep.check("deficit_constant_finite", std::isfinite(c2.max_deficit_ratio), c2.max_deficit_ratio, 0.0);
    const double dc = std::abs(c2.min_gap_ratio / c1.min_gap_ratio - 1.0);
    const double dC = std::abs(c2.max_deficit_ratio / c1.max_deficit_ratio - 1.0);
    rep.check("gap_constant_stable", dc <= 0.2, dc, 0.2);
    rep.check("deficit_constant_stable", dC <= 0.2, dC, 0.2);

    const std::string path = out.write("verdicts.csv", v, rep);
    out.write("families.csv", fam, rep);
    out.write("tangent.csv", iso, rep);
    detail::maybe_plot(cfg, out, rep, "verdicts_plot.py", path, "xi", {"best_radial", "best_nonradial"});
}

inline void run_crossover(const ExperimentConfig& cfg, const OutputDir& out, RunReport& rep)
{
    const GPParams p = crossover_params(cfg.real("epsilon"), cfg.real("xi"), cfg.real("K"), cfg.real("alpha1"),
                                        cfg.real("alpha2"));
    p.validate();
    const auto rows = lm_check(p, static_cast<int>(cfg.integer("n")), cfg.reals("tols"));
    Table t{{"tol", "iterations", "el_norm", "residual", "ratio", "F"}, {}};
    bool decreasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        t.add({r.tol, static_cast<long>(r.iterations), r.el_norm, r.residual, r.residual / r.el_norm, r.F});
        rep.check("residual_within_10x_el tol=" + detail::fmt(r.tol), r.residual <= 10 * r.el_norm, r.residual,
                  10 * r.el_norm);
        if (i > 0 && !(r.residual < rows[i - 1].residual)) decreasing = false;
    }
    rep.check("residual_decreasing", decreasing, rows.back().residual, rows.front().residual);
    rep.values = {{"g", p.g}};
    const std::string path = out.write("splitting.csv", t, rep);
    detail::maybe_plot(cfg, out, rep, "splitting_plot.py", path, "tol", {"el_norm", "residual"}, true);
}

inline RunReport run(const ExperimentConfig& cfg)
{
    RunReport rep;
    rep.command = cfg.command;
    rep.config = cfg.parameters;
    rep.config["out"] = cfg.output_dir;
    const auto t0 = std::chrono::steady_clock::now();
    const OutputDir out(cfg.output_dir, cfg.command);
    try {
        if (cfg.command == "tf") run_tf(cfg, out, rep);
        else if (cfg.command == "gp-minimize") run_gp(cfg, out, rep);
        else if (cfg.command == "sigma1d") run_sigma1d(cfg, out, rep);
        else if (cfg.command == "sigma-sweep") run_sigma_sweep(cfg, out, rep);
        else if (cfg.command == "shape-stability") run_shape_stability(cfg, out, rep);
        else if (cfg.command == "shape-regimes") run_shape_regimes(cfg, out, rep);
        else if (cfg.command == "crossover-check") run_crossover(cfg, out, rep);
        else throw usage_error("unknown command '" + cfg.command + "'");
    } catch (const usage_error&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(cfg.command + ": " + e.what());
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.files.push_back(out.path("report.json"));
    out.write_raw("report.json", to_json(rep).dump(2) + "\n");
    return rep;
}

} // namespace bec::cli
