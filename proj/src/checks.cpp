#include "skyrmion/checks.hpp"

#include "skyrmion/diagnostics.hpp"
#include "skyrmion/energy.hpp"
#include "skyrmion/errors.hpp"
#include "skyrmion/solver.hpp"
#include "skyrmion/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <sstream>

namespace skyrmion {

namespace {

Check le(std::string name, double v, double tol, std::string note = {}) {
    return {std::move(name), v, tol, "<=", 0.0, v <= tol, std::move(note)};
}
Check ge(std::string name, double v, double tol, std::string note = {}) {
    return {std::move(name), v, tol, ">=", 0.0, v >= tol, std::move(note)};
}
Check lt(std::string name, double v, double tol, std::string note = {}) {
    return {std::move(name), v, tol, "<", 0.0, v < tol, std::move(note)};
}
Check within(std::string name, double v, double lo, double hi, std::string note = {}) {
    return {std::move(name), v, lo, "in", hi, v >= lo && v <= hi, std::move(note)};
}
Check truth(std::string name, bool ok, double v, std::string note = {}) {
    return {std::move(name), v, 0.0, "==", 0.0, ok, std::move(note)};
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<double> geometric(double hi, double lo, int count) {
    std::vector<double> b;
    for (int k = 0; k < count; ++k)
        b.push_back(hi * std::pow(lo / hi, double(k) / (count - 1)));
    return b;
}

// theta' by complex step, independent of the closed form.
double theta_prime_oracle(double rho, double r) {
    const double h = 1e-30;
    std::complex<double> z(rho, h);
    return std::imag(2.0 * std::atan(2.0 * r / z)) / h;
}

Profile solve_at(double r, double beta, int n) {
    SolverConfig cfg;
    cfg.grid_points = n;
    return solve_continuation({r, beta}, cfg).profile;
}

// ---- criteria ----------------------------------------------------------------

std::vector<Check> identities(const SuiteOptions& opt) {
    std::vector<Check> out;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(0.0, 100.0);
    for (double r : {0.25, 1.0, 2.0}) {
        double e_sin = 0.0, e_der = 0.0, e_lin = 0.0, e_def = 0.0;
        for (int k = 0; k < 100; ++k) {
            double rho = 0.0;
            while (rho == 0.0)
                rho = 100.0 - uni(rng); // (0, 100]
            double th = theta(rho, r), d = rho * rho + 4.0 * r * r;
            e_sin = std::max(e_sin, std::abs(std::sin(th) - 4.0 * r * rho / d));
            double dp = theta_prime_oracle(rho, r);
            e_der = std::max(e_der, std::abs(dp + std::sin(th) / rho) / std::max(1.0, std::abs(dp)));
            e_lin = std::max(e_lin, std::abs(2.0 * r * std::sin(th) / rho + std::cos(th) - 1.0));
            e_def = std::max(e_def, std::abs(th - std::acos((rho * rho - 4.0 * r * r) / d)));
        }
        std::string tag = "r=" + fmt(r);
        out.push_back(le("sin_theta_closed_form " + tag, e_sin, 1e-12));
        out.push_back(le("theta_prime_equals_minus_sin_over_rho " + tag, e_der, 1e-12,
                         "complex-step derivative, relative to max(1, |theta'|)"));
        out.push_back(le("two_r_sin_over_rho_plus_cos_minus_one " + tag, e_lin, 1e-12));
        out.push_back(le("theta_matches_arccos_definition " + tag, e_def, 1e-12));
    }
    return out;
}

std::vector<Check> energy_anchors(const SuiteOptions&) {
    std::vector<Check> out;
    const ModelParams p{1.0, 0.0};
    const double radii[] = {50.0, 100.0, 200.0, 400.0};
    EnergyBreakdown e[4];
    for (int k = 0; k < 4; ++k) {
        auto g = make_grid(0.0, 32768, p.r, 2.0 * radii[k]);
        e[k] = energy(truncated_theta(g, p, radii[k]));
    }
    struct Anchor {
        const char* name;
        double EnergyBreakdown::*field;
        double target;
    };
    const Anchor anchors[] = {{"dirichlet", &EnergyBreakdown::dirichlet, 2.0},
                              {"dmi", &EnergyBreakdown::dmi, -8.0},
                              {"v_minus", &EnergyBreakdown::v_minus, 16.0}};
    for (const auto& a : anchors) {
        double e100 = e[1].*a.field, e200 = e[2].*a.field, e400 = e[3].*a.field;
        double limit = (4.0 * e400 - e200) / 3.0; // O(R^-2) extrapolation
        out.push_back(le(std::string(a.name) + "_limit_error", std::abs(limit - a.target), 1e-3,
                         "extrapolated limit " + fmt(limit) + " vs anchor " + fmt(a.target)));
        double ratio = (e100 - a.target) / (e200 - a.target);
        out.push_back(within(std::string(a.name) + "_error_ratio_R100_R200", ratio, 3.2, 4.8));
    }
    double d1 = e[1].v_plus - e[0].v_plus, d2 = e[2].v_plus - e[1].v_plus, d3 = e[3].v_plus - e[2].v_plus;
    double spread = std::max({d1, d2, d3}) / std::min({d1, d2, d3}) - 1.0;
    out.push_back(le("v_plus_log_increment_spread", spread, 0.1,
                     "increments " + fmt(d1) + ", " + fmt(d2) + ", " + fmt(d3) + "; 16 log 2 = " +
                         fmt(16.0 * std::log(2.0))));
    return out;
}

std::vector<Check> solver_large_beta(const SuiteOptions& opt) {
    std::vector<Check> out;
    const ModelParams p{1.0, 3.0};
    SolverConfig cfg;
    cfg.grid_points = opt.grid_points;
    auto grid = make_grid(p.beta, cfg.grid_points, p.r);
    auto rep = solve_newton(p, initial_guess(grid, p), cfg);
    const auto& f = rep.profile;
    out.push_back(le("newton_residual_sup", rep.residual_norm, 1e-10));
    out.push_back(truth("strictly_inside_zero_theta", strictly_inside(f), rep.strictly_inside ? 1.0 : 0.0));
    double deg = topological_degree(f);
    out.push_back(le("degree_minus_one", std::abs(deg + 1.0), 1e-9, "degree " + fmt(deg)));
    out.push_back(lt("total_energy_below_two", energy(f).total, 2.0));
    auto pg = minimize_constrained(p, Profile{grid, std::vector<double>(grid->size(), 0.0), p},
                                   theta_profile(grid, p), cfg);
    out.push_back(le("newton_vs_projected_gradient_xnorm", x_norm_diff(f, pg.profile.values), 1e-5,
                     "projected-gradient iterate before polish was " + fmt(pg.pg_distance) + " away"));
    return out;
}

std::vector<Check> difference_scaling(const SuiteOptions& opt) {
    std::vector<Check> out;
    SolverConfig cfg;
    cfg.grid_points = opt.grid_points;
    auto betas = geometric(0.4, 0.05, 8);
    for (double r : {0.5, 1.0}) {
        auto sw = difference_sweep(r, betas, cfg);
        out.push_back(within("xnorm_difference_exponent r=" + fmt(r), sw.fit.value, 0.85, 1.15,
                             "stderr " + fmt(sw.fit.stderr_)));
    }
    return out;
}

std::vector<Check> decay(const SuiteOptions& opt) {
    std::vector<Check> out;
    for (double beta : {0.5, 1.0}) {
        auto f = solve_at(1.0, beta, opt.grid_points);
        auto fit = decay_fit(f);
        double target = std::sqrt(2.0) * beta;
        out.push_back(le("decay_rate_vs_sqrt2_beta beta=" + fmt(beta), std::abs(fit.value / target - 1.0), 0.15,
                         "rate " + fmt(fit.value) + ", ratio to beta " + fmt(fit.value / beta)));
    }
    return out;
}

std::vector<Check> monotonicity(const SuiteOptions& opt) {
    std::vector<Check> out;
    for (double r : {0.5, 1.0})
        for (double beta : {0.5, 1.0}) {
            auto f = solve_at(r, beta, opt.grid_points);
            auto q = monotonicity_check(f);
            auto n = sign_quantity_check(f);
            std::string tag = "r=" + fmt(r) + " beta=" + fmt(beta);
            out.push_back(lt("max_Q_over_scale " + tag, q.max_ratio, -kStrictMargin, "max Q " + fmt(q.max_value)));
            out.push_back(lt("max_N_over_scale " + tag, n.max_ratio, -kStrictMargin, "max N " + fmt(n.max_value)));
        }
    return out;
}

std::vector<Check> stability(const SuiteOptions& opt) {
    std::vector<Check> out;
    auto f = solve_at(0.5, 0.5, opt.spectral_points);
    auto m0 = analyze_mode(f, 0);
    auto m1 = analyze_mode(f, 1);
    auto m2 = analyze_mode(f, 2);
    out.push_back(ge("lambda_min_A0", *m0.lambda_a, -1e-6));
    out.push_back(ge("lambda_min_B0", *m0.lambda_b, -1e-6, m0.b_near_zero ? "near-zero eigenvalue flagged" : ""));
    out.push_back(ge("lambda_min_H1", m1.lambda_min, -1e-6));
    out.push_back(ge("lambda_min_H2", m2.lambda_min, -1e-6));
    out.push_back(within("translation_eigenvalue_H1", m1.lambda_min, -1e-6, 1e-3));
    out.push_back(le("zero_mode_residual", *m1.zero_mode_residual, 1e-6));
    out.push_back(
        le("eigenpair_residual", std::max({m0.eig_residual, m1.eig_residual, m2.eig_residual}), 1e-8));
    auto probe = mode_monotonicity_probe(f, 4, 100, opt.seed);
    out.push_back(truth("mode_monotonicity_100_trials", probe.pass, probe.worst,
                        "worst normalized increment " + fmt(probe.worst)));
    out.push_back(le("mode_difference_form_defect", probe.difference_defect, 1e-6));
    // Operator identity at baseline and one doubling.
    auto fa = solve_at(0.5, 0.5, opt.grid_points);
    auto fb = solve_at(0.5, 0.5, 2 * opt.grid_points);
    double ea = operator_identity_error(fa), eb = operator_identity_error(fb);
    out.push_back(le("A0_sin_f_identity_error", ea, 5e-3));
    out.push_back(ge("A0_sin_f_identity_refinement_ratio", ea / eb, 3.2, "errors " + fmt(ea) + " -> " + fmt(eb)));
    // Harmonic map at beta = 0: A^(0)[sin theta] = 8 r^2.
    const ModelParams p0{1.0, 0.0};
    auto g0 = make_grid(0.0, opt.spectral_points, p0.r);
    auto th = theta_profile(g0, p0);
    ModeOperator a0(0, th);
    std::vector<double> s(th.size()), z(th.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = std::sin(th.values[i]);
    out.push_back(le("A0_of_sin_theta_minus_8", std::abs(a0.form(s, z) - 8.0), 1e-3, "value " + fmt(a0.form(s, z))));
    return out;
}

std::vector<Check> instability(const SuiteOptions& opt) {
    std::vector<Check> out;
    auto f = solve_at(1.5, 0.05, opt.grid_points);
    double lo = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (int n = 0; n <= 3; ++n) {
        auto m = analyze_mode(f, n);
        if (m.lambda_min < lo)
            lo = m.lambda_min, arg = n;
    }
    out.push_back(lt("min_lambda_modes_0_to_3", lo, -1e-3, "attained in mode " + std::to_string(arg)));
    return out;
}

std::vector<RadialFunction> bump_sources() {
    std::vector<RadialFunction> src;
    for (double c : {0.5, 2.0, 8.0, 32.0}) {
        double sig = std::max(0.5, c / 4.0);
        src.push_back([c, sig](double x) { return std::exp(-(x - c) * (x - c) / (2.0 * sig * sig)); });
    }
    return src;
}

std::vector<Check> resolvent(const SuiteOptions& opt) {
    std::vector<Check> out;
    const double r = 1.0;
    auto betas = geometric(0.3, 0.02, 8);
    auto corr = solve_at(r, 0.1, opt.grid_points);
    RadialFunction zero = [](double) { return 0.0; };
    RadialFunction xi = [corr, r](double x) { return interpolate(corr, x) - theta(x, r); };
    auto sources = bump_sources();
    for (int which = 0; which < 2; ++which) {
        const auto& fn = which ? xi : zero;
        std::string tag = which ? "xi=solved(beta=0.1)" : "xi=0";
        for (double s : {0.0, 1.0}) {
            auto res = resolvent_probe(r, fn, betas, s, sources, opt.grid_points);
            out.push_back(le("growth_exponent s=" + fmt(s) + " " + tag, res.fit.value, s == 0.0 ? 1.1 : 0.1));
            double worst = std::numeric_limits<double>::infinity();
            for (const auto& smp : res.samples)
                worst = std::min(worst, smp.ritz / (smp.beta * smp.beta));
            out.push_back(ge("smallest_ritz_over_beta2 s=" + fmt(s) + " " + tag, worst, 1.0 - 1e-6));
        }
    }
    return out;
}

std::vector<Check> f_identity(const SuiteOptions& opt) {
    std::vector<Check> out;
    auto a = solve_at(1.0, 0.5, opt.grid_points);
    auto b = solve_at(1.0, 0.5, 2 * opt.grid_points);
    double ea = f_identity_discrepancy(a), eb = f_identity_discrepancy(b);
    out.push_back(le("F_prime_identity_discrepancy", ea, 5e-3));
    out.push_back(ge("F_prime_identity_refinement_ratio", ea / eb, 3.2, "errors " + fmt(ea) + " -> " + fmt(eb)));
    return out;
}

// ---- supplementary -----------------------------------------------------------

std::vector<Check> supplementary_identities(const SuiteOptions&) {
    std::vector<Check> out;
    double worst = 0.0;
    for (const auto& p : {ModelParams{1.0, 1.0}, ModelParams{0.3, 0.2}, ModelParams{2.0, 4.0}}) {
        auto hk = params_to_hk(p);
        double lam = std::sqrt((hk.h - hk.k) / 2.0);
        auto back = hk_to_params(hk, p.r * lam);
        worst = std::max({worst, std::abs(back.r - p.r), std::abs(back.beta - p.beta)});
    }
    out.push_back(le("hk_round_trip", worst, 1e-14));
    auto hk = params_to_hk({1.0, 1.0});
    out.push_back(le("hk_of_r1_beta1_is_2_0", std::abs(hk.h - 2.0) + std::abs(hk.k), 1e-15));
    return out;
}

std::vector<Check> supplementary_energy(const SuiteOptions& opt) {
    std::vector<Check> out;
    // Closed form of the potential term on the harmonic map: (1/2) int (1 - cos theta)^2 = 4 r^2.
    for (double r : {0.5, 1.0}) {
        auto g = make_grid(0.0, 32768, r, 800.0);
        auto e = energy(truncated_theta(g, {r, 0.0}, 400.0));
        out.push_back(le("v_minus_of_theta_equals_4r2 r=" + fmt(r), std::abs(e.v_minus - 4.0 * r * r), 1e-3,
                         "value " + fmt(e.v_minus)));
        double e0 = e.dirichlet + r * e.dmi + e.v_minus;
        out.push_back(le("E0_of_theta_equals_2_minus_4r2 r=" + fmt(r), std::abs(e0 - (2.0 - 4.0 * r * r)), 1e-3));
    }
    auto grid = make_grid(1.0, opt.grid_points, 1.0);
    auto dil = Profile{grid, {}, {1.0, 1.0}};
    for (std::size_t i = 0; i < grid->size(); ++i)
        dil.values.push_back(theta(1.2 * grid->node(i), 1.0));
    out.push_back(ge("convexity_gap_dilated_theta", convexity_gap(dil), 0.0));
    // theta(R) ~ 4r/R leaves 4r^2/R^2 in the reduced formula, so go out to R = 2000
    auto far = make_grid(0.05, opt.grid_points, 1.0, 2000.0);
    out.push_back(le("degree_of_theta", std::abs(topological_degree(theta_profile(far, {1.0, 0.05})) + 1.0), 1e-5));
    return out;
}

std::vector<Check> supplementary_solver(const SuiteOptions& opt) {
    std::vector<Check> out;
    SolverConfig cfg;
    cfg.grid_points = opt.grid_points;
    auto rep = solve_continuation({1.0, 0.05}, cfg);
    out.push_back(le("continuation_r1_beta0.05_residual", rep.residual_norm, 1e-10,
                     std::to_string(rep.path.size()) + " steps"));
    out.push_back(truth("continuation_r1_beta0.05_inside", rep.strictly_inside, rep.strictly_inside));
    auto f = rep.profile;
    auto fv = first_variation(f), el = el_residual(f);
    double diff = 0.0;
    for (std::size_t i = 0; i < fv.size(); ++i)
        diff = std::max(diff, std::abs(fv[i] - el[i]));
    out.push_back(le("first_variation_equals_el_residual", diff, 1e-14));
    return out;
}

std::vector<Check> supplementary_shape(const SuiteOptions& opt) {
    std::vector<Check> out;
    for (double r : {0.5, 1.0}) {
        auto g = make_grid(1.0, opt.grid_points, r);
        double d = origin_derivative(theta_profile(g, {r, 1.0}));
        out.push_back(le("origin_derivative_theta r=" + fmt(r), std::abs(d + 1.0 / r), 1e-6, "value " + fmt(d)));
    }
    auto a = solve_at(1.0, 0.5, opt.grid_points), b = solve_at(1.0, 0.5, 2 * opt.grid_points);
    double da = origin_derivative(a), db = origin_derivative(b);
    out.push_back(le("origin_derivative_refinement_change", std::abs(da / db - 1.0), 0.02));
    out.push_back(le("half_angle_identity", half_angle_identity_error(a), 1e-10));
    return out;
}

std::vector<Check> supplementary_spectral(const SuiteOptions& opt) {
    std::vector<Check> out;
    auto f = solve_at(0.5, 0.5, opt.grid_points);
    auto fa = factorized_a0(f, [](double x) { return std::cos(x / (1.0 + x)) + 0.3 * std::sin(2.0 * x / (1.0 + x)); });
    out.push_back(le("A0_ground_state_transform_exact", std::abs(fa.matrix_value - fa.discrete_value) /
                                                             std::abs(fa.matrix_value), 1e-10));
    out.push_back(le("A0_factorized_form_quadrature", std::abs(fa.matrix_value - fa.continuous_value) /
                                                          std::abs(fa.matrix_value), 1e-4));
    auto probe = mode_monotonicity_probe(f, 4, 10, opt.seed);
    out.push_back(le("coefficient_bound_three_halves", probe.coefficient_max, 1.5));
    try {
        instability_direction(f);
        out.push_back(truth("no_negative_direction_r0.5", false, 0.0));
    } catch (const NumericalError& e) {
        out.push_back(truth("no_negative_direction_r0.5", true, 1.0, e.what()));
    }
    auto g = make_grid(0.1, opt.grid_points, 1.0);
    LinearizedOperator op(g, [](double) { return 0.0; }, 0.1, 1.0);
    out.push_back(le("splitting_potential_identity", op.splitting_defect(), 1e-12));
    return out;
}

std::vector<Check> supplementary_resolvent(const SuiteOptions& opt) {
    std::vector<Check> out;
    const double r = 1.0;
    auto betas = geometric(0.3, 0.02, 8);
    std::vector<RadialFunction> src{[r](double x) {
        double t = theta(x, r);
        return std::sin(t) * (1.0 + std::cos(t));
    }};
    auto res = resolvent_probe(r, [](double) { return 0.0; }, betas, 0.9, src, opt.grid_points);
    std::vector<double> x, y;
    for (const auto& smp : res.samples) {
        x.push_back(std::log(1.0 / smp.beta));
        y.push_back(std::log(smp.solution_norms[0]));
    }
    auto fit = fit_line(x, y);
    out.push_back(le("theta_source_solution_growth_exponent", fit.value, 1.1));
    return out;
}

} // namespace

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {1, "identities", "harmonic-map identities", 1.0, identities},
        {2, "energy", "truncated harmonic-map energy anchors", 5.0, energy_anchors},
        {3, "solver", "large-beta solve and cross-method agreement", 10.0, solver_large_beta},
        {4, "solver", "distance-to-harmonic-map scaling", 120.0, difference_scaling},
        {5, "shape", "exponential tail rate", 30.0, decay},
        {6, "shape", "monotonicity and sign quantity", 30.0, monotonicity},
        {7, "spectral", "spectral stability at r = 0.5", 60.0, stability},
        {8, "spectral", "instability at r = 1.5", 60.0, instability},
        {9, "resolvent", "uniform resolvent growth", 120.0, resolvent},
        {10, "shape", "F' structured identity", 10.0, f_identity},
    };
    return list;
}

std::vector<Check> supplementary_checks(const std::string& suite, const SuiteOptions& opt) {
    if (suite == "identities")
        return supplementary_identities(opt);
    if (suite == "energy")
        return supplementary_energy(opt);
    if (suite == "solver")
        return supplementary_solver(opt);
    if (suite == "shape")
        return supplementary_shape(opt);
    if (suite == "spectral")
        return supplementary_spectral(opt);
    if (suite == "resolvent")
        return supplementary_resolvent(opt);
    throw ValidationError("unknown suite '" + suite + "'");
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"identities", "energy", "solver", "shape",
                                                   "spectral", "resolvent", "all"};
    return names;
}

CriterionResult run_criterion(const Criterion& c, const SuiteOptions& opt) {
    CriterionResult out;
    out.id = c.id;
    out.title = c.title;
    auto t0 = std::chrono::steady_clock::now();
    try {
        out.checks = c.run(opt);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.checks.push_back(le("runtime_seconds", out.seconds, c.time_limit_s));
    out.pass = out.error.empty();
    for (const auto& ch : out.checks)
        out.pass = out.pass && ch.pass;
    return out;
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& opt) {
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ValidationError("unknown suite '" + name + "'; expected one of identities, energy, solver, shape, "
                              "spectral, resolvent, all");
    SuiteResult out;
    out.suite = name;
    for (const auto& c : criteria())
        if (name == "all" || c.suite == name)
            out.criteria.push_back(run_criterion(c, opt));
    for (const auto& s : names) {
        if (s == "all" || (name != "all" && s != name))
            continue;
        try {
            for (auto& ch : supplementary_checks(s, opt)) {
                ch.name = s + "." + ch.name;
                out.supplementary.push_back(std::move(ch));
            }
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception& e) {
            out.supplementary.push_back(truth(s + ".supplementary_run", false, 0.0, e.what()));
        }
    }
    out.pass = true;
    for (const auto& c : out.criteria)
        out.pass = out.pass && c.pass;
    for (const auto& ch : out.supplementary)
        out.pass = out.pass && ch.pass;
    return out;
}

} // namespace skyrmion
