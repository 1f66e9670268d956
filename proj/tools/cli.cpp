#include "cli.hpp"

#include "skyrmion/checks.hpp"
#include "skyrmion/diagnostics.hpp"
#include "skyrmion/energy.hpp"
#include "skyrmion/errors.hpp"
#include "skyrmion/parallel.hpp"
#include "skyrmion/solver.hpp"
#include "skyrmion/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace skyrmion::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<double> parse_doubles(const std::string& s, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ValidationError(std::string("--") + what + ": cannot parse '" + item + "'");
        }
        if (used != item.size())
            throw ValidationError(std::string("--") + what + ": cannot parse '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<int> parse_ints(const std::string& s, const char* what) {
    std::vector<int> out;
    for (double v : parse_doubles(s, what)) {
        if (v != std::floor(v))
            throw ValidationError(std::string("--") + what + ": expected integers");
        out.push_back(int(v));
    }
    return out;
}

// Primary output and JSON sidecar; "-" sends them to stdout and stderr.
struct Sink {
    const RunConfig& cfg;
    std::ostream& out;
    std::ostream& err;

    std::string sidecar_path() const {
        auto dot = cfg.out.rfind('.');
        auto slash = cfg.out.rfind('/');
        if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
            return cfg.out.substr(0, dot) + ".json";
        return cfg.out + ".json";
    }

    void write(const std::string& path, const std::string& text, std::ostream& fallback) const {
        if (path == "-") {
            fallback << text;
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw ValidationError("cannot open '" + path + "' for writing");
        f << text;
        if (!f)
            throw NumericalError("write to '" + path + "' failed");
    }

    void primary(const std::string& text) const { write(cfg.out, text, out); }
    void sidecar(const json& j) const {
        write(cfg.out == "-" ? "-" : sidecar_path(), j.dump(2) + "\n", cfg.out == "-" ? err : out);
    }
    void document(const json& j) const { write(cfg.out, j.dump(2) + "\n", out); }
};

SolverConfig solver_config(const RunConfig& cfg) {
    SolverConfig s;
    s.grid_points = cfg.grid_points;
    s.rmax = cfg.rmax;
    return s;
}

double single(const std::vector<double>& v, const char* what) {
    if (v.size() != 1)
        throw ValidationError(std::string("--") + what + " takes exactly one value for this command");
    return v[0];
}

json energy_json(const EnergyBreakdown& e) {
    return {{"dirichlet", e.dirichlet}, {"dmi", e.dmi}, {"v_minus", e.v_minus}, {"v_plus", e.v_plus},
            {"total", e.total}};
}

json fit_json(const FitResult& f) {
    return {{"value", f.value},       {"stderr", f.stderr_},     {"window_lo", f.window_lo},
            {"window_hi", f.window_hi}, {"n_points", f.n_points}};
}

// ---- solve -------------------------------------------------------------------

int cmd_solve(const RunConfig& cfg, const Sink& sink) {
    ModelParams p{single(cfg.r, "r"), single(cfg.beta, "beta")};
    p.require_solvable();
    SolveReport rep;
    bool converged = true;
    std::string failure;
    try {
        rep = solve_continuation(p, solver_config(cfg));
    } catch (const ConvergenceError& e) {
        rep = e.report;
        converged = false;
        failure = e.what();
    }
    const Profile& f = rep.profile;
    json side;
    side["r"] = p.r;
    side["beta"] = p.beta;
    side["converged"] = converged && rep.converged;
    if (!failure.empty())
        side["error"] = failure;
    side["residual"] = rep.residual_norm;
    side["iterations"] = rep.iterations;
    side["method"] = method_name(rep.method);
    side["continuation_steps"] = rep.path.size();
    side["strictly_inside"] = rep.strictly_inside;
    side["grid_points"] = f.size();
    side["rmax"] = f.grid->r_max();
    try {
        side["energy"] = energy_json(energy(f));
        side["degree"] = topological_degree(f);
    } catch (const std::exception& e) {
        side["energy"] = nullptr;
        side["energy_error"] = e.what();
    }
    try {
        auto d = decay_fit(f);
        auto j = fit_json(d);
        j["ratio_to_sqrt2_beta"] = d.value / (std::sqrt(2.0) * p.beta);
        j["ratio_to_beta"] = d.value / p.beta;
        side["decay_fit"] = j;
    } catch (const std::exception& e) {
        side["decay_fit"] = nullptr;
        side["decay_error"] = e.what();
    }
    try {
        side["origin_derivative"] = origin_derivative(f);
    } catch (const std::exception& e) {
        side["origin_derivative"] = nullptr;
        side["origin_error"] = e.what();
    }
    auto mono = monotonicity_check(f);
    auto sq = sign_quantity_check(f);
    side["monotone"] = mono.strict;
    side["max_Q"] = mono.max_value;
    side["sign_quantity_negative"] = sq.strict;
    side["max_N"] = sq.max_value;

    auto d = diagnostics(f);
    if (cfg.format == "json") {
        json series;
        series["rho"] = f.grid->nodes();
        series["f"] = f.values;
        series["fprime"] = d.fprime;
        series["theta"] = sample_theta(*f.grid, p.r);
        series["Q"] = d.q;
        series["Qbar"] = d.q_bar;
        series["N"] = d.n_fn;
        series["F"] = d.f_fn;
        series["P"] = d.p_fn;
        side["series"] = series;
        sink.document(side);
    } else {
        std::string csv = "rho,f,fprime,theta,Q,Qbar,N,F,P\n";
        for (std::size_t i = 0; i < f.size(); ++i) {
            double rho = f.grid->node(i);
            csv += num(rho) + ',' + num(f.values[i]) + ',' + num(d.fprime[i]) + ',' + num(theta(rho, p.r)) + ',' +
                   num(d.q[i]) + ',' + num(d.q_bar[i]) + ',' + num(d.n_fn[i]) + ',' + num(d.f_fn[i]) + ',' +
                   num(d.p_fn[i]) + '\n';
        }
        sink.primary(csv);
        sink.sidecar(side);
    }
    return converged ? 0 : 3;
}

// ---- sweep-beta --------------------------------------------------------------

int cmd_sweep(const RunConfig& cfg, const Sink& sink) {
    const double r = single(cfg.r, "r");
    auto betas = beta_list(cfg);
    ModelParams{r, 1.0}.validate();
    for (double b : betas)
        ModelParams{r, b}.require_solvable();
    struct Row {
        double xd = kNaN, rate = kNaN;
        EnergyBreakdown e{kNaN, kNaN, kNaN, kNaN, kNaN};
        bool ok = false;
        bool monotone = false;
        std::string error;
    };
    std::vector<Row> rows(betas.size());
    auto scfg = solver_config(cfg);
    parallel_for(betas.size(), [&](std::size_t k) {
        Row& row = rows[k];
        try {
            auto rep = solve_continuation({r, betas[k]}, scfg);
            row.xd = x_norm_diff(rep.profile, sample_theta(*rep.profile.grid, r));
            row.e = energy(rep.profile);
            row.monotone = monotonicity_check(rep.profile).strict;
            row.ok = true;
            try {
                row.rate = decay_fit(rep.profile).value;
            } catch (const std::exception& e) {
                row.error = std::string("decay: ") + e.what();
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    std::string csv = "beta,xnorm_diff,decay_rate,D,H,Vminus,Vplus,total\n";
    json members = json::array();
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < betas.size(); ++k) {
        const Row& row = rows[k];
        csv += num(betas[k]) + ',' + num(row.xd) + ',' + num(row.rate) + ',' + num(row.e.dirichlet) + ',' +
               num(row.e.dmi) + ',' + num(row.e.v_minus) + ',' + num(row.e.v_plus) + ',' + num(row.e.total) + '\n';
        json m = {{"beta", betas[k]}, {"converged", row.ok}, {"monotone", row.monotone}};
        if (!row.error.empty())
            m["error"] = row.error;
        members.push_back(m);
        if (row.ok && row.xd > 0.0) {
            lx.push_back(std::log(betas[k]));
            ly.push_back(std::log(row.xd));
        }
    }
    json side = {{"r", r}, {"members", members}, {"successes", lx.size()}};
    bool failed = lx.size() != betas.size();
    if (lx.size() >= 5) {
        auto fit = fit_line(lx, ly);
        side["fit"] = fit_json(fit);
        side["exponent"] = fit.value;
    } else {
        side["fit"] = nullptr;
        side["fit_skipped"] = "fewer than 5 successful members";
    }
    if (cfg.format == "json") {
        side["rows"] = json::array();
        for (std::size_t k = 0; k < betas.size(); ++k)
            side["rows"].push_back({{"beta", betas[k]},
                                    {"xnorm_diff", finite_or_null(rows[k].xd)},
                                    {"decay_rate", finite_or_null(rows[k].rate)},
                                    {"D", finite_or_null(rows[k].e.dirichlet)},
                                    {"H", finite_or_null(rows[k].e.dmi)},
                                    {"Vminus", finite_or_null(rows[k].e.v_minus)},
                                    {"Vplus", finite_or_null(rows[k].e.v_plus)},
                                    {"total", finite_or_null(rows[k].e.total)}});
        sink.document(side);
    } else {
        sink.primary(csv);
        sink.sidecar(side);
    }
    return failed ? 3 : 0;
}

// ---- spectrum ----------------------------------------------------------------

json mode_json(const ModeSpectrum& m) {
    json j = {{"n", m.n},
              {"lambda_min", m.lambda_min},
              {"lambda_second", m.lambda_second},
              {"eigen_residual", m.eig_residual}};
    j["zero_mode_residual"] = m.zero_mode_residual ? json(*m.zero_mode_residual) : json(nullptr);
    if (m.lambda_a) {
        j["lambda_min_a_block"] = *m.lambda_a;
        j["lambda_min_b_block"] = *m.lambda_b;
        j["b_block_near_zero"] = m.b_near_zero;
    }
    return j;
}

void validate_modes(const std::vector<int>& modes) {
    if (modes.empty())
        throw ValidationError("--modes: empty modes list");
    for (int n : modes)
        if (n < 0 || n > 8)
            throw ValidationError("--modes: entries must lie in 0..8");
}

int cmd_spectrum(const RunConfig& cfg, const Sink& sink) {
    validate_modes(cfg.modes);
    ModelParams p{single(cfg.r, "r"), single(cfg.beta, "beta")};
    p.require_solvable();
    auto rep = solve_continuation(p, solver_config(cfg));
    auto sum = spectrum(rep.profile, cfg.modes);
    json j = {{"r", p.r}, {"beta", p.beta}, {"grid_points", cfg.grid_points}, {"residual", rep.residual_norm}};
    j["modes"] = json::array();
    for (const auto& m : sum.modes)
        j["modes"].push_back(mode_json(m));
    j["errors"] = sum.errors;
    j["lambda_min"] = sum.lambda_min;
    j["verdict"] = verdict_name(sum.verdict);
    j["near_zero_window"] = near_zero_window(p.beta);
    sink.document(j);
    return sum.errors.empty() ? 0 : 3;
}

// ---- resolvent ---------------------------------------------------------------

int cmd_resolvent(const RunConfig& cfg, const Sink& sink) {
    const double r = single(cfg.r, "r");
    auto betas = beta_list(cfg);
    RadialFunction xi = [](double) { return 0.0; };
    if (cfg.xi == "solved") {
        auto corr = solve_continuation({r, cfg.xi_beta}, solver_config(cfg)).profile;
        xi = [corr, r](double x) { return interpolate(corr, x) - theta(x, r); };
    } else if (cfg.xi != "zero") {
        throw ValidationError("--xi must be 'zero' or 'solved'");
    }
    std::vector<RadialFunction> sources;
    for (double c : {0.5, 2.0, 8.0, 32.0}) {
        double sig = std::max(0.5, c / 4.0);
        sources.push_back([c, sig](double x) { return std::exp(-(x - c) * (x - c) / (2.0 * sig * sig)); });
    }
    auto res = resolvent_probe(r, xi, betas, cfg.s, sources, cfg.grid_points);
    std::string csv = "beta,max_ratio,smallest_ritz\n";
    json rows = json::array();
    for (const auto& smp : res.samples) {
        csv += num(smp.beta) + ',' + num(smp.max_ratio) + ',' + num(smp.ritz) + '\n';
        rows.push_back({{"beta", smp.beta}, {"max_ratio", smp.max_ratio}, {"ratios", smp.ratios},
                        {"smallest_ritz", smp.ritz}});
    }
    json side = {{"r", r}, {"s", cfg.s}, {"xi", cfg.xi}, {"exponent", res.fit.value}, {"fit", fit_json(res.fit)}};
    if (cfg.format == "json") {
        side["rows"] = rows;
        sink.document(side);
    } else {
        sink.primary(csv);
        sink.sidecar(side);
    }
    return 0;
}

// ---- phase-diagram -----------------------------------------------------------

int cmd_phase(const RunConfig& cfg, const Sink& sink) {
    validate_modes(cfg.modes);
    if (cfg.r.empty())
        throw ValidationError("--r: empty list");
    auto betas = beta_list(cfg);
    for (double r : cfg.r)
        for (double b : betas)
            ModelParams{r, b}.require_solvable();
    struct Cell {
        double r, beta;
        HKPoint hk;
        bool converged = false, monotone = false;
        double lambda_min = kNaN;
        std::string verdict = "error", error;
    };
    std::vector<Cell> cells;
    for (double r : cfg.r)
        for (double b : betas)
        {
            Cell c;
            c.r = r;
            c.beta = b;
            c.hk = params_to_hk({r, b});
            cells.push_back(c);
        }
    auto scfg = solver_config(cfg);
    parallel_for(cells.size(), [&](std::size_t k) {
        Cell& c = cells[k];
        try {
            auto rep = solve_continuation({c.r, c.beta}, scfg);
            c.converged = true;
            c.monotone = monotonicity_check(rep.profile).strict;
            auto sum = spectrum(rep.profile, cfg.modes);
            c.lambda_min = sum.lambda_min;
            c.verdict = verdict_name(sum.verdict);
            if (!sum.errors.empty())
                c.error = sum.errors.front();
        } catch (const std::exception& e) {
            c.error = e.what();
        }
    });
    std::string csv = "r,beta,h,k,converged,monotone,lambda_min,verdict\n";
    json rows = json::array();
    for (const auto& c : cells) {
        csv += num(c.r) + ',' + num(c.beta) + ',' + num(c.hk.h) + ',' + num(c.hk.k) + ',' +
               (c.converged ? "true" : "false") + ',' + (c.monotone ? "true" : "false") + ',' + num(c.lambda_min) +
               ',' + c.verdict + '\n';
        json row = {{"r", c.r},
                    {"beta", c.beta},
                    {"h", c.hk.h},
                    {"k", c.hk.k},
                    {"converged", c.converged},
                    {"monotone", c.monotone},
                    {"lambda_min", finite_or_null(c.lambda_min)},
                    {"verdict", c.verdict}};
        if (!c.error.empty())
            row["error"] = c.error;
        rows.push_back(row);
    }
    if (cfg.format == "json") {
        sink.document({{"cells", rows}});
    } else {
        sink.primary(csv);
        sink.sidecar({{"cells", rows}});
    }
    return 0;
}

// ---- verify ------------------------------------------------------------------

json check_json(const Check& c) {
    json j = {{"name", c.name}, {"value", finite_or_null(c.value)}, {"relation", c.relation}, {"pass", c.pass}};
    if (c.relation == "in")
        j["tolerance"] = {c.tolerance, c.tolerance_hi};
    else if (c.relation != "==")
        j["tolerance"] = c.tolerance;
    if (!c.note.empty())
        j["note"] = c.note;
    return j;
}

int cmd_verify(const RunConfig& cfg, const Sink& sink) {
    SuiteOptions opt;
    opt.grid_points = cfg.grid_points;
    opt.seed = cfg.seed;
    auto res = run_suite(cfg.suite, opt);
    json j = {{"suite", res.suite}, {"pass", res.pass}};
    j["criteria"] = json::array();
    for (const auto& c : res.criteria) {
        json cj = {{"id", c.id}, {"title", c.title}, {"pass", c.pass}, {"seconds", c.seconds}};
        cj["checks"] = json::array();
        for (const auto& ch : c.checks)
            cj["checks"].push_back(check_json(ch));
        if (!c.error.empty())
            cj["error"] = c.error;
        j["criteria"].push_back(cj);
    }
    j["supplementary"] = json::array();
    for (const auto& ch : res.supplementary)
        j["supplementary"].push_back(check_json(ch));
    sink.document(j);
    return res.pass ? 0 : 1;
}

} // namespace

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> beta_list(const RunConfig& cfg) {
    if (!cfg.beta.empty()) {
        if (cfg.beta_min || cfg.beta_max)
            throw ValidationError("give either --beta or --beta-min/--beta-max, not both");
        return cfg.beta;
    }
    if (!cfg.beta_min || !cfg.beta_max)
        throw ValidationError("no beta values: use --beta or --beta-min/--beta-max/--beta-count");
    double lo = *cfg.beta_min, hi = *cfg.beta_max;
    if (!(lo > 0.0) || !(hi >= lo))
        throw ValidationError("--beta-min/--beta-max must satisfy 0 < min <= max");
    if (cfg.beta_count < 1)
        throw ValidationError("--beta-count must be >= 1");
    std::vector<double> out;
    for (int k = 0; k < cfg.beta_count; ++k)
        out.push_back(cfg.beta_count == 1 ? hi : hi * std::pow(lo / hi, double(k) / (cfg.beta_count - 1)));
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Equivariant chiral skyrmion profiles: solve, sweep, spectra, verification."};
    RunConfig cfg;
    std::string r_text, beta_text, modes_text;
    app.set_config("--config", "", "flat key=value file; command-line flags override it");
    app.add_option("command", cfg.command, "solve | sweep-beta | spectrum | resolvent | phase-diagram | verify")
        ->required()
        ->check(CLI::IsMember({"solve", "sweep-beta", "spectrum", "resolvent", "phase-diagram", "verify"}));
    app.add_option("--r", r_text, "DMI strength (comma list for phase-diagram)");
    app.add_option("--beta", beta_text, "beta value(s), comma separated");
    app.add_option("--beta-min", cfg.beta_min);
    app.add_option("--beta-max", cfg.beta_max);
    app.add_option("--beta-count", cfg.beta_count);
    app.add_option("--grid-points", cfg.grid_points);
    app.add_option("--rmax", cfg.rmax);
    app.add_option("--modes", modes_text, "Fourier modes, comma separated (default 0,1,2,3)");
    app.add_option("--seed", cfg.seed);
    app.add_option("--out", cfg.out, "output path, '-' for stdout (sidecar JSON then goes to stderr)");
    app.add_option("--format", cfg.format)->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--suite", cfg.suite, "verify suite: identities energy solver shape spectral resolvent all");
    app.add_option("--s", cfg.s, "resolvent weight exponent in [0, 1]");
    app.add_option("--xi", cfg.xi, "resolvent potential: zero | solved");
    app.add_option("--xi-beta", cfg.xi_beta, "beta of the solved correction used for --xi solved");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }
    try {
        if (!r_text.empty())
            cfg.r = parse_doubles(r_text, "r");
        if (!beta_text.empty())
            cfg.beta = parse_doubles(beta_text, "beta");
        if (app.count("--modes") || !modes_text.empty())
            cfg.modes = parse_ints(modes_text, "modes");
        if (cfg.grid_points < 64)
            throw ValidationError("--grid-points must be >= 64");
        Sink sink{cfg, out, err};
        if (cfg.command == "solve")
            return cmd_solve(cfg, sink);
        if (cfg.command == "sweep-beta")
            return cmd_sweep(cfg, sink);
        if (cfg.command == "spectrum")
            return cmd_spectrum(cfg, sink);
        if (cfg.command == "resolvent")
            return cmd_resolvent(cfg, sink);
        if (cfg.command == "phase-diagram")
            return cmd_phase(cfg, sink);
        return cmd_verify(cfg, sink);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

} // namespace skyrmion::cli
