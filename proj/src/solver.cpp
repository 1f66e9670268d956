#include "skyrmion/solver.hpp"

#include "skyrmion/errors.hpp"
#include "skyrmion/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace skyrmion {

namespace {

std::vector<double> weighted(const RadialGrid& g, std::span<const double> res) {
    std::vector<double> out(res.size());
    for (std::size_t i = 0; i < res.size(); ++i)
        out[i] = res[i] * g.weight(i);
    return out;
}

double kappa_for(const RadialGrid& g, const ModelParams& p, const SolverConfig& cfg) {
    return discrete::robin_kappa(g, p.beta, cfg.robin_rate);
}

Profile regrid(const Profile& f, GridPtr grid) {
    if (f.grid == grid)
        return f;
    Profile out{grid, std::vector<double>(grid->size()), f.params};
    for (std::size_t i = 0; i < grid->size(); ++i)
        out.values[i] = interpolate(f, grid->node(i));
    return out;
}

} // namespace

void SolverConfig::validate() const {
    auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
    if (!positive(newton_tol) || max_newton_iters <= 0 || max_halvings <= 0 || pg_max_iters <= 0 ||
        !positive(pg_step) || !positive(pg_tol))
        throw ValidationError("solver config: tolerances, steps and iteration caps must be positive");
    if (!(damping > 0.0 && damping < 1.0))
        throw ValidationError("solver config: damping must lie in (0, 1)");
    if (!(continuation_factor >= 0.5 && continuation_factor <= 0.95))
        throw ValidationError("solver config: continuation_factor must lie in [0.5, 0.95]");
    if (grid_points < 64)
        throw ValidationError("solver config: grid_points must be at least 64");
    if (rmax && !positive(*rmax))
        throw ValidationError("solver config: rmax must be positive");
    if (robin_rate && !(std::isfinite(*robin_rate) && *robin_rate >= 0.0))
        throw ValidationError("solver config: robin_rate must be nonnegative");
}

std::string method_name(Method m) {
    switch (m) {
    case Method::newton: return "newton";
    case Method::projected_gradient: return "projected_gradient";
    case Method::hybrid: return "hybrid";
    }
    return "unknown";
}

std::vector<double> el_residual(const Profile& f, std::optional<double> robin_rate) {
    f.validate();
    return discrete::residual(*f.grid, f.values, f.params,
                              discrete::robin_kappa(*f.grid, f.params.beta, robin_rate));
}

bool strictly_inside(const Profile& f) {
    for (std::size_t i = 0; i < f.size(); ++i) {
        double v = f.values[i];
        if (!(v < theta(f.grid->node(i), f.params.r)))
            return false;
        // A tail that has underflowed to zero is still "positive" in exact arithmetic.
        bool underflowed = v == 0.0 && i > 0 && std::abs(f.values[i - 1]) < 1e-280;
        if (!(v > 0.0) && !underflowed)
            return false;
    }
    return true;
}

SolveReport solve_newton(const ModelParams& p, const Profile& init, const SolverConfig& cfg) {
    p.require_solvable();
    cfg.validate();
    init.validate();
    const RadialGrid& g = *init.grid;
    const double kappa = kappa_for(g, p, cfg);

    SolveReport rep;
    rep.method = Method::newton;
    rep.profile = Profile{init.grid, init.values, p};
    std::vector<double>& f = rep.profile.values;

    auto res = discrete::residual(g, f, p, kappa);
    double norm = discrete::scaled_sup(g, res);
    // Plain Newton steps are accepted when the residual drops. When a full step is
    // rejected the iteration switches to shifted steps (H + mu W) d = -g with mu large
    // enough for a positive definite matrix, accepted on energy decrease: implicit
    // gradient flow with step 1/mu, which heads for a minimizer. mu shrinks tenfold per
    // full step and plain Newton resumes once it is small.
    double mu = 0.0;
    std::vector<double> trial(f.size());
    const auto& w = g.weights();
    for (int it = 0;; ++it) {
        rep.iterations = it;
        rep.residual_norm = norm;
        if (norm <= cfg.newton_tol) {
            rep.converged = true;
            break;
        }
        if (it == cfg.max_newton_iters)
            throw ConvergenceError("newton: iteration cap reached (residual " + std::to_string(norm) + ")",
                                   rep, p.beta);
        const auto jac = discrete::hessian(g, f, p, kappa);
        const auto grad = weighted(g, res);
        bool accepted = false;
        if (mu == 0.0) {
            auto step = solve_tridiagonal(jac, grad);
            const double merit = discrete::scaled_rms(g, res);
            double t = 1.0;
            for (int k = 0; k <= cfg.max_halvings; ++k, t *= cfg.damping) {
                for (std::size_t i = 0; i < f.size(); ++i)
                    trial[i] = f[i] - t * step[i];
                auto tres = discrete::residual(g, trial, p, kappa);
                if (discrete::scaled_rms(g, tres) < merit) {
                    f = trial;
                    res = std::move(tres);
                    accepted = true;
                    break;
                }
            }
            if (!accepted || t < 1.0)
                mu = 1.0;
        } else {
            while (count_below(jac, w, -mu) > 0 && mu < 1e12)
                mu *= 10.0;
            const double e0 = discrete::objective(g, f, p, kappa);
            for (; mu < 1e12 && !accepted; mu *= 10.0) {
                SymTridiag m = jac;
                for (std::size_t i = 0; i < f.size(); ++i)
                    m.diag[i] += mu * w[i];
                auto step = solve_tridiagonal(m, grad);
                double slope = 0.0;
                for (std::size_t i = 0; i < f.size(); ++i)
                    slope += grad[i] * step[i];
                double t = 1.0;
                for (int k = 0; k <= cfg.max_halvings; ++k, t *= cfg.damping) {
                    for (std::size_t i = 0; i < f.size(); ++i)
                        trial[i] = f[i] - t * step[i];
                    if (discrete::objective(g, trial, p, kappa) <= e0 - 1e-4 * t * slope) {
                        f = trial;
                        res = discrete::residual(g, f, p, kappa);
                        accepted = true;
                        break;
                    }
                }
                if (accepted) {
                    if (t == 1.0)
                        mu = mu > 1e-3 ? 0.01 * mu : 0.0; // net 0.1 after the loop increment
                    break;
                }
            }
        }
        if (!accepted) {
            if (norm <= 100.0 * cfg.newton_tol) { // at the roundoff floor: accept
                rep.converged = true;
                break;
            }
            throw ConvergenceError("newton: no decrease after step halvings", rep, p.beta);
        }
        norm = discrete::scaled_sup(g, res);
    }
    rep.strictly_inside = strictly_inside(rep.profile);
    rep.path.push_back({p.beta, rep.residual_norm});
    return rep;
}

Profile initial_guess(GridPtr grid, const ModelParams& p) {
    p.require_solvable();
    // Competitor family theta(lambda rho) with a cutoff at 5/beta; pick the dilation with
    // the lowest discrete energy (golden-section search in log lambda).
    const double cut = 5.0 / p.beta;
    auto member = [&](double loglam) {
        Profile f{grid, std::vector<double>(grid->size()), p};
        double lam = std::exp(loglam);
        for (std::size_t i = 0; i < grid->size(); ++i) {
            double rho = grid->node(i);
            f.values[i] = theta(lam * rho, p.r) * cutoff(rho / cut);
        }
        return f;
    };
    auto cost = [&](double loglam) { return discrete::components(*grid, member(loglam).values, p).total; };
    // Keep the core radius 2r/lambda between the cutoff and a few dozen first spacings.
    // Below that the discrete energy has spurious collapsed states cheaper than any
    // resolved profile, and a guess that small slides into one.
    double a = std::log(2.0 * p.r / cut), b = std::log(2.0 * p.r / (32.0 * grid->node(0)));
    const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = cost(c), fd = cost(d);
    for (int it = 0; it < 60 && b - a > 1e-4; ++it) {
        if (fc < fd) {
            b = d, d = c, fd = fc;
            c = b - invphi * (b - a), fc = cost(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + invphi * (b - a), fd = cost(d);
        }
    }
    return member(0.5 * (a + b));
}

std::vector<double> continuation_schedule(const ModelParams& target, double factor) {
    target.require_solvable();
    double b = std::max(3.0 * target.r + 1.0, 2.0 * target.beta);
    std::vector<double> out{b};
    while (true) {
        double f = b < 0.1 ? std::max(factor, 0.85) : factor;
        double next = b * f;
        if (next <= target.beta * (1.0 + 1e-12)) {
            out.push_back(target.beta);
            break;
        }
        out.push_back(next);
        b = next;
    }
    return out;
}

namespace {

GridPtr chain_grid(double beta, const ModelParams& target, const SolverConfig& cfg) {
    return make_grid(beta, cfg.grid_points, target.r, cfg.rmax);
}

// Newton from a warm start; on failure bisect the beta step geometrically a few times.
SolveReport descend(const Profile& from, double beta_from, double beta_to, const ModelParams& target,
                    const SolverConfig& cfg, int depth, std::vector<ContinuationRecord>& path, int& iters) {
    ModelParams p{target.r, beta_to};
    auto grid = chain_grid(beta_to, target, cfg);
    Profile start = regrid(from, grid);
    start.params = p;
    try {
        auto rep = solve_newton(p, start, cfg);
        iters += rep.iterations;
        path.push_back({beta_to, rep.residual_norm});
        return rep;
    } catch (const ConvergenceError&) {
        if (depth >= 4)
            throw;
    }
    double mid = std::sqrt(beta_from * beta_to);
    auto half = descend(from, beta_from, mid, target, cfg, depth + 1, path, iters);
    return descend(half.profile, mid, beta_to, target, cfg, depth + 1, path, iters);
}

} // namespace

SolveReport solve_continuation(const ModelParams& target, const SolverConfig& cfg) {
    target.require_solvable();
    cfg.validate();
    auto schedule = continuation_schedule(target, cfg.continuation_factor);
    std::vector<ContinuationRecord> path;
    int iters = 0;
    Method method = Method::newton;

    ModelParams p0{target.r, schedule.front()};
    auto g0 = chain_grid(p0.beta, target, cfg);
    SolveReport rep;
    try {
        rep = solve_newton(p0, initial_guess(g0, p0), cfg);
    } catch (const ConvergenceError&) {
        // Cold start failed: descend the energy inside [0, theta] first.
        Profile lo{g0, std::vector<double>(g0->size(), 0.0), p0};
        rep = minimize_constrained(p0, lo, theta_profile(g0, p0), cfg);
        method = Method::hybrid;
    }
    iters += rep.iterations;
    path.push_back({p0.beta, rep.residual_norm});

    for (std::size_t k = 1; k < schedule.size(); ++k) {
        try {
            rep = descend(rep.profile, schedule[k - 1], schedule[k], target, cfg, 0, path, iters);
        } catch (ConvergenceError& e) {
            e.report.path = path;
            throw;
        }
    }
    rep.path = std::move(path);
    rep.iterations = iters;
    rep.method = method;
    return rep;
}

SolveReport minimize_constrained(const ModelParams& p, const Profile& lower, const Profile& upper,
                                 const SolverConfig& cfg) {
    p.require_solvable();
    cfg.validate();
    lower.validate();
    upper.validate();
    if (lower.grid != upper.grid && lower.grid->nodes() != upper.grid->nodes())
        throw ValidationError("minimize_constrained: bounds live on different grids");
    const std::size_t n = lower.size();
    for (std::size_t i = 0; i < n; ++i)
        if (lower.values[i] > upper.values[i])
            throw ValidationError("minimize_constrained: infeasible bounds (lower > upper at node " +
                                  std::to_string(i) + ")");
    GridPtr grid = lower.grid;
    const RadialGrid& g = *grid;
    const double kappa = kappa_for(g, p, cfg);
    const auto& lo = lower.values;
    const auto& up = upper.values;
    auto clamp_into = [&](std::vector<double>& v) {
        for (std::size_t i = 0; i < n; ++i)
            v[i] = std::clamp(v[i], lo[i], up[i]);
    };

    // Metric for the gradient step: discrete -Laplacian + 1/rho^2 + 1 + beta^2 in the
    // rho drho inner product, so the step is an H^1-type (Sobolev) gradient.
    SymTridiag metric(n);
    for (std::size_t i = 0; i < n; ++i) {
        double cl = g.cell_mid(i) / g.cell_width(i);
        metric.diag[i] += cl;
        if (i + 1 < n) {
            double cr = g.cell_mid(i + 1) / g.cell_width(i + 1);
            metric.diag[i] += cr;
            metric.off[i] = -cr;
        } else {
            metric.diag[i] += kappa * g.r_max();
        }
        double rho = g.node(i);
        metric.diag[i] += g.weight(i) * (1.0 / (rho * rho) + 1.0 + p.beta * p.beta);
    }

    SolveReport rep;
    rep.method = Method::projected_gradient;
    std::vector<double> f = initial_guess(grid, p).values;
    clamp_into(f);
    double e = discrete::objective(g, f, p, kappa);
    rep.energies.push_back(e);

    double measure = 0.0;
    int it = 0;
    for (; it < cfg.pg_max_iters; ++it) {
        auto grad = weighted(g, discrete::residual(g, f, p, kappa));
        // Variables pinned at a bound with the gradient pushing outward are frozen.
        SymTridiag m = metric;
        std::vector<double> rhs(n);
        std::vector<char> active(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            double eps = 1e-14 * (1.0 + std::abs(f[i]));
            active[i] = (f[i] <= lo[i] + eps && grad[i] > 0.0) || (f[i] >= up[i] - eps && grad[i] < 0.0);
            rhs[i] = active[i] ? 0.0 : -grad[i];
        }
        for (std::size_t i = 0; i < n; ++i)
            if (active[i]) {
                m.diag[i] = 1.0;
                if (i + 1 < n)
                    m.off[i] = 0.0;
                if (i > 0)
                    m.off[i - 1] = 0.0;
            }
        auto dir = solve_tridiagonal(m, rhs);
        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            slope += grad[i] * dir[i];
        measure = std::sqrt(std::max(0.0, -slope));
        if (measure <= cfg.pg_tol)
            break;

        double t = cfg.pg_step;
        bool accepted = false;
        std::vector<double> trial(n);
        for (int k = 0; k < 60; ++k, t *= cfg.damping) {
            for (std::size_t i = 0; i < n; ++i)
                trial[i] = f[i] + t * dir[i];
            clamp_into(trial);
            double moved = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                moved += grad[i] * (trial[i] - f[i]);
            double et = discrete::objective(g, trial, p, kappa);
            if (et <= e + 1e-4 * moved) {
                f = trial;
                e = et;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // Energy differences have hit roundoff; the iterate is as good as PG can make it.
            if (measure <= 1e-5)
                break;
            rep.profile = Profile{grid, f, p};
            throw ConvergenceError("projected gradient: line search failed", rep, p.beta);
        }
        rep.energies.push_back(e);
    }
    Profile pg{grid, f, p};
    rep.iterations = it;

    auto polished = solve_newton(p, pg, cfg);
    polished.method = Method::hybrid;
    polished.iterations += it;
    polished.energies = std::move(rep.energies);
    polished.pg_distance = x_norm_diff(pg, polished.profile.values);
    return polished;
}

FitResult fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2)
        throw ValidationError("fit_line: need at least two (x, y) pairs");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw ValidationError("fit_line: abscissae are all equal");
    FitResult fr;
    fr.value = sxy / sxx;
    fr.intercept = my - fr.value * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = y[i] - (fr.intercept + fr.value * x[i]);
        ss += d * d;
    }
    fr.stderr_ = n > 2 ? std::sqrt(ss / double(n - 2) / sxx) : 0.0;
    fr.window_lo = *std::min_element(x.begin(), x.end());
    fr.window_hi = *std::max_element(x.begin(), x.end());
    fr.n_points = int(n);
    return fr;
}

SweepResult difference_sweep(double r, std::span<const double> betas, const SolverConfig& cfg) {
    if (betas.size() < 5)
        throw ValidationError("difference_sweep: need at least 5 beta values");
    for (double b : betas)
        if (!(b > 0.0 && b <= 0.5))
            throw ValidationError("difference_sweep: betas must lie in (0, 0.5]");
    ModelParams{r, 0.0}.validate();
    SweepResult out;
    out.members.resize(betas.size());
    parallel_for(betas.size(), [&](std::size_t i) {
        auto rep = solve_continuation({r, betas[i]}, cfg);
        double d = x_norm_diff(rep.profile, sample_theta(*rep.profile.grid, r));
        out.members[i] = SweepMember{betas[i], std::move(rep), d};
    });
    std::vector<double> lx, ly;
    for (const auto& m : out.members) {
        lx.push_back(std::log(m.beta));
        ly.push_back(std::log(m.xnorm_diff));
    }
    out.fit = fit_line(lx, ly);
    out.fit.window_lo = *std::min_element(betas.begin(), betas.end());
    out.fit.window_hi = *std::max_element(betas.begin(), betas.end());
    return out;
}

unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SKYRMION_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1)
            hw = std::min<unsigned>(hw, unsigned(cap));
    }
    return hw;
}

} // namespace skyrmion
