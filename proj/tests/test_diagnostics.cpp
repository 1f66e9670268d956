#include "skyrmion/diagnostics.hpp"
#include "skyrmion/errors.hpp"
#include "skyrmion/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <mutex>
#include <random>

using namespace skyrmion;

namespace {

// Solved profiles shared between test cases.
const Profile& solved(double r, double beta, int n = 4096) {
    static std::map<std::tuple<double, double, int>, Profile> cache;
    static std::mutex m;
    std::lock_guard lock(m);
    auto key = std::make_tuple(r, beta, n);
    auto it = cache.find(key);
    if (it == cache.end()) {
        SolverConfig cfg;
        cfg.grid_points = n;
        it = cache.emplace(key, solve_continuation({r, beta}, cfg).profile).first;
    }
    return it->second;
}

} // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("derivative is exact on quartics") {
    auto g = make_grid(1.0, 256, 1.0, 5.0);
    std::vector<double> v(g->size());
    auto p = [](double x) { return 0.3 + x - 3 * x * x + 0.5 * x * x * x * x; };
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = p(g->node(i));
    auto d = derivative(*g, v, p(0.0));
    for (std::size_t i = 0; i < v.size(); ++i) {
        double x = g->node(i);
        CHECK(d[i] == doctest::Approx(1 - 6 * x + 2 * x * x * x).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("harmonic profile: Q and F vanish, N has its closed form") {
    for (double r : {0.5, 1.0}) {
        auto g = make_grid(0.05, 8192, r, 60.0);
        auto d = diagnostics(theta_profile(g, {r, 0.5}));
        for (std::size_t i = 0; i < g->size(); ++i) {
            double rho = g->node(i), t = theta(rho, r);
            CHECK(std::abs(d.q[i]) <= 1e-6 * (1 + 1 / rho));
            CHECK(std::abs(d.f_fn[i]) <= 1e-6);
            CHECK(d.n_fn[i] == doctest::Approx((2 * r * r - 2) * std::sin(t) / rho).scale(1e-6 * (1 + 1 / rho)));
        }
    }
}

TEST_CASE("zero profile: everything vanishes except P") {
    auto g = make_grid(1.0, 512, 1.0);
    Profile f{g, std::vector<double>(g->size(), 0.0), {1.0, 0.7}};
    auto d = diagnostics(f);
    // the origin value pi only enters through the derivative at the first nodes
    for (std::size_t i = 5; i < g->size(); ++i) {
        CHECK(d.q[i] == 0.0);
        CHECK(d.q_bar[i] == 0.0);
        CHECK(d.n_fn[i] == 0.0);
        CHECK(d.f_fn[i] == 0.0);
        CHECK(d.p_fn[i] == doctest::Approx(2 * 0.49));
    }
    CHECK_FALSE(sign_quantity_check(f).strict);
}

TEST_CASE("strict monotonicity: harmonic profile is the equality case") {
    auto g = make_grid(0.5, 4096, 1.0);
    CHECK_FALSE(monotonicity_check(theta_profile(g, {1.0, 0.5})).strict);
}

TEST_CASE("solved profiles in the monotone regime") {
    for (auto [r, beta] : {std::pair{1.0, 1.0}, {0.5, 0.5}, {0.5, 1.0}, {1.0, 0.5}}) {
        const auto& f = solved(r, beta);
        auto q = monotonicity_check(f);
        auto n = sign_quantity_check(f);
        CHECK(q.strict);
        CHECK(q.max_value < 0);
        CHECK(n.strict);
        auto d = diagnostics(f);
        CHECK(d.max_q == doctest::Approx(q.max_value));
        CHECK(d.min_f > 0);
    }
}

TEST_CASE("decay fit on a planted exponential") {
    auto g = make_grid(0.5, 4096, 1.0, 60.0);
    Profile f{g, std::vector<double>(g->size()), {1.0, 0.5}};
    for (std::size_t i = 0; i < g->size(); ++i)
        f.values[i] = std::exp(-0.7 * g->node(i)) / std::sqrt(g->node(i));
    auto fit = decay_fit(f);
    CHECK(fit.value == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(fit.stderr_ >= 0);
    CHECK(fit.window_hi <= 0.9 * g->r_max() + 1e-12);
    CHECK(fit.window_lo < fit.window_hi);
}

TEST_CASE("decay fit: power-law tail gives rate near zero") {
    auto g = make_grid(0.05, 4096, 1.0, 2000.0);
    auto fit = decay_fit(theta_profile(g, {1.0, 0.05}));
    CHECK(std::abs(fit.value) < 0.01);
}

TEST_CASE("decay fit errors") {
    auto g = make_grid(0.5, 1024, 1.0, 60.0);
    Profile flat{g, std::vector<double>(g->size(), 0.5), {1.0, 0.5}};
    CHECK_THROWS_AS(decay_fit(flat), NumericalError);
    Profile neg = flat;
    for (std::size_t i = 0; i < g->size(); ++i)
        neg.values[i] = g->node(i) < 5 ? 1.0 : -1e-3;
    CHECK_THROWS_AS(decay_fit(neg), NumericalError);
}

TEST_CASE("decay rate of a solved profile") {
    auto fit = decay_fit(solved(1.0, 0.5));
    CHECK(fit.value == doctest::Approx(std::sqrt(2.0) * 0.5).epsilon(0.15));
}

TEST_CASE("origin derivative of the harmonic profile is -1/r") {
    for (double r : {0.5, 1.0}) {
        auto g = make_grid(0.5, 4096, r);
        CHECK(origin_derivative(theta_profile(g, {r, 0.5})) == doctest::Approx(-1 / r).epsilon(1e-4));
    }
}

TEST_CASE("origin derivative needs resolution at the core") {
    // grid built for a unit core, profile with a core a hundred times smaller
    auto g = make_grid(0.5, 64, 1.0);
    CHECK_THROWS_AS(origin_derivative(theta_profile(g, {0.01, 0.5})), NumericalError);
}

TEST_CASE("origin derivative of a solved profile is stable under refinement") {
    double a = origin_derivative(solved(1.0, 0.5, 4096));
    double b = origin_derivative(solved(1.0, 0.5, 8192));
    CHECK(std::isfinite(a));
    CHECK(a == doctest::Approx(b).epsilon(0.02));
}

TEST_CASE("half-angle identity on random admissible profiles") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto g = make_grid(0.5, 1024, 1.0);
    for (double r : {0.3, 1.0, 2.0}) {
        auto f = theta_profile(g, {r, 0.5});
        for (auto& v : f.values)
            v *= u(rng);
        CHECK(half_angle_identity_error(f) <= 1e-10);
    }
}

TEST_CASE("F' identity on solved profiles") {
    CHECK(f_identity_discrepancy(solved(1.0, 0.5)) <= 5e-3);
    CHECK(f_identity_discrepancy(solved(0.5, 1.0)) <= 5e-3);
}

}
