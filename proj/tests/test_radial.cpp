#include "skyrmion/errors.hpp"
#include "skyrmion/radial.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace skyrmion;
using std::numbers::pi;

TEST_SUITE("radial") {

TEST_CASE("harmonic profile boundary values") {
    for (double r : {0.25, 1.0, 2.0}) {
        CHECK(theta(0.0, r) == pi);
        CHECK(theta(2 * r, r) == doctest::Approx(pi / 2).epsilon(1e-15));
    }
    CHECK_THROWS_AS(theta(1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(theta(1.0, -1.0), ValidationError);
}

TEST_CASE("harmonic profile identities at random radii") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(1e-6, 100.0);
    for (double r : {0.25, 1.0, 2.0})
        for (int k = 0; k < 100; ++k) {
            double rho = u(rng), t = theta(rho, r);
            CHECK(std::abs(std::sin(t) - 4 * r * rho / (rho * rho + 4 * r * r)) <= 1e-12);
            CHECK(std::abs(2 * r * std::sin(t) / rho + std::cos(t) - 1) <= 1e-12);
            CHECK(std::abs(theta_prime(rho, r) + std::sin(t) / rho) <= 1e-12 * (1 + std::abs(theta_prime(rho, r))));
            // Richardson-extrapolated central difference as an independent derivative
            double h = 1e-3 * rho;
            auto cd = [&](double s) { return (theta(rho + s, r) - theta(rho - s, r)) / (2 * s); };
            double d = (4 * cd(h / 2) - cd(h)) / 3;
            CHECK(std::abs(d + std::sin(t) / rho) <= 1e-8 * (1 + 1 / rho));
        }
}

TEST_CASE("parameter map to (h, k)") {
    auto hk = params_to_hk({1.0, 1.0});
    CHECK(hk.h == doctest::Approx(2.0));
    CHECK(hk.k == doctest::Approx(0.0));
    hk = params_to_hk({1.0, 0.0});
    CHECK(hk.h == doctest::Approx(1.0));
    CHECK(hk.k == doctest::Approx(-1.0));
    auto p = hk_to_params({4.0, 0.0}, 1.0);
    CHECK(p.r == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(p.beta == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(hk_to_params({1.0, 1.0}, 1.0), ValidationError);
    CHECK_THROWS_AS(hk_to_params({1.0, 2.0}, 1.0), ValidationError);
    CHECK_THROWS_AS(hk_to_params({-2.0, -1.0}, 1.0), ValidationError);
}

TEST_CASE("parameter map round trip") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ur(0.05, 3.0), ub(0.0, 4.0);
    for (int k = 0; k < 200; ++k) {
        ModelParams p{ur(rng), ub(rng)};
        auto hk = params_to_hk(p);
        double lam = std::sqrt((hk.h - hk.k) / 2);
        auto q = hk_to_params(hk, p.r * lam);
        CHECK(std::abs(q.r - p.r) <= 1e-14 * p.r);
        CHECK(std::abs(q.beta - p.beta) <= 1e-14 * (1 + p.beta));
    }
}

TEST_CASE("truncation radius rule") {
    CHECK(default_rmax(1.0) == 60.0);
    CHECK(default_rmax(0.1) == doctest::Approx(300.0));
    CHECK(default_rmax(0.01) == doctest::Approx(600.0));
    CHECK(default_rmax(10.0) == 60.0);
}

TEST_CASE("grid is graded, ends at the truncation radius and nests under doubling") {
    auto g = make_grid(1.0, 1024, 1.0);
    CHECK(g->size() == 1024);
    CHECK(g->r_max() == doctest::Approx(60.0));
    CHECK(g->node(0) == doctest::Approx(60.0 * 1e-4).epsilon(0.01));
    for (std::size_t i = 1; i < g->size(); ++i) {
        CHECK(g->cell_width(i) > 0);
        if (i > 1)
            CHECK(g->cell_width(i) >= g->cell_width(i - 1));
    }
    auto g2 = make_grid(1.0, 2048, 1.0);
    for (std::size_t i = 0; i < g->size(); ++i)
        CHECK(std::abs(g2->node(2 * i + 1) - g->node(i)) <= 1e-12 * g->node(i));
}

TEST_CASE("quadrature with weight rho is second order") {
    double err[3];
    int k = 0;
    for (int n : {512, 1024, 2048}) {
        auto g = make_grid(1.0, n, 1.0, 60.0);
        std::vector<double> v(g->size());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = std::exp(-g->node(i));
        err[k++] = std::abs(g->integrate(v) - 1.0);
    }
    CHECK(err[2] < 1e-5);
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("X-norm") {
    auto g = make_grid(1.0, 4096, 1.0, 60.0);
    std::vector<double> zero(g->size(), 0.0), v(g->size());
    CHECK(x_norm(*g, zero) == 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = g->node(i) * std::exp(-g->node(i));
    // int (1 - rho)^2 e^{-2 rho} rho + int e^{-2 rho} rho = 1/8 + 1/4
    CHECK(x_norm(*g, v) == doctest::Approx(std::sqrt(3.0 / 8.0)).epsilon(1e-5));
    v[100] += 1e-3;
    CHECK(x_norm(*g, v) > 0);
    auto th = theta_profile(g, {1.0, 0.5});
    CHECK(x_norm_diff(th, th.values) == 0.0);
    CHECK_THROWS_AS(x_norm(*g, std::vector<double>(10, 0.0)), ValidationError);
}

TEST_CASE("profiles: admissibility and interpolation") {
    auto g = make_grid(0.5, 1024, 1.0);
    auto th = theta_profile(g, {1.0, 0.5});
    CHECK(th.admissible());
    CHECK(interpolate(th, 0.0) == pi);
    CHECK(interpolate(th, 2 * g->r_max()) == 0.0);
    double mid = 0.5 * (g->node(500) + g->node(501));
    CHECK(interpolate(th, mid) == doctest::Approx(0.5 * (th.values[500] + th.values[501])));
    auto over = th;
    over.values[300] *= 1.01;
    CHECK_FALSE(over.admissible());
    auto neg = th;
    neg.values[300] = -1e-3;
    CHECK_FALSE(neg.admissible());
    auto bad = th;
    bad.values[3] = std::nan("");
    CHECK_THROWS(bad.validate());
}

}
