#include "skyrmion/errors.hpp"
#include "skyrmion/solver.hpp"
#include "skyrmion/spectral.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <map>
#include <mutex>
#include <random>

using namespace skyrmion;

namespace {

const Profile& solved(double r, double beta, int n) {
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

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    std::vector<double> v(n);
    for (auto& x : v)
        x = z(rng);
    v.back() = 0.0; // Dirichlet at the far end
    return v;
}

} // namespace

TEST_SUITE("spectral") {

TEST_CASE("assembled matrices are symmetric") {
    const auto& f = solved(0.5, 0.5, 512);
    for (int n : {0, 1, 2, 5}) {
        ModeOperator op(n, f);
        auto d = op.dense();
        std::size_t m = 2 * op.size();
        double mx = 0, asym = 0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                mx = std::max(mx, std::abs(d[i * m + j]));
                asym = std::max(asym, std::abs(d[i * m + j] - d[j * m + i]));
            }
        CHECK(asym <= 1e-13 * mx);
    }
}

TEST_CASE("mode 0 decouples into two blocks") {
    ModeOperator op(0, solved(0.5, 0.5, 512));
    for (double c : op.ab)
        CHECK(c == 0.0);
}

TEST_CASE("quadratic form: integrand sum equals the matrix route") {
    std::mt19937_64 rng(31);
    const auto& f = solved(1.0, 0.5, 512);
    for (int n : {0, 1, 3}) {
        ModeOperator op(n, f);
        auto a = random_vec(f.size(), rng), b = random_vec(f.size(), rng);
        if (n != 1)
            a[0] = b[0] = 0.0;
        double x = op.form(a, b);
        double y = op.matrix_form(std::span(a).first(op.size()), std::span(b).first(op.size()));
        CHECK(x == doctest::Approx(y).epsilon(1e-11));
    }
}

TEST_CASE("banded eigenpairs match the dense route") {
    const auto& f = solved(1.0, 0.5, 512);
    for (int n : {0, 1, 2}) {
        ModeOperator op(n, f);
        auto fast = min_eigenpairs(op, 3);
        auto ref = min_eigenpairs_dense(op, 3);
        REQUIRE(fast.size() == 3);
        for (int k = 0; k < 3; ++k) {
            CHECK(fast[k].value == doctest::Approx(ref[k].value).epsilon(1e-8).scale(1e-8));
            CHECK(fast[k].residual <= 1e-8);
        }
        CHECK(fast[0].value <= fast[1].value);
    }
}

TEST_CASE("inertia count matches Eigen's generalized eigenvalues") {
    ModeOperator op(2, solved(1.0, 0.5, 256));
    std::size_t m = 2 * op.size();
    auto d = op.dense();
    Eigen::MatrixXd A = Eigen::Map<Eigen::Matrix<double, -1, -1, Eigen::RowMajor>>(d.data(), m, m);
    Eigen::VectorXd w(m);
    for (std::size_t i = 0; i < op.size(); ++i)
        w[2 * i] = w[2 * i + 1] = op.mass[i];
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::MatrixXd(w.asDiagonal()));
    for (int k : {0, 1, 5, 20}) {
        double lam = es.eigenvalues()[k];
        CHECK(op.count_below(lam - 1e-7 * (1 + std::abs(lam))) == std::size_t(k));
        CHECK(op.count_below(lam + 1e-7 * (1 + std::abs(lam))) == std::size_t(k + 1));
    }
    CHECK(op.gershgorin_low() <= es.eigenvalues()[0]);
    CHECK(op.gershgorin_high() >= es.eigenvalues()[m - 1]);
}

TEST_CASE("translational zero mode in mode 1") {
    const auto& f = solved(0.5, 0.5, 8192);
    auto m1 = analyze_mode(f, 1);
    CHECK(m1.lambda_min >= -1e-6);
    CHECK(m1.lambda_min <= 1e-3);
    REQUIRE(m1.zero_mode_residual);
    CHECK(*m1.zero_mode_residual <= 1e-5);
    auto m0 = analyze_mode(f, 0);
    CHECK(m0.lambda_min >= -1e-6);
    REQUIRE(m0.lambda_a);
    CHECK(*m0.lambda_a >= -1e-6);
    CHECK(*m0.lambda_b >= -1e-6);
}

TEST_CASE("verdicts") {
    int modes[] = {0, 1, 2, 3};
    auto stable = spectrum(solved(0.5, 0.5, 4096), modes);
    CHECK(stable.errors.empty());
    CHECK(stable.verdict == Verdict::stable);
    auto unstable = spectrum(solved(1.5, 0.05, 4096), modes);
    CHECK(unstable.verdict == Verdict::unstable);
    CHECK(unstable.lambda_min < -1e-3);
    CHECK(verdict_name(Verdict::zero_mode_only) == "zero-mode-only");
    CHECK(near_zero_window(0.5) == 1e-3);
    CHECK(near_zero_window(0.01) == doctest::Approx(1e-4));
}

TEST_CASE("mode lists are validated") {
    const auto& f = solved(0.5, 0.5, 512);
    std::vector<int> none, bad{0, 9}, neg{-1};
    CHECK_THROWS_AS(spectrum(f, none), ValidationError);
    CHECK_THROWS_AS(spectrum(f, bad), ValidationError);
    CHECK_THROWS_AS(spectrum(f, neg), ValidationError);
}

TEST_CASE("instability direction") {
    auto dir = instability_direction(solved(1.5, 0.05, 4096));
    CHECK(dir.form_value < 0);
    CHECK(dir.mode >= 0);
    CHECK(dir.mode <= 4);
    try {
        instability_direction(solved(0.5, 0.5, 2048));
        FAIL("expected no negative direction");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("numerically stable") != std::string::npos);
    }
}

TEST_CASE("mode monotonicity probe") {
    auto probe = mode_monotonicity_probe(solved(0.5, 0.5, 2048), 4, 100);
    CHECK(probe.pass);
    CHECK(probe.worst >= -1e-10);
    CHECK(probe.difference_defect <= 1e-6); // relative, after cancellation between modes
    CHECK(probe.coefficient_max <= 1.5);
    auto again = mode_monotonicity_probe(solved(0.5, 0.5, 2048), 4, 100);
    CHECK(again.worst == probe.worst);
}

TEST_CASE("ground-state factorization of the mode-0 a-block") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.2, 3.0);
    const auto& f = solved(0.5, 0.5, 4096);
    for (int k = 0; k < 20; ++k) {
        double c0 = u(rng), c1 = u(rng), width = w(rng);
        auto xi = [=](double x) { return c0 + c1 * std::exp(-x * x / (width * width)); };
        auto fa = factorized_a0(f, xi);
        CHECK(fa.matrix_value == doctest::Approx(fa.discrete_value).epsilon(1e-10).scale(1e-12));
        CHECK(fa.matrix_value == doctest::Approx(fa.continuous_value).epsilon(1e-3).scale(1e-6));
    }
}

TEST_CASE("mode-0 a-block applied to sin f") {
    CHECK(operator_identity_error(solved(0.5, 0.5, 4096)) <= 5e-3);
}

TEST_CASE("linearized operator with zero correction") {
    const double r = 1.0, beta = 0.2;
    auto g = make_grid(beta, 2048, r);
    LinearizedOperator op(g, [](double) { return 0.0; }, beta, r);
    for (std::size_t i = 0; i < g->size(); ++i) {
        double rho = g->node(i);
        CHECK(0.5 * op.xi_bar[i] * op.xi_bar[i] == doctest::Approx(8 * r * r / (rho * rho + 4 * r * r)).epsilon(1e-14));
    }
    CHECK(op.smallest_ritz() >= beta * beta * (1 - 1e-6));
    CHECK(op.splitting_defect() <= 1e-10);
    CHECK(splitting_potential(0.0, r) == doctest::Approx(-2.0 / (r * r)));
    auto u = op.solve(std::vector<double>(g->size(), 0.0));
    for (double x : u)
        CHECK(x == 0.0);
}

TEST_CASE("linearized operator rejects a large correction") {
    auto g = make_grid(0.2, 1024, 1.0);
    CHECK_THROWS_AS(LinearizedOperator(g, [](double x) { return 2.0 * std::exp(-x); }, 0.2, 1.0), ValidationError);
}

TEST_CASE("resolvent probe validates its beta list") {
    auto zero = [](double) { return 0.0; };
    std::vector<RadialFunction> src{[](double x) { return std::exp(-x * x); }};
    std::vector<double> up{0.1, 0.2}, big{0.8, 0.1}, neg{0.2, -0.1};
    CHECK_THROWS_AS(resolvent_probe(1.0, zero, up, 0.0, src, 512), ValidationError);
    CHECK_THROWS_AS(resolvent_probe(1.0, zero, big, 0.0, src, 512), ValidationError);
    CHECK_THROWS_AS(resolvent_probe(1.0, zero, neg, 0.0, src, 512), ValidationError);
    std::vector<double> ok{0.3, 0.1, 0.03};
    auto res = resolvent_probe(1.0, zero, ok, 1.0, src, 1024);
    CHECK(res.samples.size() == 3);
    CHECK(res.fit.value <= 0.1);
}

}
