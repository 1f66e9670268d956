#include "skyrmion/linalg.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <random>

using namespace skyrmion;

namespace {

SymTridiag random_tridiag(std::size_t n, std::mt19937_64& rng, double shift) {
    std::normal_distribution<double> z;
    SymTridiag m(n);
    for (std::size_t i = 0; i < n; ++i)
        m.diag[i] = z(rng) + shift;
    for (std::size_t i = 0; i + 1 < n; ++i)
        m.off[i] = z(rng);
    return m;
}

Eigen::MatrixXd dense(const SymTridiag& m) {
    std::size_t n = m.size();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        d(i, i) = m.diag[i];
        if (i + 1 < n)
            d(i, i + 1) = d(i + 1, i) = m.off[i];
    }
    return d;
}

} // namespace

TEST_SUITE("linalg") {

TEST_CASE("tridiagonal apply and form agree with a dense product") {
    std::mt19937_64 rng(1);
    auto m = random_tridiag(40, rng, 0.0);
    Eigen::VectorXd x = Eigen::VectorXd::Random(40);
    std::vector<double> xv(x.data(), x.data() + 40);
    auto y = m.apply(xv);
    Eigen::VectorXd yd = dense(m) * x;
    for (int i = 0; i < 40; ++i)
        CHECK(y[i] == doctest::Approx(yd[i]).epsilon(1e-13));
    CHECK(m.form(xv) == doctest::Approx(x.dot(yd)).epsilon(1e-13));
}

TEST_CASE("indefinite tridiagonal solve matches a dense LU") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        auto m = random_tridiag(60, rng, 0.0);
        Eigen::VectorXd b = Eigen::VectorXd::Random(60);
        std::vector<double> bv(b.data(), b.data() + 60);
        auto x = solve_tridiagonal(m, bv);
        Eigen::VectorXd xd = dense(m).partialPivLu().solve(b);
        for (int i = 0; i < 60; ++i)
            CHECK(x[i] == doctest::Approx(xd[i]).epsilon(1e-8));
    }
}

TEST_CASE("inertia count matches dense generalized eigenvalues") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    auto m = random_tridiag(50, rng, 0.0);
    std::vector<double> mass(50);
    for (auto& w : mass)
        w = u(rng);
    Eigen::VectorXd wv = Eigen::Map<Eigen::VectorXd>(mass.data(), 50);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(m), Eigen::MatrixXd(wv.asDiagonal()));
    auto ev = es.eigenvalues();
    for (int k = 0; k < 50; k += 7) {
        CHECK(count_below(m, mass, ev[k] - 1e-9) == std::size_t(k));
        CHECK(count_below(m, mass, ev[k] + 1e-9) == std::size_t(k + 1));
    }
}

TEST_CASE("band LU matches a dense solve, including pivoting") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z;
    const std::size_t n = 80, kl = 2, ku = 2;
    for (double diag : {10.0, 0.0}) { // 0: diagonal entries are tiny, so rows must be swapped
        BandMatrix b(n, kl, ku);
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = (i > kl ? i - kl : 0); j <= std::min(n - 1, i + ku); ++j) {
                double v = z(rng) + (i == j ? diag : 0.0);
                if (i == j && diag == 0.0)
                    v = 1e-3 * z(rng);
                b.at(i, j) = v;
                d(i, j) = v;
            }
        Eigen::VectorXd rhs = Eigen::VectorXd::Random(n);
        REQUIRE(b.factorize());
        auto x = b.solve(std::vector<double>(rhs.data(), rhs.data() + n));
        Eigen::VectorXd xd = d.partialPivLu().solve(rhs);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(x[i] == doctest::Approx(xd[i]).epsilon(1e-8).scale(xd.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("band LU reports a singular matrix") {
    BandMatrix b(4, 1, 1);
    for (std::size_t i = 0; i < 4; ++i)
        b.at(i, i) = i == 2 ? 0.0 : 1.0;
    CHECK_FALSE(b.factorize());
}

}
