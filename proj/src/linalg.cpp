#include "skyrmion/linalg.hpp"

#include "skyrmion/errors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace skyrmion {

std::vector<double> SymTridiag::apply(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i + 1 < n)
            s += off[i] * x[i + 1];
        if (i > 0)
            s += off[i - 1] * x[i - 1];
        y[i] = s;
    }
    return y;
}

double SymTridiag::form(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        s += diag[i] * x[i] * x[i];
        if (i + 1 < size())
            s += 2.0 * off[i] * x[i] * x[i + 1];
    }
    return s;
}

std::size_t count_below(const SymTridiag& m, std::span<const double> mass, double shift) {
    std::size_t neg = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        double a = m.diag[i] - shift * (mass.empty() ? 1.0 : mass[i]);
        d = i ? a - m.off[i - 1] * m.off[i - 1] / d : a;
        if (d == 0.0)
            d = 1e-300;
        if (d < 0.0)
            ++neg;
    }
    return neg;
}

std::vector<double> solve_tridiagonal(const SymTridiag& m, std::span<const double> rhs) {
    const std::size_t n = m.size();
    if (rhs.size() != n)
        throw ValidationError("solve_tridiagonal: size mismatch");
    if (n == 0)
        return {};
    // Row i holds d[i] at column i, du[i] at i+1, du2[i] at i+2 (fill-in from pivoting).
    std::vector<double> dl(m.off), d(m.diag), du(m.off), du2(n, 0.0), b(rhs.begin(), rhs.end());
    dl.resize(n, 0.0);
    du.resize(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0)
                throw NumericalError("tridiagonal solve: singular matrix");
            double l = dl[i] / d[i];
            d[i + 1] -= l * du[i];
            b[i + 1] -= l * b[i];
            dl[i] = 0.0;
        } else {
            // Swap rows i and i+1.
            double l = d[i] / dl[i];
            d[i] = dl[i];
            double t = d[i + 1];
            d[i + 1] = du[i] - l * t;
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -l * du2[i];
            }
            du[i] = t;
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= l * b[i];
        }
    }
    if (d[n - 1] == 0.0)
        throw NumericalError("tridiagonal solve: singular matrix");
    std::vector<double> x(n);
    x[n - 1] = b[n - 1] / d[n - 1];
    if (n > 1)
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    for (std::size_t i = n > 2 ? n - 2 : 0; i-- > 0;)
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    return x;
}

BandMatrix::BandMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), kv_(kl + ku), ld_(2 * kl + ku + 1), ab_(ld_ * n, 0.0), piv_(n, 0) {}

bool BandMatrix::factorize() {
    std::size_t ju = 0;
    for (std::size_t j = 0; j < n_; ++j) {
        std::size_t km = std::min(kl_, n_ - 1 - j);
        std::size_t jp = 0;
        double big = std::abs(at(j, j));
        for (std::size_t i = 1; i <= km; ++i)
            if (std::abs(at(j + i, j)) > big) {
                big = std::abs(at(j + i, j));
                jp = i;
            }
        piv_[j] = j + jp;
        if (big == 0.0)
            return false;
        ju = std::max(ju, std::min(j + ku_ + jp, n_ - 1));
        if (jp)
            for (std::size_t c = j; c <= ju; ++c)
                std::swap(at(j, c), at(j + jp, c));
        double pivot = at(j, j);
        for (std::size_t i = 1; i <= km; ++i)
            at(j + i, j) /= pivot;
        for (std::size_t c = j + 1; c <= ju; ++c) {
            double u = at(j, c);
            if (u != 0.0)
                for (std::size_t i = 1; i <= km; ++i)
                    at(j + i, c) -= at(j + i, j) * u;
        }
    }
    factored_ = true;
    return true;
}

std::vector<double> BandMatrix::solve(std::span<const double> rhs) const {
    if (!factored_)
        throw NumericalError("BandMatrix::solve called before a successful factorize()");
    if (rhs.size() != n_)
        throw ValidationError("BandMatrix::solve: size mismatch");
    std::vector<double> b(rhs.begin(), rhs.end());
    for (std::size_t j = 0; j < n_; ++j) {
        std::swap(b[j], b[piv_[j]]);
        std::size_t km = std::min(kl_, n_ - 1 - j);
        for (std::size_t i = 1; i <= km; ++i)
            b[j + i] -= at(j + i, j) * b[j];
    }
    for (std::size_t j = n_; j-- > 0;) {
        b[j] /= at(j, j);
        std::size_t lo = j > kv_ ? j - kv_ : 0;
        for (std::size_t i = lo; i < j; ++i)
            b[i] -= at(i, j) * b[j];
    }
    return b;
}

} // namespace skyrmion
